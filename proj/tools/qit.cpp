// qit: command-line front end for the flux-qubit transfer simulator.
//
//   qit run      -c config.json [-o outdir] [--trace] [-v]
//   qit sweep    -c config.json [-o outdir] [-j jobs]
//   qit budget   -c config.json [-o outdir]
//   qit validate -c config.json

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fluxqit/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = fluxqit::cli;

  CLI::App app{"Simulate quantum information transfer between two four-level flux qubits via a cavity"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  cli::Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "Output directory");
    sub->add_flag("-v,--verbose", opt.verbosity, "Increase verbosity");
  };

  CLI::App* run = app.add_subcommand("run", "Simulate each configured input state");
  add_common(run);
  run->add_flag("--trace,!--no-trace", opt.trace, "Write per-segment population traces");

  CLI::App* sweep = app.add_subcommand("sweep", "Evaluate the configured parameter grid");
  add_common(sweep);
  sweep->add_option("-j,--jobs", opt.jobs, "Parallel workers (default: hardware threads)")
      ->check(CLI::PositiveNumber);

  CLI::App* budget = app.add_subcommand("budget", "Compare protocol time with cavity and qubit lifetimes");
  add_common(budget);

  CLI::App* validate = app.add_subcommand("validate", "Parse and check a configuration only");
  add_common(validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitConfigError;
  }

  opt.out_dir = out_dir;
  const std::string command = app.get_subcommands().front()->get_name();
  return cli::dispatch(command, config_path, opt, std::cout, std::cerr);
}

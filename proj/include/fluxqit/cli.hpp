#pragma once

// Subcommand implementations behind tools/qit. Each command takes a parsed
// configuration, writes its artifacts to an output directory and returns a
// process exit code.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "fluxqit/analysis.hpp"
#include "fluxqit/config.hpp"
#include "fluxqit/errors.hpp"
#include "fluxqit/protocol.hpp"

namespace fluxqit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSimulationError = 3;

struct Options {
  std::filesystem::path out_dir = ".";
  bool trace = false;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  int verbosity = 0;
};

/// Fixed-width scientific notation; output files must be byte-stable.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

inline std::string provenance_line(const char* kind, const RunConfig& cfg) {
  return std::string("# fluxqit ") + kind + " schema=" + std::to_string(kConfigSchema) + " config=" +
         to_json(cfg).dump();
}

inline Json schedule_to_json(const Schedule& s) {
  Json segments = Json::array();
  for (const auto& seg : s.segments) {
    if (const auto* d = std::get_if<DriveSegment>(&seg)) {
      Json drives = Json::array();
      for (const auto& spec : d->drives) {
        drives.push_back({{"qubit", qubit_number(spec.qubit)},
                          {"transition", {spec.transition.lower, spec.transition.upper}},
                          {"rabi", spec.rabi},
                          {"phase", spec.phase}});
      }
      segments.push_back({{"kind", "drive"}, {"duration", d->duration}, {"drives", drives}});
    } else {
      const auto& w = std::get<CavityWait>(seg);
      segments.push_back({{"kind", "cavity_wait"}, {"duration", w.duration}, {"qubit", qubit_number(w.qubit)}});
    }
  }
  return {{"schema", kConfigSchema},
          {"g1", s.g1},
          {"g2", s.g2},
          {"omega", s.omega},
          {"total_duration", s.total_duration()},
          {"segments", segments}};
}

inline Schedule schedule_from_json(const Json& doc) {
  try {
    Schedule s;
    s.g1 = doc.at("g1").get<double>();
    s.g2 = doc.at("g2").get<double>();
    s.omega = doc.at("omega").get<double>();
    for (const Json& seg : doc.at("segments")) {
      const std::string kind = seg.at("kind").get<std::string>();
      const double duration = seg.at("duration").get<double>();
      if (kind == "cavity_wait") {
        s.segments.emplace_back(
            CavityWait{seg.at("qubit").get<int>() == 1 ? Qubit::first : Qubit::second, duration});
      } else if (kind == "drive") {
        DriveSegment d{{}, duration};
        for (const Json& spec : seg.at("drives")) {
          d.drives.push_back({spec.at("qubit").get<int>() == 1 ? Qubit::first : Qubit::second,
                              {spec.at("transition")[0].get<int>(), spec.at("transition")[1].get<int>()},
                              spec.at("rabi").get<double>(),
                              spec.at("phase").get<double>()});
        }
        s.segments.emplace_back(std::move(d));
      } else {
        throw ConfigError("schedule: unknown segment kind '" + kind + "'");
      }
    }
    for (const auto& seg : s.segments) validate_segment(seg);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& dir, const char* name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

inline void write_trace(std::ostream& out, const std::string& label, const std::vector<TraceSample>& trace) {
  for (const auto& s : trace) {
    out << label << ',' << num(s.time) << ',' << s.segment;
    for (double p : s.qubit1) out << ',' << num(p);
    for (double p : s.qubit2) out << ',' << num(p);
    out << ',' << num(s.photons) << '\n';
  }
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "simulation error: " << e.what() << '\n';
    return kExitSimulationError;
  }
}

}  // namespace detail

/// Simulates every configured input. Writes results.csv, schedule.json and
/// summary.json (plus trace.csv when tracing) and prints a one-line summary.
inline int cmd_run(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const TransferParams params = cfg.transfer_params();
    const Schedule schedule = build_qit_schedule(params.g1, params.g2, params.omega);
    const SpaceLayout layout = SpaceLayout::qubits_and_cavity(params.n_max);

    auto results = detail::open_output(opt.out_dir, "results.csv");
    results << provenance_line("results", cfg) << '\n'
            << "input,alpha_re,alpha_im,beta_re,beta_im,fidelity,leakage,cavity_residual,total_time\n";
    std::ofstream trace;
    if (opt.trace) {
      trace = detail::open_output(opt.out_dir, "trace.csv");
      trace << provenance_line("trace", cfg) << '\n'
            << "input,time,segment,q1_p0,q1_p1,q1_p2,q1_p3,q2_p0,q2_p1,q2_p2,q2_p3,photons\n";
    }

    Json rows = Json::array();
    double worst = 1.0;
    for (const auto& in : cfg.inputs) {
      ExecutionOptions exec = params.execution;
      exec.trace = opt.trace ? Trace::populations : Trace::none;
      const ExecutionResult run = execute(schedule, qit_initial_state(layout, in).normalized(), exec);
      const TransferReport r = report_from(run, in, schedule);
      worst = std::min(worst, r.fidelity);
      results << r.input << ',' << num(in.alpha.real()) << ',' << num(in.alpha.imag()) << ','
              << num(in.beta.real()) << ',' << num(in.beta.imag()) << ',' << num(r.fidelity) << ','
              << num(r.leakage) << ',' << num(r.cavity_residual) << ',' << num(r.total_time) << '\n';
      rows.push_back({{"input", r.input},
                      {"fidelity", r.fidelity},
                      {"leakage", r.leakage},
                      {"cavity_residual", r.cavity_residual}});
      if (opt.trace) detail::write_trace(trace, in.label, run.trace);
      if (opt.verbosity > 0) err << "input " << r.input << ": fidelity " << num(r.fidelity) << '\n';
    }

    const double tau = total_time(params.g1, params.g2, params.omega);
    detail::open_output(opt.out_dir, "schedule.json") << schedule_to_json(schedule).dump(2) << '\n';
    Json summary = {{"schema", kConfigSchema},
                    {"mode", mode_name(cfg.mode)},
                    {"tau", tau},
                    {"min_fidelity", worst},
                    {"results", rows},
                    {"config", to_json(cfg)}};
    detail::open_output(opt.out_dir, "summary.json") << summary.dump(2) << '\n';

    out << "mode=" << mode_name(cfg.mode) << " tau=" << num(tau) << " s inputs=" << cfg.inputs.size()
        << " min_fidelity=" << num(worst) << '\n';
    return kExitOk;
  });
}

/// Cartesian sweep over the config's grid; writes sweep.csv.
inline int cmd_sweep(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (cfg.grid.empty()) throw ConfigError("sweep needs a non-empty 'grid' section");
    const auto rows = sweep(cfg.grid, cfg.transfer_params(), cfg.inputs, opt.jobs);

    auto table = detail::open_output(opt.out_dir, "sweep.csv");
    table << provenance_line("sweep", cfg) << '\n';
    for (const auto& axis : cfg.grid) table << axis_name(axis.axis) << ',';
    table << "input,fidelity,leakage,cavity_residual,total_time\n";
    double worst = 1.0;
    for (const auto& row : rows) {
      for (double v : row.point) table << num(v) << ',';
      table << row.report.input << ',' << num(row.report.fidelity) << ',' << num(row.report.leakage) << ','
            << num(row.report.cavity_residual) << ',' << num(row.report.total_time) << '\n';
      worst = std::min(worst, row.report.fidelity);
    }
    out << "sweep rows=" << rows.size() << " min_fidelity=" << num(worst) << '\n';
    return kExitOk;
  });
}

/// Timing budget against cavity and level-|3⟩ lifetimes; writes budget.json.
inline int cmd_budget(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (!cfg.q_factor || !cfg.nu_c) throw ConfigError("budget needs 'budget.q_factor' and 'budget.nu_c'");
    const BudgetReport b = budget(cfg.g1, cfg.g2, cfg.omega, *cfg.q_factor, *cfg.nu_c, cfg.noise);

    out << "tau=" << num(b.tau) << " s\n";
    out << "kappa_inv=" << num(b.kappa_inv) << " s\n";
    out << "tau/kappa_inv=" << num(b.tau_over_kappa_inv) << '\n';
    if (b.min_decoherence_time) {
      out << "min_decoherence_time=" << num(*b.min_decoherence_time) << " s\n";
      out << "tau/min_decoherence_time=" << num(*b.tau_over_decoherence) << '\n';
    }
    if (b.cavity_warning()) out << "WARN: tau exceeds 1% of the cavity photon lifetime\n";
    if (b.decoherence_warning()) out << "WARN: tau exceeds 1% of the shortest level-3 decoherence time\n";

    Json doc = {{"schema", kConfigSchema},
                {"tau", b.tau},
                {"kappa_inv", b.kappa_inv},
                {"tau_over_kappa_inv", b.tau_over_kappa_inv},
                {"cavity_warning", b.cavity_warning()},
                {"decoherence_warning", b.decoherence_warning()}};
    if (b.min_decoherence_time) {
      doc["min_decoherence_time"] = *b.min_decoherence_time;
      doc["tau_over_min_decoherence_time"] = *b.tau_over_decoherence;
    }
    detail::open_output(opt.out_dir, "budget.json") << doc.dump(2) << '\n';
    return kExitOk;
  });
}

/// Loads `path` and dispatches `command` (run, sweep, budget, validate).
inline int dispatch(const std::string& command, const std::string& path, const Options& opt, std::ostream& out,
                    std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
  if (command == "validate") {
    out << "config ok: mode=" << mode_name(cfg.mode) << " inputs=" << cfg.inputs.size() << '\n';
    return kExitOk;
  }
  if (command == "run") return cmd_run(cfg, opt, out, err);
  if (command == "sweep") return cmd_sweep(cfg, opt, out, err);
  if (command == "budget") return cmd_budget(cfg, opt, out, err);
  err << "unknown command '" << command << "'\n";
  return kExitConfigError;
}

}  // namespace fluxqit::cli

// Brute-force regression values for the numerically derived quantities.
// Run once and check the output in as tests/data/expectations.json:
//
//   ./build/tests/freeze_expectations > tests/data/expectations.json

#include <iostream>
#include <string>

#include "fluxqit/analysis.hpp"
#include "fluxqit/config.hpp"

using namespace fluxqit;

namespace {

std::string key(double v) {
  std::string s = std::to_string(static_cast<int>(v));
  return s;
}

}  // namespace

int main() {
  Json doc;
  doc["description"] =
      "Frozen numerical results, g1 = g2 = 3e9 rad/s, n_max = 2, six cardinal inputs. Regenerate with "
      "freeze_expectations.";

  TransferParams base;
  base.execution.mode = Mode::full_coupling;
  Json full_mean = Json::object();
  Json full_by_input = Json::object();
  for (double ratio : {5.0, 10.0, 20.0, 40.0}) {
    TransferParams p = base;
    p.omega = ratio * p.g1;
    const auto reports = cardinal_reports(p);
    full_mean[key(ratio)] = 1.0 - mean_fidelity(reports);
    Json per = Json::object();
    for (const auto& r : reports) per[r.input] = 1.0 - r.fidelity;
    full_by_input[key(ratio)] = per;
  }
  doc["full_coupling_mean_infidelity"] = full_mean;
  doc["full_coupling_infidelity_by_input"] = full_by_input;

  TransferParams open = base;
  open.omega = 10.0 * open.g1;
  open.execution.mode = Mode::open_system;
  open.execution.noise.gamma_3r = 1.0e6;
  open.execution.noise.gamma_3p = 1.0e6;
  open.execution.noise.kappa = 1.0 / 1.06e-6;
  doc["open_system_mean_fidelity"] = mean_fidelity(cardinal_reports(open));

  TransferParams ideal;
  ideal.omega = 10.0 * ideal.g1;
  const double reference = mean_fidelity(cardinal_reports(ideal));
  Json loss = Json::object();
  for (double ratio : {50.0, 100.0}) {
    TransferParams p = ideal;
    p.execution.spectators = {SpectatorCoupling{Qubit::first, {1, 3}, p.g1, ratio * p.g1}};
    loss[key(ratio)] = reference - mean_fidelity(cardinal_reports(p));
  }
  doc["spectator_mean_fidelity_loss"] = loss;

  std::cout << doc.dump(2) << '\n';
  return 0;
}

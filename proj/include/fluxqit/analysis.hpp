#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "fluxqit/dynamics.hpp"
#include "fluxqit/errors.hpp"
#include "fluxqit/protocol.hpp"
#include "fluxqit/state_space.hpp"

namespace fluxqit {

// ---------------------------------------------------------------------------
// Metrics

inline double fidelity(const StateVector& psi, const StateVector& target) {
  return std::norm(inner_product(target, psi));
}

inline double fidelity(const DensityMatrix& rho, const StateVector& target) {
  require_same_layout(rho.layout(), target.layout(), "fidelity");
  const CVector& t = target.amplitudes();
  return t.dot(rho.matrix() * t).real();
}

namespace detail {

inline double computational_population(const Eigen::VectorXd& pops, const SpaceLayout& layout) {
  double inside = 0.0;
  for (int q1 = 0; q1 < 2; ++q1) {
    for (int q2 = 0; q2 < 2; ++q2) inside += pops(layout.index_of({q1, q2, 0}));
  }
  return inside;
}

inline double mean_photons(const Eigen::VectorXd& pops, const SpaceLayout& layout) {
  const auto cav = level_populations(pops, layout, layout.cavity_subsystem());
  double n = 0.0;
  for (std::size_t k = 0; k < cav.size(); ++k) n += static_cast<double>(k) * cav[k];
  return n;
}

}  // namespace detail

/// Population outside span{|0⟩,|1⟩}₁ ⊗ span{|0⟩,|1⟩}₂ ⊗ |0⟩_c.
template <class State>
double leakage(const State& state) {
  detail::require_protocol_layout(state.layout(), "leakage");
  const Eigen::VectorXd pops = basis_populations(state);
  return std::max(0.0, 1.0 - detail::computational_population(pops, state.layout()));
}

/// Mean photon number ⟨a⁺a⟩.
template <class State>
double cavity_residual(const State& state) {
  detail::require_protocol_layout(state.layout(), "cavity_residual");
  return detail::mean_photons(basis_populations(state), state.layout());
}

/// Protocol duration π/(2g₁) + π/(2g₂) + 2π/Ω.
inline double total_time(double g1, double g2, double omega) {
  constexpr double pi = std::numbers::pi;
  return pi / (2.0 * g1) + pi / (2.0 * g2) + 2.0 * pi / omega;
}

/// Photon lifetime κ⁻¹ = Q / (2π ν_c).
inline double cavity_lifetime(double q_factor, double nu_c) {
  return q_factor / (2.0 * std::numbers::pi * nu_c);
}

// ---------------------------------------------------------------------------
// Reports

struct TransferReport {
  std::string input;
  double fidelity = 0.0;
  double leakage = 0.0;
  double cavity_residual = 0.0;
  double total_time = 0.0;
};

/// Everything a single transfer simulation needs besides the input state.
struct TransferParams {
  double g1 = 3.0e9;
  double g2 = 3.0e9;
  double omega = 3.0e10;
  int n_max = 2;
  ExecutionOptions execution;
};

inline TransferReport report_from(const ExecutionResult& run, const InputState& input, const Schedule& schedule) {
  const SpaceLayout& layout = run.is_pure() ? run.state().layout() : run.density().layout();
  const StateVector target = qit_target_state(layout, input);
  TransferReport r;
  r.input = input.label;
  r.total_time = total_time(schedule.g1, schedule.g2, schedule.omega);
  if (run.is_pure()) {
    r.fidelity = fidelity(run.state(), target);
    r.leakage = leakage(run.state());
    r.cavity_residual = cavity_residual(run.state());
  } else {
    r.fidelity = fidelity(run.density(), target);
    r.leakage = leakage(run.density());
    r.cavity_residual = cavity_residual(run.density());
  }
  return r;
}

inline TransferReport transfer_report(const TransferParams& params, const InputState& input) {
  const Schedule schedule = build_qit_schedule(params.g1, params.g2, params.omega);
  const SpaceLayout layout = SpaceLayout::qubits_and_cavity(params.n_max);
  const StateVector initial = qit_initial_state(layout, input).normalized();
  ExecutionOptions opts = params.execution;
  opts.trace = Trace::none;
  return report_from(execute(schedule, initial, opts), input, schedule);
}

inline double mean_fidelity(const std::vector<TransferReport>& reports) {
  if (reports.empty()) throw DomainError("mean_fidelity: no reports");
  double sum = 0.0;
  for (const auto& r : reports) sum += r.fidelity;
  return sum / static_cast<double>(reports.size());
}

inline std::vector<TransferReport> cardinal_reports(const TransferParams& params) {
  std::vector<TransferReport> out;
  for (const auto& in : cardinal_inputs()) out.push_back(transfer_report(params, in));
  return out;
}

/// Timing against the photon and level-|3⟩ lifetimes. A ratio above 1%
/// counts as "not much shorter" and sets the corresponding warning.
struct BudgetReport {
  static constexpr double kWarnRatio = 0.01;

  double tau = 0.0;
  double kappa_inv = 0.0;
  std::optional<double> min_decoherence_time;
  double tau_over_kappa_inv = 0.0;
  std::optional<double> tau_over_decoherence;

  bool cavity_warning() const { return tau_over_kappa_inv > kWarnRatio; }
  bool decoherence_warning() const { return tau_over_decoherence && *tau_over_decoherence > kWarnRatio; }
};

/// `noise` supplies γ₃r and γ₃p; zero rates are ignored when forming the
/// shortest decoherence time.
inline BudgetReport budget(double g1, double g2, double omega, double q_factor, double nu_c,
                           const std::optional<NoiseModel>& noise = std::nullopt) {
  if (!(q_factor > 0.0) || !(nu_c > 0.0)) throw DomainError("budget: q_factor and nu_c must be > 0");
  BudgetReport b;
  b.tau = total_time(g1, g2, omega);
  b.kappa_inv = cavity_lifetime(q_factor, nu_c);
  b.tau_over_kappa_inv = b.tau / b.kappa_inv;
  if (noise) {
    const double fastest = std::max(noise->gamma_3r, noise->gamma_3p);
    if (fastest > 0.0) {
      b.min_decoherence_time = 1.0 / fastest;
      b.tau_over_decoherence = b.tau / *b.min_decoherence_time;
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class Axis { omega_over_g, g2_over_g1, gamma_3r, gamma_3p, kappa };

inline std::string_view axis_name(Axis a) {
  switch (a) {
    case Axis::omega_over_g: return "omega_over_g";
    case Axis::g2_over_g1: return "g2_over_g1";
    case Axis::gamma_3r: return "gamma_3r";
    case Axis::gamma_3p: return "gamma_3p";
    case Axis::kappa: return "kappa";
  }
  return "";
}

inline Axis parse_axis(std::string_view name) {
  for (Axis a : {Axis::omega_over_g, Axis::g2_over_g1, Axis::gamma_3r, Axis::gamma_3p, Axis::kappa}) {
    if (axis_name(a) == name) return a;
  }
  throw ConfigError("unknown sweep axis '" + std::string(name) + "'");
}

struct SweepAxis {
  Axis axis;
  std::vector<double> values;
};

struct SweepRow {
  std::vector<double> point;  // one value per axis, in grid order
  TransferReport report;
};

/// Parameters at one grid point. Ratio axes are relative to g₁; g₂ is set
/// before Ω so the two ratio axes compose independently.
inline TransferParams apply_point(TransferParams p, const std::vector<SweepAxis>& grid,
                                  const std::vector<double>& point) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = point[k];
    switch (grid[k].axis) {
      case Axis::g2_over_g1: p.g2 = v * p.g1; break;
      case Axis::gamma_3r: p.execution.noise.gamma_3r = v; break;
      case Axis::gamma_3p: p.execution.noise.gamma_3p = v; break;
      case Axis::kappa: p.execution.noise.kappa = v; break;
      case Axis::omega_over_g: break;
    }
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k].axis == Axis::omega_over_g) p.omega = point[k] * p.g1;
  }
  return p;
}

/// Cartesian product of the grid, first axis slowest, inputs innermost.
/// Points are evaluated on up to `workers` threads; row order does not
/// depend on the worker count.
inline std::vector<SweepRow> sweep(const std::vector<SweepAxis>& grid, const TransferParams& fixed,
                                   const std::vector<InputState>& inputs, unsigned workers = 1) {
  if (grid.empty()) throw ConfigError("sweep: grid has no axes");
  if (inputs.empty()) throw ConfigError("sweep: no input states");
  std::size_t points = 1;
  for (const auto& axis : grid) {
    if (axis.values.empty()) throw ConfigError("sweep: axis '" + std::string(axis_name(axis.axis)) + "' is empty");
    points *= axis.values.size();
  }

  std::vector<std::vector<double>> coords(points);
  for (std::size_t p = 0; p < points; ++p) {
    std::size_t rem = p;
    std::vector<double> c(grid.size());
    for (std::size_t k = grid.size(); k-- > 0;) {
      c[k] = grid[k].values[rem % grid[k].values.size()];
      rem /= grid[k].values.size();
    }
    coords[p] = std::move(c);
  }

  const std::size_t jobs = points * inputs.size();
  std::vector<SweepRow> rows(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  auto run_job = [&](std::size_t j) {
    try {
      const auto& point = coords[j / inputs.size()];
      const TransferParams params = apply_point(fixed, grid, point);
      rows[j] = {point, transfer_report(params, inputs[j % inputs.size()])};
    } catch (...) {
      errors[j] = std::current_exception();
    }
  };

  const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs)));
  if (n_threads == 1) {
    for (std::size_t j = 0; j < jobs; ++j) run_job(j);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t j = t; j < jobs; j += n_threads) run_job(j);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

}  // namespace fluxqit

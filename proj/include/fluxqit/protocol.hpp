#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "fluxqit/dynamics.hpp"
#include "fluxqit/errors.hpp"
#include "fluxqit/state_space.hpp"

namespace fluxqit {

/// Simultaneous rectangular pulses on disjoint level pairs.
struct DriveSegment {
  std::vector<DriveSpec> drives;
  double duration = 0.0;
  friend bool operator==(const DriveSegment&, const DriveSegment&) = default;
};

/// Free evolution under the qubit–cavity coupling; `qubit` is the one whose
/// |2⟩↔|3⟩ exchange the window is timed for.
struct CavityWait {
  Qubit qubit = Qubit::first;
  double duration = 0.0;
  friend bool operator==(const CavityWait&, const CavityWait&) = default;
};

using PulseSegment = std::variant<DriveSegment, CavityWait>;

inline double duration_of(const PulseSegment& segment) {
  return std::visit([](const auto& s) { return s.duration; }, segment);
}

inline void validate_segment(const PulseSegment& segment) {
  if (!(duration_of(segment) > 0.0)) throw DomainError("PulseSegment: duration must be > 0");
  const auto* drive = std::get_if<DriveSegment>(&segment);
  if (drive == nullptr) return;
  if (drive->drives.empty()) throw DomainError("PulseSegment: drive segment has no drives");
  for (std::size_t a = 0; a < drive->drives.size(); ++a) {
    drive->drives[a].validate();
    for (std::size_t b = a + 1; b < drive->drives.size(); ++b) {
      const auto& x = drive->drives[a];
      const auto& y = drive->drives[b];
      if (x.qubit == y.qubit && x.transition.shares_level_with(y.transition)) {
        throw DomainError("PulseSegment: simultaneous drives on qubit " + std::to_string(qubit_number(x.qubit)) +
                          " address overlapping levels");
      }
    }
  }
}

struct Schedule {
  std::vector<PulseSegment> segments;
  double g1 = 0.0;
  double g2 = 0.0;
  double omega = 0.0;

  double total_duration() const {
    double total = 0.0;
    for (const auto& s : segments) total += duration_of(s);
    return total;
  }
  double coupling(Qubit q) const { return q == Qubit::first ? g1 : g2; }
};

/// The six sub-steps of the transfer, in schedule order.
enum class Step : int { i_a = 0, i_b, i_c, ii_a, ii_b, ii_c };
inline constexpr std::array<Step, 6> kAllSteps{Step::i_a, Step::i_b, Step::i_c, Step::ii_a, Step::ii_b, Step::ii_c};

inline std::string_view step_name(Step s) {
  static constexpr std::array<std::string_view, 6> names{"i.a", "i.b", "i.c", "ii.a", "ii.b", "ii.c"};
  return names[static_cast<std::size_t>(s)];
}

/// Six-segment transfer schedule moving qubit 1's state to qubit 2 through
/// one cavity photon. Each pulse is a π/2 rotation (duration π/2Ω); the two
/// waits are the half vacuum-Rabi swaps π/2g₁ and π/2g₂.
inline Schedule build_qit_schedule(double g1, double g2, double omega) {
  if (!(g1 > 0.0) || !(g2 > 0.0) || !(omega > 0.0)) {
    throw DomainError("build_qit_schedule: g1, g2 and omega must all be > 0");
  }
  constexpr double pi = std::numbers::pi;
  const double pulse = pi / (2.0 * omega);
  auto drive = [omega](Qubit q, Transition t, double phase) { return DriveSpec{q, t, omega, phase}; };

  Schedule s;
  s.g1 = g1;
  s.g2 = g2;
  s.omega = omega;
  s.segments = {
      DriveSegment{{drive(Qubit::first, {1, 3}, pi), drive(Qubit::first, {0, 2}, -pi / 2)}, pulse},
      CavityWait{Qubit::first, pi / (2.0 * g1)},
      DriveSegment{{drive(Qubit::first, {0, 2}, pi / 2)}, pulse},
      DriveSegment{{drive(Qubit::second, {0, 2}, -pi / 2)}, pulse},
      CavityWait{Qubit::second, pi / (2.0 * g2)},
      DriveSegment{{drive(Qubit::second, {1, 3}, pi), drive(Qubit::second, {0, 2}, pi / 2)}, pulse},
  };
  for (const auto& seg : s.segments) validate_segment(seg);
  return s;
}

// ---------------------------------------------------------------------------
// Input states

/// Single-qubit input α|0⟩ + β|1⟩ with a display label.
struct InputState {
  std::string label;
  complex alpha{1.0, 0.0};
  complex beta{0.0, 0.0};
  friend bool operator==(const InputState&, const InputState&) = default;
};

/// |0⟩, |1⟩, |±⟩, |±i⟩.
inline std::vector<InputState> cardinal_inputs() {
  const double r = 1.0 / std::sqrt(2.0);
  return {{"0", 1.0, 0.0},         {"1", 0.0, 1.0},          {"+", r, r},
          {"-", r, -r},            {"+i", r, complex{0, r}}, {"-i", r, complex{0, -r}}};
}

inline std::optional<InputState> cardinal_input(std::string_view label) {
  for (auto& in : cardinal_inputs()) {
    if (in.label == label) return in;
  }
  return std::nullopt;
}

/// (α|0⟩ + β|1⟩)₁ |0⟩₂ |0⟩_c
inline StateVector qit_initial_state(const SpaceLayout& layout, const InputState& in) {
  detail::require_protocol_layout(layout, "qit_initial_state");
  CVector v = CVector::Zero(layout.total_dim());
  v(layout.index_of({0, 0, 0})) = in.alpha;
  v(layout.index_of({1, 0, 0})) = in.beta;
  return {layout, std::move(v)};
}

/// |0⟩₁ (α|0⟩ + β|1⟩)₂ |0⟩_c
inline StateVector qit_target_state(const SpaceLayout& layout, const InputState& in) {
  detail::require_protocol_layout(layout, "qit_target_state");
  CVector v = CVector::Zero(layout.total_dim());
  v(layout.index_of({0, 0, 0})) = in.alpha;
  v(layout.index_of({0, 1, 0})) = in.beta;
  return {layout, std::move(v)};
}

// ---------------------------------------------------------------------------
// Intermediate-state oracle: closed-form composition of the sub-steps.

namespace detail {

inline void apply_analytic_rabi(CVector& v, const SpaceLayout& layout, Qubit q, Transition t, double phase) {
  const int sub = subsystem_of(q);
  for (int idx = 0; idx < layout.total_dim(); ++idx) {
    auto labels = layout.labels_of(idx);
    if (labels[static_cast<std::size_t>(sub)] != t.lower) continue;
    labels[static_cast<std::size_t>(sub)] = t.upper;
    const int jdx = layout.index_of(labels);
    std::tie(v(idx), v(jdx)) = analytic_rabi_step(1.0, phase, std::numbers::pi / 2, v(idx), v(jdx));
  }
}

/// Half vacuum-Rabi swap of `q`: each |3,n⟩↔|2,n+1⟩ sector rotates at g√(n+1)
/// for the time π/2g.
inline void apply_analytic_swap(CVector& v, const SpaceLayout& layout, Qubit q) {
  const int sub = subsystem_of(q);
  const int cav = layout.cavity_subsystem();
  for (int idx = 0; idx < layout.total_dim(); ++idx) {
    auto labels = layout.labels_of(idx);
    const int n = labels[static_cast<std::size_t>(cav)];
    if (labels[static_cast<std::size_t>(sub)] != 3 || n + 1 > layout.n_max()) continue;
    labels[static_cast<std::size_t>(sub)] = 2;
    labels[static_cast<std::size_t>(cav)] = n + 1;
    const int jdx = layout.index_of(labels);
    std::tie(v(idx), v(jdx)) =
        analytic_jc_step(std::sqrt(n + 1.0), std::numbers::pi / 2, v(idx), v(jdx));
  }
}

}  // namespace detail

/// State after sub-step `step`, composed from the closed-form rotations.
/// Accepts only (α|0⟩ + β|1⟩)₁|0⟩₂|0⟩_c inputs.
inline StateVector intermediate_state_oracle(Step step, const StateVector& initial) {
  const SpaceLayout& layout = initial.layout();
  detail::require_protocol_layout(layout, "intermediate_state_oracle");
  const int i000 = layout.index_of({0, 0, 0});
  const int i100 = layout.index_of({1, 0, 0});
  for (int idx = 0; idx < layout.total_dim(); ++idx) {
    if (idx != i000 && idx != i100 && std::abs(initial[idx]) > 1e-12) {
      throw DomainError("intermediate_state_oracle: initial state must be (a|0>+b|1>)_1 |0>_2 |0>_c");
    }
  }
  constexpr double pi = std::numbers::pi;
  CVector v = initial.amplitudes();
  for (Step s : kAllSteps) {
    switch (s) {
      case Step::i_a:
        detail::apply_analytic_rabi(v, layout, Qubit::first, {1, 3}, pi);
        detail::apply_analytic_rabi(v, layout, Qubit::first, {0, 2}, -pi / 2);
        break;
      case Step::i_b:
        detail::apply_analytic_swap(v, layout, Qubit::first);
        break;
      case Step::i_c:
        detail::apply_analytic_rabi(v, layout, Qubit::first, {0, 2}, pi / 2);
        break;
      case Step::ii_a:
        detail::apply_analytic_rabi(v, layout, Qubit::second, {0, 2}, -pi / 2);
        break;
      case Step::ii_b:
        detail::apply_analytic_swap(v, layout, Qubit::second);
        break;
      case Step::ii_c:
        detail::apply_analytic_rabi(v, layout, Qubit::second, {1, 3}, pi);
        detail::apply_analytic_rabi(v, layout, Qubit::second, {0, 2}, pi / 2);
        break;
    }
    if (s == step) break;
  }
  return {layout, std::move(v)};
}

// ---------------------------------------------------------------------------
// Execution

enum class Mode { idealized, full_coupling, open_system };

/// `amplitudes` records the full state vector and is only meaningful for
/// pure-state modes.
enum class Trace { none, populations, amplitudes };

struct ExecutionOptions {
  Mode mode = Mode::idealized;
  NoiseModel noise;
  std::vector<SpectatorCoupling> spectators;
  /// Integrator step override for the RK4 paths; derived from the
  /// integrator preconditions when absent.
  std::optional<double> dt;
  Trace trace = Trace::none;
  int samples_per_segment = 200;
};

struct TraceSample {
  double time = 0.0;
  int segment = 0;
  std::array<double, 4> qubit1{};
  std::array<double, 4> qubit2{};
  double photons = 0.0;
  CVector amplitudes;  // set only for Trace::amplitudes
};

struct ExecutionResult {
  std::variant<StateVector, DensityMatrix> final_state;
  std::vector<TraceSample> trace;
  /// Largest population of the non-designated qubit in {|2⟩,|3⟩} at the start
  /// of any cavity wait. Its own exchange term acts trivially iff this is 0.
  double idle_qubit_excited_population = 0.0;
  /// Norm drift accumulated by the time-dependent integrator (0 otherwise).
  double norm_drift = 0.0;
  /// Largest |tr ρ − 1| over segment boundaries (open-system mode).
  double max_trace_error = 0.0;

  bool is_pure() const { return std::holds_alternative<StateVector>(final_state); }
  const StateVector& state() const { return std::get<StateVector>(final_state); }
  const DensityMatrix& density() const { return std::get<DensityMatrix>(final_state); }
};

namespace detail {

/// Hamiltonian of one segment. Cavity waits always carry both qubits'
/// exchange terms; drive segments carry them only outside idealized mode.
inline Operator segment_hamiltonian(const PulseSegment& segment, const Schedule& schedule, Mode mode,
                                    const SpaceLayout& layout) {
  const Operator jc = build_jc_hamiltonian({Qubit::first, schedule.g1}, layout) +
                      build_jc_hamiltonian({Qubit::second, schedule.g2}, layout);
  if (std::holds_alternative<CavityWait>(segment)) return jc;

  const auto& drives = std::get<DriveSegment>(segment).drives;
  std::vector<Operator> terms;
  for (const auto& d : drives) terms.push_back(build_drive_hamiltonian(d, layout));
  for (std::size_t a = 0; a < terms.size(); ++a) {
    for (std::size_t b = a + 1; b < terms.size(); ++b) {
      const CMatrix& x = terms[a].matrix();
      const CMatrix& y = terms[b].matrix();
      const double comm = (x * y - y * x).cwiseAbs().maxCoeff();
      if (comm > 1e-12 * x.cwiseAbs().maxCoeff() * y.cwiseAbs().maxCoeff()) {
        throw DomainError("execute: simultaneous drives do not commute");
      }
    }
  }
  Operator h = terms.front();
  for (std::size_t k = 1; k < terms.size(); ++k) h = h + terms[k];
  if (mode != Mode::idealized) h = h + jc;
  return h;
}

inline double idle_excited_population(const Eigen::VectorXd& pops, const SpaceLayout& layout, Qubit idle) {
  const auto levels = level_populations(pops, layout, subsystem_of(idle));
  return levels[2] + levels[3];
}

inline TraceSample make_sample(double time, int segment, const Eigen::VectorXd& pops, const SpaceLayout& layout) {
  TraceSample s;
  s.time = time;
  s.segment = segment;
  const auto q1 = level_populations(pops, layout, 0);
  const auto q2 = level_populations(pops, layout, 1);
  std::copy(q1.begin(), q1.end(), s.qubit1.begin());
  std::copy(q2.begin(), q2.end(), s.qubit2.begin());
  const auto cav = level_populations(pops, layout, layout.cavity_subsystem());
  for (std::size_t n = 0; n < cav.size(); ++n) s.photons += static_cast<double>(n) * cav[n];
  return s;
}

}  // namespace detail

/// Runs `schedule` from `initial`.
///
/// Idealized: drive segments apply only the drive terms; cavity waits apply
/// the exchange terms. FullCoupling: exchange terms are on throughout.
/// OpenSystem: FullCoupling Hamiltonians under the Lindblad equation.
/// Spectator couplings (pure-state modes only) switch segment evolution to
/// the fixed-step time-dependent integrator, with their phase referenced to
/// the start of the schedule.
inline ExecutionResult execute(const Schedule& schedule, const StateVector& initial, const ExecutionOptions& options) {
  const SpaceLayout& layout = initial.layout();
  if (!layout.is_qubits_and_cavity()) {
    throw DomainError("execute: layout must be two four-level qubits and a cavity");
  }
  if (std::abs(initial.norm() - 1.0) > 1e-10) throw DomainError("execute: initial state is not normalized");
  const bool open = options.mode == Mode::open_system;
  if (open && options.trace == Trace::amplitudes) {
    throw DomainError("execute: amplitude tracing requires a pure-state mode");
  }
  if (open && !options.spectators.empty()) {
    throw DomainError("execute: spectator couplings are not supported in open-system mode");
  }
  if (options.samples_per_segment < 1) throw DomainError("execute: samples_per_segment must be >= 1");
  for (const auto& s : options.spectators) s.validate();
  options.noise.validate();

  const bool tracing = options.trace != Trace::none;
  const int samples = tracing ? options.samples_per_segment : 1;

  ExecutionResult result{initial, {}, 0.0, 0.0, 0.0};
  CVector psi = initial.amplitudes();
  CMatrix rho;
  if (open) rho = psi * psi.adjoint();

  auto current_pops = [&]() -> Eigen::VectorXd {
    return open ? Eigen::VectorXd(rho.diagonal().real()) : Eigen::VectorXd(psi.cwiseAbs2());
  };
  auto record = [&](double time, int segment) {
    TraceSample s = detail::make_sample(time, segment, current_pops(), layout);
    if (options.trace == Trace::amplitudes) s.amplitudes = psi;
    result.trace.push_back(std::move(s));
  };

  double time = 0.0;
  if (tracing) record(0.0, 0);
  for (std::size_t k = 0; k < schedule.segments.size(); ++k) {
    const PulseSegment& segment = schedule.segments[k];
    validate_segment(segment);
    const int seg_index = static_cast<int>(k) + 1;
    if (const auto* wait = std::get_if<CavityWait>(&segment)) {
      result.idle_qubit_excited_population =
          std::max(result.idle_qubit_excited_population,
                   detail::idle_excited_population(current_pops(), layout, other(wait->qubit)));
    }
    const Operator h = detail::segment_hamiltonian(segment, schedule, options.mode, layout);
    const double duration = duration_of(segment);
    const double chunk = duration / samples;

    if (open) {
      const LindbladIntegrator integrator(h, options.noise);
      const double dt = options.dt.value_or(integrator.max_dt());
      for (int c = 0; c < samples; ++c) {
        integrator.evolve(rho, chunk, std::min(dt, chunk));
        if (tracing) record(time + (c + 1) * chunk, seg_index);
      }
      result.max_trace_error = std::max(result.max_trace_error, std::abs(rho.trace() - 1.0));
    } else if (!options.spectators.empty()) {
      const double dt = options.dt.value_or(
          std::min(max_spectator_dt(options.spectators), 0.01 / spectral_norm(h.matrix())));
      for (int c = 0; c < samples; ++c) {
        auto step = propagate_time_dependent(h, options.spectators, StateVector(layout, psi), chunk,
                                             std::min(dt, chunk), time + c * chunk);
        psi = step.state.amplitudes();
        result.norm_drift = std::abs(psi.norm() - 1.0);
        if (tracing) record(time + (c + 1) * chunk, seg_index);
      }
    } else {
      const CMatrix u = unitary_propagator(h, chunk);
      for (int c = 0; c < samples; ++c) {
        psi = u * psi;
        if (tracing) record(time + (c + 1) * chunk, seg_index);
      }
    }
    time += duration;
  }

  if (open) {
    result.final_state = DensityMatrix(layout, std::move(rho));
  } else {
    result.final_state = StateVector(layout, std::move(psi));
  }
  return result;
}

inline ExecutionResult execute(const Schedule& schedule, const StateVector& initial, Mode mode = Mode::idealized) {
  ExecutionOptions options;
  options.mode = mode;
  return execute(schedule, initial, options);
}

}  // namespace fluxqit

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fluxqit/errors.hpp"
#include "fluxqit/state_space.hpp"

namespace fluxqit {

// Units: hbar = 1, couplings and rates in rad/s, times in seconds.

/// Ordered level pair (lower, upper) of a four-level qubit.
struct Transition {
  int lower = 0;
  int upper = 1;

  void validate() const {
    if (lower < 0 || upper >= kQubitLevels || lower >= upper) {
      throw DomainError("Transition: need 0 <= lower < upper <= 3, got (" + std::to_string(lower) +
                        "," + std::to_string(upper) + ")");
    }
  }
  bool shares_level_with(const Transition& o) const {
    return lower == o.lower || lower == o.upper || upper == o.lower || upper == o.upper;
  }
  friend bool operator==(const Transition&, const Transition&) = default;
};

inline constexpr Transition kCavityTransition{2, 3};

/// Resonant coupling g of a qubit's |2⟩↔|3⟩ transition to the cavity.
struct JcCoupling {
  Qubit qubit = Qubit::first;
  double g = 0.0;

  void validate() const {
    if (!(g > 0.0)) throw DomainError("JcCoupling: g must be > 0");
  }
};

/// Resonant classical drive Ω(e^{iφ}|i⟩⟨j| + h.c.) on one qubit transition.
struct DriveSpec {
  Qubit qubit = Qubit::first;
  Transition transition;
  double rabi = 0.0;
  double phase = 0.0;

  void validate() const {
    transition.validate();
    if (!(rabi > 0.0)) throw DomainError("DriveSpec: Rabi frequency must be > 0");
  }
  friend bool operator==(const DriveSpec&, const DriveSpec&) = default;
};

/// Off-resonant coupling of a non-(2,3) transition to the cavity, evolved in
/// the rotating frame as g'(a⁺|i⟩⟨j| e^{−iΔ't} + h.c.).
struct SpectatorCoupling {
  Qubit qubit = Qubit::first;
  Transition transition{1, 3};
  double strength = 0.0;
  double detuning = 0.0;

  void validate() const {
    transition.validate();
    if (transition == kCavityTransition) {
      throw DomainError("SpectatorCoupling: the (2,3) transition is the resonant one");
    }
    if (strength < 0.0) throw DomainError("SpectatorCoupling: strength must be >= 0");
    if (detuning == 0.0) throw DomainError("SpectatorCoupling: detuning must be nonzero");
  }
  friend bool operator==(const SpectatorCoupling&, const SpectatorCoupling&) = default;
};

/// Markovian decoherence rates (rad/s), applied identically to both qubits.
///
/// Relaxation of |3⟩ goes to |2⟩ unless branched: a fraction `branch_3_to_1`
/// goes to |1⟩ and `branch_3_to_0` to |0⟩. Optional slow channels relax |2⟩
/// to |1⟩ and |1⟩ to |0⟩. Pure dephasing of |3⟩ uses the collapse operator
/// √(γ₃p/2)(2|3⟩⟨3| − I), which damps ⟨3|ρ|k⟩ (k ≠ 3) at exactly γ₃p.
struct NoiseModel {
  double gamma_3r = 0.0;
  double gamma_3p = 0.0;
  double kappa = 0.0;
  double gamma_2r = 0.0;
  double gamma_1r = 0.0;
  double branch_3_to_1 = 0.0;
  double branch_3_to_0 = 0.0;

  void validate() const {
    for (double r : {gamma_3r, gamma_3p, kappa, gamma_2r, gamma_1r}) {
      if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("NoiseModel: rates must be finite and >= 0");
    }
    if (branch_3_to_0 < 0.0 || branch_3_to_1 < 0.0 || branch_3_to_0 + branch_3_to_1 > 1.0) {
      throw DomainError("NoiseModel: branching fractions must be >= 0 and sum to <= 1");
    }
  }
  double max_rate() const { return std::max({gamma_3r, gamma_3p, kappa, gamma_2r, gamma_1r}); }
  bool is_zero() const { return max_rate() == 0.0; }
  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

namespace detail {

inline void require_protocol_layout(const SpaceLayout& layout, const char* what) {
  if (!layout.is_qubits_and_cavity()) {
    throw DomainError(std::string(what) + ": layout must be (4, 4, n_max+1)");
  }
}

/// a⁺ ⊗ |i⟩⟨j| on `qubit`, as a full-space matrix.
inline CMatrix raise_photon_lower_qubit(const SpaceLayout& layout, Qubit qubit, Transition t) {
  const CMatrix a = annihilation(layout.n_max());
  return embed(sigma(t.lower, t.upper), subsystem_of(qubit), layout).matrix() *
         embed(a.adjoint(), layout.cavity_subsystem(), layout).matrix();
}

}  // namespace detail

/// g(a⁺σ₂₃⁻ + a σ₂₃⁺) for one qubit, σ₂₃⁻ = |2⟩⟨3|.
inline Operator build_jc_hamiltonian(const JcCoupling& coupling, const SpaceLayout& layout) {
  coupling.validate();
  detail::require_protocol_layout(layout, "build_jc_hamiltonian");
  const CMatrix v = coupling.g * detail::raise_photon_lower_qubit(layout, coupling.qubit, kCavityTransition);
  return {layout, v + v.adjoint(), true};
}

inline Operator build_drive_hamiltonian(const DriveSpec& drive, const SpaceLayout& layout) {
  drive.validate();
  detail::require_protocol_layout(layout, "build_drive_hamiltonian");
  const auto [i, j] = std::pair{drive.transition.lower, drive.transition.upper};
  CMatrix local = CMatrix::Zero(kQubitLevels, kQubitLevels);
  local(i, j) = drive.rabi * std::exp(kI * drive.phase);
  local(j, i) = std::conj(local(i, j));
  const Operator h = embed(local, subsystem_of(drive.qubit), layout);
  return {layout, h.matrix(), true};
}

/// The coefficient matrix V of a spectator term V e^{−iΔ't} + V⁺ e^{iΔ't}.
inline CMatrix spectator_operator(const SpectatorCoupling& s, const SpaceLayout& layout) {
  s.validate();
  detail::require_protocol_layout(layout, "spectator_operator");
  return s.strength * detail::raise_photon_lower_qubit(layout, s.qubit, s.transition);
}

/// Closed-form resonant exchange in the {|3⟩|n⟩_c, |2⟩|n+1⟩_c} sector at
/// rate g. Returns the new (amp_3n, amp_2n+1).
inline std::pair<complex, complex> analytic_jc_step(double g, double t, complex amp_30, complex amp_21) {
  const double c = std::cos(g * t);
  const double s = std::sin(g * t);
  return {c * amp_30 - kI * s * amp_21, c * amp_21 - kI * s * amp_30};
}

/// Closed-form resonant Rabi rotation of the (i, j) pair:
///   |i⟩ → cos Ωt |i⟩ − i e^{−iφ} sin Ωt |j⟩,
///   |j⟩ → cos Ωt |j⟩ − i e^{iφ} sin Ωt |i⟩.
inline std::pair<complex, complex> analytic_rabi_step(double omega, double phase, double t, complex amp_i,
                                                      complex amp_j) {
  const double c = std::cos(omega * t);
  const double s = std::sin(omega * t);
  const complex e = std::exp(kI * phase);
  return {c * amp_i - kI * e * s * amp_j, c * amp_j - kI * std::conj(e) * s * amp_i};
}

/// Largest |eigenvalue| of a Hermitian matrix.
inline double spectral_norm(const CMatrix& hermitian) {
  if (hermitian.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

inline void require_hermitian(const Operator& h, const char* what) {
  if (h.hermiticity_error() > Operator::kHermitianTolerance) {
    throw DomainError(std::string(what) + ": Hamiltonian is not Hermitian");
  }
}

/// exp(−iHt) by Hermitian eigendecomposition.
inline CMatrix unitary_propagator(const Operator& h, double t) {
  require_hermitian(h, "unitary_propagator");
  const CMatrix herm = 0.5 * (h.matrix() + h.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm);
  const Eigen::VectorXcd phases =
      (-kI * t * solver.eigenvalues().cast<complex>()).array().exp().matrix();
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

inline StateVector propagate(const Operator& h, const StateVector& psi, double t) {
  require_same_layout(h.layout(), psi.layout(), "propagate");
  if (t == 0.0) {
    require_hermitian(h, "propagate");
    return psi;
  }
  return {psi.layout(), unitary_propagator(h, t) * psi.amplitudes()};
}

struct TimeDependentResult {
  StateVector state;
  /// |‖ψ(t)‖ − 1| accumulated by the integrator; the state is not renormalized.
  double norm_drift = 0.0;
  int steps = 0;
};

/// Largest step accepted by propagate_time_dependent: 1/50 of the shortest
/// spectator oscillation period. Infinite when there are no spectators.
inline double max_spectator_dt(const std::vector<SpectatorCoupling>& spectators) {
  double dt = std::numeric_limits<double>::infinity();
  for (const auto& s : spectators) {
    dt = std::min(dt, (2.0 * std::numbers::pi / std::abs(s.detuning)) / 50.0);
  }
  return dt;
}

namespace detail {

inline int step_count(double t, double dt) {
  if (t <= 0.0) return 0;
  return std::max(1, static_cast<int>(std::ceil(t / dt * (1.0 - 1e-12))));
}

}  // namespace detail

/// Fixed-step RK4 integration of i dψ/dt = H(t)ψ with
/// H(t) = base + Σ (V e^{−iΔ'(t0+s)} + h.c.). `start_time` fixes the phase
/// origin of the spectator terms. The step actually used is t/ceil(t/dt).
inline TimeDependentResult propagate_time_dependent(const Operator& base,
                                                    const std::vector<SpectatorCoupling>& spectators,
                                                    const StateVector& psi, double t, double dt,
                                                    double start_time = 0.0) {
  require_same_layout(base.layout(), psi.layout(), "propagate_time_dependent");
  require_hermitian(base, "propagate_time_dependent");
  if (!(dt > 0.0)) throw PreconditionError("propagate_time_dependent: dt must be > 0");
  if (dt > max_spectator_dt(spectators) * (1.0 + 1e-12)) {
    throw PreconditionError("propagate_time_dependent: dt exceeds 1/50 of the fastest spectator period");
  }
  const SpaceLayout& layout = psi.layout();
  std::vector<CMatrix> v_ops;
  std::vector<double> detunings;
  for (const auto& s : spectators) {
    v_ops.push_back(spectator_operator(s, layout));
    detunings.push_back(s.detuning);
  }
  const CMatrix& h0 = base.matrix();
  auto rhs = [&](double time, const CVector& y) -> CVector {
    CVector out = h0 * y;
    for (std::size_t k = 0; k < v_ops.size(); ++k) {
      const complex e = std::exp(-kI * detunings[k] * time);
      out += e * (v_ops[k] * y) + std::conj(e) * (v_ops[k].adjoint() * y);
    }
    return -kI * out;
  };

  const int n = detail::step_count(t, dt);
  const double h = n > 0 ? t / n : 0.0;
  CVector y = psi.amplitudes();
  for (int step = 0; step < n; ++step) {
    const double s = start_time + step * h;
    const CVector k1 = rhs(s, y);
    const CVector k2 = rhs(s + 0.5 * h, y + 0.5 * h * k1);
    const CVector k3 = rhs(s + 0.5 * h, y + 0.5 * h * k2);
    const CVector k4 = rhs(s + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const double drift = std::abs(y.norm() - psi.norm());
  return {StateVector(layout, std::move(y)), drift, n};
}

/// Collapse operators of `noise` on both qubits and the cavity.
inline std::vector<Operator> collapse_operators(const NoiseModel& noise, const SpaceLayout& layout) {
  noise.validate();
  detail::require_protocol_layout(layout, "collapse_operators");
  std::vector<Operator> ops;
  auto add = [&](double rate, const CMatrix& local, int subsystem) {
    if (rate > 0.0) ops.push_back(embed(std::sqrt(rate) * local, subsystem, layout));
  };
  for (Qubit q : {Qubit::first, Qubit::second}) {
    const int sub = subsystem_of(q);
    const double to_2 = 1.0 - noise.branch_3_to_1 - noise.branch_3_to_0;
    add(noise.gamma_3r * to_2, sigma(2, 3), sub);
    add(noise.gamma_3r * noise.branch_3_to_1, sigma(1, 3), sub);
    add(noise.gamma_3r * noise.branch_3_to_0, sigma(0, 3), sub);
    const CMatrix dephase = 2.0 * sigma(3, 3) - CMatrix::Identity(kQubitLevels, kQubitLevels);
    add(noise.gamma_3p / 2.0, dephase, sub);
    add(noise.gamma_2r, sigma(1, 2), sub);
    add(noise.gamma_1r, sigma(0, 1), sub);
  }
  add(noise.kappa, annihilation(layout.n_max()), layout.cavity_subsystem());
  return ops;
}

/// Largest step accepted by evolve_lindblad: 0.01·min(1/‖H‖, 1/max rate).
inline double max_lindblad_dt(const Operator& h, const NoiseModel& noise) {
  const double norm = spectral_norm(0.5 * (h.matrix() + h.matrix().adjoint()));
  const double fastest = std::max(norm, noise.max_rate());
  if (fastest == 0.0) return std::numeric_limits<double>::infinity();
  return 0.01 / fastest;
}

/// RK4 integrator for dρ/dt = −i[H,ρ] + Σ (CρC⁺ − ½{C⁺C,ρ}).
///
/// Written as dρ/dt = M + M⁺ with M = −i H_eff ρ + ½ Σ C ρ C⁺ and
/// H_eff = H − (i/2) Σ C⁺C, so every stage is exactly Hermitian. All
/// generators are held sparse; the protocol operators have O(dim) nonzeros.
class LindbladIntegrator {
 public:
  using Sparse = Eigen::SparseMatrix<complex>;

  LindbladIntegrator(const Operator& h, const NoiseModel& noise)
      : layout_(h.layout()), max_dt_(max_lindblad_dt(h, noise)) {
    require_hermitian(h, "evolve_lindblad");
    CMatrix h_eff = h.matrix();
    for (const Operator& c : collapse_operators(noise, layout_)) {
      h_eff -= 0.5 * kI * (c.matrix().adjoint() * c.matrix());
      collapse_.push_back(c.matrix().sparseView());
    }
    h_eff_ = h_eff.sparseView();
  }

  double max_dt() const { return max_dt_; }

  CMatrix derivative(const CMatrix& rho) const {
    CMatrix m = -kI * (h_eff_ * rho);
    for (const Sparse& c : collapse_) {
      const CMatrix c_rho = c * rho;
      m += 0.5 * (c * c_rho.adjoint());
    }
    return m + m.adjoint();
  }

  /// Advances `rho` in place over time `t` with steps of at most `dt`.
  int evolve(CMatrix& rho, double t, double dt) const {
    if (!(dt > 0.0)) throw PreconditionError("evolve_lindblad: dt must be > 0");
    if (dt > max_dt_ * (1.0 + 1e-12)) {
      throw PreconditionError("evolve_lindblad: dt exceeds 0.01 min(1/||H||, 1/max rate)");
    }
    const int n = detail::step_count(t, dt);
    const double h = n > 0 ? t / n : 0.0;
    for (int step = 0; step < n; ++step) {
      const CMatrix k1 = derivative(rho);
      const CMatrix k2 = derivative(rho + 0.5 * h * k1);
      const CMatrix k3 = derivative(rho + 0.5 * h * k2);
      const CMatrix k4 = derivative(rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return n;
  }

 private:
  SpaceLayout layout_;
  double max_dt_;
  Sparse h_eff_;
  std::vector<Sparse> collapse_;
};

inline DensityMatrix evolve_lindblad(const Operator& h, const NoiseModel& noise, const DensityMatrix& rho,
                                     double t, double dt) {
  require_same_layout(h.layout(), rho.layout(), "evolve_lindblad");
  const LindbladIntegrator integrator(h, noise);
  CMatrix m = rho.matrix();
  integrator.evolve(m, t, dt);
  return {rho.layout(), std::move(m)};
}

}  // namespace fluxqit

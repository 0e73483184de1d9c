#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fluxqit/errors.hpp"

namespace fluxqit {

using complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr complex kI{0.0, 1.0};
inline constexpr int kQubitLevels = 4;

/// The two flux qubits of the transfer protocol. Subsystem ordering of the
/// composite space is (qubit 1, qubit 2, cavity).
enum class Qubit : int { first = 0, second = 1 };

inline int subsystem_of(Qubit q) { return static_cast<int>(q); }
inline int qubit_number(Qubit q) { return static_cast<int>(q) + 1; }
inline Qubit other(Qubit q) { return q == Qubit::first ? Qubit::second : Qubit::first; }

/// Ordered subsystem dimensions of a composite Hilbert space. Basis indices
/// are row-major over the dimensions (last subsystem varies fastest).
class SpaceLayout {
 public:
  explicit SpaceLayout(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty() || dims_.size() > 3) {
      throw DomainError("SpaceLayout: between one and three subsystems are supported");
    }
    total_ = 1;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      if (dims_[k] < 2) {
        throw DomainError("SpaceLayout: subsystem " + std::to_string(k) +
                          " has dimension " + std::to_string(dims_[k]) + " < 2");
      }
      total_ *= dims_[k];
    }
  }

  /// Two four-level qubits and a cavity truncated at n_max photons.
  static SpaceLayout qubits_and_cavity(int n_max = 2) {
    if (n_max < 1) throw DomainError("SpaceLayout: cavity truncation n_max must be >= 1");
    return SpaceLayout({kQubitLevels, kQubitLevels, n_max + 1});
  }

  int subsystems() const { return static_cast<int>(dims_.size()); }
  int dim(int subsystem) const { return dims_.at(static_cast<std::size_t>(subsystem)); }
  const std::vector<int>& dims() const { return dims_; }
  int total_dim() const { return total_; }

  /// True for the (4, 4, n_max+1) layout the protocol runs on.
  bool is_qubits_and_cavity() const {
    return dims_.size() == 3 && dims_[0] == kQubitLevels && dims_[1] == kQubitLevels;
  }
  int cavity_subsystem() const { return subsystems() - 1; }
  int n_max() const { return dims_.back() - 1; }

  int index_of(std::span<const int> labels) const {
    if (labels.size() != dims_.size()) {
      throw DomainError("SpaceLayout: expected " + std::to_string(dims_.size()) +
                        " labels, got " + std::to_string(labels.size()));
    }
    int index = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      if (labels[k] < 0 || labels[k] >= dims_[k]) {
        throw DomainError("SpaceLayout: label " + std::to_string(labels[k]) +
                          " out of range for " + subsystem_name(static_cast<int>(k)) +
                          " (dimension " + std::to_string(dims_[k]) + ")");
      }
      index = index * dims_[k] + labels[k];
    }
    return index;
  }
  int index_of(std::initializer_list<int> labels) const {
    return index_of(std::span<const int>(labels.begin(), labels.size()));
  }

  std::vector<int> labels_of(int index) const {
    if (index < 0 || index >= total_) {
      throw DomainError("SpaceLayout: basis index " + std::to_string(index) + " out of range");
    }
    std::vector<int> labels(dims_.size());
    for (std::size_t k = dims_.size(); k-- > 0;) {
      labels[k] = index % dims_[k];
      index /= dims_[k];
    }
    return labels;
  }

  std::string subsystem_name(int k) const {
    if (is_qubits_and_cavity()) {
      static const char* names[] = {"qubit 1", "qubit 2", "cavity"};
      return names[k];
    }
    return "subsystem " + std::to_string(k);
  }

  friend bool operator==(const SpaceLayout&, const SpaceLayout&) = default;

 private:
  std::vector<int> dims_;
  int total_ = 1;
};

inline void require_same_layout(const SpaceLayout& a, const SpaceLayout& b, const char* what) {
  if (!(a == b)) throw DomainError(std::string(what) + ": layout mismatch");
}

/// Pure state over a layout.
class StateVector {
 public:
  StateVector(SpaceLayout layout, CVector amplitudes)
      : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != layout_.total_dim()) {
      throw DomainError("StateVector: amplitude count does not match layout");
    }
  }

  const SpaceLayout& layout() const { return layout_; }
  const CVector& amplitudes() const { return amplitudes_; }
  complex operator[](int index) const { return amplitudes_(index); }
  double norm() const { return amplitudes_.norm(); }

  StateVector normalized() const {
    const double n = norm();
    if (n == 0.0) throw DomainError("StateVector: cannot normalize the zero vector");
    return {layout_, amplitudes_ / n};
  }

  /// Population of basis state `index`.
  double population(int index) const { return std::norm(amplitudes_(index)); }

 private:
  SpaceLayout layout_;
  CVector amplitudes_;
};

/// Dense operator on a layout. When constructed with `hermitian = true` the
/// matrix is checked to be Hermitian within 1e-10.
class Operator {
 public:
  static constexpr double kHermitianTolerance = 1e-10;

  Operator(SpaceLayout layout, CMatrix matrix, bool hermitian = false)
      : layout_(std::move(layout)), matrix_(std::move(matrix)), hermitian_(hermitian) {
    const int n = layout_.total_dim();
    if (matrix_.rows() != n || matrix_.cols() != n) {
      throw DomainError("Operator: matrix shape does not match layout");
    }
    if (hermitian_ && hermiticity_error() > kHermitianTolerance) {
      throw DomainError("Operator: matrix flagged Hermitian is not Hermitian");
    }
  }

  const SpaceLayout& layout() const { return layout_; }
  const CMatrix& matrix() const { return matrix_; }
  bool hermitian_flag() const { return hermitian_; }

  double hermiticity_error() const { return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff(); }

  Operator operator+(const Operator& rhs) const {
    require_same_layout(layout_, rhs.layout_, "Operator +");
    return {layout_, matrix_ + rhs.matrix_, hermitian_ && rhs.hermitian_};
  }
  Operator operator*(const Operator& rhs) const {
    require_same_layout(layout_, rhs.layout_, "Operator *");
    return {layout_, matrix_ * rhs.matrix_};
  }
  StateVector apply(const StateVector& psi) const {
    require_same_layout(layout_, psi.layout(), "Operator::apply");
    return {layout_, matrix_ * psi.amplitudes()};
  }

 private:
  SpaceLayout layout_;
  CMatrix matrix_;
  bool hermitian_ = false;
};

/// Mixed state over a layout.
class DensityMatrix {
 public:
  static constexpr double kHermitianTolerance = 1e-10;
  static constexpr double kTraceTolerance = 1e-9;
  static constexpr double kEigenTolerance = 1e-9;

  DensityMatrix(SpaceLayout layout, CMatrix matrix)
      : layout_(std::move(layout)), matrix_(std::move(matrix)) {
    const int n = layout_.total_dim();
    if (matrix_.rows() != n || matrix_.cols() != n) {
      throw DomainError("DensityMatrix: matrix shape does not match layout");
    }
  }

  static DensityMatrix from_pure(const StateVector& psi) {
    const CVector& v = psi.amplitudes();
    return {psi.layout(), v * v.adjoint()};
  }

  const SpaceLayout& layout() const { return layout_; }
  const CMatrix& matrix() const { return matrix_; }

  complex trace() const { return matrix_.trace(); }
  double hermiticity_error() const { return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const {
    const CMatrix herm = 0.5 * (matrix_ + matrix_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  }
  double population(int index) const { return matrix_(index, index).real(); }

  bool is_valid() const {
    return hermiticity_error() <= kHermitianTolerance &&
           std::abs(trace() - 1.0) <= kTraceTolerance && min_eigenvalue() >= -kEigenTolerance;
  }
  void validate() const {
    if (hermiticity_error() > kHermitianTolerance) throw DomainError("DensityMatrix: not Hermitian");
    if (std::abs(trace() - 1.0) > kTraceTolerance) throw DomainError("DensityMatrix: trace != 1");
    if (min_eigenvalue() < -kEigenTolerance) throw DomainError("DensityMatrix: negative eigenvalue");
  }

 private:
  SpaceLayout layout_;
  CMatrix matrix_;
};

inline StateVector basis_state(const SpaceLayout& layout, std::span<const int> labels) {
  CVector amps = CVector::Zero(layout.total_dim());
  amps(layout.index_of(labels)) = 1.0;
  return {layout, std::move(amps)};
}
inline StateVector basis_state(const SpaceLayout& layout, std::initializer_list<int> labels) {
  return basis_state(layout, std::span<const int>(labels.begin(), labels.size()));
}

/// I ⊗ … ⊗ local ⊗ … ⊗ I with `local` acting on `subsystem`.
inline Operator embed(const CMatrix& local, int subsystem, const SpaceLayout& layout) {
  if (subsystem < 0 || subsystem >= layout.subsystems()) {
    throw DomainError("embed: subsystem index " + std::to_string(subsystem) + " out of range");
  }
  const int d = layout.dim(subsystem);
  if (local.rows() != d || local.cols() != d) {
    throw DomainError("embed: local operator is " + std::to_string(local.rows()) + "x" +
                      std::to_string(local.cols()) + " but " + layout.subsystem_name(subsystem) +
                      " has dimension " + std::to_string(d));
  }
  int left = 1;
  for (int k = 0; k < subsystem; ++k) left *= layout.dim(k);
  const int right = layout.total_dim() / (left * d);

  CMatrix full = CMatrix::Zero(layout.total_dim(), layout.total_dim());
  for (int l = 0; l < left; ++l) {
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        const complex v = local(r, c);
        if (v == complex{}) continue;
        for (int k = 0; k < right; ++k) {
          full((l * d + r) * right + k, (l * d + c) * right + k) = v;
        }
      }
    }
  }
  return {layout, std::move(full)};
}

/// Truncated annihilation operator: a|n⟩ = √n |n−1⟩.
inline CMatrix annihilation(int n_max) {
  if (n_max < 1) throw DomainError("annihilation: n_max must be >= 1");
  CMatrix a = CMatrix::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

/// |i⟩⟨j| on a four-level qubit.
inline CMatrix sigma(int i, int j) {
  if (i < 0 || i >= kQubitLevels || j < 0 || j >= kQubitLevels) {
    throw DomainError("sigma: level out of range (levels are 0..3)");
  }
  CMatrix s = CMatrix::Zero(kQubitLevels, kQubitLevels);
  s(i, j) = 1.0;
  return s;
}

/// ⟨a|b⟩, conjugating `a`.
inline complex inner_product(const StateVector& a, const StateVector& b) {
  require_same_layout(a.layout(), b.layout(), "inner_product");
  return a.amplitudes().dot(b.amplitudes());
}

/// Reduced density matrix over the subsystems in `keep` (order of the
/// original layout is retained).
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<int> keep) {
  const SpaceLayout& layout = rho.layout();
  if (keep.empty()) throw DomainError("partial_trace: keep set is empty");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (int k : keep) {
    if (k < 0 || k >= layout.subsystems()) {
      throw DomainError("partial_trace: subsystem " + std::to_string(k) + " out of range");
    }
  }
  std::vector<int> kept_dims;
  for (int k : keep) kept_dims.push_back(layout.dim(k));
  const SpaceLayout reduced_layout(kept_dims);

  std::vector<bool> kept(static_cast<std::size_t>(layout.subsystems()), false);
  for (int k : keep) kept[static_cast<std::size_t>(k)] = true;

  const int n = layout.total_dim();
  std::vector<int> reduced_index(static_cast<std::size_t>(n));
  std::vector<int> traced_index(static_cast<std::size_t>(n));
  for (int idx = 0; idx < n; ++idx) {
    const auto labels = layout.labels_of(idx);
    int r = 0, t = 0;
    for (int k = 0; k < layout.subsystems(); ++k) {
      const auto ku = static_cast<std::size_t>(k);
      if (kept[ku]) {
        r = r * layout.dim(k) + labels[ku];
      } else {
        t = t * layout.dim(k) + labels[ku];
      }
    }
    reduced_index[static_cast<std::size_t>(idx)] = r;
    traced_index[static_cast<std::size_t>(idx)] = t;
  }

  CMatrix out = CMatrix::Zero(reduced_layout.total_dim(), reduced_layout.total_dim());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (traced_index[static_cast<std::size_t>(i)] != traced_index[static_cast<std::size_t>(j)]) continue;
      out(reduced_index[static_cast<std::size_t>(i)], reduced_index[static_cast<std::size_t>(j)]) +=
          rho.matrix()(i, j);
    }
  }
  return {reduced_layout, std::move(out)};
}

/// Probability of each basis state.
inline Eigen::VectorXd basis_populations(const StateVector& psi) { return psi.amplitudes().cwiseAbs2(); }
inline Eigen::VectorXd basis_populations(const DensityMatrix& rho) { return rho.matrix().diagonal().real(); }

/// Marginal populations of each level of one subsystem.
inline std::vector<double> level_populations(const Eigen::VectorXd& basis_pops, const SpaceLayout& layout,
                                             int subsystem) {
  std::vector<double> pops(static_cast<std::size_t>(layout.dim(subsystem)), 0.0);
  for (int idx = 0; idx < layout.total_dim(); ++idx) {
    const int level = layout.labels_of(idx)[static_cast<std::size_t>(subsystem)];
    pops[static_cast<std::size_t>(level)] += basis_pops(idx);
  }
  return pops;
}

}  // namespace fluxqit

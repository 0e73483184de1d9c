#pragma once

// Test-only reference computations, written independently of the library's
// embedding and propagation code paths.

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "fluxqit/state_space.hpp"

namespace fluxqit::testing {

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline CMatrix identity(int d) { return CMatrix::Identity(d, d); }

/// exp(−iHt) by Taylor series with scaling and squaring.
inline CMatrix taylor_expm(const CMatrix& h, double t) {
  const CMatrix a = complex{0.0, -t} * h;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
  const CMatrix scaled = a / std::pow(2.0, squarings);
  CMatrix term = CMatrix::Identity(h.rows(), h.cols());
  CMatrix sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

inline CMatrix random_matrix(int d, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = {n(rng), n(rng)};
  }
  return m;
}

inline CMatrix random_hermitian(int d, std::mt19937& rng) {
  const CMatrix m = random_matrix(d, rng);
  return 0.5 * (m + m.adjoint());
}

inline CVector random_unit_vector(int d, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CVector v(d);
  for (int i = 0; i < d; ++i) v(i) = {n(rng), n(rng)};
  return v / v.norm();
}

}  // namespace fluxqit::testing

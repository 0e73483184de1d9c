#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fluxqit/state_space.hpp"
#include "oracles.hpp"

using namespace fluxqit;
using fluxqit::testing::kron;
using fluxqit::testing::identity;

namespace {

const SpaceLayout kLayout = SpaceLayout::qubits_and_cavity(2);

int nonzero_index(const StateVector& psi) {
  int found = -1;
  for (int i = 0; i < psi.layout().total_dim(); ++i) {
    if (std::abs(psi[i]) > 0.0) {
      EXPECT_EQ(found, -1) << "more than one nonzero amplitude";
      found = i;
    }
  }
  return found;
}

}  // namespace

TEST(SpaceLayout, DimensionsAndTotal) {
  EXPECT_EQ(kLayout.dims(), (std::vector<int>{4, 4, 3}));
  EXPECT_EQ(kLayout.total_dim(), 48);
  EXPECT_TRUE(kLayout.is_qubits_and_cavity());
  EXPECT_EQ(SpaceLayout::qubits_and_cavity(5).total_dim(), 96);
  EXPECT_THROW(SpaceLayout({4, 1, 3}), DomainError);
  EXPECT_THROW(SpaceLayout::qubits_and_cavity(0), DomainError);
  EXPECT_THROW(SpaceLayout({}), DomainError);
}

TEST(SpaceLayout, IndexLabelRoundTrip) {
  for (int n_max : {1, 2, 4}) {
    const auto layout = SpaceLayout::qubits_and_cavity(n_max);
    for (int k = 0; k < layout.total_dim(); ++k) {
      const auto labels = layout.labels_of(k);
      EXPECT_EQ(layout.index_of(labels), k);
    }
  }
}

TEST(BasisState, RowMajorIndex) {
  EXPECT_EQ(nonzero_index(basis_state(kLayout, {0, 0, 0})), 0);
  EXPECT_EQ(nonzero_index(basis_state(kLayout, {1, 0, 0})), 12);
  EXPECT_EQ(nonzero_index(basis_state(kLayout, {3, 2, 2})), 3 * 12 + 2 * 3 + 2);
  EXPECT_EQ(basis_state(kLayout, {3, 2, 2})[44], complex(1.0, 0.0));
}

TEST(BasisState, LabelOutOfRangeNamesSubsystem) {
  try {
    basis_state(kLayout, {0, 0, 3});
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("cavity"), std::string::npos);
  }
  try {
    basis_state(kLayout, {0, 4, 0});
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("qubit 2"), std::string::npos);
  }
}

TEST(Embed, IdentityEmbedsToIdentity) {
  for (int sub = 0; sub < 2; ++sub) {
    EXPECT_TRUE(embed(identity(4), sub, kLayout).matrix().isApprox(identity(48)));
  }
  EXPECT_TRUE(embed(identity(3), 2, kLayout).matrix().isApprox(identity(48)));
}

TEST(Embed, LoweringOperatorOnQubitOne) {
  const Operator s = embed(sigma(2, 3), 0, kLayout);
  const StateVector out = s.apply(basis_state(kLayout, {3, 0, 0}));
  EXPECT_LT((out.amplitudes() - basis_state(kLayout, {2, 0, 0}).amplitudes()).norm(), 1e-15);
}

TEST(Embed, MatchesKroneckerProduct) {
  std::mt19937 rng(7);
  const CMatrix a = fluxqit::testing::random_matrix(4, rng);
  const CMatrix c = fluxqit::testing::random_matrix(3, rng);
  EXPECT_LT((embed(a, 0, kLayout).matrix() - kron(kron(a, identity(4)), identity(3))).norm(), 1e-12);
  EXPECT_LT((embed(a, 1, kLayout).matrix() - kron(kron(identity(4), a), identity(3))).norm(), 1e-12);
  EXPECT_LT((embed(c, 2, kLayout).matrix() - kron(kron(identity(4), identity(4)), c)).norm(), 1e-12);
}

TEST(Embed, DisjointSubsystemsCommute) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix a = embed(fluxqit::testing::random_matrix(4, rng), 0, kLayout).matrix();
    const CMatrix b = embed(fluxqit::testing::random_matrix(4, rng), 1, kLayout).matrix();
    const CMatrix c = embed(fluxqit::testing::random_matrix(3, rng), 2, kLayout).matrix();
    EXPECT_LT((a * b - b * a).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((a * c - c * a).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Embed, FrobeniusScaling) {
  std::mt19937 rng(3);
  for (int sub = 0; sub < 3; ++sub) {
    const int d = kLayout.dim(sub);
    const CMatrix a = fluxqit::testing::random_matrix(d, rng);
    const double expected = std::sqrt(static_cast<double>(kLayout.total_dim()) / d) * a.norm();
    EXPECT_NEAR(embed(a, sub, kLayout).matrix().norm(), expected, 1e-10 * expected);
  }
}

TEST(Embed, DimensionMismatch) {
  EXPECT_THROW(embed(identity(3), 0, kLayout), DomainError);
  EXPECT_THROW(embed(identity(4), 2, kLayout), DomainError);
  EXPECT_THROW(embed(identity(4), 3, kLayout), DomainError);
}

TEST(Annihilation, LadderElements) {
  const CMatrix a = annihilation(3);
  ASSERT_EQ(a.rows(), 4);
  EXPECT_EQ(a(0, 1), complex(1.0));
  EXPECT_NEAR(a(1, 2).real(), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(a(2, 3).real(), std::sqrt(3.0), 1e-15);
  EXPECT_EQ(a.cwiseAbs().sum(), 1.0 + std::sqrt(2.0) + std::sqrt(3.0));
}

TEST(Annihilation, NumberOperatorSpectrum) {
  for (int n_max : {1, 2, 5}) {
    const CMatrix n = annihilation(n_max).adjoint() * annihilation(n_max);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(n);
    for (int k = 0; k <= n_max; ++k) EXPECT_NEAR(solver.eigenvalues()(k), k, 1e-12);
  }
}

TEST(Annihilation, ZeroTruncationRejected) { EXPECT_THROW(annihilation(0), DomainError); }

TEST(Sigma, OuterProductAlgebra) {
  CVector ket3 = CVector::Zero(4);
  ket3(3) = 1.0;
  const CVector out = sigma(2, 3) * ket3;
  EXPECT_EQ(out(2), complex(1.0));
  EXPECT_EQ(out.cwiseAbs().sum(), 1.0);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) EXPECT_EQ(sigma(i, j).adjoint(), sigma(j, i));
  }
  EXPECT_EQ(sigma(0, 2) * sigma(2, 3), sigma(0, 3));
  EXPECT_THROW(sigma(4, 0), DomainError);
  EXPECT_THROW(sigma(0, -1), DomainError);
}

TEST(InnerProduct, BasicProperties) {
  std::mt19937 rng(5);
  const StateVector a(kLayout, fluxqit::testing::random_unit_vector(48, rng));
  const StateVector b(kLayout, fluxqit::testing::random_unit_vector(48, rng));
  EXPECT_NEAR(std::abs(inner_product(a, a) - 1.0), 0.0, 1e-12);
  EXPECT_EQ(inner_product(basis_state(kLayout, {0, 0, 0}), basis_state(kLayout, {0, 1, 0})), complex{});
  EXPECT_LT(std::abs(inner_product(a, b) - std::conj(inner_product(b, a))), 1e-14);

  complex direct{};
  for (int i = 0; i < 48; ++i) direct += std::conj(a[i]) * b[i];
  EXPECT_LT(std::abs(inner_product(a, b) - direct), 1e-14);

  const StateVector other = basis_state(SpaceLayout::qubits_and_cavity(1), {0, 0, 0});
  EXPECT_THROW(inner_product(a, other), DomainError);
}

TEST(PartialTrace, ProductStateMarginal) {
  std::mt19937 rng(13);
  auto random_rho = [&](int d) {
    const CVector v = fluxqit::testing::random_unit_vector(d, rng);
    const CVector w = fluxqit::testing::random_unit_vector(d, rng);
    return CMatrix(0.3 * v * v.adjoint() + 0.7 * w * w.adjoint());
  };
  const CMatrix r1 = random_rho(4), r2 = random_rho(4), rc = random_rho(3);
  const DensityMatrix rho(kLayout, kron(kron(r1, r2), rc));

  EXPECT_LT((partial_trace(rho, {0}).matrix() - r1).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((partial_trace(rho, {1}).matrix() - r2).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((partial_trace(rho, {2}).matrix() - rc).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((partial_trace(rho, {0, 2}).matrix() - kron(r1, rc)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((partial_trace(rho, {2, 0}).matrix() - kron(r1, rc)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PartialTrace, PreservesTrace) {
  std::mt19937 rng(17);
  const CVector v = fluxqit::testing::random_unit_vector(48, rng);
  const DensityMatrix rho(kLayout, v * v.adjoint());
  for (auto keep : std::vector<std::vector<int>>{{0}, {1}, {2}, {0, 1}, {1, 2}, {0, 1, 2}}) {
    EXPECT_NEAR(std::abs(partial_trace(rho, keep).trace() - rho.trace()), 0.0, 1e-12);
  }
}

TEST(PartialTrace, EntangledQubitCavity) {
  // (|2,0_c⟩ + |3,1_c⟩)/√2 on qubit 1 ⊗ cavity: the qubit marginal is
  // diag(0, 0, ½, ½) with no coherence between |2⟩ and |3⟩.
  CVector v = CVector::Zero(48);
  v(kLayout.index_of({2, 0, 0})) = 1.0 / std::sqrt(2.0);
  v(kLayout.index_of({3, 0, 1})) = 1.0 / std::sqrt(2.0);
  const DensityMatrix rho = DensityMatrix::from_pure(StateVector(kLayout, v));
  CMatrix expected = CMatrix::Zero(4, 4);
  expected(2, 2) = 0.5;
  expected(3, 3) = 0.5;
  EXPECT_LT((partial_trace(rho, {0}).matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PartialTrace, EmptyKeepRejected) {
  const DensityMatrix rho = DensityMatrix::from_pure(basis_state(kLayout, {0, 0, 0}));
  EXPECT_THROW(partial_trace(rho, {}), DomainError);
  EXPECT_THROW(partial_trace(rho, {3}), DomainError);
}

TEST(DensityMatrix, OuterProductOfUnitVectorIsValid) {
  std::mt19937 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector psi(kLayout, fluxqit::testing::random_unit_vector(48, rng));
    const DensityMatrix rho = DensityMatrix::from_pure(psi);
    EXPECT_LE(rho.hermiticity_error(), 1e-10);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-9);
    EXPECT_GE(rho.min_eigenvalue(), -1e-9);
    EXPECT_TRUE(rho.is_valid());
  }
}

TEST(DensityMatrix, ValidateRejectsBadMatrices) {
  CMatrix m = CMatrix::Identity(48, 48);
  EXPECT_THROW(DensityMatrix(kLayout, m).validate(), DomainError);  // trace 48
  m /= 48.0;
  m(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix(kLayout, m).validate(), DomainError);  // not Hermitian
  EXPECT_THROW(DensityMatrix(kLayout, CMatrix::Identity(4, 4)), DomainError);
}

TEST(Operator, HermitianFlagChecked) {
  EXPECT_NO_THROW(Operator(kLayout, identity(48), true));
  CMatrix m = CMatrix::Zero(48, 48);
  m(0, 1) = 1.0;
  EXPECT_THROW(Operator(kLayout, m, true), DomainError);
  EXPECT_NO_THROW(Operator(kLayout, m, false));
}

#include <gtest/gtest.h>

#include <array>
#include <boost/math/distributions/chi_squared.hpp>

#include "oracle.hpp"
#include "qst/pauli.hpp"
#include "qst/state.hpp"

using namespace qst;

namespace {

CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  return complex_gaussian(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), 1.0, rng);
}

}  // namespace

TEST(PauliString, ParseAndPrint) {
  auto w = PauliString::parse("XZIY");
  EXPECT_EQ(w.num_qubits(), 4);
  EXPECT_EQ(w.dim(), 16U);
  EXPECT_EQ(w.str(), "XZIY");
  EXPECT_EQ(w.weight(), 3);
  EXPECT_EQ(w[3], PauliCode::Y);
  EXPECT_THROW(PauliString::parse(""), InvalidArgument);
  EXPECT_THROW(PauliString::parse("XQ"), InvalidArgument);
  EXPECT_THROW(PauliString(std::vector<PauliCode>{}), InvalidArgument);
}

TEST(SampleUniformPauli, LengthAndRange) {
  Rng rng(1);
  for (int n = 1; n <= 6; ++n) {
    auto w = sample_uniform_pauli(n, rng);
    EXPECT_EQ(w.num_qubits(), n);
    for (auto c : w.codes()) EXPECT_LE(static_cast<int>(c), 3);
  }
  EXPECT_THROW(sample_uniform_pauli(0, rng), InvalidArgument);
}

TEST(SampleUniformPauli, ChiSquareUniformAtTwoQubits) {
  Rng rng(20240607);
  constexpr int kDraws = 100000;
  std::array<int, 16> counts{};
  for (int i = 0; i < kDraws; ++i) ++counts[pauli_to_index(sample_uniform_pauli(2, rng))];
  const double expected = kDraws / 16.0;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  boost::math::chi_squared dist(15);
  EXPECT_LT(chi2, boost::math::quantile(dist, 0.99));
}

TEST(SampleUniformPauli, DeterministicGivenSeed) {
  Rng a(99), b(99);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(sample_uniform_pauli(5, a), sample_uniform_pauli(5, b));
}

TEST(PauliCodec, Examples) {
  EXPECT_EQ(pauli_from_index(0, 3), PauliString::identity(3));
  EXPECT_EQ(pauli_from_index(0, 1).str(), "I");
  EXPECT_EQ(pauli_from_index(1, 1).str(), "X");
  EXPECT_EQ(pauli_from_index(2, 1).str(), "Y");
  EXPECT_EQ(pauli_from_index(3, 1).str(), "Z");
  EXPECT_THROW(pauli_from_index(64, 3), InvalidArgument);
}

TEST(PauliCodec, RoundTripAtThreeQubits) {
  for (std::uint64_t i = 0; i < 64; ++i) EXPECT_EQ(pauli_to_index(pauli_from_index(i, 3)), i);
}

TEST(ApplyPauli, IdentityLeavesMatrixUnchanged) {
  Rng rng(3);
  CMatrix m = random_matrix(8, 2, rng);
  EXPECT_EQ(apply_pauli(PauliString::identity(3), m), m);
}

TEST(ApplyPauli, XSwapsAmplitudes) {
  CMatrix m(2, 1);
  m << 1.0, 2.0;
  CMatrix out = apply_pauli(PauliString::parse("X"), m);
  EXPECT_EQ(out(0, 0), Complex(2.0, 0.0));
  EXPECT_EQ(out(1, 0), Complex(1.0, 0.0));
}

TEST(ApplyPauli, YOnMostSignificantQubit) {
  CMatrix e0 = CMatrix::Zero(4, 1);
  e0(0, 0) = 1.0;
  CMatrix expected = CMatrix::Zero(4, 1);
  expected(2, 0) = Complex(0.0, 1.0);
  EXPECT_LE((apply_pauli(PauliString::parse("YI"), e0) - expected).norm(), 1e-15);
  EXPECT_LE((oracle::dense_pauli(PauliString::parse("YI")) * e0 - expected).norm(), 1e-15);
}

TEST(ApplyPauli, MatchesDenseOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    auto w = sample_uniform_pauli(n, rng);
    CMatrix m = random_matrix(Eigen::Index{1} << n, 1 + trial % 3, rng);
    const CMatrix diff = apply_pauli(w, m) - oracle::dense_pauli(w) * m;
    EXPECT_LE(diff.cwiseAbs().maxCoeff(), 1e-12) << w.str();
  }
}

TEST(ApplyPauli, InvolutionAndDimensionCheck) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto w = sample_uniform_pauli(4, rng);
    CMatrix m = random_matrix(16, 3, rng);
    EXPECT_LE((apply_pauli(w, apply_pauli(w, m)) - m).norm(), 1e-12);
  }
  EXPECT_THROW(apply_pauli(PauliString::parse("XX"), CMatrix::Zero(8, 1)), InvalidArgument);
}

TEST(PauliExpectation, Examples) {
  Rng rng(8);
  CMatrix u = random_matrix(8, 2, rng);
  EXPECT_NEAR(pauli_expectation(PauliString::identity(3), u), u.squaredNorm(), 1e-12);
  CMatrix e0 = CMatrix::Zero(2, 1);
  e0(0, 0) = 1.0;
  EXPECT_DOUBLE_EQ(pauli_expectation(PauliString::parse("Z"), e0), 1.0);
  EXPECT_THROW(pauli_expectation(PauliString::parse("Z"), CMatrix::Zero(4, 1)), InvalidArgument);
}

TEST(PauliExpectation, MatchesDenseOracle) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    auto w = sample_uniform_pauli(n, rng);
    CMatrix u = random_matrix(Eigen::Index{1} << n, 1 + trial % 3, rng);
    EXPECT_NEAR(pauli_expectation(w, u), oracle::dense_expectation(w, u), 1e-10);
  }
}

TEST(PauliBasis, DenseIsHermitianUnitaryWithUnitSpectrum) {
  for (std::uint64_t i = 0; i < 256; ++i) {
    const CMatrix p = oracle::dense_pauli(pauli_from_index(i, 4));
    EXPECT_LE((p - p.adjoint()).norm(), 1e-14);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(p);
    EXPECT_LE((eig.eigenvalues().cwiseAbs() - RVector::Ones(16)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(PauliBasis, OrthogonalityAndCompleteness) {
  Rng rng(17);
  for (int n = 1; n <= 3; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    const double d = static_cast<double>(std::uint64_t{1} << n);
    std::vector<CMatrix> basis;
    for (std::uint64_t i = 0; i < count; ++i) basis.push_back(oracle::dense_pauli(pauli_from_index(i, n)));
    for (std::uint64_t i = 0; i < count; ++i) {
      for (std::uint64_t j = 0; j < count; ++j) {
        const Complex ip = (basis[i].adjoint() * basis[j]).trace();
        EXPECT_LE(std::abs(ip - Complex(i == j ? d : 0.0, 0.0)), 1e-10);
      }
    }
    const CMatrix x = random_matrix(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d), rng);
    CMatrix rebuilt = CMatrix::Zero(x.rows(), x.cols());
    for (const auto& w : basis) rebuilt += (w.adjoint() * x).trace() * w;
    rebuilt /= d;
    EXPECT_LE((rebuilt - x).cwiseAbs().maxCoeff(), 1e-10);
  }
}

#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "oracle.hpp"
#include "qst/initializer.hpp"

using namespace qst;

namespace {

std::shared_ptr<const GroundTruth> pure_truth(int n, std::uint64_t seed) {
  return std::make_shared<const GroundTruth>(
      generate_ground_truth(n, 1, 1.0, SpectrumShape::geometric, Normalization::trace_one, seed));
}

double overlap(const CVector& u, const GroundTruth& t) { return std::abs(t.eigvecs().col(0).dot(u)); }

}  // namespace

TEST(EtaScheduleInit, Values) {
  const double ln = std::log(128.0);
  EXPECT_NEAR(eta_schedule_init(1, 128, InitSchedule::theorem()), ln / (40.0 * 128.0 * ln * ln + 1.0), 1e-18);
  EXPECT_NEAR(eta_schedule_init(1, 128, InitSchedule::theorem()), 4.025e-5, 1e-8);
  EXPECT_NEAR(eta_schedule_init(5, 128, InitSchedule::proof()), ln / (80.0 * 128.0 * ln * ln + 5.0), 1e-18);
  EXPECT_NEAR(eta_schedule_init(3, 16, InitSchedule::custom(7.0)), std::log(16.0) / (7.0 * 16.0 * std::pow(std::log(16.0), 2) + 3.0),
              1e-18);
  double prev = eta_schedule_init(1, 64, InitSchedule::theorem());
  for (std::uint64_t t = 2; t < 200; ++t) {
    const double cur = eta_schedule_init(t, 64, InitSchedule::theorem());
    EXPECT_LT(cur, prev);
    prev = cur;
  }
  EXPECT_THROW(eta_schedule_init(0, 64, InitSchedule::theorem()), InvalidArgument);
  EXPECT_THROW(InitSchedule::custom(0.0), InvalidArgument);
}

TEST(InitStep, UnitNormAndZeroStep) {
  auto t = pure_truth(3, 1);
  Rng rng(2);
  CVector u = random_unit_vector(8, rng);
  const auto o = measure_exact(PauliString::parse("XYZ"), *t);
  EXPECT_LE((init_step(u, o, 0.0) - u).norm(), 1e-15);
  for (int i = 0; i < 200; ++i) {
    const auto oi = measure_shots(sample_uniform_pauli(3, rng), *t, 20, rng);
    u = init_step(u, oi, 0.05 * (i % 7));
    EXPECT_NEAR(u.norm(), 1.0, 1e-12);
  }
  EXPECT_THROW(init_step(2.0 * u, o, 0.1), InvalidArgument);
}

TEST(InitStep, DegenerateUpdate) {
  // u = e0, W = Z, y = -1, eta d = 1 gives u - u = 0.
  CMatrix v = CMatrix::Zero(2, 1);
  v(1, 0) = 1.0;
  GroundTruth t(v, RVector::Ones(1), Normalization::trace_one);
  CVector u = CVector::Zero(2);
  u(0) = 1.0;
  EXPECT_THROW(init_step(u, measure_exact(PauliString::parse("Z"), t), 0.5), DegenerateUpdate);
}

TEST(InitStep, ExpectedDirectionIsRhoTimesU) {
  // E[d y A u] = rho* u, and the mean-field step increases overlap with v*.
  Rng rng(4);
  for (int n = 1; n <= 3; ++n) {
    auto t = pure_truth(n, static_cast<std::uint64_t>(10 + n));
    const auto d = static_cast<double>(std::size_t{1} << n);
    const CMatrix rho = oracle::dense_density(*t);
    CVector u = random_unit_vector(t->dim(), rng);
    CVector mean = CVector::Zero(u.size());
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto w = pauli_from_index(i, n);
      mean += d * true_expectation(w, *t) * (oracle::dense_pauli(w) * u);
    }
    mean /= static_cast<double>(count);
    EXPECT_LE((mean - rho * u).cwiseAbs().maxCoeff(), 1e-10);

    for (double eta : {0.01, 0.3, 2.0}) {
      CVector next = u + eta * mean;
      next.normalize();
      EXPECT_GE(overlap(next, *t), overlap(u, *t) - 1e-15);
      CVector wrong = u - eta * mean;
      if (wrong.norm() > 1e-12) {
        wrong.normalize();
        EXPECT_LE(overlap(wrong, *t), overlap(u, *t) + 1e-15);
      }
    }
  }
}

TEST(RunOnlineInit, DeterministicAndSingleStep) {
  auto t = pure_truth(4, 3);
  InitConfig cfg;
  cfg.iterations = 1;
  cfg.seed = 5;
  int calls = 0;
  BatchSource s1(t, 1, MeasurementMode::exact(), 8);
  run_online_init(cfg, s1, [&](std::uint64_t, const CVector&) { ++calls; });
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(s1.rounds_emitted(), 1U);

  cfg.iterations = 500;
  BatchSource a(t, 1, MeasurementMode::with_shots(320), 8), b(t, 1, MeasurementMode::with_shots(320), 8);
  EXPECT_EQ(run_online_init(cfg, a).matrix(), run_online_init(cfg, b).matrix());
  BatchSource wide(t, 2, MeasurementMode::exact(), 8);
  EXPECT_THROW(run_online_init(cfg, wide), InvalidArgument);
}

TEST(RunOnlineInit, ImprovesOverlapAtSmallDimension) {
  auto t = pure_truth(3, 12);
  int wins = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    InitConfig cfg;
    cfg.iterations = 20000;
    cfg.seed = s;
    BatchSource src(t, 1, MeasurementMode::exact(), 100 + s);
    if (frobenius_distance(run_online_init(cfg, src), *t) < 0.9) ++wins;
  }
  EXPECT_GE(wins, 15);
}

TEST(GeometricMedian, EqualPoints) {
  Rng rng(1);
  CVector u = random_unit_vector(8, rng);
  std::vector<FactorState> pts(4, FactorState(CMatrix(u)));
  auto res = geometric_median(pts, 1e-12);
  EXPECT_NEAR(res.objective, 0.0, 1e-12);
  EXPECT_LE(factor_distance(*res.projection, pts.front()), 1e-7);
}

TEST(GeometricMedian, CollinearPointsPickMiddle) {
  // rho_k = c_k e0 e0^dagger with c = 1, 2, 5 are collinear; the median is the middle one.
  std::vector<FactorState> pts;
  for (double c : {1.0, 2.0, 5.0}) {
    CMatrix u = CMatrix::Zero(2, 1);
    u(0, 0) = std::sqrt(c);
    pts.emplace_back(u);
  }
  auto res = geometric_median(pts, 1e-13);
  EXPECT_NEAR(res.objective, 4.0, 1e-9);
  EXPECT_NEAR(std::norm(res.projection->matrix()(0, 0)), 2.0, 1e-9);
  EXPECT_LE(res.projection_residual, 1e-9);
}

TEST(GeometricMedian, MatchesSubgradientOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<FactorState> pts;
    std::vector<CMatrix> dense;
    for (int j = 0; j < 5; ++j) {
      CVector u = random_unit_vector(4, rng);
      pts.emplace_back(CMatrix(u));
      dense.push_back(u * u.adjoint());
    }
    auto res = geometric_median(pts, 1e-13);
    CMatrix median = CMatrix::Zero(4, 4);
    for (int j = 0; j < 5; ++j) median += res.weights(j) * dense[static_cast<std::size_t>(j)];
    EXPECT_NEAR(res.objective, oracle::dense_median_objective(median, dense), 1e-10);
    EXPECT_NEAR(res.objective, geometric_median_objective(pts, res.weights), 1e-12);
    const auto ref = oracle::subgradient_geometric_median(dense, 200000);
    EXPECT_NEAR(res.objective, ref.objective, 1e-8);
    // projection is the top eigenpair of the median
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(median);
    const CVector top = eig.eigenvectors().col(3) * std::sqrt(eig.eigenvalues()(3));
    EXPECT_NEAR(factor_distance(*res.projection, FactorState(CMatrix(top))), 0.0, 1e-7);
  }
}

TEST(GeometricMedian, Errors) {
  EXPECT_THROW(geometric_median({}, 1e-10), InvalidArgument);
  std::vector<FactorState> mixed{FactorState(CMatrix::Ones(2, 1)), FactorState(CMatrix::Ones(4, 1))};
  EXPECT_THROW(geometric_median(mixed, 1e-10), InvalidArgument);
}

TEST(BoostedInit, SingleReplicaMatchesOnlineInit) {
  auto t = pure_truth(4, 2);
  InitConfig cfg;
  cfg.iterations = 300;
  cfg.seed = 9;
  std::vector<BatchSource> sources{BatchSource(t, 1, MeasurementMode::exact(), 33)};
  auto boosted = boosted_init(cfg, sources);
  BatchSource src(t, 1, MeasurementMode::exact(), 33);
  EXPECT_EQ(boosted.state.matrix(), run_online_init(cfg, src).matrix());
  EXPECT_FALSE(boosted.median.has_value());
}

TEST(BoostedInit, ReplicaCount) {
  EXPECT_EQ(boosting_replicas(128), 350);
  EXPECT_EQ(boosting_replicas(2), static_cast<int>(std::ceil(72.0 * std::log(2.0))));
}

TEST(BoostedInit, MedianOfReplicas) {
  auto t = pure_truth(3, 2);
  InitConfig cfg;
  cfg.iterations = 2000;
  cfg.seed = 1;
  std::vector<BatchSource> sources;
  for (std::uint64_t j = 0; j < 7; ++j) sources.emplace_back(t, 1, MeasurementMode::exact(), mix_seed(50, j));
  auto res = boosted_init(cfg, sources);
  ASSERT_EQ(res.replicas.size(), 7U);
  ASSERT_TRUE(res.median.has_value());
  EXPECT_EQ(res.state.rank(), 1);
  EXPECT_NEAR(res.median->weights.sum(), 1.0, 1e-9);
}

TEST(SpectralInit, CompleteSweepRecoversState) {
  for (int n = 1; n <= 3; ++n) {
    auto t = std::make_shared<const GroundTruth>(generate_ground_truth(
        n, std::min(2, 1 << n), n == 1 ? 2.0 : 3.0, SpectrumShape::geometric, Normalization::trace_one, 4));
    Batch all;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << (2 * n)); ++i) all.push_back(measure_exact(pauli_from_index(i, n), *t));
    auto u = spectral_init(all, t->rank());
    EXPECT_EQ(u.rank(), t->rank());
    EXPECT_LE(frobenius_distance(u, *t), 1e-9);
  }
}

TEST(SpectralInit, ErrorShrinksWithSamples) {
  auto t = pure_truth(3, 6);
  double small = 0.0, large = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    BatchSource a(t, 8, MeasurementMode::exact(), s);
    BatchSource b(t, 40, MeasurementMode::exact(), 1000 + s);
    Batch many = b.next_batch();
    const Batch more = b.next_batch();
    many.insert(many.end(), more.begin(), more.end());
    small += frobenius_distance(spectral_init(a.next_batch(), 1), *t);
    large += frobenius_distance(spectral_init(many, 1), *t);
  }
  EXPECT_LT(large, small);
}

TEST(SpectralInit, SizeGuard) {
  Batch big{MeasurementOutcome{PauliString::identity(13), 1.0, std::nullopt, 0.0}};
  EXPECT_THROW(spectral_init(big, 1), UnsupportedSize);
  EXPECT_THROW(spectral_init({}, 1), InvalidArgument);
}

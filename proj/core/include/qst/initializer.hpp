#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qst/measurement.hpp"
#include "qst/state.hpp"

namespace qst {

/// eta_t = log d / (a d log^2 d + t).
struct InitSchedule {
  enum class Kind { theorem_40, proof_80, custom };

  Kind kind = Kind::theorem_40;
  double a = 40.0;

  static InitSchedule theorem() { return {Kind::theorem_40, 40.0}; }
  static InitSchedule proof() { return {Kind::proof_80, 80.0}; }
  static InitSchedule custom(double a);
};

double eta_schedule_init(std::uint64_t t, std::size_t d, const InitSchedule& schedule,
                         LogBase base = LogBase::natural);

struct InitConfig {
  std::uint64_t iterations = 1;  // T0
  InitSchedule schedule = InitSchedule::theorem();
  int replicas = 1;  // J
  /// +1 ascends the Rayleigh quotient u^dagger rho* u; -1 reproduces the printed pseudocode sign.
  int sign = +1;
  std::uint64_t seed = 0;
  int max_retries = 10;
  LogBase log_base = LogBase::natural;

  void validate() const;
};

/// u + sign * eta * d * y * A u, renormalized to the unit sphere.
CVector init_step(const CVector& u, const MeasurementOutcome& outcome, double eta, int sign = +1);

/// Uniform draw from the complex unit sphere in C^d.
CVector random_unit_vector(std::size_t d, Rng& rng);

/// Observer called after each iteration with (t, u_t).
using InitObserver = std::function<void(std::uint64_t, const CVector&)>;

/// Normalized stochastic power iteration from a random start (rank-1 target).
/// `source` must emit one outcome per round.
FactorState run_online_init(const InitConfig& cfg, BatchSource& source,
                            const InitObserver& observer = {});

/// Geometric median of the points' density matrices, kept as a convex
/// combination sum_j weights[j] * U_j U_j^dagger.
struct GeometricMedianResult {
  RVector weights;
  double objective = 0.0;
  /// Nearest rank-r (r = rank of the points) approximation of the median, as a factor.
  std::optional<FactorState> projection;
  /// Frobenius norm of median minus its projection.
  double projection_residual = 0.0;
  int iterations = 0;
};

struct GeometricMedianError : std::runtime_error {
  GeometricMedianError(const std::string& what, GeometricMedianResult best)
      : std::runtime_error(what), best_iterate(std::move(best)) {}
  GeometricMedianResult best_iterate;
};

/// Weiszfeld iteration with the Vardi-Zhang modification at data points.
/// Stops when the iterate moves less than `tol` in Frobenius norm.
GeometricMedianResult geometric_median(const std::vector<FactorState>& points, double tol,
                                       int max_iterations = 10000);

/// Sum_j || sum_i w_i rho_i - rho_j ||_F for coefficient vector w.
double geometric_median_objective(const std::vector<FactorState>& points, const RVector& weights);

struct BoostedInitResult {
  FactorState state;
  std::vector<FactorState> replicas;
  std::optional<GeometricMedianResult> median;  // empty when J = 1
};

/// Runs J = sources.size() independent online initializations and returns the
/// rank-1 projection of their geometric median. Replica j uses u0 seed
/// cfg.seed for j = 0 and mix_seed(cfg.seed, j) otherwise.
BoostedInitResult boosted_init(const InitConfig& cfg, std::vector<BatchSource>& sources,
                               double median_tol = 1e-10);

/// J = ceil(72 log d).
int boosting_replicas(std::size_t d, LogBase base = LogBase::natural);

/// Spectral baseline: top-r eigenpairs of (d/m) sum_i y_i A_i. Dense; n <= 12.
FactorState spectral_init(const Batch& samples, int r);

inline constexpr int kDenseQubitLimit = 12;

}  // namespace qst

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qst/measurement.hpp"
#include "qst/state.hpp"

namespace qst {

/// Learning-rate rule for the mini-batch update.
struct EtaPolicy {
  enum class Kind { appendix_rule, theorem_rule, fixed };

  Kind kind = Kind::appendix_rule;
  /// c2 for theorem_rule, eta itself for fixed; unused by appendix_rule.
  double value = 1.0;

  static EtaPolicy appendix() { return {Kind::appendix_rule, 1.0}; }
  static EtaPolicy theorem(double c2) { return {Kind::theorem_rule, c2}; }
  static EtaPolicy fixed(double eta);
};

std::string to_string(const EtaPolicy& p);

/// appendix_rule: 1/(4 kappa r) for B <= 40, else 50/(4B).
/// theorem_rule:  c2 / (kappa r log d).
/// fixed:         the stored value.
double eta_policy_value(const EtaPolicy& policy, double kappa, int r, int batch_size,
                        std::size_t d, LogBase base = LogBase::natural);

struct SgdConfig {
  std::uint64_t rounds = 1;  // T
  int batch_size = 1;        // B
  EtaPolicy eta = EtaPolicy::appendix();
  double kappa_hint = 1.0;
  int rank = 1;
  /// Stop once e_t (or the trailing batch-loss mean, without a truth) drops below this.
  std::optional<double> stop_tol;
  std::size_t loss_window = 50;
  /// Numerical constant c1 of the contraction regime; only used for warnings.
  double c1 = 1.0;
  LogBase log_base = LogBase::natural;

  void validate() const;
};

struct TraceRow {
  std::uint64_t round = 0;
  double frob_error = 0.0;  // NaN when no ground truth is available
  double batch_loss = 0.0;  // l_t(U_{t-1})
  std::uint64_t cum_samples = 0;
  std::int64_t wall_ns = 0;  // cumulative optimizer time, logging excluded
};

struct RunTrace {
  std::vector<TraceRow> rows;
  std::optional<FactorState> final_state;
  double initial_error = 0.0;
  double eta = 0.0;
  std::vector<std::string> warnings;
  /// First round with e_t < stop_tol, when a tolerance was configured and reached.
  std::optional<std::uint64_t> rounds_to_tol;
};

/// Thrown when an update produces non-finite entries. Carries the partial trace.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::uint64_t round, RunTrace partial);
  std::uint64_t round() const { return round_; }
  const RunTrace& partial_trace() const { return partial_; }

 private:
  std::uint64_t round_;
  RunTrace partial_;
};

/// (1/4) sum_k (y_k - Tr(A_k U U^dagger))^2.
double instantaneous_loss(const FactorState& u, const Batch& batch);

/// sum_k [Tr(A_k U U^dagger) - y_k] A_k U. Pairs with directions as Re<grad, V>.
CMatrix gradient(const FactorState& u, const Batch& batch);

/// Fused loss + gradient; `scratch` is resized as needed and reused across calls.
double loss_and_gradient(const CMatrix& u, const Batch& batch, CMatrix& grad, CMatrix& scratch);

/// U - eta * gradient(U, batch). Throws DivergenceError on non-finite output.
FactorState sgd_step(const FactorState& u, const Batch& batch, double eta,
                     std::uint64_t round = 0);

/// Runs the online mini-batch loop. `truth` may be null when only data is available.
RunTrace run_sgd(const SgdConfig& config, BatchSource& source, FactorState u0,
                 const GroundTruth* truth);

/// Conditions under which the contraction guarantees are not claimed.
std::vector<std::string> regime_warnings(const SgdConfig& config, double eta, std::size_t d);

/// CSV: `round,frob_error,batch_loss,cum_samples,wall_ns`, 17 significant digits.
/// With include_wall_time = false the wall_ns column is written as 0 so
/// identically seeded runs produce identical bytes.
void write_trace_csv(std::ostream& out, const RunTrace& trace, bool include_wall_time);

}  // namespace qst

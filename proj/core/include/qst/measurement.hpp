#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "qst/pauli.hpp"
#include "qst/state.hpp"

namespace qst {

/// One observed Pauli expectation. `shots` is empty for exact (noiseless) data.
struct MeasurementOutcome {
  PauliString pauli;
  double y = 0.0;
  std::optional<std::uint64_t> shots;
  double z = 0.0;  // y minus the true expectation; diagnostics only
};

using Batch = std::vector<MeasurementOutcome>;

/// Exact data, or an l-shot two-outcome estimate of each expectation.
struct MeasurementMode {
  std::optional<std::uint64_t> shots;

  static MeasurementMode exact() { return {}; }
  static MeasurementMode with_shots(std::uint64_t l) { return {l}; }
  bool is_exact() const { return !shots.has_value(); }
};

/// Tr(dense(W) rho*) in O(r d log d).
double true_expectation(const PauliString& w, const GroundTruth& truth);

MeasurementOutcome measure_exact(const PauliString& w, const GroundTruth& truth);

/// Simulates l repetitions of the {(I+W)/2, (I-W)/2} measurement with one binomial draw.
/// Requires a trace-one state.
MeasurementOutcome measure_shots(const PauliString& w, const GroundTruth& truth,
                                 std::uint64_t shots, Rng& rng);

/// ceil(112 eps0^-2 d log d): shot count that keeps |z| <= eps0/sqrt(d) w.h.p.
std::uint64_t shots_for_epsilon(double eps0, std::size_t d, LogBase base = LogBase::natural);

/// The l = 20 d preset used for the noisy convergence experiments.
inline std::uint64_t shots_20d(std::size_t d) { return 20 * static_cast<std::uint64_t>(d); }

/// Streams rounds of B uniformly sampled Pauli measurements of a fixed state.
/// Holds mutable RNG state, so each source has a single owner.
class BatchSource {
 public:
  BatchSource(std::shared_ptr<const GroundTruth> truth, int batch_size, MeasurementMode mode,
              std::uint64_t seed);

  Batch next_batch();
  /// Writes the next batch into `out`, reusing its storage.
  void next_batch(Batch& out);

  const GroundTruth& truth() const { return *truth_; }
  int batch_size() const { return batch_size_; }
  const MeasurementMode& mode() const { return mode_; }
  std::uint64_t rounds_emitted() const { return rounds_; }

 private:
  MeasurementOutcome measure(const PauliString& w);

  std::shared_ptr<const GroundTruth> truth_;
  int batch_size_;
  MeasurementMode mode_;
  Rng rng_;
  std::uint64_t rounds_ = 0;
};

/// CSV log `round,slot,pauli,y,z,shots` of every outcome a run consumed.
class OutcomeLog {
 public:
  explicit OutcomeLog(std::ostream& out);
  void append(std::uint64_t round, const Batch& batch);

 private:
  std::ostream* out_;
};

}  // namespace qst

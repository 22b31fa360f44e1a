#include "qst/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

namespace qst {

double true_expectation(const PauliString& w, const GroundTruth& truth) {
  if (w.dim() != truth.dim()) throw InvalidArgument("true_expectation: dimension mismatch");
  const CMatrix& v = truth.eigvecs();
  CMatrix wv = v;
  apply_pauli_inplace(w, wv);
  double total = 0.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    total += truth.spectrum()(j) * v.col(j).dot(wv.col(j)).real();
  }
  return total;
}

MeasurementOutcome measure_exact(const PauliString& w, const GroundTruth& truth) {
  return MeasurementOutcome{w, true_expectation(w, truth), std::nullopt, 0.0};
}

MeasurementOutcome measure_shots(const PauliString& w, const GroundTruth& truth,
                                 std::uint64_t shots, Rng& rng) {
  if (truth.normalization() != Normalization::trace_one) {
    throw InvalidState("shot measurements need a trace-one state");
  }
  if (shots < 1) throw InvalidArgument("measure_shots: need at least one shot");
  const double expectation = true_expectation(w, truth);
  double p_plus = 0.5 * (1.0 + expectation);
  if (p_plus < -1e-9 || p_plus > 1.0 + 1e-9) {
    throw InternalInvariant("outcome probability out of range: " + std::to_string(p_plus));
  }
  p_plus = std::clamp(p_plus, 0.0, 1.0);
  std::binomial_distribution<std::uint64_t> binomial(shots, p_plus);
  const std::uint64_t plus = binomial(rng);
  const double l = static_cast<double>(shots);
  const double y = (2.0 * static_cast<double>(plus) - l) / l;
  return MeasurementOutcome{w, y, shots, y - expectation};
}

std::uint64_t shots_for_epsilon(double eps0, std::size_t d, LogBase base) {
  if (!(eps0 > 0.0 && eps0 <= 1.0)) {
    throw InvalidArgument("shots_for_epsilon: eps0 must lie in (0, 1]");
  }
  const double dd = static_cast<double>(d);
  return static_cast<std::uint64_t>(std::ceil(112.0 / (eps0 * eps0) * dd * log_dim(dd, base)));
}

BatchSource::BatchSource(std::shared_ptr<const GroundTruth> truth, int batch_size,
                         MeasurementMode mode, std::uint64_t seed)
    : truth_(std::move(truth)), batch_size_(batch_size), mode_(mode), rng_(seed) {
  if (!truth_) throw InvalidArgument("batch source needs a ground truth");
  if (batch_size_ < 1) throw InvalidArgument("batch size must be >= 1");
  const double d = static_cast<double>(truth_->dim());
  if (static_cast<double>(batch_size_) > d * d) {
    throw InvalidArgument("batch size exceeds d^2");
  }
  if (!mode_.is_exact()) {
    if (*mode_.shots < 1) throw InvalidArgument("shot count must be >= 1");
    if (truth_->normalization() != Normalization::trace_one) {
      throw InvalidState("shot measurements need a trace-one state");
    }
  }
}

MeasurementOutcome BatchSource::measure(const PauliString& w) {
  return mode_.is_exact() ? measure_exact(w, *truth_) : measure_shots(w, *truth_, *mode_.shots, rng_);
}

void BatchSource::next_batch(Batch& out) {
  out.clear();
  out.reserve(static_cast<std::size_t>(batch_size_));
  const int n = truth_->num_qubits();
  for (int k = 0; k < batch_size_; ++k) out.push_back(measure(sample_uniform_pauli(n, rng_)));
  ++rounds_;
}

Batch BatchSource::next_batch() {
  Batch out;
  next_batch(out);
  return out;
}

OutcomeLog::OutcomeLog(std::ostream& out) : out_(&out) {
  *out_ << "round,slot,pauli,y,z,shots\n";
}

void OutcomeLog::append(std::uint64_t round, const Batch& batch) {
  auto& out = *out_;
  out << std::setprecision(17);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto& o = batch[k];
    out << round << ',' << k << ',' << o.pauli.str() << ',' << o.y << ',' << o.z << ',';
    if (o.shots) {
      out << *o.shots;
    } else {
      out << "inf";
    }
    out << '\n';
  }
}

}  // namespace qst

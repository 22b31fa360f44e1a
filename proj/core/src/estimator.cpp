#include "qst/estimator.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <sstream>

namespace qst {

EtaPolicy EtaPolicy::fixed(double eta) {
  if (!(eta > 0.0)) throw InvalidArgument("fixed learning rate must be positive");
  return {Kind::fixed, eta};
}

std::string to_string(const EtaPolicy& p) {
  std::ostringstream s;
  s << std::setprecision(17);
  switch (p.kind) {
    case EtaPolicy::Kind::appendix_rule: return "appendix_rule";
    case EtaPolicy::Kind::theorem_rule: s << "theorem_rule(c2=" << p.value << ")"; break;
    case EtaPolicy::Kind::fixed: s << "fixed(" << p.value << ")"; break;
  }
  return s.str();
}

double eta_policy_value(const EtaPolicy& policy, double kappa, int r, int batch_size,
                        std::size_t d, LogBase base) {
  if (!(kappa >= 1.0) || r < 1 || batch_size < 1) {
    throw InvalidArgument("eta_policy_value: need kappa >= 1, r >= 1, B >= 1");
  }
  switch (policy.kind) {
    case EtaPolicy::Kind::appendix_rule:
      return batch_size <= 40 ? 1.0 / (4.0 * kappa * r) : 50.0 / (4.0 * batch_size);
    case EtaPolicy::Kind::theorem_rule:
      return policy.value / (kappa * r * log_dim(static_cast<double>(d), base));
    case EtaPolicy::Kind::fixed:
      return policy.value;
  }
  throw InternalInvariant("unknown eta policy");
}

void SgdConfig::validate() const {
  if (rounds < 1) throw InvalidArgument("SGD round budget T must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch size B must be >= 1");
  if (!(kappa_hint >= 1.0)) throw InvalidArgument("kappa_hint must be >= 1");
  if (rank < 1) throw InvalidArgument("rank must be >= 1");
  if (eta.kind == EtaPolicy::Kind::fixed && !(eta.value > 0.0)) {
    throw InvalidArgument("fixed learning rate must be positive");
  }
  if (eta.kind == EtaPolicy::Kind::theorem_rule && !(eta.value > 0.0)) {
    throw InvalidArgument("c2 must be positive");
  }
  if (stop_tol && !(*stop_tol > 0.0)) throw InvalidArgument("stop_tol must be positive");
  if (loss_window < 1) throw InvalidArgument("loss window must be >= 1");
}

namespace {

std::string divergence_message(std::uint64_t round) {
  return "SGD diverged at round " + std::to_string(round) + " (non-finite iterate)";
}

void check_batch_dims(const CMatrix& u, const Batch& batch) {
  for (const auto& o : batch) {
    if (o.pauli.dim() != static_cast<std::size_t>(u.rows())) {
      throw InvalidArgument("batch outcome dimension does not match U");
    }
  }
}

}  // namespace

DivergenceError::DivergenceError(std::uint64_t round, RunTrace partial)
    : std::runtime_error(divergence_message(round)), round_(round), partial_(std::move(partial)) {}

double loss_and_gradient(const CMatrix& u, const Batch& batch, CMatrix& grad, CMatrix& scratch) {
  check_batch_dims(u, batch);
  grad.setZero(u.rows(), u.cols());
  double loss = 0.0;
  for (const auto& o : batch) {
    scratch = u;
    apply_pauli_inplace(o.pauli, scratch);
    const double residual = pauli_expectation_from_product(u, scratch) - o.y;
    loss += residual * residual;
    grad.noalias() += residual * scratch;
  }
  return 0.25 * loss;
}

double instantaneous_loss(const FactorState& u, const Batch& batch) {
  CMatrix grad, scratch;
  return loss_and_gradient(u.matrix(), batch, grad, scratch);
}

CMatrix gradient(const FactorState& u, const Batch& batch) {
  CMatrix grad, scratch;
  loss_and_gradient(u.matrix(), batch, grad, scratch);
  return grad;
}

FactorState sgd_step(const FactorState& u, const Batch& batch, double eta, std::uint64_t round) {
  if (!(eta > 0.0)) throw InvalidArgument("sgd_step: eta must be positive");
  CMatrix next = u.matrix() - eta * gradient(u, batch);
  if (!next.allFinite()) throw DivergenceError(round, RunTrace{});
  return FactorState(std::move(next));
}

std::vector<std::string> regime_warnings(const SgdConfig& config, double eta, std::size_t d) {
  std::vector<std::string> out;
  const double kappa = config.kappa_hint;
  const double dd = static_cast<double>(d);
  const double b_max = std::min(40.0 * std::cbrt(kappa * kappa), dd);
  if (config.batch_size > b_max) {
    out.push_back("batch size " + std::to_string(config.batch_size) +
                  " exceeds min{40 kappa^(2/3), d} = " + std::to_string(b_max) +
                  "; high-probability convergence guarantee not claimed");
  }
  if (kappa > std::sqrt(dd * config.rank)) {
    out.push_back("kappa exceeds sqrt(d r); contraction guarantee not claimed");
  }
  const double eta_bound = config.c1 / (kappa * config.rank);
  if (eta > eta_bound) {
    out.push_back("eta " + std::to_string(eta) + " exceeds c1/(kappa r) = " +
                  std::to_string(eta_bound));
  }
  return out;
}

RunTrace run_sgd(const SgdConfig& config, BatchSource& source, FactorState u0,
                 const GroundTruth* truth) {
  config.validate();
  if (source.batch_size() != config.batch_size) {
    throw InvalidArgument("SGD config and batch source disagree on the batch size");
  }
  const std::size_t d = source.truth().dim();
  if (u0.dim() != d) throw InvalidArgument("initial factor dimension does not match the source");
  if (truth && truth->dim() != d) throw InvalidArgument("ground truth dimension mismatch");

  using Clock = std::chrono::steady_clock;
  RunTrace trace;
  trace.eta = eta_policy_value(config.eta, config.kappa_hint, config.rank, config.batch_size, d,
                               config.log_base);
  trace.warnings = regime_warnings(config, trace.eta, d);
  trace.initial_error = truth ? frobenius_distance(u0, *truth) : std::numeric_limits<double>::quiet_NaN();
  trace.rows.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(config.rounds, 1U << 20)));

  const std::uint64_t shots_per = source.mode().shots.value_or(1);
  const std::uint64_t samples_per_round = shots_per * static_cast<std::uint64_t>(config.batch_size);

  FactorState state = std::move(u0);
  CMatrix grad, scratch;
  Batch batch;
  std::deque<double> window;
  double window_sum = 0.0;
  std::int64_t elapsed_ns = 0;

  for (std::uint64_t t = 1; t <= config.rounds; ++t) {
    const auto start = Clock::now();
    source.next_batch(batch);
    const double loss = loss_and_gradient(state.matrix(), batch, grad, scratch);
    state.matrix().noalias() -= trace.eta * grad;
    elapsed_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();

    if (!state.matrix().allFinite()) {
      trace.final_state.reset();
      throw DivergenceError(t, std::move(trace));
    }

    TraceRow row;
    row.round = t;
    row.batch_loss = loss;
    row.cum_samples = t * samples_per_round;
    row.wall_ns = elapsed_ns;
    row.frob_error = truth ? frobenius_distance(state, *truth) : std::numeric_limits<double>::quiet_NaN();
    trace.rows.push_back(row);

    if (config.stop_tol) {
      if (truth) {
        if (row.frob_error < *config.stop_tol) {
          trace.rounds_to_tol = t;
          break;
        }
      } else {
        window.push_back(loss);
        window_sum += loss;
        if (window.size() > config.loss_window) {
          window_sum -= window.front();
          window.pop_front();
        }
        if (window.size() == config.loss_window &&
            window_sum / static_cast<double>(config.loss_window) < *config.stop_tol) {
          trace.rounds_to_tol = t;
          break;
        }
      }
    }
  }
  trace.final_state = std::move(state);
  return trace;
}

void write_trace_csv(std::ostream& out, const RunTrace& trace, bool include_wall_time) {
  out << "round,frob_error,batch_loss,cum_samples,wall_ns\n";
  out << std::setprecision(17);
  for (const auto& row : trace.rows) {
    out << row.round << ',' << row.frob_error << ',' << row.batch_loss << ',' << row.cum_samples
        << ',' << (include_wall_time ? row.wall_ns : 0) << '\n';
  }
}

}  // namespace qst

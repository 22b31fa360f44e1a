#include "qst/initializer.hpp"

#include <bit>
#include <cmath>
#include <thread>

namespace qst {

InitSchedule InitSchedule::custom(double a) {
  if (!(a > 0.0)) throw InvalidArgument("init schedule constant a must be positive");
  return {Kind::custom, a};
}

double eta_schedule_init(std::uint64_t t, std::size_t d, const InitSchedule& schedule,
                         LogBase base) {
  if (t < 1) throw InvalidArgument("eta_schedule_init: t starts at 1");
  const double dd = static_cast<double>(d);
  const double logd = log_dim(dd, base);
  return logd / (schedule.a * dd * logd * logd + static_cast<double>(t));
}

void InitConfig::validate() const {
  if (iterations < 1) throw InvalidArgument("init iteration budget T0 must be >= 1");
  if (!(schedule.a > 0.0)) throw InvalidArgument("init schedule constant must be positive");
  if (replicas < 1) throw InvalidArgument("replica count J must be >= 1");
  if (sign != 1 && sign != -1) throw InvalidArgument("init sign must be +1 or -1");
  if (max_retries < 0) throw InvalidArgument("max_retries must be >= 0");
}

CVector init_step(const CVector& u, const MeasurementOutcome& outcome, double eta, int sign) {
  const auto d = static_cast<double>(u.size());
  if (std::abs(u.norm() - 1.0) > 1e-10) throw InvalidArgument("init_step: u must be a unit vector");
  if (outcome.pauli.dim() != static_cast<std::size_t>(u.size())) {
    throw InvalidArgument("init_step: dimension mismatch");
  }
  CVector au = u;
  apply_pauli_inplace(outcome.pauli, au);
  CVector next = u + (static_cast<double>(sign) * eta * d * outcome.y) * au;
  const double norm = next.norm();
  if (!(norm >= 1e-14)) throw DegenerateUpdate("init_step: update collapsed to zero");
  next /= norm;
  return next;
}

CVector random_unit_vector(std::size_t d, Rng& rng) {
  for (;;) {
    CVector v = complex_gaussian(d, 1, 1.0, rng).col(0);
    const double norm = v.norm();
    if (norm > 1e-300) return v / norm;
  }
}

FactorState run_online_init(const InitConfig& cfg, BatchSource& source,
                            const InitObserver& observer) {
  cfg.validate();
  if (source.batch_size() != 1) throw InvalidArgument("online init consumes one outcome per round");
  const std::size_t d = source.truth().dim();
  Rng rng(cfg.seed);
  CVector u = random_unit_vector(d, rng);
  int retries = 0;
  Batch batch;
  for (std::uint64_t t = 1; t <= cfg.iterations; ++t) {
    source.next_batch(batch);
    const double eta = eta_schedule_init(t, d, cfg.schedule, cfg.log_base);
    try {
      u = init_step(u, batch.front(), eta, cfg.sign);
    } catch (const DegenerateUpdate&) {
      if (++retries > cfg.max_retries) {
        throw DegenerateUpdate("online init: degenerate-update retries exhausted");
      }
      u = random_unit_vector(d, rng);
    }
    if (observer) observer(t, u);
  }
  return FactorState(CMatrix(u));
}

int boosting_replicas(std::size_t d, LogBase base) {
  return static_cast<int>(std::ceil(72.0 * log_dim(static_cast<double>(d), base)));
}

BoostedInitResult boosted_init(const InitConfig& cfg, std::vector<BatchSource>& sources,
                               double median_tol) {
  cfg.validate();
  const auto J = sources.size();
  if (J < 1) throw InvalidArgument("boosted_init needs at least one source");

  std::vector<std::optional<FactorState>> slots(J);
  auto run_replica = [&](std::size_t j) {
    InitConfig local = cfg;
    local.replicas = 1;
    if (j > 0) local.seed = mix_seed(cfg.seed, j);
    slots[j] = run_online_init(local, sources[j]);
  };

  const std::size_t workers =
      std::min<std::size_t>(J, std::max(1U, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t j = 0; j < J; ++j) run_replica(j);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t j = w; j < J; j += workers) run_replica(j);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<FactorState> replicas;
  replicas.reserve(J);
  for (auto& s : slots) replicas.push_back(std::move(*s));

  if (J == 1) {
    FactorState only = replicas.front();
    return BoostedInitResult{std::move(only), std::move(replicas), std::nullopt};
  }
  GeometricMedianResult median = geometric_median(replicas, median_tol);
  FactorState projected = *median.projection;
  return BoostedInitResult{std::move(projected), std::move(replicas), std::move(median)};
}

FactorState spectral_init(const Batch& samples, int r) {
  if (samples.empty()) throw InvalidArgument("spectral_init needs at least one sample");
  const int n = samples.front().pauli.num_qubits();
  if (n > kDenseQubitLimit) {
    throw UnsupportedSize("spectral_init is dense; n=" + std::to_string(n) + " exceeds the limit");
  }
  const auto d = Eigen::Index{1} << n;
  if (r < 1 || r > d) throw InvalidArgument("spectral_init: need 1 <= r <= d");

  // Each Pauli string is a signed permutation: W e_j = phase(j) e_{j ^ flip}.
  CMatrix s = CMatrix::Zero(d, d);
  const double scale = static_cast<double>(d) / static_cast<double>(samples.size());
  for (const auto& o : samples) {
    if (o.pauli.num_qubits() != n) throw InvalidArgument("spectral_init: mixed qubit counts");
    std::uint64_t flip = 0, sign_mask = 0;
    int num_y = 0;
    for (int q = 0; q < n; ++q) {
      const std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
      switch (o.pauli[q]) {
        case PauliCode::X: flip |= bit; break;
        case PauliCode::Y: flip |= bit; sign_mask |= bit; ++num_y; break;
        case PauliCode::Z: sign_mask |= bit; break;
        case PauliCode::I: break;
      }
    }
    static const Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const Complex base = kIPow[num_y % 4] * (scale * o.y);
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto uj = static_cast<std::uint64_t>(j);
      const bool negate = std::popcount(uj & sign_mask) % 2 == 1;
      s(static_cast<Eigen::Index>(uj ^ flip), j) += negate ? -base : base;
    }
  }

  Eigen::SelfAdjointEigenSolver<CMatrix> eig(s);
  if (eig.info() != Eigen::Success) throw std::runtime_error("spectral_init: eigensolver failed");
  CMatrix u(d, r);
  for (int j = 0; j < r; ++j) {
    const Eigen::Index idx = d - 1 - j;  // eigenvalues ascend
    u.col(j) = eig.eigenvectors().col(idx) * std::sqrt(std::max(eig.eigenvalues()(idx), 0.0));
  }
  return FactorState(std::move(u));
}

}  // namespace qst

#include "qst/harness/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "qst/state_io.hpp"

#ifndef QST_GIT_DESCRIBE
#define QST_GIT_DESCRIBE "unknown"
#endif

namespace qst::harness {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

struct MetaWriter {
  std::string text;
  void add(const std::string& key, const std::string& value) { text += "meta." + key + " = " + value + "\n"; }
};

std::string meta_header(const ExperimentConfig& cfg, const SeedPlan& seeds, const GroundTruth& truth) {
  MetaWriter m;
  m.text = dump_config(cfg);
  m.add("git_describe", git_describe());
  m.add("truth_seed", std::to_string(seeds.truth));
  m.add("init_seed", std::to_string(seeds.init));
  m.add("init_source_seed", std::to_string(seeds.init_source));
  m.add("source_seed", std::to_string(seeds.source));
  m.add("d", std::to_string(truth.dim()));
  m.add("truth_rank", std::to_string(truth.rank()));
  m.add("truth_kappa", fmt(truth.kappa()));
  const auto shots = cfg.resolved_shots();
  m.add("shots", shots ? std::to_string(*shots) : "inf");
  return m.text;
}

// Creates the output directory; returns false (after logging) when it cannot be used.
bool prepare_output(const ExperimentConfig& cfg, std::ostream& log) {
  std::error_code ec;
  fs::create_directories(cfg.output, ec);
  if (ec || !fs::is_directory(cfg.output)) {
    log << "error: cannot create output directory " << cfg.output << ": " << ec.message() << "\n";
    return false;
  }
  const fs::path probe = fs::path(cfg.output) / ".qst_write_probe";
  {
    std::ofstream out(probe);
    if (!out) {
      log << "error: output directory " << cfg.output << " is not writable\n";
      return false;
    }
  }
  fs::remove(probe, ec);
  return true;
}

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(count, std::max(1U, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < count; i += workers) fn(i);
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

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

SgdConfig sgd_config(const ExperimentConfig& cfg, const GroundTruth& truth, int B) {
  SgdConfig s;
  s.rounds = cfg.T;
  s.batch_size = B;
  s.eta = cfg.eta_policy_value();
  s.kappa_hint = truth.kappa();
  s.rank = truth.rank();
  s.stop_tol = cfg.stop_tol;
  s.c1 = cfg.c1;
  s.log_base = cfg.log_base;
  return s;
}

}  // namespace

std::string git_describe() { return QST_GIT_DESCRIBE; }

std::shared_ptr<const GroundTruth> make_truth(const ExperimentConfig& cfg) {
  if (!cfg.truth_file.empty()) {
    auto obj = load_qst(cfg.truth_file);
    if (!std::holds_alternative<GroundTruth>(obj)) {
      throw ConfigError("truth_file", 0, "file holds a factor, not a ground truth");
    }
    return std::make_shared<const GroundTruth>(std::get<GroundTruth>(std::move(obj)));
  }
  return std::make_shared<const GroundTruth>(generate_ground_truth(
      cfg.n, cfg.r, cfg.kappa, cfg.spectrum_shape, cfg.normalization, seed_plan(cfg.seed).truth));
}

MeasurementMode measurement_mode(const ExperimentConfig& cfg) {
  const auto shots = cfg.resolved_shots();
  return shots ? MeasurementMode::with_shots(*shots) : MeasurementMode::exact();
}

InitOutcome make_initial_state(const ExperimentConfig& cfg, const std::shared_ptr<const GroundTruth>& truth,
                               const SeedPlan& seeds) {
  const int n = truth->num_qubits();
  const int r = truth->rank();
  switch (cfg.init) {
    case InitKind::scaled_gaussian:
      return {random_init_factor(n, r, cfg.init_scale, seeds.init), {}};
    case InitKind::spectral: {
      const auto m = cfg.resolved_init_m();
      BatchSource src(truth, 1, measurement_mode(cfg), seeds.init_source);
      Batch samples;
      samples.reserve(m);
      for (std::uint64_t i = 0; i < m; ++i) samples.push_back(src.next_batch().front());
      return {spectral_init(samples, r), {{"init_m", std::to_string(m)}}};
    }
    case InitKind::online: {
      if (r != 1) throw ConfigError("init", 0, "online initialization supports r = 1 only");
      InitConfig ic;
      ic.iterations = cfg.resolved_init_T0();
      ic.schedule = cfg.init_schedule_value();
      ic.replicas = cfg.resolved_init_J();
      ic.sign = cfg.init_sign;
      ic.seed = seeds.init;
      ic.log_base = cfg.log_base;
      std::vector<BatchSource> sources;
      sources.reserve(static_cast<std::size_t>(ic.replicas));
      for (int j = 0; j < ic.replicas; ++j) {
        sources.emplace_back(truth, 1, measurement_mode(cfg),
                             j == 0 ? seeds.init_source : mix_seed(seeds.init_source, static_cast<std::uint64_t>(j)));
      }
      auto boosted = boosted_init(ic, sources);
      std::vector<std::pair<std::string, std::string>> meta{
          {"init_T0_resolved", std::to_string(ic.iterations)}, {"init_J_resolved", std::to_string(ic.replicas)}};
      if (boosted.median) {
        meta.emplace_back("init_median_objective", fmt(boosted.median->objective));
        meta.emplace_back("init_projection_residual", fmt(boosted.median->projection_residual));
      }
      return {std::move(boosted.state), std::move(meta)};
    }
  }
  throw InternalInvariant("unknown init kind");
}

void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

int cmd_gen(const ExperimentConfig& cfg, std::ostream& log) {
  if (!prepare_output(cfg, log)) return kExitConfig;
  const auto truth = make_truth(cfg);
  const auto seeds = seed_plan(cfg.seed);
  const fs::path out = fs::path(cfg.output) / "truth.qst";
  fs::path tmp = out;
  tmp += ".tmp";
  save_qst(tmp, *truth);
  fs::rename(tmp, out);
  write_atomically(fs::path(cfg.output) / "meta.txt", meta_header(cfg, seeds, *truth));
  log << "wrote " << out.string() << "\n";
  return kExitOk;
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
  if (!prepare_output(cfg, log)) return kExitConfig;
  const auto truth = make_truth(cfg);
  const auto seeds = seed_plan(cfg.seed);
  auto init = make_initial_state(cfg, truth, seeds);
  std::string meta = meta_header(cfg, seeds, *truth);
  MetaWriter extra;
  for (const auto& [k, v] : init.meta) extra.add(k, v);

  BatchSource source(truth, cfg.B, measurement_mode(cfg), seeds.source);
  const SgdConfig sgd = sgd_config(cfg, *truth, cfg.B);
  RunTrace trace;
  int code = kExitOk;
  try {
    trace = run_sgd(sgd, source, init.state, truth.get());
    extra.add("status", "ok");
  } catch (const DivergenceError& e) {
    trace = e.partial_trace();
    extra.add("status", "diverged");
    extra.add("divergence_round", std::to_string(e.round()));
    log << "error: " << e.what() << "\n";
    code = kExitDivergence;
  }
  extra.add("eta_resolved", fmt(trace.eta));
  extra.add("initial_error", fmt(trace.initial_error));
  extra.add("rounds", std::to_string(trace.rows.size()));
  if (!trace.rows.empty()) extra.add("final_error", fmt(trace.rows.back().frob_error));
  extra.add("rounds_to_tol", trace.rounds_to_tol ? std::to_string(*trace.rounds_to_tol) : "none");
  for (std::size_t i = 0; i < trace.warnings.size(); ++i) {
    extra.add("warning." + std::to_string(i), trace.warnings[i]);
    log << "warning: " << trace.warnings[i] << "\n";
  }

  std::ostringstream csv;
  write_trace_csv(csv, trace, cfg.wall_clock);
  write_atomically(fs::path(cfg.output) / "trace.csv", csv.str());
  write_atomically(fs::path(cfg.output) / "meta.txt", meta + extra.text);
  if (!trace.rows.empty()) {
    log << "rounds " << trace.rows.size() << ", final frob_error " << fmt(trace.rows.back().frob_error) << "\n";
  }
  return code;
}

int cmd_init(const ExperimentConfig& cfg, std::ostream& log) {
  if (!prepare_output(cfg, log)) return kExitConfig;
  const auto truth = make_truth(cfg);
  if (truth->rank() != 1) throw ConfigError("r", 0, "init traces need a rank-1 target");
  const auto seeds = seed_plan(cfg.seed);
  InitConfig ic;
  ic.iterations = cfg.resolved_init_T0();
  ic.schedule = cfg.init_schedule_value();
  ic.sign = cfg.init_sign;
  ic.seed = seeds.init;
  ic.log_base = cfg.log_base;

  const CVector v = truth->eigvecs().col(0);
  std::ostringstream csv;
  csv << "iter,overlap,frob_error\n" << std::setprecision(17);
  auto observe = [&](std::uint64_t t, const CVector& u) {
    if (t % cfg.log_every != 0 && t != ic.iterations) return;
    const double ov = std::norm(v.dot(u));
    // ||u u^dagger - v v^dagger||_F for unit u, v.
    csv << t << ',' << ov << ',' << std::sqrt(std::max(2.0 - 2.0 * ov, 0.0)) << '\n';
  };
  BatchSource src(truth, 1, measurement_mode(cfg), seeds.init_source);
  const FactorState u = run_online_init(ic, src, observe);

  MetaWriter extra;
  extra.add("init_T0_resolved", std::to_string(ic.iterations));
  extra.add("final_error", fmt(frobenius_distance(u, *truth)));
  write_atomically(fs::path(cfg.output) / "init.csv", csv.str());
  write_atomically(fs::path(cfg.output) / "meta.txt", meta_header(cfg, seeds, *truth) + extra.text);
  log << "init T0 " << ic.iterations << ", final frob_error " << fmt(frobenius_distance(u, *truth)) << "\n";
  return kExitOk;
}

SweepRow run_sweep_cell(const ExperimentConfig& cfg, const std::shared_ptr<const GroundTruth>& truth, int B,
                        int seed_index) {
  const std::uint64_t cell = mix_seed(cfg.seed, (static_cast<std::uint64_t>(B) << 20) + static_cast<std::uint64_t>(seed_index));
  const SeedPlan seeds = seed_plan(cell);
  SweepRow row{B, seed_index, 0, false};
  try {
    auto init = make_initial_state(cfg, truth, seeds);
    BatchSource source(truth, B, measurement_mode(cfg), seeds.source);
    SgdConfig sgd = sgd_config(cfg, *truth, B);
    if (!sgd.stop_tol) sgd.stop_tol = 1e-6;
    const RunTrace trace = run_sgd(sgd, source, init.state, truth.get());
    row.iters_to_tol = trace.rows.size();
    row.success = trace.rounds_to_tol.has_value();
  } catch (const DivergenceError& e) {
    row.iters_to_tol = e.round();
  } catch (const std::exception&) {
    row.success = false;
  }
  return row;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  if (cfg.sweep_B.empty()) throw ConfigError("sweep_B", 0, "must not be empty");
  const auto truth = make_truth(cfg);
  const auto per = static_cast<std::size_t>(cfg.sweep_seeds);
  std::vector<SweepRow> rows(cfg.sweep_B.size() * per);
  parallel_for(rows.size(), [&](std::size_t i) {
    rows[i] = run_sweep_cell(cfg, truth, cfg.sweep_B[i / per], static_cast<int>(i % per));
  });
  return rows;
}

int cmd_sweep_batch(const ExperimentConfig& cfg, std::ostream& log) {
  if (!prepare_output(cfg, log)) return kExitConfig;
  const auto rows = run_sweep(cfg);
  std::ostringstream csv;
  csv << "B,iters_to_tol,success\n";
  for (const auto& r : rows) csv << r.B << ',' << r.iters_to_tol << ',' << (r.success ? 1 : 0) << '\n';
  const auto truth = make_truth(cfg);
  write_atomically(fs::path(cfg.output) / "sweep.csv", csv.str());
  write_atomically(fs::path(cfg.output) / "meta.txt", meta_header(cfg, seed_plan(cfg.seed), *truth));
  log << "wrote " << rows.size() << " sweep rows\n";
  return kExitOk;
}

BenchRow bench_point(int n, int r, int B, int reps, std::uint64_t seed) {
  using Clock = std::chrono::steady_clock;
  const auto d = std::size_t{1} << n;
  Rng rng(seed);
  const CMatrix base = complex_gaussian(d, static_cast<std::size_t>(r), 1.0, rng);
  std::vector<PauliString> paulis;
  for (int i = 0; i < 64; ++i) paulis.push_back(sample_uniform_pauli(n, rng));

  // Each repetition times a block of calls long enough to swamp timer overhead.
  const std::size_t work = d * static_cast<std::size_t>(r);
  const std::size_t apply_block = std::max<std::size_t>(1, (std::size_t{1} << 20) / work);
  CMatrix m = base;
  auto time_apply = [&] {
    const auto start = Clock::now();
    for (std::size_t k = 0; k < apply_block; ++k) apply_pauli_inplace(paulis[k % paulis.size()], m);
    return std::chrono::duration<double, std::nano>(Clock::now() - start).count() / static_cast<double>(apply_block);
  };

  // Outcomes are synthetic: timing only needs well-formed batches, not a ground truth.
  std::vector<Batch> batches(8);
  for (auto& b : batches) {
    for (int k = 0; k < B; ++k) {
      b.push_back({sample_uniform_pauli(n, rng), std::uniform_real_distribution<double>(-1.0, 1.0)(rng), std::nullopt, 0.0});
    }
  }
  const std::size_t step_block = std::max<std::size_t>(1, (std::size_t{1} << 20) / (work * static_cast<std::size_t>(B)));
  CMatrix u = base * (1.0 / std::sqrt(static_cast<double>(d)));
  CMatrix grad, scratch;
  auto time_step = [&] {
    const auto start = Clock::now();
    for (std::size_t k = 0; k < step_block; ++k) {
      loss_and_gradient(u, batches[k % batches.size()], grad, scratch);
      u.noalias() -= 1e-9 * grad;
    }
    return std::chrono::duration<double, std::nano>(Clock::now() - start).count() / static_cast<double>(step_block);
  };

  for (int w = 0; w < 3; ++w) {
    time_apply();
    time_step();
  }
  std::vector<double> apply_t, step_t;
  for (int i = 0; i < reps; ++i) {
    apply_t.push_back(time_apply());
    step_t.push_back(time_step());
  }
  return {n, r, B, median(apply_t), median(step_t)};
}

std::vector<BenchRow> run_bench(const ExperimentConfig& cfg) {
  std::vector<BenchRow> rows;
  for (int n : cfg.bench_n) {
    for (int r : cfg.bench_r) {
      for (int B : cfg.bench_B) {
        rows.push_back(bench_point(n, r, B, cfg.bench_reps, mix_seed(cfg.seed, static_cast<std::uint64_t>(n))));
      }
    }
  }
  return rows;
}

int cmd_bench(const ExperimentConfig& cfg, std::ostream& log) {
  if (!prepare_output(cfg, log)) return kExitConfig;
  const auto rows = run_bench(cfg);
  std::ostringstream csv;
  csv << "n,r,B,apply_ns,step_ns\n";
  csv.precision(10);
  for (const auto& row : rows) {
    csv << row.n << ',' << row.r << ',' << row.B << ',' << row.apply_ns << ',' << row.step_ns << '\n';
  }
  write_atomically(fs::path(cfg.output) / "bench.csv", csv.str());
  MetaWriter m;
  m.text = dump_config(cfg);
  m.add("git_describe", git_describe());
  m.add("hardware_threads", std::to_string(std::thread::hardware_concurrency()));
  write_atomically(fs::path(cfg.output) / "meta.txt", m.text);
  log << "wrote " << rows.size() << " bench rows\n";
  return kExitOk;
}

}  // namespace qst::harness

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qst/harness/config.hpp"

namespace qst::harness {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitDivergence = 3 };

/// Loads cfg.truth_file when set, otherwise generates from the seed plan.
std::shared_ptr<const GroundTruth> make_truth(const ExperimentConfig& cfg);

MeasurementMode measurement_mode(const ExperimentConfig& cfg);

struct InitOutcome {
  FactorState state;
  std::vector<std::pair<std::string, std::string>> meta;
};

/// Builds U0 per cfg.init, drawing randomness from `seeds`.
InitOutcome make_initial_state(const ExperimentConfig& cfg, const std::shared_ptr<const GroundTruth>& truth,
                               const SeedPlan& seeds);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomically(const std::filesystem::path& path, const std::string& content);

std::string git_describe();

int cmd_gen(const ExperimentConfig& cfg, std::ostream& log);
int cmd_run(const ExperimentConfig& cfg, std::ostream& log);
int cmd_init(const ExperimentConfig& cfg, std::ostream& log);
int cmd_sweep_batch(const ExperimentConfig& cfg, std::ostream& log);
int cmd_bench(const ExperimentConfig& cfg, std::ostream& log);

struct SweepRow {
  int B = 0;
  int seed_index = 0;
  std::uint64_t iters_to_tol = 0;  // rounds executed when success is false
  bool success = false;
};

/// One (B, seed) cell of a batch-size sweep against a shared ground truth.
SweepRow run_sweep_cell(const ExperimentConfig& cfg, const std::shared_ptr<const GroundTruth>& truth, int B,
                        int seed_index);
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg);

struct BenchRow {
  int n = 0;
  int r = 0;
  int B = 0;
  double apply_ns = 0.0;
  double step_ns = 0.0;
};

/// Median per-call times over `reps` timed repetitions after a warmup.
BenchRow bench_point(int n, int r, int B, int reps, std::uint64_t seed);
std::vector<BenchRow> run_bench(const ExperimentConfig& cfg);

}  // namespace qst::harness

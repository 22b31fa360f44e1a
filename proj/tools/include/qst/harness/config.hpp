#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qst/estimator.hpp"
#include "qst/initializer.hpp"
#include "qst/state.hpp"

namespace qst::harness {

struct ConfigError : std::runtime_error {
  ConfigError(std::string key, int line, const std::string& message);
  std::string key;
  int line;  // 0 when the value came from a default
};

enum class MeasurementKind { exact, shots, shots_eps, shots_20d };
enum class InitKind { scaled_gaussian, online, spectral };

/// Constant in T0 = C0 delta^-2 d ln^2 d for online initialization.
/// Calibrated at n = 7, delta = 0.9, exact data: single-run success 0.78 at C0 = 32,
/// 0.90 at 36, 0.94 at 40 (100 seeds each).
inline constexpr double kDefaultInitC0 = 36.0;

struct ExperimentConfig {
  int n = 3;
  int r = 1;
  double kappa = 1.0;
  SpectrumShape spectrum_shape = SpectrumShape::geometric;
  Normalization normalization = Normalization::trace_one;
  std::string truth_file;  // empty: generate from seed

  int B = 1;
  std::uint64_t T = 1000;
  EtaPolicy::Kind eta_policy = EtaPolicy::Kind::appendix_rule;
  double eta = 0.1;  // fixed policy only
  double c1 = 1.0;
  double c2 = 1.0;
  std::optional<double> stop_tol;

  MeasurementKind measurement = MeasurementKind::exact;
  std::uint64_t shots = 1000;
  double epsilon0 = 0.5;

  InitKind init = InitKind::scaled_gaussian;
  double init_scale = 0.01;
  std::uint64_t init_T0 = 0;  // 0: derived from init_C0 and init_delta
  double init_C0 = kDefaultInitC0;
  double init_delta = 0.9;
  InitSchedule::Kind init_schedule = InitSchedule::Kind::theorem_40;
  double init_a = 40.0;  // custom schedule only
  int init_J = 1;        // 0: ceil(72 ln d)
  std::uint64_t init_m = 0;  // spectral samples; 0: 10 d
  int init_sign = 1;

  std::uint64_t seed = 0;
  std::string output = "out";

  std::vector<int> sweep_B = {1, 2, 4, 8, 16, 32};
  int sweep_seeds = 1;
  std::vector<int> bench_n = {8, 9, 10, 11, 12, 13, 14};
  std::vector<int> bench_r = {1, 2, 4};
  std::vector<int> bench_B = {1, 8, 64};
  int bench_reps = 30;

  bool wall_clock = false;
  LogBase log_base = LogBase::natural;
  std::uint64_t log_every = 1;

  std::size_t dim() const { return std::size_t{1} << n; }
  EtaPolicy eta_policy_value() const;
  InitSchedule init_schedule_value() const;
  /// Shots per measurement, or nullopt in exact mode.
  std::optional<std::uint64_t> resolved_shots() const;
  std::uint64_t resolved_init_T0() const;
  int resolved_init_J() const;
  std::uint64_t resolved_init_m() const;

  /// Throws ConfigError naming the first offending key.
  void validate(const std::map<std::string, int>& lines = {}) const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Flat `key = value` text; `#` starts a comment; unknown keys are rejected.
/// Keys beginning with `meta.` are informational (written into meta.txt) and ignored.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every key with its resolved value, one per line, in a fixed order.
std::string dump_config(const ExperimentConfig& cfg);

/// Help text listing every key with its default.
std::string config_help();

/// Seeds for the independent random streams of one experiment.
struct SeedPlan {
  std::uint64_t truth;
  std::uint64_t init;
  std::uint64_t init_source;
  std::uint64_t source;
};
SeedPlan seed_plan(std::uint64_t seed);

}  // namespace qst::harness

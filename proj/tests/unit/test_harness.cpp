#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qst/harness/commands.hpp"
#include "qst/state_io.hpp"

using namespace qst;
using namespace qst::harness;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qst_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, MinimalConfigFillsDefaults) {
  const auto cfg = parse_config("n=3\nr=1\nB=1\nT=1000\nseed=7\n");
  EXPECT_EQ(cfg.n, 3);
  EXPECT_EQ(cfg.T, 1000U);
  EXPECT_EQ(cfg.seed, 7U);
  const ExperimentConfig defaults;
  EXPECT_EQ(cfg.measurement, defaults.measurement);
  EXPECT_EQ(cfg.init_scale, 0.01);
  EXPECT_EQ(cfg.eta_policy, EtaPolicy::Kind::appendix_rule);
  EXPECT_FALSE(cfg.stop_tol.has_value());
}

TEST(Config, CommentsAndWhitespace) {
  const auto cfg = parse_config("# header\n\n  n = 4   # trailing\nstop_tol = 1e-6\nsweep_B = 1, 2,4\n");
  EXPECT_EQ(cfg.n, 4);
  EXPECT_EQ(cfg.stop_tol, 1e-6);
  EXPECT_EQ(cfg.sweep_B, (std::vector<int>{1, 2, 4}));
}

TEST(Config, ErrorsNameKeyAndLine) {
  auto expect_error = [](const std::string& text, const std::string& key, int line) {
    try {
      parse_config(text);
      FAIL() << "expected ConfigError for " << text;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.key, key) << e.what();
      EXPECT_EQ(e.line, line) << e.what();
      EXPECT_NE(std::string(e.what()).find(key), std::string::npos);
    }
  };
  expect_error("n=3\nB=0\n", "B", 2);
  expect_error("n=3\nbogus=1\n", "bogus", 2);
  expect_error("n=three\n", "n", 1);
  expect_error("n=3\nn=4\n", "n", 2);
  expect_error("measurement=maybe\n", "measurement", 1);
  expect_error("r=1\nkappa=2\n", "kappa", 2);
  expect_error("n=2\nr=5\n", "r", 2);
  expect_error("measurement=shots\nnormalization=spectral_one\n", "normalization", 2);
  expect_error("measurement=shots_eps\nepsilon0=1.5\n", "epsilon0", 2);
  expect_error("r=2\nkappa=2\ninit=online\n", "init", 3);
  expect_error("n=3\njust text\n", "just text", 2);
}

TEST(Config, PresetRoundTrip) {
  const auto cfg = load_config(fs::path(QST_CONFIG_DIR) / "appendix_shots20d.cfg");
  EXPECT_EQ(cfg.n, 7);
  EXPECT_EQ(cfg.r, 1);
  EXPECT_EQ(cfg.measurement, MeasurementKind::shots_20d);
  EXPECT_EQ(cfg.eta_policy, EtaPolicy::Kind::appendix_rule);
  EXPECT_EQ(cfg.resolved_shots(), 2560U);
  const std::string dumped = dump_config(cfg);
  const auto again = parse_config(dumped);
  EXPECT_EQ(again, cfg);
  EXPECT_EQ(dump_config(again), dumped);
}

TEST(Config, AllPresetsLoad) {
  for (const auto& entry : fs::directory_iterator(QST_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
  }
}

TEST(Config, MetaKeysAreIgnored) {
  EXPECT_NO_THROW(parse_config("n=3\nmeta.git_describe = abc\n"));
}

TEST(Config, DerivedValues) {
  auto cfg = parse_config("n=7\ninit=online\ninit_C0=2\ninit_delta=0.5\ninit_J=0\nmeasurement=shots_eps\nepsilon0=0.5\n");
  const double l = std::log(128.0);
  EXPECT_EQ(cfg.resolved_init_T0(), static_cast<std::uint64_t>(std::ceil(2.0 * 128.0 * l * l / 0.25)));
  EXPECT_EQ(cfg.resolved_init_J(), 350);
  EXPECT_EQ(cfg.resolved_shots(), 278235U);
  EXPECT_EQ(cfg.resolved_init_m(), 1280U);
}

TEST(CmdRun, WritesTraceAndMeta) {
  const fs::path dir = scratch_dir("run") / "nested";
  auto cfg = parse_config("n=3\nr=1\nB=2\nT=3000\nstop_tol=1e-6\nseed=4\n");
  cfg.output = dir.string();
  std::ostringstream log;
  ASSERT_EQ(cmd_run(cfg, log), kExitOk) << log.str();
  const std::string trace = read_file(dir / "trace.csv");
  EXPECT_EQ(trace.rfind("round,frob_error,batch_loss,cum_samples,wall_ns\n", 0), 0U);
  const std::string meta = read_file(dir / "meta.txt");
  EXPECT_NE(meta.find("meta.git_describe = "), std::string::npos);
  EXPECT_NE(meta.find("meta.source_seed = "), std::string::npos);
  EXPECT_NE(meta.find("meta.status = ok"), std::string::npos);
  // meta.txt is itself a loadable config reproducing the run
  auto from_meta = parse_config(meta);
  EXPECT_EQ(from_meta, cfg);
  EXPECT_FALSE(fs::exists(dir / "trace.csv.tmp"));
  fs::remove_all(dir.parent_path());
}

TEST(CmdRun, ByteIdenticalAcrossRuns) {
  const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
  auto cfg = parse_config("n=4\nr=1\nB=2\nT=500\nmeasurement=shots_20d\nseed=11\n");
  std::ostringstream log;
  cfg.output = a.string();
  ASSERT_EQ(cmd_run(cfg, log), kExitOk);
  cfg.output = b.string();
  ASSERT_EQ(cmd_run(cfg, log), kExitOk);
  EXPECT_EQ(read_file(a / "trace.csv"), read_file(b / "trace.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(CmdRun, UnwritableOutputAndDivergence) {
  auto cfg = parse_config("n=3\nT=10\n");
  std::ostringstream log;
  cfg.output = "/proc/qst_cannot_write_here";
  EXPECT_EQ(cmd_run(cfg, log), kExitConfig);

  const fs::path dir = scratch_dir("diverge");
  cfg = parse_config("n=3\nB=4\nT=1000\neta_policy=fixed\neta=50\ninit_scale=1\n");
  cfg.output = dir.string();
  EXPECT_EQ(cmd_run(cfg, log), kExitDivergence);
  EXPECT_NE(read_file(dir / "meta.txt").find("meta.status = diverged"), std::string::npos);
  fs::remove_all(dir);
}

TEST(CmdGen, TruthFileFeedsRun) {
  const fs::path dir = scratch_dir("gen");
  auto cfg = parse_config("n=3\nr=2\nkappa=2\nseed=5\n");
  cfg.output = dir.string();
  std::ostringstream log;
  ASSERT_EQ(cmd_gen(cfg, log), kExitOk);
  auto loaded = std::get<GroundTruth>(load_qst(dir / "truth.qst"));
  EXPECT_EQ(loaded.eigvecs(), make_truth(cfg)->eigvecs());
  cfg.truth_file = (dir / "truth.qst").string();
  EXPECT_EQ(make_truth(cfg)->spectrum(), loaded.spectrum());
  fs::remove_all(dir);
}

TEST(CmdInit, WritesOverlapTrace) {
  const fs::path dir = scratch_dir("init");
  auto cfg = parse_config("n=3\ninit=online\ninit_T0=400\nlog_every=100\n");
  cfg.output = dir.string();
  std::ostringstream log;
  ASSERT_EQ(cmd_init(cfg, log), kExitOk);
  const std::string csv = read_file(dir / "init.csv");
  EXPECT_EQ(csv.rfind("iter,overlap,frob_error\n", 0), 0U);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  fs::remove_all(dir);
}

TEST(Sweep, SingleElementAndDeterminism) {
  auto cfg = parse_config("n=3\nT=20000\nsweep_B=4\nstop_tol=1e-6\nseed=2\n");
  const auto rows = run_sweep(cfg);
  ASSERT_EQ(rows.size(), 1U);
  EXPECT_EQ(rows[0].B, 4);
  EXPECT_TRUE(rows[0].success);
  const auto again = run_sweep(cfg);
  EXPECT_EQ(again[0].iters_to_tol, rows[0].iters_to_tol);
}

TEST(Bench, ProducesPositiveTimings) {
  const auto row = bench_point(6, 1, 2, 30, 1);
  EXPECT_GT(row.apply_ns, 0.0);
  EXPECT_GT(row.step_ns, row.apply_ns);
}

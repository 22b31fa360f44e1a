#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "qst/harness/commands.hpp"
#include "qst/state_io.hpp"

using namespace qst::harness;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig resolve(const Options& opt) {
  ExperimentConfig cfg = load_config(opt.config);
  if (const char* env = std::getenv("QST_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("QST_SEED", 0, std::string("not an unsigned integer: ") + env);
    }
  }
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.out.empty()) cfg.output = opt.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online quantum state tomography experiments"};
  app.footer(config_help());
  app.require_subcommand(1);

  Options opt;
  int (*command)(const ExperimentConfig&, std::ostream&) = nullptr;
  auto add = [&](const char* name, const char* help, int (*fn)(const ExperimentConfig&, std::ostream&)) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "key = value config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (overrides `output`)");
    sub->add_option("--seed", opt.seed, "master seed (overrides `seed` and QST_SEED)");
    sub->callback([&command, fn] { command = fn; });
  };
  add("gen", "generate the ground truth and write truth.qst", cmd_gen);
  add("run", "initialize then run mini-batch SGD; writes trace.csv and meta.txt", cmd_run);
  add("init", "online initialization trace; writes init.csv", cmd_init);
  add("sweep-batch", "iterations to tolerance across batch sizes; writes sweep.csv", cmd_sweep_batch);
  add("bench", "per-call timings of apply_pauli and one SGD step; writes bench.csv", cmd_bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    return command(resolve(opt), std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qst::QstFormatError& e) {
    std::cerr << "bad .qst file: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qst::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

#include "qst/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace qst::harness {

ConfigError::ConfigError(std::string k, int l, const std::string& message)
    : std::runtime_error(l > 0 ? "config line " + std::to_string(l) + ": key '" + k + "': " + message
                               : "config key '" + k + "': " + message),
      key(std::move(k)),
      line(l) {}

namespace {

struct BadValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_int(const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw BadValue("expected an integer, got '" + v + "'");
  return out;
}

double parse_double(const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    throw BadValue("expected a finite number, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw BadValue("expected true or false, got '" + v + "'");
}

std::vector<int> parse_list(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int<int>(trim(item)));
  if (out.empty()) throw BadValue("expected a comma-separated integer list");
  return out;
}

std::string fmt_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::string fmt_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

template <typename E>
E parse_enum(const std::string& v, std::initializer_list<std::pair<const char*, E>> table) {
  std::string options;
  for (const auto& [name, value] : table) {
    if (v == name) return value;
    options += (options.empty() ? "" : " | ") + std::string(name);
  }
  throw BadValue("expected one of " + options + ", got '" + v + "'");
}

template <typename E>
std::string enum_name(E value, std::initializer_list<std::pair<const char*, E>> table) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "?";
}

const std::initializer_list<std::pair<const char*, SpectrumShape>> kShapes = {
    {"geometric", SpectrumShape::geometric}, {"linear", SpectrumShape::linear}};
const std::initializer_list<std::pair<const char*, Normalization>> kNorms = {
    {"trace_one", Normalization::trace_one}, {"spectral_one", Normalization::spectral_one}};
const std::initializer_list<std::pair<const char*, EtaPolicy::Kind>> kEta = {
    {"appendix_rule", EtaPolicy::Kind::appendix_rule},
    {"theorem_rule", EtaPolicy::Kind::theorem_rule},
    {"fixed", EtaPolicy::Kind::fixed}};
const std::initializer_list<std::pair<const char*, MeasurementKind>> kMeas = {
    {"exact", MeasurementKind::exact},
    {"shots", MeasurementKind::shots},
    {"shots_eps", MeasurementKind::shots_eps},
    {"shots_20d", MeasurementKind::shots_20d}};
const std::initializer_list<std::pair<const char*, InitKind>> kInit = {
    {"scaled_gaussian", InitKind::scaled_gaussian}, {"online", InitKind::online}, {"spectral", InitKind::spectral}};
const std::initializer_list<std::pair<const char*, InitSchedule::Kind>> kSched = {
    {"theorem_40", InitSchedule::Kind::theorem_40},
    {"proof_80", InitSchedule::Kind::proof_80},
    {"custom", InitSchedule::Kind::custom}};
const std::initializer_list<std::pair<const char*, LogBase>> kLog = {{"natural", LogBase::natural},
                                                                     {"two", LogBase::two}};

struct Key {
  const char* name;
  const char* help;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define QST_INT_KEY(field, T, help)                                                  \
  Key {                                                                              \
    #field, help, [](ExperimentConfig& c, const std::string& v) { c.field = parse_int<T>(v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.field); }            \
  }
#define QST_DOUBLE_KEY(field, help)                                                   \
  Key {                                                                               \
    #field, help, [](ExperimentConfig& c, const std::string& v) { c.field = parse_double(v); }, \
        [](const ExperimentConfig& c) { return fmt_double(c.field); }                 \
  }
#define QST_ENUM_KEY(field, table, help)                                                   \
  Key {                                                                                    \
    #field, help, [](ExperimentConfig& c, const std::string& v) { c.field = parse_enum(v, table); }, \
        [](const ExperimentConfig& c) { return enum_name(c.field, table); }                \
  }
#define QST_LIST_KEY(field, help)                                                    \
  Key {                                                                              \
    #field, help, [](ExperimentConfig& c, const std::string& v) { c.field = parse_list(v); }, \
        [](const ExperimentConfig& c) { return fmt_list(c.field); }                  \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      QST_INT_KEY(n, int, "qubit count"),
      QST_INT_KEY(r, int, "rank of the target state and of U"),
      QST_DOUBLE_KEY(kappa, "condition number of the target spectrum (1 when r = 1)"),
      QST_ENUM_KEY(spectrum_shape, kShapes, "geometric | linear"),
      QST_ENUM_KEY(normalization, kNorms, "trace_one | spectral_one"),
      Key{"truth_file", "optional .qst ground truth (overrides n, r, kappa, shape, normalization)",
          [](ExperimentConfig& c, const std::string& v) { c.truth_file = v; },
          [](const ExperimentConfig& c) { return c.truth_file; }},
      QST_INT_KEY(B, int, "batch size"),
      QST_INT_KEY(T, std::uint64_t, "SGD round budget"),
      QST_ENUM_KEY(eta_policy, kEta, "appendix_rule | theorem_rule | fixed"),
      QST_DOUBLE_KEY(eta, "learning rate for eta_policy = fixed"),
      QST_DOUBLE_KEY(c1, "constant in the eta <= c1/(kappa r) regime check"),
      QST_DOUBLE_KEY(c2, "constant of theorem_rule: eta = c2/(kappa r ln d)"),
      Key{"stop_tol", "stop once the error drops below this (none: run all T rounds)",
          [](ExperimentConfig& c, const std::string& v) {
            if (v == "none") {
              c.stop_tol.reset();
            } else {
              c.stop_tol = parse_double(v);
            }
          },
          [](const ExperimentConfig& c) { return c.stop_tol ? fmt_double(*c.stop_tol) : "none"; }},
      QST_ENUM_KEY(measurement, kMeas, "exact | shots | shots_eps | shots_20d"),
      QST_INT_KEY(shots, std::uint64_t, "shots per measurement when measurement = shots"),
      QST_DOUBLE_KEY(epsilon0, "noise level when measurement = shots_eps (shots = ceil(112 d ln d / eps0^2))"),
      QST_ENUM_KEY(init, kInit, "scaled_gaussian | online | spectral"),
      QST_DOUBLE_KEY(init_scale, "scale of the Gaussian initial factor"),
      QST_INT_KEY(init_T0, std::uint64_t, "online init iterations (0: ceil(C0 d ln^2 d / delta^2))"),
      QST_DOUBLE_KEY(init_C0, "online init budget constant"),
      QST_DOUBLE_KEY(init_delta, "online init target radius"),
      QST_ENUM_KEY(init_schedule, kSched, "theorem_40 | proof_80 | custom"),
      QST_DOUBLE_KEY(init_a, "schedule constant for init_schedule = custom"),
      QST_INT_KEY(init_J, int, "online init replicas combined by geometric median (0: ceil(72 ln d))"),
      QST_INT_KEY(init_m, std::uint64_t, "spectral init sample count (0: 10 d)"),
      QST_INT_KEY(init_sign, int, "online init update sign, +1 or -1"),
      QST_INT_KEY(seed, std::uint64_t, "master seed (QST_SEED overrides)"),
      Key{"output", "output directory", [](ExperimentConfig& c, const std::string& v) { c.output = v; },
          [](const ExperimentConfig& c) { return c.output; }},
      QST_LIST_KEY(sweep_B, "batch sizes for sweep-batch"),
      QST_INT_KEY(sweep_seeds, int, "seeds per batch size for sweep-batch"),
      QST_LIST_KEY(bench_n, "qubit counts for bench"),
      QST_LIST_KEY(bench_r, "ranks for bench"),
      QST_LIST_KEY(bench_B, "batch sizes for bench"),
      QST_INT_KEY(bench_reps, int, "timed repetitions per bench point"),
      Key{"wall_clock", "write measured wall_ns into trace.csv (false keeps it byte-reproducible)",
          [](ExperimentConfig& c, const std::string& v) { c.wall_clock = parse_bool(v); },
          [](const ExperimentConfig& c) { return std::string(c.wall_clock ? "true" : "false"); }},
      QST_ENUM_KEY(log_base, kLog, "natural | two"),
      QST_INT_KEY(log_every, std::uint64_t, "init trace row stride"),
  };
  return table;
}

#undef QST_INT_KEY
#undef QST_DOUBLE_KEY
#undef QST_ENUM_KEY
#undef QST_LIST_KEY

const Key* find_key(const std::string& name) {
  for (const auto& k : keys()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

}  // namespace

EtaPolicy ExperimentConfig::eta_policy_value() const {
  switch (eta_policy) {
    case EtaPolicy::Kind::appendix_rule: return EtaPolicy::appendix();
    case EtaPolicy::Kind::theorem_rule: return EtaPolicy::theorem(c2);
    case EtaPolicy::Kind::fixed: return EtaPolicy::fixed(eta);
  }
  return EtaPolicy::appendix();
}

InitSchedule ExperimentConfig::init_schedule_value() const {
  switch (init_schedule) {
    case InitSchedule::Kind::theorem_40: return InitSchedule::theorem();
    case InitSchedule::Kind::proof_80: return InitSchedule::proof();
    case InitSchedule::Kind::custom: return InitSchedule::custom(init_a);
  }
  return InitSchedule::theorem();
}

std::optional<std::uint64_t> ExperimentConfig::resolved_shots() const {
  switch (measurement) {
    case MeasurementKind::exact: return std::nullopt;
    case MeasurementKind::shots: return shots;
    case MeasurementKind::shots_eps: return shots_for_epsilon(epsilon0, dim(), log_base);
    case MeasurementKind::shots_20d: return shots_20d(dim());
  }
  return std::nullopt;
}

std::uint64_t ExperimentConfig::resolved_init_T0() const {
  if (init_T0 > 0) return init_T0;
  const double d = static_cast<double>(dim());
  const double l = log_dim(d, log_base);
  return static_cast<std::uint64_t>(std::ceil(init_C0 * d * l * l / (init_delta * init_delta)));
}

int ExperimentConfig::resolved_init_J() const {
  return init_J > 0 ? init_J : boosting_replicas(dim(), log_base);
}

std::uint64_t ExperimentConfig::resolved_init_m() const {
  return init_m > 0 ? init_m : 10 * static_cast<std::uint64_t>(dim());
}

void ExperimentConfig::validate(const std::map<std::string, int>& lines) const {
  auto fail = [&](const std::string& key, const std::string& msg) {
    auto it = lines.find(key);
    throw ConfigError(key, it == lines.end() ? 0 : it->second, msg);
  };
  if (n < 1 || n > 30) fail("n", "must lie in [1, 30]");
  if (r < 1 || static_cast<std::size_t>(r) > dim()) fail("r", "must lie in [1, 2^n]");
  if (!(kappa >= 1.0)) fail("kappa", "must be >= 1");
  if (r == 1 && kappa != 1.0) fail("kappa", "must equal 1 when r = 1");
  if (B < 1) fail("B", "must be >= 1");
  if (static_cast<double>(B) > static_cast<double>(dim()) * static_cast<double>(dim())) fail("B", "must be <= d^2");
  if (T < 1) fail("T", "must be >= 1");
  if (eta_policy == EtaPolicy::Kind::fixed && !(eta > 0.0)) fail("eta", "must be > 0");
  if (!(c1 > 0.0)) fail("c1", "must be > 0");
  if (!(c2 > 0.0)) fail("c2", "must be > 0");
  if (stop_tol && !(*stop_tol > 0.0)) fail("stop_tol", "must be > 0");
  if (measurement == MeasurementKind::shots && shots < 1) fail("shots", "must be >= 1");
  if (measurement == MeasurementKind::shots_eps && !(epsilon0 > 0.0 && epsilon0 <= 1.0)) {
    fail("epsilon0", "must lie in (0, 1]");
  }
  if (measurement != MeasurementKind::exact && normalization != Normalization::trace_one && truth_file.empty()) {
    fail("normalization", "shot measurements need trace_one");
  }
  if (!(init_scale > 0.0)) fail("init_scale", "must be > 0");
  if (!(init_C0 > 0.0)) fail("init_C0", "must be > 0");
  if (!(init_delta > 0.0)) fail("init_delta", "must be > 0");
  if (init_schedule == InitSchedule::Kind::custom && !(init_a > 0.0)) fail("init_a", "must be > 0");
  if (init_J < 0) fail("init_J", "must be >= 0");
  if (init_sign != 1 && init_sign != -1) fail("init_sign", "must be +1 or -1");
  if (init == InitKind::online && r != 1) fail("init", "online initialization supports r = 1 only");
  if (init == InitKind::spectral && n > kDenseQubitLimit) fail("init", "spectral initialization is dense; n <= 12");
  if (sweep_seeds < 1) fail("sweep_seeds", "must be >= 1");
  for (int b : sweep_B) {
    if (b < 1) fail("sweep_B", "entries must be >= 1");
  }
  for (int v : bench_n) {
    if (v < 1 || v > 30) fail("bench_n", "entries must lie in [1, 30]");
  }
  for (int v : bench_r) {
    if (v < 1) fail("bench_r", "entries must be >= 1");
  }
  for (int v : bench_B) {
    if (v < 1) fail("bench_B", "entries must be >= 1");
  }
  if (bench_reps < 30) fail("bench_reps", "must be >= 30");
  if (log_every < 1) fail("log_every", "must be >= 1");
  if (output.empty()) fail("output", "must not be empty");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line, line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("meta.", 0) == 0) continue;
    const Key* k = find_key(key);
    if (!k) throw ConfigError(key, line_no, "unknown key");
    if (lines.count(key)) throw ConfigError(key, line_no, "duplicate key");
    try {
      k->set(cfg, value);
    } catch (const BadValue& e) {
      throw ConfigError(key, line_no, e.what());
    } catch (const InvalidArgument& e) {
      throw ConfigError(key, line_no, e.what());
    }
    lines[key] = line_no;
  }
  cfg.validate(lines);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", 0, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(cfg) + "\n";
  return out;
}

std::string config_help() {
  const ExperimentConfig defaults;
  std::string out = "Config keys (key = value, '#' comments):\n";
  for (const auto& k : keys()) {
    std::string def = k.get(defaults);
    if (def.empty()) def = "\"\"";
    out += "  " + std::string(k.name) + " [" + def + "]  " + k.help + "\n";
  }
  return out;
}

SeedPlan seed_plan(std::uint64_t seed) {
  return {mix_seed(seed, 1), mix_seed(seed, 2), mix_seed(seed, 3), mix_seed(seed, 4)};
}

}  // namespace qst::harness

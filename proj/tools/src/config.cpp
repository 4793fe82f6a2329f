#include "mfcascade_tools/config.hpp"

#include <mfcascade/error.hpp>

namespace mfc::tools {

namespace {

constexpr std::pair<ExperimentKind, std::string_view> kKinds[] = {
    {ExperimentKind::spectrum, "spectrum"},       {ExperimentKind::convergence, "convergence"},
    {ExperimentKind::growthspeed, "growthspeed"}, {ExperimentKind::ldrenewal, "ldrenewal"},
    {ExperimentKind::ubiquity, "ubiquity"},       {ExperimentKind::validate, "validate"},
    {ExperimentKind::selftest, "selftest"},
};

int get_int(const KeyValues& kv, const std::string& key, int fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : static_cast<int>(parse_integer(it->second));
}

double get_real(const KeyValues& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : parse_real(it->second);
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKinds)
    if (k == kind) return name;
  return "unknown";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKinds)
    if (n == name) return k;
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::spectrum:
    case ExperimentKind::validate:
    case ExperimentKind::selftest:
      c.model = WeightModel::deterministic({0.25, 0.75});
      c.depth = 12;
      c.q = uniform_grid(-5.0, 5.0, 0.1);
      c.alpha = uniform_grid(0.45, 1.95, 0.05);
      break;
    case ExperimentKind::convergence:
      c.model = WeightModel::lognormal(2, 0.1);
      c.depth = 18;
      c.j_min = 8;
      c.replicas = 200;
      c.q = {-1.0, 0.5, 2.0};
      break;
    case ExperimentKind::growthspeed:
      c.model = WeightModel::lognormal(2, 0.1);
      c.depth = 14;
      c.sample_depth = 16;
      c.samples = 200;
      c.replicas = 5;
      c.q = {-1.0, 0.5, 2.0};
      break;
    case ExperimentKind::ldrenewal:
      c.model = WeightModel::two_point(2, 0.3, 0.7, 0.5);
      c.depth = 16;
      c.replicas = 100;
      c.q = {-2.0, -1.0, 0.5, 2.0};
      break;
    case ExperimentKind::ubiquity:
      c.model = WeightModel::deterministic({0.5, 0.5});
      c.depth = 18;
      c.alpha = {1.0};
      c.xi = {1.0, 1.5, 2.0};
      c.q = {0.0};
      break;
  }
  return c;
}

KeyValues ExperimentConfig::to_config() const {
  KeyValues kv;
  kv["experiment"] = std::string(to_string(kind));
  model_to_config(model, kv);
  kv["seed"] = std::to_string(seed);
  kv["depth"] = std::to_string(depth);
  kv["replicas"] = std::to_string(replicas);
  kv["tail_depth"] = std::to_string(tail_depth);
  kv["max_entries"] = std::to_string(max_entries);
  kv["q"] = format_real_list(q);
  kv["alpha"] = format_real_list(alpha);
  kv["xi"] = format_real_list(xi);
  kv["eps"] = eps;
  kv["sj"] = sj;
  kv["rho_alpha"] = format_real(rho_alpha);
  kv["j_min"] = std::to_string(j_min);
  kv["samples"] = std::to_string(samples);
  kv["sample_depth"] = std::to_string(sample_depth);
  kv["neighbors"] = std::to_string(neighbors);
  kv["fraction"] = format_real(fraction);
  kv["margin"] = std::to_string(margin);
  kv["iteration"] = std::to_string(iteration);
  kv["horizon"] = std::to_string(horizon);
  kv["gs_horizon"] = std::to_string(gs_horizon);
  kv["tolerance"] = format_real(tolerance);
  kv["pass_threshold"] = format_real(pass_threshold);
  kv["threads"] = std::to_string(threads);
  kv["out"] = out_dir;
  return kv;
}

ExperimentConfig ExperimentConfig::from_config(const KeyValues& kv) {
  const auto exp = kv.find("experiment");
  if (exp == kv.end()) throw ConfigError("config: missing 'experiment'");
  if (kv.find("model.kind") == kv.end()) throw ConfigError("config: missing 'model.kind'");
  const auto known = default_config(experiment_kind_from_string(exp->second)).to_config();
  for (const auto& [key, value] : kv) {
    if (key.rfind("model.", 0) == 0) continue;
    if (known.find(key) == known.end()) throw ConfigError("config: unknown key '" + key + "'");
  }
  ExperimentConfig c = default_config(experiment_kind_from_string(exp->second));
  c.model = model_from_config(kv);
  if (const auto it = kv.find("seed"); it != kv.end()) {
    const auto s = parse_integer(it->second);
    if (s < 0) throw ConfigError("config: seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  c.depth = get_int(kv, "depth", c.depth);
  c.replicas = get_int(kv, "replicas", c.replicas);
  c.tail_depth = get_int(kv, "tail_depth", c.tail_depth);
  if (const auto it = kv.find("max_entries"); it != kv.end())
    c.max_entries = static_cast<std::size_t>(parse_integer(it->second));
  if (const auto it = kv.find("q"); it != kv.end()) c.q = parse_real_list(it->second);
  if (const auto it = kv.find("alpha"); it != kv.end()) c.alpha = parse_real_list(it->second);
  if (const auto it = kv.find("xi"); it != kv.end()) c.xi = parse_real_list(it->second);
  if (const auto it = kv.find("eps"); it != kv.end()) c.eps = it->second;
  if (const auto it = kv.find("sj"); it != kv.end()) c.sj = it->second;
  c.rho_alpha = get_real(kv, "rho_alpha", c.rho_alpha);
  c.j_min = get_int(kv, "j_min", c.j_min);
  c.samples = get_int(kv, "samples", c.samples);
  c.sample_depth = get_int(kv, "sample_depth", c.sample_depth);
  c.neighbors = get_int(kv, "neighbors", c.neighbors);
  c.fraction = get_real(kv, "fraction", c.fraction);
  c.margin = get_int(kv, "margin", c.margin);
  c.iteration = get_int(kv, "iteration", c.iteration);
  c.horizon = get_int(kv, "horizon", c.horizon);
  c.gs_horizon = get_int(kv, "gs_horizon", c.gs_horizon);
  c.tolerance = get_real(kv, "tolerance", c.tolerance);
  c.pass_threshold = get_real(kv, "pass_threshold", c.pass_threshold);
  c.threads = get_int(kv, "threads", c.threads);
  if (const auto it = kv.find("out"); it != kv.end()) c.out_dir = it->second;
  if (c.depth < 1) throw ConfigError("config: depth must be >= 1");
  if (c.replicas < 1) throw ConfigError("config: replicas must be >= 1");
  if (c.tail_depth < 0) throw ConfigError("config: tail_depth must be >= 0");
  return c;
}

}  // namespace mfc::tools

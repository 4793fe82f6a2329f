#include "mfcascade/config_io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "mfcascade/error.hpp"

namespace mfc {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string key(std::string_view prefix, std::string_view name) { return std::string(prefix) + std::string(name); }

const std::string& require(const KeyValues& kv, const std::string& k) {
  auto it = kv.find(k);
  if (it == kv.end()) throw ConfigError("missing configuration key '" + k + "'");
  return it->second;
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = line;
    if (auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const auto k = trim(v.substr(0, eq));
    if (k.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    kv[std::string(k)] = std::string(trim(v.substr(eq + 1)));
  }
  return kv;
}

KeyValues parse_key_values(std::string_view text) {
  std::istringstream is{std::string(text)};
  return parse_key_values(is);
}

KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  return parse_key_values(in);
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string format_real(double x) {
  // shortest text that parses back to the same double
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

double parse_real(std::string_view text) {
  text = trim(text);
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("not a real number: '" + std::string(text) + "'");
  return x;
}

long long parse_integer(std::string_view text) {
  text = trim(text);
  long long x = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("not an integer: '" + std::string(text) + "'");
  return x;
}

std::vector<double> parse_real_list(std::string_view text) {
  text = trim(text);
  std::vector<double> out;
  if (text.empty()) return out;
  if (text.find(':') != std::string_view::npos && text.find(',') == std::string_view::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw ConfigError("range must read lo:hi:step, got '" + std::string(text) + "'");
    const double lo = parse_real(text.substr(0, c1));
    const double hi = parse_real(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = parse_real(text.substr(c2 + 1));
    if (!(step > 0.0) || hi < lo) throw ConfigError("range needs step > 0 and hi >= lo");
    return uniform_grid(lo, hi, step);
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    out.push_back(parse_real(item));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string format_real_list(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += format_real(xs[i]);
  }
  return s;
}

WeightModel model_from_config(const KeyValues& kv, std::string_view prefix) {
  const auto kind = weight_kind_from_string(require(kv, key(prefix, "kind")));
  auto real = [&](std::string_view name) { return parse_real(require(kv, key(prefix, name))); };
  auto base = [&]() -> int {
    auto it = kv.find(key(prefix, "b"));
    return it == kv.end() ? 2 : static_cast<int>(parse_integer(it->second));
  };
  switch (kind) {
    case WeightKind::deterministic_vector: {
      auto w = parse_real_list(require(kv, key(prefix, "weights")));
      if (auto it = kv.find(key(prefix, "b")); it != kv.end() && parse_integer(it->second) != static_cast<long long>(w.size()))
        throw ConfigError("deterministic model: b does not match the number of weights");
      return WeightModel::deterministic(std::move(w));
    }
    case WeightKind::lognormal_iid:
      return WeightModel::lognormal(base(), real("sigma2"));
    case WeightKind::two_point_iid:
      return WeightModel::two_point(base(), real("low"), real("high"), real("p_high"));
    case WeightKind::custom_sampler: {
      const auto& sampler = require(kv, key(prefix, "sampler"));
      MonteCarloOptions mc;
      if (auto it = kv.find(key(prefix, "mc_samples")); it != kv.end())
        mc.samples = static_cast<std::size_t>(parse_integer(it->second));
      if (auto it = kv.find(key(prefix, "mc_batches")); it != kv.end())
        mc.batches = static_cast<std::size_t>(parse_integer(it->second));
      if (auto it = kv.find(key(prefix, "mc_seed")); it != kv.end())
        mc.seed = static_cast<std::uint64_t>(parse_integer(it->second));
      if (sampler != "uniform-iid")
        throw ConfigError("unknown custom sampler '" + sampler + "' (available: uniform-iid)");
      auto m = WeightModel::uniform_iid(base(), real("low"), real("high"), mc);
      if (auto it = kv.find(key(prefix, "tilt_q")); it != kv.end()) m = tilted_model(m, parse_real(it->second));
      return m;
    }
  }
  throw ConfigError("unreachable model kind");
}

void model_to_config(const WeightModel& model, KeyValues& kv, std::string_view prefix) {
  kv[key(prefix, "kind")] = std::string(to_string(model.kind()));
  kv[key(prefix, "b")] = std::to_string(model.base());
  if (model.kind() == WeightKind::deterministic_vector)
    kv[key(prefix, "weights")] = format_real_list(model.fixed_weights());
  if (model.kind() == WeightKind::custom_sampler) {
    kv[key(prefix, "sampler")] = model.sampler_name();
    kv[key(prefix, "mc_samples")] = std::to_string(model.monte_carlo().samples);
    kv[key(prefix, "mc_batches")] = std::to_string(model.monte_carlo().batches);
    kv[key(prefix, "mc_seed")] = std::to_string(static_cast<long long>(model.monte_carlo().seed));
  }
  for (const auto& [k, v] : model.parameters()) kv[key(prefix, k)] = format_real(v);
}

void ModelRegistry::add(std::string name, WeightModel model) {
  if (name.empty() || name.find('.') != std::string::npos)
    throw ConfigError("model names must be non-empty and contain no '.'");
  models_.insert_or_assign(std::move(name), std::move(model));
}

const WeightModel& ModelRegistry::get(const std::string& name) const {
  auto it = models_.find(name);
  if (it == models_.end()) throw ConfigError("no model named '" + name + "'");
  return it->second;
}

std::vector<std::string> ModelRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : models_) out.push_back(k);
  return out;
}

KeyValues ModelRegistry::to_config() const {
  KeyValues kv;
  for (const auto& [name, model] : models_) model_to_config(model, kv, name + ".");
  return kv;
}

ModelRegistry ModelRegistry::from_config(const KeyValues& kv) {
  std::set<std::string> names;
  for (const auto& [k, v] : kv) {
    const auto dot = k.find('.');
    if (dot != std::string::npos && k.substr(dot + 1) == "kind") names.insert(k.substr(0, dot));
  }
  ModelRegistry reg;
  for (const auto& n : names) reg.add(n, model_from_config(kv, n + "."));
  return reg;
}

}  // namespace mfc

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mfcascade/weights.hpp"

namespace mfc {

/// Ordered key=value pairs. '#' starts a comment; blank lines are ignored.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in);
KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values(const std::string& path);
std::string format_key_values(const KeyValues& kv);

/// Shortest-exact text form of a double (17 significant digits).
std::string format_real(double x);
double parse_real(std::string_view text);
long long parse_integer(std::string_view text);
/// Comma separated reals; "lo:hi:step" expands to a uniform grid.
std::vector<double> parse_real_list(std::string_view text);
std::string format_real_list(const std::vector<double>& xs);

/// Model <-> `prefix`kind, `prefix`b and kind-specific parameters:
///   deterministic-vector : weights=w0,w1,...
///   lognormal-iid        : sigma2
///   two-point-iid        : low, high, p_high
///   custom-sampler       : sampler=uniform-iid, low, high [, tilt_q]
WeightModel model_from_config(const KeyValues& kv, std::string_view prefix = "model.");
void model_to_config(const WeightModel& model, KeyValues& kv, std::string_view prefix = "model.");

/// Named collection of weight models, serialized as `name.kind=...` blocks.
class ModelRegistry {
 public:
  void add(std::string name, WeightModel model);
  const WeightModel& get(const std::string& name) const;
  bool contains(const std::string& name) const { return models_.count(name) != 0; }
  std::vector<std::string> names() const;

  KeyValues to_config() const;
  static ModelRegistry from_config(const KeyValues& kv);

 private:
  std::map<std::string, WeightModel> models_;
};

}  // namespace mfc

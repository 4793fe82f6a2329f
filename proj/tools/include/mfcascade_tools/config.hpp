#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <mfcascade/config_io.hpp>
#include <mfcascade/weights.hpp>

namespace mfc::tools {

enum class ExperimentKind { spectrum, convergence, growthspeed, ldrenewal, ubiquity, validate, selftest };

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

/// Everything that determines an experiment's output. Round-trips through
/// the key=value format; `threads` and `out_dir` never change file contents.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::spectrum;
  WeightModel model = WeightModel::deterministic({0.25, 0.75});
  std::uint64_t seed = 1;
  int depth = 12;      // n_max
  int replicas = 1;
  int tail_depth = 0;
  std::size_t max_entries = std::size_t{1} << 27;
  std::vector<double> q;
  std::vector<double> alpha;
  std::vector<double> xi;
  std::string eps = "assump:0.5";
  std::string sj = "j-log-down:1";
  double rho_alpha = 2.0;
  int j_min = 8;          // convergence
  int samples = 0;        // growthspeed / conditioned ubiquity
  int sample_depth = 0;   // growthspeed: depth of the sampled points
  int neighbors = 1;      // N
  double fraction = 0.5;  // f
  int margin = 4;         // growthspeed: j eligible when S_j <= depth - margin
  int iteration = 1;      // ubiquity N_iter
  int horizon = 10;       // conditioned ubiquity horizon
  int gs_horizon = 12;
  double tolerance = 0.15;      // ubiquity dimension tolerance
  double pass_threshold = 0.9;  // statistical pass fractions
  int threads = 0;              // 0: hardware concurrency
  std::string out_dir = "out";

  KeyValues to_config() const;
  /// Strict: `experiment` and `model.kind` are required; other keys default
  /// to the experiment's defaults. Unknown keys are rejected.
  static ExperimentConfig from_config(const KeyValues& kv);
};

/// Built-in configuration used when no --config is given.
ExperimentConfig default_config(ExperimentKind kind);

}  // namespace mfc::tools

#pragma once

#include <string>
#include <vector>

#include "mfcascade_tools/config.hpp"
#include "mfcascade_tools/report.hpp"

namespace mfc::tools {

struct Violation {
  std::string code;  // q-outside-J, memory, sj-horizon, ...
  std::string message;
};

/// Static checks only; never simulates.
std::vector<Violation> validate(const ExperimentConfig& config);

Report run_spectrum(const ExperimentConfig& config);
Report run_convergence(const ExperimentConfig& config);
Report run_growthspeed(const ExperimentConfig& config);
Report run_ldrenewal(const ExperimentConfig& config);
Report run_ubiquity(const ExperimentConfig& config);
Report run_validate(const ExperimentConfig& config);
Report run_selftest(const ExperimentConfig& config);

/// Dispatches on config.kind.
Report run(const ExperimentConfig& config);

/// Seed of replica r: derive_key(config seed, r).
std::uint64_t replica_seed(const ExperimentConfig& config, std::size_t replica);

}  // namespace mfc::tools

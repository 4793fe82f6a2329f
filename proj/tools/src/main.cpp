#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <mfcascade/config_io.hpp>
#include <mfcascade/error.hpp>

#include "mfcascade_tools/config.hpp"
#include "mfcascade_tools/experiments.hpp"
#include "mfcascade_tools/report.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<int> depth;
  std::optional<int> replicas;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "key=value configuration file")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--threads", o.threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  sub->add_option("--depth", o.depth, "n_max")->check(CLI::PositiveNumber);
  sub->add_option("--replicas", o.replicas, "replica count")->check(CLI::PositiveNumber);
}

mfc::tools::ExperimentConfig resolve(mfc::tools::ExperimentKind kind, const Overrides& o) {
  using mfc::tools::ExperimentConfig;
  using mfc::tools::ExperimentKind;
  ExperimentConfig c;
  if (!o.config_path.empty()) {
    c = ExperimentConfig::from_config(mfc::read_key_values(o.config_path));
    // validate accepts any experiment's file; other subcommands must match it.
    if (kind != ExperimentKind::validate && c.kind != kind)
      throw mfc::ConfigError("config is for '" + std::string(to_string(c.kind)) + "', not '" +
                             std::string(to_string(kind)) + "'");
  } else {
    c = mfc::tools::default_config(kind);
  }
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out_dir = *o.out;
  if (o.threads) c.threads = *o.threads;
  if (o.depth) c.depth = *o.depth;
  if (o.replicas) c.replicas = *o.replicas;
  return c;
}

void print_checks(const mfc::tools::Report& r) {
  for (const auto& c : r.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << mfc::format_real(c.value)
              << "  threshold=" << mfc::format_real(c.threshold) << "  " << c.detail << '\n';
}

const char* describe(mfc::tools::ExperimentKind k) {
  using mfc::tools::ExperimentKind;
  switch (k) {
    case ExperimentKind::spectrum: return "tau_n, Legendre transform and large deviation spectrum of one field";
    case ExperimentKind::convergence: return "coefficient of variation of tau_j across replicas";
    case ExperimentKind::growthspeed: return "growth speed of sampled copies against S_j";
    case ExperimentKind::ldrenewal: return "box counts of tilted fields against the large deviation band";
    case ExperimentKind::ubiquity: return "limsup covers and their box dimension";
    case ExperimentKind::validate: return "static checks of a configuration file";
    case ExperimentKind::selftest: return "fast internal consistency checks";
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  using mfc::tools::ExperimentKind;
  CLI::App app{"Random b-adic cascade experiments"};
  app.require_subcommand(1);
  Overrides o;
  const ExperimentKind kinds[] = {ExperimentKind::spectrum,  ExperimentKind::convergence, ExperimentKind::growthspeed,
                                  ExperimentKind::ldrenewal, ExperimentKind::ubiquity,    ExperimentKind::validate,
                                  ExperimentKind::selftest};
  std::vector<std::pair<CLI::App*, ExperimentKind>> subs;
  for (auto k : kinds) {
    auto* sub = app.add_subcommand(std::string(to_string(k)), describe(k));
    add_common(sub, o);
    subs.emplace_back(sub, k);
  }
  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentKind kind = ExperimentKind::spectrum;
    for (const auto& [sub, k] : subs)
      if (sub->parsed()) kind = k;
    const auto config = resolve(kind, o);
    const auto report = kind == ExperimentKind::validate ? mfc::tools::run_validate(config) : mfc::tools::run(config);
    mfc::tools::write_report(report, config.out_dir);
    print_checks(report);
    std::cout << (report.passed() ? "all checks passed" : "some checks failed") << " (" << config.out_dir << ")\n";
    return report.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <mfcascade/error.hpp>
#include <mfcascade_tools/config.hpp>
#include <mfcascade_tools/experiments.hpp>
#include <mfcascade_tools/report.hpp>

using namespace mfc;
using namespace mfc::tools;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool has_code(const std::vector<Violation>& v, const std::string& code) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == code; });
}

}  // namespace

TEST_CASE("experiment configs round trip", "[tools]") {
  for (auto kind : {ExperimentKind::spectrum, ExperimentKind::convergence, ExperimentKind::growthspeed,
                    ExperimentKind::ldrenewal, ExperimentKind::ubiquity, ExperimentKind::validate, ExperimentKind::selftest}) {
    auto c = default_config(kind);
    c.seed = 123456789012345ULL;
    c.threads = 3;
    const auto kv = c.to_config();
    const auto back = ExperimentConfig::from_config(kv);
    CHECK(back.to_config() == kv);
    CHECK(back.model.describe() == c.model.describe());
    CHECK(back.q == c.q);
    CHECK(back.seed == c.seed);
  }
}

TEST_CASE("config parsing is strict", "[tools]") {
  CHECK_THROWS_AS(ExperimentConfig::from_config({}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_config({{"experiment", "spectrum"}}), ConfigError);
  KeyValues kv = default_config(ExperimentKind::spectrum).to_config();
  kv["colour"] = "blue";
  CHECK_THROWS_AS(ExperimentConfig::from_config(kv), ConfigError);
  kv.erase("colour");
  kv["experiment"] = "dance";
  CHECK_THROWS_AS(ExperimentConfig::from_config(kv), ConfigError);
}

TEST_CASE("validate itemizes violations", "[tools]") {
  CHECK(validate(default_config(ExperimentKind::spectrum)).empty());
  CHECK(validate(default_config(ExperimentKind::growthspeed)).empty());
  CHECK(validate(default_config(ExperimentKind::ldrenewal)).empty());

  auto out = default_config(ExperimentKind::growthspeed);
  out.q = {5.0};  // lognormal(0.1): J = (-3.72, 3.72)
  CHECK(has_code(validate(out), "q-outside-J"));

  auto big = default_config(ExperimentKind::spectrum);
  big.depth = 30;
  CHECK(has_code(validate(big), "memory"));

  auto sj = default_config(ExperimentKind::growthspeed);
  sj.depth = 4;
  sj.sample_depth = 3;
  CHECK(has_code(validate(sj), "sj-horizon"));

  auto eps = default_config(ExperimentKind::spectrum);
  eps.eps = "bogus";
  CHECK(has_code(validate(eps), "eps"));

  const auto r = run_validate(big);
  CHECK_FALSE(r.passed());
}

TEST_CASE("reports carry headers and checks", "[tools]") {
  auto c = default_config(ExperimentKind::spectrum);
  c.depth = 8;
  const auto r = run(c);
  CHECK(r.passed());
  const auto dir = std::filesystem::temp_directory_path() / "mfcascade_report_test";
  std::filesystem::remove_all(dir);
  write_report(r, dir);
  const auto tau = slurp(dir / "spectrum_tau.csv");
  CHECK(tau.rfind("#{\"schema_version\":1", 0) == 0);
  CHECK(tau.find("\nreplica,q,tau_n,tau_tilde,abs_diff\n") != std::string::npos);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["passed"] == true);
  CHECK(summary["experiment"] == "spectrum");
  CHECK(summary["checks"].size() == r.checks.size());
  std::filesystem::remove_all(dir);
}

TEST_CASE("thread count does not change output", "[tools]") {
  auto c = default_config(ExperimentKind::convergence);
  c.replicas = 6;
  c.depth = 12;
  c.threads = 1;
  const auto a = run(c);
  c.threads = 4;
  const auto b = run(c);
  REQUIRE(a.tables.size() == b.tables.size());
  for (std::size_t i = 0; i < a.tables.size(); ++i) CHECK(a.tables[i].rows == b.tables[i].rows);
}

TEST_CASE("selftest passes", "[tools]") { CHECK(run(default_config(ExperimentKind::selftest)).passed()); }

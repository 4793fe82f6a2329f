// Runs every primary acceptance criterion once and prints one PASS/FAIL
// line per criterion. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <mfcascade/analysis.hpp>
#include <mfcascade/growth_speed.hpp>
#include <mfcascade/keyed_rng.hpp>
#include <mfcascade/stats.hpp>
#include <mfcascade/tree.hpp>
#include <mfcascade_tools/config.hpp>
#include <mfcascade_tools/experiments.hpp>
#include <mfcascade_tools/report.hpp>

#include "../support/brute_force.hpp"

using namespace mfc;
using namespace mfc::tools;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;  // <= 0: no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

const double kLn2 = std::log(2.0);

std::string check_summary(const Report& r) {
  std::string s;
  for (const auto& c : r.checks) s += (s.empty() ? "" : "; ") + c.name + "=" + fmt(c.value) + (c.passed ? "" : " (fail)");
  return s;
}

Outcome from_report(const Report& r) { return {r.passed(), check_summary(r)}; }

const Check* find_check(const Report& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

Outcome normalization() {
  const std::vector<WeightModel> analytic = {
      WeightModel::deterministic({0.5, 0.5}),     WeightModel::deterministic({0.25, 0.75}),
      WeightModel::deterministic({0.2, 0.3, 0.5}), WeightModel::lognormal(2, 0.1),
      WeightModel::lognormal(2, 2.0 * kLn2),      WeightModel::lognormal(3, 0.4),
      WeightModel::two_point(2, 0.3, 0.7, 0.5),   WeightModel::two_point(3, 0.2, 0.6, 1.0 / 3.0)};
  double worst = 0.0;
  for (const auto& m : analytic)
    worst = std::max({worst, std::abs(m.tau_tilde(0.0).value + 1.0), std::abs(m.tau_tilde(1.0).value)});
  double worst_se = 0.0;
  for (const auto& m : {WeightModel::uniform_iid(2, 0.2, 0.8, {100000, 50, 7}),
                        WeightModel::uniform_iid(3, 0.1, 0.5666666666666667, {100000, 50, 8})}) {
    for (double q : {0.0, 1.0}) {
      const auto t = m.tau_tilde(q);
      const double target = q == 0.0 ? -1.0 : 0.0;
      worst_se = std::max(worst_se, std::abs(t.value - target) / t.std_error);
    }
  }
  return {worst < 1e-12 && worst_se <= 4.0,
          "analytic max error " + fmt(worst) + " (< 1e-12); Monte Carlo max " + fmt(worst_se) + " SE (<= 4)"};
}

Outcome deterministic_oracle() {
  auto c = default_config(ExperimentKind::spectrum);
  c.depth = 12;
  const auto r = run_spectrum(c);
  const auto* chk = find_check(r, "deterministic_oracle");
  if (!chk) return {false, "check missing"};
  return {chk->passed, "max |tau_12 - tau~| = " + fmt(chk->value) + " (< 1e-9)"};
}

Outcome martingale() {
  const auto model = WeightModel::lognormal(2, 0.1);
  std::vector<double> totals;
  for (std::uint64_t r = 0; r < 1000; ++r)
    totals.push_back(CascadeTree(model, derive_key(0x6d61, r)).total_mass_q(1.0, Word::root(2), 12));
  const double mean = stats::mean(totals);
  const double se = stats::standard_error(totals);
  const double z = std::abs(mean - 1.0) / se;
  return {z <= 4.0, "mean " + fmt(mean) + ", SE " + fmt(se) + ", |z| = " + fmt(z) + " (<= 4)"};
}

Outcome p1_recursion() {
  const CascadeTree t(WeightModel::lognormal(2, 0.3), 0x5031);
  KeyedStream pick(17);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int lv = static_cast<int>(pick.next_u64() % 13);
    const int lw = static_cast<int>(pick.next_u64() % static_cast<std::uint64_t>(13 - lv));
    const Word v(2, lv, pick.next_u64() % ipow(2, lv));
    const Word w(2, lw, pick.next_u64() % ipow(2, lw));
    const double lhs = t.mass(v.concat(w), 0);
    const double rhs = t.subtree(v).mass(w, 0) * std::exp(t.log_path_product(v));
    worst = std::max(worst, std::abs(lhs - rhs) / rhs);
  }
  return {worst < 1e-12, "max relative error " + fmt(worst) + " (< 1e-12)"};
}

Outcome tilt_identity() {
  double worst = 0.0;
  for (const auto& model : {WeightModel::lognormal(2, 0.1), WeightModel::two_point(2, 0.3, 0.7, 0.5),
                            WeightModel::deterministic({0.25, 0.75})}) {
    const CascadeTree t(model, 0x7117);
    const auto j = model.j_interval();
    for (double q : uniform_grid(-3.0, 3.0, 0.25)) {
      if (!j.contains(q)) continue;
      const double tau = model.tau_tilde(q).value;
      for (int len = 1; len <= 12; ++len) {
        const Word w(2, len, (ipow(2, len) * 5) / 7);
        const double lhs = std::pow(t.mass(w, 0), q);
        const double rhs = t.mass_q(q, w, 0) * std::pow(2.0, -len * tau);
        worst = std::max(worst, std::abs(lhs - rhs) / rhs);
      }
    }
  }
  return {worst < 1e-9, "max relative error " + fmt(worst) + " (< 1e-9)"};
}

Outcome critical_recursion() {
  const CascadeTree t(WeightModel::lognormal(2, 2.0 * kLn2), 0xc417);
  double worst = 0.0;
  for (const Word& w : {Word::root(2), Word::parse(2, "1"), Word::parse(2, "0110")}) {
    const double lp = t.log_path_product(w);
    const auto lw = t.node_weights(w);
    for (int d = 0; d < 8; ++d) {
      const double direct = t.critical_mass(w, d + 1).value;
      double sum = 0.0;
      for (int i = 0; i < 2; ++i) {
        const double base = lp + std::log(lw[static_cast<std::size_t>(i)]);
        for (double l : t.log_subtree_products(w.child(i), d)) sum += -std::exp(base + l) * (base + l);
      }
      worst = std::max(worst, std::abs(direct - sum) / std::abs(direct));
    }
  }
  return {worst < 1e-9, "max relative error " + fmt(worst) + " over d + 1 <= 8 (< 1e-9)"};
}

Outcome s_closed_form() {
  const auto leb = leaf_masses(CascadeTree(WeightModel::deterministic({0.5, 0.5}), 1), 4);
  const double s = s_diagnostic(leb, leb, 1.0, 1, 0.5, 0.5, 4);
  const double err = std::abs(s - 2.875);
  return {err < 1e-12, "S_4 = " + std::to_string(s) + ", error " + fmt(err) + " (< 1e-12)"};
}

brute::Masses direct_masses(const CascadeTree& t, int n, double q) {
  const int b = t.base();
  const double tau = t.model().tau_tilde(q).value;
  brute::Masses m(static_cast<std::size_t>(n) + 1);
  auto& leaves = m[static_cast<std::size_t>(n)];
  leaves.resize(ipow(b, n));
  for (std::uint64_t i = 0; i < leaves.size(); ++i) {
    const Word w(b, n, i);
    double p = 1.0;
    for (int k = 0; k < n; ++k)
      p *= std::pow(static_cast<double>(b), tau) *
           std::pow(t.node_weights(w.prefix(k))[static_cast<std::size_t>(w.digit(k))], q);
    leaves[i] = p;
  }
  for (int j = n - 1; j >= 0; --j) {
    auto& row = m[static_cast<std::size_t>(j)];
    row.assign(ipow(b, j), 0.0);
    const auto& below = m[static_cast<std::size_t>(j) + 1];
    for (std::uint64_t i = 0; i < below.size(); ++i) row[i / static_cast<std::uint64_t>(b)] += below[i];
  }
  return m;
}

Outcome oracle_equivalence() {
  KeyedStream pick(0x0e0e);
  const std::vector<WeightModel> models = {WeightModel::lognormal(2, 0.15), WeightModel::two_point(2, 0.3, 0.7, 0.5),
                                           WeightModel::deterministic({0.25, 0.75}), WeightModel::lognormal(2, 0.05)};
  const int n_max = 10;
  int mask_ok = 0, gs_ok = 0;
  for (int c = 0; c < 20; ++c) {
    const auto& model = models[pick.next_u64() % models.size()];
    const CascadeTree t(model, pick.next_u64());
    const double q = -1.0 + 3.0 * pick.uniform();
    const double alpha = model.tau_tilde_prime(q).value;
    const int N = static_cast<int>(pick.next_u64() % 3);
    const int p = 1 + static_cast<int>(pick.next_u64() % n_max);
    const double f = 0.2 + 0.6 * pick.uniform();
    const auto eps = EpsSequence::assump(0.2 + pick.uniform());
    const auto e = [&](int n) { return eps(n); };

    const auto mu = leaf_masses(t, n_max);
    const auto direct = direct_masses(t, n_max, 1.0);
    const auto mask = level_set_mask(mu, alpha, p, N, eps, n_max);
    const auto bf = brute::mask(direct, 2, n_max, alpha, p, N, e);
    bool same = true;
    for (std::size_t i = 0; i < bf.size(); ++i) same = same && static_cast<bool>(mask.leaves[i]) == bf[i];
    mask_ok += same;

    FieldOptions o;
    o.q = q;
    const auto mq = leaf_masses(t, n_max, o);
    gs_ok += growth_speed(mq, mu, alpha, N, eps, f, n_max) ==
             brute::growth_speed(direct_masses(t, n_max, q), direct, 2, n_max, alpha, N, e, f);
  }
  return {mask_ok == 20 && gs_ok == 20,
          "level_set_mask " + std::to_string(mask_ok) + "/20, growth_speed " + std::to_string(gs_ok) + "/20"};
}

Outcome legendre_duality() {
  double worst = 0.0;
  for (const auto& model : {WeightModel::deterministic({0.25, 0.75}), WeightModel::lognormal(2, 0.1),
                            WeightModel::two_point(2, 0.3, 0.7, 0.5)}) {
    const auto tau = TauFunction::tabulate(model, default_q_grid());
    for (double q : uniform_grid(-3.0, 3.0, 1e-3)) {
      const double a = model.tau_tilde_prime(q).value;
      worst = std::max(worst, std::abs(legendre(tau, a).value - (q * a - model.tau_tilde(q).value)));
    }
  }
  return {worst <= 2e-3, "max |tau*(tau~'(q)) - (q tau~'(q) - tau~(q))| = " + fmt(worst) + " (<= 2e-3)"};
}

std::string body(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string line, out;
  std::getline(in, line);  // '#' header
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "mfcascade_acceptance_determinism";
  std::vector<ExperimentConfig> configs;
  configs.push_back(default_config(ExperimentKind::spectrum));
  auto cv = default_config(ExperimentKind::convergence);
  cv.replicas = 20;
  configs.push_back(cv);
  auto gs = default_config(ExperimentKind::growthspeed);
  gs.samples = 10;
  gs.replicas = 3;
  configs.push_back(gs);
  auto ld = default_config(ExperimentKind::ldrenewal);
  ld.replicas = 10;
  configs.push_back(ld);
  configs.push_back(default_config(ExperimentKind::ubiquity));
  std::size_t files = 0;
  std::string mismatch;
  for (auto& c : configs) {
    const auto name = std::string(to_string(c.kind));
    const auto a = root / (name + "_a"), b = root / (name + "_b");
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
    c.threads = 0;
    write_report(run(c), a);
    c.threads = 1;
    write_report(run(c), b);
    for (const auto& entry : std::filesystem::directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      if (body(entry.path()) != body(b / entry.path().filename())) mismatch += entry.path().filename().string() + " ";
    }
  }
  std::filesystem::remove_all(root);
  return {mismatch.empty() && files > 0,
          std::to_string(files) + " CSV files compared" + (mismatch.empty() ? "" : ", differing: " + mismatch)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"normalization", 1.0, normalization},
      {"deterministic_oracle", 5.0, deterministic_oracle},
      {"martingale", 60.0, martingale},
      {"p1_recursion", 0.0, p1_recursion},
      {"tilt_identity", 0.0, tilt_identity},
      {"critical_recursion", 0.0, critical_recursion},
      {"s_n_closed_form", 0.0, s_closed_form},
      {"oracle_equivalence", 0.0, oracle_equivalence},
      {"cvtau_trend", 600.0, [] { return from_report(run_convergence(default_config(ExperimentKind::convergence))); }},
      {"cascades_dev_band", 600.0, [] { return from_report(run_ldrenewal(default_config(ExperimentKind::ldrenewal))); }},
      {"cascades_ren2_proxy", 0.0, [] { return from_report(run_growthspeed(default_config(ExperimentKind::growthspeed))); }},
      {"ubiquity_baseline", 300.0, [] { return from_report(run_ubiquity(default_config(ExperimentKind::ubiquity))); }},
      {"legendre_duality", 0.0, legendre_duality},
      {"determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt(secs) + " s";
    if (c.budget_seconds > 0.0) {
      timing += " (budget " + fmt(c.budget_seconds) + " s)";
      if (secs >= c.budget_seconds) {
        o.passed = false;
        o.detail += "; over the runtime budget";
      }
    }
    failed += o.passed ? 0 : 1;
    std::printf("%s %-22s %s  [%s]\n", o.passed ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

#include "mfcascade_tools/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <mfcascade/analysis.hpp>
#include <mfcascade/config_io.hpp>
#include <mfcascade/error.hpp>
#include <mfcascade/growth_speed.hpp>
#include <mfcascade/keyed_rng.hpp>
#include <mfcascade/sequences.hpp>
#include <mfcascade/stats.hpp>
#include <mfcascade/tree.hpp>
#include <mfcascade/ubiquity.hpp>

#include "mfcascade_tools/parallel.hpp"

namespace mfc::tools {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Config as it appears in file headers: everything that shapes the data.
std::map<std::string, std::string> output_config(const ExperimentConfig& c) {
  auto kv = c.to_config();
  kv.erase("threads");
  kv.erase("out");
  return {kv.begin(), kv.end()};
}

Report make_report(const ExperimentConfig& c) {
  Report r;
  r.experiment = std::string(to_string(c.kind));
  r.config = output_config(c);
  return r;
}

Table make_table(const ExperimentConfig& c, std::string name, std::vector<std::string> columns) {
  Table t;
  t.name = std::move(name);
  t.header["schema_version"] = kSchemaVersion;
  t.header["experiment"] = std::string(to_string(c.kind));
  t.header["table"] = t.name;
  t.header["model"] = c.model.describe();
  t.header["seed"] = c.seed;
  t.header["depth"] = c.depth;
  t.header["eps"] = c.eps;
  t.header["config"] = output_config(c);
  t.columns = std::move(columns);
  return t;
}

std::string fmt_q(double q) { return format_real(q); }

FieldOptions field_options(const ExperimentConfig& c, std::optional<double> q = std::nullopt) {
  FieldOptions fo;
  fo.q = q;
  fo.tail_depth = c.tail_depth;
  fo.max_entries = c.max_entries;
  return fo;
}

// Legendre transform of the model's tau~; Monte Carlo models get a coarser grid.
TauFunction legendre_table(const WeightModel& model) {
  return TauFunction::tabulate(model, model.analytic() ? default_q_grid() : uniform_grid(-5.0, 5.0, 0.05));
}

void add_seeds(Report& r, const ExperimentConfig& c, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) r.seeds.push_back(replica_seed(c, i));
}

}  // namespace

std::uint64_t replica_seed(const ExperimentConfig& config, std::size_t replica) {
  return derive_key(config.seed, static_cast<std::uint64_t>(replica));
}

// ---------------------------------------------------------------- validate

std::vector<Violation> validate(const ExperimentConfig& c) {
  std::vector<Violation> out;
  const int b = c.model.base();
  auto add = [&](std::string code, std::string msg) { out.push_back({std::move(code), std::move(msg)}); };

  std::optional<OpenInterval> j;
  try {
    j = c.model.j_interval();
  } catch (const std::exception& e) {
    add("model", e.what());
  }
  const bool needs_q = c.kind == ExperimentKind::growthspeed || c.kind == ExperimentKind::ldrenewal ||
                       (c.kind == ExperimentKind::ubiquity && c.samples > 0);
  if (j && needs_q)
    for (double q : c.q)
      if (!j->contains(q))
        add("q-outside-J", "q = " + format_real(q) + " is outside J = (" + format_real(j->lower) + ", " +
                               format_real(j->upper) + ")");
  for (double q : c.q)
    if (c.model.tau_tilde(q).diverged) add("tau-diverges", "tau~ diverges at q = " + format_real(q));

  try {
    (void)parse_eps_sequence(c.eps);
  } catch (const std::exception& e) {
    add("eps", e.what());
  }
  std::optional<SjSequence> sj;
  try {
    sj = parse_sj_sequence(c.sj);
  } catch (const std::exception& e) {
    add("sj", e.what());
  }

  int field_depth = c.depth;
  if (c.kind == ExperimentKind::growthspeed) field_depth = std::max(c.depth, c.sample_depth);
  if (c.kind == ExperimentKind::ubiquity && c.samples > 0) field_depth = std::max(c.depth, c.horizon + 3);
  try {
    const auto entries = field_entries(b, field_depth, c.tail_depth);
    if (entries > c.max_entries)
      add("memory", "depth " + std::to_string(field_depth) + " needs " + std::to_string(entries) + " values (" +
                        std::to_string(entries * sizeof(double) >> 20) + " MiB), budget " +
                        std::to_string(c.max_entries));
  } catch (const std::exception&) {
    add("memory", "depth " + std::to_string(field_depth) + " is beyond the addressable range for base " +
                      std::to_string(b));
  }

  switch (c.kind) {
    case ExperimentKind::convergence:
      if (c.j_min < 1 || c.j_min + 2 > c.depth) add("j-range", "need 1 <= j_min and at least three scales up to depth");
      break;
    case ExperimentKind::growthspeed: {
      if (c.samples < 1) add("samples", "growthspeed needs samples >= 1");
      if (c.sample_depth < 2) add("sample-depth", "sample_depth must be >= 2");
      if (sj) {
        bool any = false;
        for (int jj = 2; jj <= c.sample_depth; ++jj) any = any || (*sj)(jj) <= c.depth - c.margin;
        if (!any) add("sj-horizon", "no j in [2, sample_depth] has S_j <= depth - margin");
      }
      if (!(c.fraction > 0.0 && c.fraction < 1.0)) add("fraction", "f must lie in (0, 1)");
      break;
    }
    case ExperimentKind::ldrenewal:
      if (c.q.empty()) add("q-grid", "ldrenewal needs at least one q");
      break;
    case ExperimentKind::ubiquity:
      for (double x : c.xi)
        if (!(x >= 1.0)) add("xi", "xi must be >= 1, got " + format_real(x));
      if (c.alpha.empty() || c.xi.empty()) add("grid", "ubiquity needs alpha and xi values");
      if (c.depth < 6) add("depth", "box dimension regression needs depth >= 6");
      break;
    default:
      break;
  }
  return out;
}

Report run_validate(const ExperimentConfig& c) {
  const auto start = Clock::now();
  Report r = make_report(c);
  auto t = make_table(c, "validate", {"code", "message"});
  const auto v = validate(c);
  for (const auto& item : v) t.rows.push_back({item.code, '"' + item.message + '"'});
  r.tables.push_back(std::move(t));
  r.checks.push_back({"valid", v.empty(), static_cast<double>(v.size()), 0.0,
                      v.empty() ? "no violations" : std::to_string(v.size()) + " violation(s)"});
  r.runtimes.emplace_back("total", seconds_since(start));
  return r;
}

// ---------------------------------------------------------------- spectrum

Report run_spectrum(const ExperimentConfig& c) {
  const auto start = Clock::now();
  Report r = make_report(c);
  add_seeds(r, c, static_cast<std::size_t>(c.replicas));
  const auto eps = parse_eps_sequence(c.eps);
  const int n = c.depth;
  const auto R = static_cast<std::size_t>(c.replicas);

  std::vector<double> tau_tilde(c.q.size());
  for (std::size_t i = 0; i < c.q.size(); ++i) tau_tilde[i] = c.model.tau_tilde(c.q[i]).value;

  struct Out {
    std::vector<double> tau;
    std::vector<double> ld;
    double tau0 = 0.0;
  };
  std::vector<Out> outs(R);
  parallel_for(R, c.threads, [&](std::size_t rep) {
    const CascadeTree tree(c.model, replica_seed(c, rep));
    const auto field = leaf_masses(tree, n, field_options(c));
    auto& o = outs[rep];
    for (double q : c.q) o.tau.push_back(partition_function(field, n, q));
    o.ld = ld_spectrum(field, n, c.alpha, eps).ld;
    o.tau0 = partition_function(field, n, 0.0);
  });
  r.runtimes.emplace_back("simulation", seconds_since(start));

  auto tt = make_table(c, "spectrum_tau", {"replica", "q", "tau_n", "tau_tilde", "abs_diff"});
  double worst = 0.0;
  double worst0 = 0.0;
  for (std::size_t rep = 0; rep < R; ++rep) {
    for (std::size_t i = 0; i < c.q.size(); ++i) {
      const double d = std::abs(outs[rep].tau[i] - tau_tilde[i]);
      worst = std::max(worst, d);
      tt.rows.push_back({cell(rep), fmt_q(c.q[i]), cell(outs[rep].tau[i]), cell(tau_tilde[i]), cell(d)});
    }
    worst0 = std::max(worst0, std::abs(outs[rep].tau0 + 1.0));
  }
  r.tables.push_back(std::move(tt));

  const auto lstart = Clock::now();
  const auto tau_fn = legendre_table(c.model);
  auto tl = make_table(c, "spectrum_legendre", {"alpha", "tau_star", "argmin_q", "at_boundary"});
  double max_star = -std::numeric_limits<double>::infinity();
  for (double a : c.alpha) {
    const auto lv = legendre(tau_fn, a);
    max_star = std::max(max_star, lv.value);
    tl.rows.push_back({fmt_q(a), cell(lv.value), cell(lv.argmin_q), cell(lv.at_boundary)});
  }
  r.tables.push_back(std::move(tl));

  auto tld = make_table(c, "spectrum_ld", {"replica", "alpha", "eps", "ld"});
  tld.header["eps_n"] = eps(n);
  for (std::size_t rep = 0; rep < R; ++rep)
    for (std::size_t i = 0; i < c.alpha.size(); ++i)
      tld.rows.push_back({cell(rep), fmt_q(c.alpha[i]), cell(eps(n)), cell(outs[rep].ld[i])});
  r.tables.push_back(std::move(tld));

  r.checks.push_back({"structure_function_q0", worst0 < 1e-12, worst0, 1e-12, "max |tau_n(0) + 1|"});
  if (c.model.kind() == WeightKind::deterministic_vector)
    r.checks.push_back({"deterministic_oracle", worst < 1e-9, worst, 1e-9, "max |tau_n(q) - tau~(q)| over the q-grid"});
  if (!c.alpha.empty())
    r.checks.push_back({"legendre_at_most_one", max_star <= 1.0 + 1e-9, max_star, 1.0, "max tau*(alpha) on the alpha grid"});
  if (c.model.analytic()) {
    const auto j = c.model.j_interval();
    double dual = 0.0;
    for (double q : uniform_grid(-3.0, 3.0, 1e-3)) {
      if (!j.contains(q)) continue;
      const double tp = c.model.tau_tilde_prime(q).value;
      const double exact = q * tp - c.model.tau_tilde(q).value;
      dual = std::max(dual, std::abs(legendre(tau_fn, tp).value - exact));
    }
    r.checks.push_back({"legendre_duality", dual <= 2e-3, dual, 2e-3,
                        "max |tau*(tau~'(q)) - (q tau~'(q) - tau~(q))| on q in [-3,3] and J"});
  }
  r.runtimes.emplace_back("legendre", seconds_since(lstart));
  r.runtimes.emplace_back("total", seconds_since(start));
  return r;
}

// ---------------------------------------------------------------- convergence

Report run_convergence(const ExperimentConfig& c) {
  const auto start = Clock::now();
  Report r = make_report(c);
  const auto R = static_cast<std::size_t>(c.replicas);
  add_seeds(r, c, R);
  const int j_max = c.depth;
  if (c.j_min < 1 || c.j_min + 2 > j_max) throw ConfigError("convergence: need j_min >= 1 and j_max - j_min >= 2");
  const auto J = static_cast<std::size_t>(j_max - c.j_min + 1);
  const auto Q = c.q.size();

  std::vector<double> tau_tilde(Q);
  for (std::size_t i = 0; i < Q; ++i) {
    const auto t = c.model.tau_tilde(c.q[i]);
    if (t.diverged) throw DomainError("convergence: tau~ diverges at q = " + format_real(c.q[i]));
    tau_tilde[i] = t.value;
  }
  // tau[rep][qi * J + ji]
  std::vector<std::vector<double>> tau(R);
  parallel_for(R, c.threads, [&](std::size_t rep) {
    const CascadeTree tree(c.model, replica_seed(c, rep));
    const auto field = leaf_masses(tree, j_max, field_options(c));
    auto& out = tau[rep];
    out.resize(Q * J);
    for (std::size_t qi = 0; qi < Q; ++qi)
      for (std::size_t ji = 0; ji < J; ++ji)
        out[qi * J + ji] = partition_function(field, c.j_min + static_cast<int>(ji), c.q[qi]);
  });
  r.runtimes.emplace_back("simulation", seconds_since(start));

  auto scaled = [&](double t, double tt, int j) {
    return static_cast<double>(j) * std::abs(t - tt) / std::log(static_cast<double>(j));
  };
  auto tc = make_table(c, "convergence", {"replica", "q", "j", "tau_j", "tau_tilde", "scaled_error"});
  for (std::size_t rep = 0; rep < R; ++rep)
    for (std::size_t qi = 0; qi < Q; ++qi)
      for (std::size_t ji = 0; ji < J; ++ji) {
        const int j = c.j_min + static_cast<int>(ji);
        const double t = tau[rep][qi * J + ji];
        tc.rows.push_back({cell(rep), fmt_q(c.q[qi]), cell(j), cell(t), cell(tau_tilde[qi]), cell(scaled(t, tau_tilde[qi], j))});
      }
  r.tables.push_back(std::move(tc));

  auto tm = make_table(c, "convergence_median", {"q", "j", "median_scaled_error"});
  auto ts = make_table(c, "convergence_trend", {"q", "spearman_rho", "p_value", "pass"});
  for (std::size_t qi = 0; qi < Q; ++qi) {
    std::vector<double> js, meds;
    for (std::size_t ji = 0; ji < J; ++ji) {
      const int j = c.j_min + static_cast<int>(ji);
      std::vector<double> col(R);
      for (std::size_t rep = 0; rep < R; ++rep) col[rep] = scaled(tau[rep][qi * J + ji], tau_tilde[qi], j);
      const double med = stats::median(col);
      js.push_back(j);
      meds.push_back(med);
      tm.rows.push_back({fmt_q(c.q[qi]), cell(j), cell(med)});
    }
    const auto sp = stats::spearman(js, meds);
    const bool pass = sp.rho < 0.0 && sp.p_less < 0.05;
    ts.rows.push_back({fmt_q(c.q[qi]), cell(sp.rho), cell(sp.p_less), cell(pass)});
    std::ostringstream d;
    d << "Spearman rho of median j|tau_j - tau~|/log j vs j, one-sided p = " << sp.p_less;
    r.checks.push_back({"cvtau_trend_q=" + fmt_q(c.q[qi]), pass, sp.rho, 0.0, d.str()});
  }
  r.tables.push_back(std::move(tm));
  r.tables.push_back(std::move(ts));
  r.runtimes.emplace_back("total", seconds_since(start));
  return r;
}

// ---------------------------------------------------------------- growthspeed

// Sample s draws one mu_q-typical point in every replica; the statistic
// at scale j is the median over replicas of max(GS_mu, GS_mu_q) at
// w^{(j)}(t). A sample passes when that median is <= S_j at every
// eligible j. A GS that is never reached counts as n_max + 1.
Report run_growthspeed(const ExperimentConfig& c) {
  const auto start = Clock::now();
  Report r = make_report(c);
  const auto R = static_cast<std::size_t>(c.replicas);
  add_seeds(r, c, R);
  const auto eps = parse_eps_sequence(c.eps);
  const auto sj = parse_sj_sequence(c.sj);
  const int n_max = c.depth;
  if (c.samples < 1 || c.sample_depth < 2) throw ConfigError("growthspeed: need samples >= 1 and sample_depth >= 2");
  const auto M = static_cast<std::size_t>(c.samples);
  const auto Q = c.q.size();

  std::vector<int> eligible;
  for (int j = 2; j <= c.sample_depth; ++j)
    if (sj(j) <= n_max - c.margin) eligible.push_back(j);
  const auto J = eligible.size();

  std::vector<double> alpha_mu(Q), alpha_q(Q);
  for (std::size_t qi = 0; qi < Q; ++qi) {
    const double tp = c.model.tau_tilde_prime(c.q[qi]).value;
    alpha_mu[qi] = tp;
    alpha_q[qi] = c.q[qi] * tp - c.model.tau_tilde(c.q[qi]).value;
  }

  struct Cell {
    std::uint64_t index = 0;
    int gs_mu = -1;
    int gs_q = -1;
  };
  // cells[qi * R + rep][s * J + ji]
  std::vector<std::vector<Cell>> cells(Q * R);
  parallel_for(Q * R, c.threads, [&](std::size_t k) {
    const std::size_t qi = k / R, rep = k % R;
    const CascadeTree tree(c.model, replica_seed(c, rep));
    const Tilt tilt = tree.tilt(c.q[qi]);
    const PointSampler sampler(leaf_masses(tree, c.sample_depth, field_options(c, c.q[qi])));
    auto& out = cells[k];
    out.resize(M * J);
    // Samples sharing a prefix share the copy, so each word is analyzed once.
    std::map<Word, std::pair<int, int>> done;
    for (std::size_t s = 0; s < M; ++s) {
      const auto pt = sampler.sample(derive_key(derive_key(derive_key(c.seed, 0x9a3b1ULL), qi), s * R + rep));
      for (std::size_t ji = 0; ji < J; ++ji) {
        const Word w = pt.word.prefix(eligible[ji]);
        auto it = done.find(w);
        if (it == done.end()) {
          const CascadeTree copy = tree.subtree(w);
          FieldOptions fo = field_options(c);
          fo.tail_depth = 0;
          const auto mu = leaf_masses(copy, n_max, fo);
          const auto muq = tilted_field(mu, tilt);
          const auto g1 = growth_speed(muq, mu, alpha_mu[qi], c.neighbors, eps, c.fraction, n_max);
          const auto g2 = growth_speed(muq, muq, alpha_q[qi], c.neighbors, eps, c.fraction, n_max);
          it = done.emplace(w, std::make_pair(g1.value_or(-1), g2.value_or(-1))).first;
        }
        out[s * J + ji] = {w.index(), it->second.first, it->second.second};
      }
    }
  });
  r.runtimes.emplace_back("simulation", seconds_since(start));

  auto worst = [&](const Cell& cl) {
    if (cl.gs_mu < 0 || cl.gs_q < 0) return n_max + 1;
    return std::max(cl.gs_mu, cl.gs_q);
  };
  auto tg = make_table(c, "growthspeed", {"q", "sample", "replica", "j", "word_index", "gs_mu", "gs_mu_q", "S_j"});
  tg.header["eligible_j"] = eligible;
  auto tm = make_table(c, "growthspeed_median", {"q", "sample", "j", "median_gs", "S_j", "pass"});
  auto tsum = make_table(c, "growthspeed_summary", {"q", "samples", "passed", "fraction"});
  auto tj = make_table(c, "growthspeed_by_scale", {"q", "j", "S_j", "pass_fraction"});
  for (std::size_t qi = 0; qi < Q; ++qi) {
    std::size_t passed = 0;
    std::vector<std::size_t> by_j(J, 0);
    for (std::size_t s = 0; s < M; ++s) {
      bool ok = true;
      for (std::size_t ji = 0; ji < J; ++ji) {
        std::vector<double> vals(R);
        for (std::size_t rep = 0; rep < R; ++rep) {
          const auto& cl = cells[qi * R + rep][s * J + ji];
          vals[rep] = worst(cl);
          tg.rows.push_back({fmt_q(c.q[qi]), cell(s), cell(rep), cell(eligible[ji]),
                             cell(static_cast<long long>(cl.index)), cell(cl.gs_mu), cell(cl.gs_q), cell(sj(eligible[ji]))});
        }
        const double med = stats::median(vals);
        const bool pass = med <= static_cast<double>(sj(eligible[ji]));
        ok = ok && pass;
        by_j[ji] += pass ? 1 : 0;
        tm.rows.push_back({fmt_q(c.q[qi]), cell(s), cell(eligible[ji]), cell(med), cell(sj(eligible[ji])), cell(pass)});
      }
      passed += ok ? 1 : 0;
    }
    for (std::size_t ji = 0; ji < J; ++ji)
      tj.rows.push_back({fmt_q(c.q[qi]), cell(eligible[ji]), cell(sj(eligible[ji])),
                         cell(static_cast<double>(by_j[ji]) / static_cast<double>(M))});
    const double frac = static_cast<double>(passed) / static_cast<double>(M);
    tsum.rows.push_back({fmt_q(c.q[qi]), cell(M), cell(passed), cell(frac)});
    r.checks.push_back({"growth_speed_q=" + fmt_q(c.q[qi]), frac >= c.pass_threshold, frac, c.pass_threshold,
                        "fraction of samples whose replica median of max(GS, GS_q) is <= S_j at every eligible j"});
  }
  r.tables.push_back(std::move(tg));
  r.tables.push_back(std::move(tm));
  r.tables.push_back(std::move(tj));
  r.tables.push_back(std::move(tsum));
  r.runtimes.emplace_back("total", seconds_since(start));
  return r;
}

// ---------------------------------------------------------------- ldrenewal

Report run_ldrenewal(const ExperimentConfig& c) {
  const auto start = Clock::now();
  Report r = make_report(c);
  const auto R = static_cast<std::size_t>(c.replicas);
  add_seeds(r, c, R);
  const auto eps = parse_eps_sequence(c.eps);
  const int n = c.depth;
  const double lb = std::log(static_cast<double>(c.model.base()));
  const auto Q = c.q.size();
  std::vector<double> alpha(Q), target(Q);
  for (std::size_t qi = 0; qi < Q; ++qi) {
    alpha[qi] = c.model.tau_tilde_prime(c.q[qi]).value;
    target[qi] = c.q[qi] * alpha[qi] - c.model.tau_tilde(c.q[qi]).value;
  }
  struct Cell {
    std::size_t count;
    double ld, log_y, bound;
    bool pass;
  };
  std::vector<std::vector<Cell>> outs(R);
  const double e = eps(n);
  parallel_for(R, c.threads, [&](std::size_t rep) {
    const CascadeTree tree(c.model, replica_seed(c, rep));
    const auto field = leaf_masses(tree, n, field_options(c));
    for (std::size_t qi = 0; qi < Q; ++qi) {
      const auto count = box_count(field, n, alpha[qi], e);
      const double ld = count == 0 ? -std::numeric_limits<double>::infinity()
                                   : std::log(static_cast<double>(count)) / (static_cast<double>(n) * lb);
      const double log_y = std::log(tree.total_mass_q(c.q[qi], Word::root(c.model.base()), n)) / lb;
      const double bound = (1.0 + std::abs(c.q[qi])) * e + std::abs(log_y) / static_cast<double>(n);
      outs[rep].push_back({count, ld, log_y, bound, std::abs(ld - target[qi]) <= bound});
    }
  });
  r.runtimes.emplace_back("simulation", seconds_since(start));

  auto tl = make_table(c, "ldrenewal", {"replica", "q", "alpha", "count", "ld", "target", "log_b_Yq", "bound", "pass"});
  tl.header["eps_n"] = e;
  auto ts = make_table(c, "ldrenewal_summary", {"q", "replicas", "passed", "fraction"});
  for (std::size_t qi = 0; qi < Q; ++qi) {
    std::size_t passed = 0;
    for (std::size_t rep = 0; rep < R; ++rep) {
      const auto& o = outs[rep][qi];
      passed += o.pass ? 1 : 0;
      tl.rows.push_back({cell(rep), fmt_q(c.q[qi]), cell(alpha[qi]), cell(o.count), cell(o.ld), cell(target[qi]),
                         cell(o.log_y), cell(o.bound), cell(o.pass)});
    }
    const double frac = static_cast<double>(passed) / static_cast<double>(R);
    ts.rows.push_back({fmt_q(c.q[qi]), cell(R), cell(passed), cell(frac)});
    r.checks.push_back({"ld_band_q=" + fmt_q(c.q[qi]), frac >= c.pass_threshold, frac, c.pass_threshold,
                        "fraction of replicas inside the (1+|q|)eps_n + |log_b Y_q|/n band"});
  }
  r.tables.push_back(std::move(tl));
  r.tables.push_back(std::move(ts));
  r.runtimes.emplace_back("total", seconds_since(start));
  return r;
}

// ---------------------------------------------------------------- ubiquity

Report run_ubiquity(const ExperimentConfig& c) {
  const auto start = Clock::now();
  Report r = make_report(c);
  add_seeds(r, c, 1);
  const auto eps = parse_eps_sequence(c.eps);
  const int b = c.model.base();
  const CascadeTree tree(c.model, replica_seed(c, 0));
  const auto field = leaf_masses(tree, c.depth, field_options(c));
  const auto system = PointSystem::badic(b, c.depth);
  const auto tau_fn = legendre_table(c.model);
  r.runtimes.emplace_back("field", seconds_since(start));

  struct Job {
    double alpha, xi;
  };
  std::vector<Job> jobs;
  for (double a : c.alpha)
    for (double x : c.xi) jobs.push_back({a, x});
  struct Out {
    std::optional<DimensionEstimate> dim;
    std::string error;
    std::size_t qualifying = 0;
    bool over = false;
    double target = 0.0;
  };
  std::vector<Out> outs(jobs.size());
  parallel_for(jobs.size(), c.threads, [&](std::size_t k) {
    auto& o = outs[k];
    o.target = legendre(tau_fn, jobs[k].alpha).value / jobs[k].xi;
    const auto cover = limsup_cover(system, field, jobs[k].alpha, jobs[k].xi, eps, c.iteration);
    for (auto q : cover.qualifying) o.qualifying += q;
    o.over = cover.over_approximated;
    try {
      o.dim = box_dimension(cover, c.depth);
    } catch (const DomainError& e) {
      o.error = e.what();
    }
  });

  auto tu = make_table(c, "ubiquity", {"xi", "alpha", "depth", "dimension", "r_squared", "target", "qualifying", "over_approximated"});
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto& o = outs[k];
    const double dim = o.dim ? o.dim->dimension : std::numeric_limits<double>::quiet_NaN();
    tu.rows.push_back({fmt_q(jobs[k].xi), fmt_q(jobs[k].alpha), cell(c.depth), cell(dim),
                       cell(o.dim ? o.dim->r_squared : std::numeric_limits<double>::quiet_NaN()), cell(o.target),
                       cell(o.qualifying), cell(o.over)});
    const double err = o.dim ? std::abs(dim - o.target) : std::numeric_limits<double>::infinity();
    r.checks.push_back({"box_dimension_alpha=" + fmt_q(jobs[k].alpha) + "_xi=" + fmt_q(jobs[k].xi), err <= c.tolerance,
                        dim, o.target, o.dim ? "|dim - tau*(alpha)/xi| = " + format_real(err) : o.error});
  }
  r.tables.push_back(std::move(tu));

  auto tt = make_table(c, "ubiquity_targets", {"xi", "k_min", "k_max", "c_low", "c_high", "words", "fallbacks"});
  const auto small = PointSystem::badic(b, std::min(c.depth, 10));
  const int k_max = std::min(8, std::max(1, small.max_level()));
  for (double x : c.xi) {
    if (!(x > 1.0)) continue;
    const auto tc = measure_target_constants(small, x, 1, k_max);
    tt.rows.push_back({fmt_q(x), cell(1), cell(k_max), cell(tc.c_low), cell(tc.c_high), cell(tc.words), cell(tc.fallbacks)});
  }
  r.tables.push_back(std::move(tt));

  if (c.samples > 0) {
    const auto cstart = Clock::now();
    const auto hsys = PointSystem::badic(b, c.horizon);
    UbiquityOptions opts;
    opts.gs_horizon = c.gs_horizon;
    opts.N = c.neighbors;
    opts.eps = eps;
    opts.f = c.fraction;
    const auto sj = parse_sj_sequence(c.sj);
    if (sj.kind() != SjSequence::Kind::j_log_down)
      throw ConfigError("conditioned ubiquity uses S_j = j (log j)^-kappa; got " + c.sj);
    opts.kappa = parse_real(std::string_view(c.sj).substr(c.sj.rfind(':') + 1));
    opts.rho_alpha = c.rho_alpha;
    opts.sample_seed = derive_key(c.seed, 0x0b1cULL);
    std::vector<std::pair<double, double>> qx;
    for (double q : c.q)
      for (double x : c.xi)
        if (x > 1.0) qx.emplace_back(q, x);
    std::vector<double> frac(qx.size());
    parallel_for(qx.size(), c.threads, [&](std::size_t k) {
      frac[k] = conditioned_ubiquity_check(tree, qx[k].first, qx[k].second, static_cast<std::size_t>(c.samples), hsys,
                                           c.horizon, opts)
                    .fraction;
    });
    auto tcnd = make_table(c, "ubiquity_conditioned", {"q", "xi", "samples", "horizon", "fraction"});
    for (std::size_t k = 0; k < qx.size(); ++k) {
      tcnd.rows.push_back({fmt_q(qx[k].first), fmt_q(qx[k].second), cell(c.samples), cell(c.horizon), cell(frac[k])});
      r.checks.push_back({"conditioned_ubiquity_q=" + fmt_q(qx[k].first) + "_xi=" + fmt_q(qx[k].second),
                          frac[k] >= c.pass_threshold, frac[k], c.pass_threshold,
                          "fraction of mu_q-sampled points with a successful level in the upper half of the horizon"});
    }
    r.tables.push_back(std::move(tcnd));
    r.runtimes.emplace_back("conditioned", seconds_since(cstart));
  }
  r.runtimes.emplace_back("total", seconds_since(start));
  return r;
}

// ---------------------------------------------------------------- selftest

Report run_selftest(const ExperimentConfig& c) {
  const auto start = Clock::now();
  Report r = make_report(c);
  auto add = [&](std::string name, bool ok, double value, double threshold, std::string detail) {
    r.checks.push_back({std::move(name), ok, value, threshold, std::move(detail)});
  };

  const std::vector<WeightModel> analytic = {
      WeightModel::deterministic({0.5, 0.5}), WeightModel::deterministic({0.25, 0.75}),
      WeightModel::lognormal(2, 0.1), WeightModel::lognormal(2, 2.0 * std::log(2.0)),
      WeightModel::two_point(2, 0.3, 0.7, 0.5), WeightModel::lognormal(3, 0.2)};
  double norm = 0.0;
  for (const auto& m : analytic)
    norm = std::max({norm, std::abs(m.tau_tilde(0.0).value + 1.0), std::abs(m.tau_tilde(1.0).value)});
  add("normalization", norm < 1e-12, norm, 1e-12, "max |tau~(0)+1|, |tau~(1)| over analytic models");

  const auto binom = WeightModel::deterministic({0.25, 0.75});
  const auto field = leaf_masses(CascadeTree(binom, c.seed), 12);
  double det = 0.0;
  for (double q : uniform_grid(-5.0, 5.0, 0.1))
    det = std::max(det, std::abs(partition_function(field, 12, q) - binom.tau_tilde(q).value));
  add("deterministic_oracle", det < 1e-9, det, 1e-9, "binomial (1/4,3/4), j = 12");

  const CascadeTree ln(WeightModel::lognormal(2, 0.2), c.seed);
  double p1 = 0.0;
  KeyedStream pick(derive_key(c.seed, 77));
  for (int i = 0; i < 20; ++i) {
    const int lv = 1 + static_cast<int>(pick.next_u64() % 6);
    const int lw = static_cast<int>(pick.next_u64() % static_cast<std::uint64_t>(13 - lv));
    const Word v(2, lv, pick.next_u64() % ipow(2, lv));
    const Word w(2, lw, pick.next_u64() % ipow(2, lw));
    const double lhs = ln.log_mass(v.concat(w), 0);
    const double rhs = ln.subtree(v).log_mass(w, 0) + ln.log_path_product(v);
    p1 = std::max(p1, std::abs(std::expm1(lhs - rhs)));
  }
  add("copy_recursion", p1 < 1e-12, p1, 1e-12, "mu(I_vw) vs mu^v(I_w) * path product");

  const auto lebesgue = leaf_masses(CascadeTree(WeightModel::deterministic({0.5, 0.5}), c.seed), 4);
  const double s4 = s_diagnostic(lebesgue, lebesgue, 1.0, 1, 0.5, 0.5, 4);
  add("s_diagnostic_uniform", std::abs(s4 - 2.875) < 1e-12, s4, 2.875, "b=2, n=4, alpha=1, eps=eta=0.5, N=1");

  const auto a = sample_weights(WeightModel::lognormal(2, 0.3), c.seed, Word::parse(2, "0110"));
  const auto b = sample_weights(WeightModel::lognormal(2, 0.3), c.seed, Word::parse(2, "0110"));
  add("keyed_determinism", a == b, 0.0, 0.0, "same key, bit-equal weights");

  r.runtimes.emplace_back("total", seconds_since(start));
  return r;
}

Report run(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::spectrum: return run_spectrum(config);
    case ExperimentKind::convergence: return run_convergence(config);
    case ExperimentKind::growthspeed: return run_growthspeed(config);
    case ExperimentKind::ldrenewal: return run_ldrenewal(config);
    case ExperimentKind::ubiquity: return run_ubiquity(config);
    case ExperimentKind::validate: return run_validate(config);
    case ExperimentKind::selftest: return run_selftest(config);
  }
  throw ConfigError("unknown experiment");
}

}  // namespace mfc::tools

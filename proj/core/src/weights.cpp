#include "mfcascade/weights.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>

#include "mfcascade/error.hpp"

namespace mfc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kCriticalTolerance = 1e-9;
constexpr double kJScanLimit = 64.0;
constexpr double kJBisectionTolerance = 1e-9;
constexpr std::size_t kNormalizationDraws = 100'000;

std::string format_double(double x) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", x);
  return buf.data();
}

double log_sum_exp(std::span<const double> xs) {
  double mx = -kInf;
  for (double x : xs) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

// A finite-atom law: E sum_k W_k^q = scale * sum_j prob_j * value_j^q.
struct Atoms {
  double log_scale = 0.0;
  std::vector<double> log_prob;
  std::vector<double> log_value;

  double log_moment(double q) const {
    std::vector<double> t(log_prob.size());
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = log_prob[j] + q * log_value[j];
    return log_scale + log_sum_exp(t);
  }

  std::vector<double> tilted_probs(double q) const {
    std::vector<double> t(log_prob.size());
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = log_prob[j] + q * log_value[j];
    const double lse = log_sum_exp(t);
    for (double& x : t) x = std::exp(x - lse);
    return t;
  }

  double dlog_moment(double q) const {
    const auto s = tilted_probs(q);
    double d = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) d += s[j] * log_value[j];
    return d;
  }

  // ln E - q d(ln E)/dq written as an entropy so that it stays accurate
  // when one atom dominates.
  double gap_numerator(double q) const {
    std::vector<double> t(log_prob.size());
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = log_prob[j] + q * log_value[j];
    const double lse = log_sum_exp(t);
    double g = log_scale;
    for (std::size_t j = 0; j < t.size(); ++j) {
      const double ls = t[j] - lse;
      const double s = std::exp(ls);
      if (s > 0.0) g += s * (log_prob[j] - ls);
    }
    return g;
  }
};

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> batch_means;
};

}  // namespace

namespace detail {

struct ModelState {
  int base = 2;
  WeightKind kind = WeightKind::deterministic_vector;
  std::string sampler_name;
  std::map<std::string, double> params;
  std::vector<double> weights;
  std::vector<double> log_weights;
  double log_location = 0.0;  // lognormal mean of ln W
  double sigma = 0.0;
  double low = 0.0;
  double high = 0.0;
  double p_high = 0.0;
  LogSampler sampler;
  MonteCarloOptions mc;

  mutable std::once_flag bank_once;
  mutable std::vector<double> bank;  // samples x base, log-weights

  mutable std::once_flag j_once;
  mutable OpenInterval j;
  mutable std::exception_ptr j_error;

  bool analytic() const { return kind != WeightKind::custom_sampler; }

  Atoms atoms() const {
    Atoms a;
    if (kind == WeightKind::deterministic_vector) {
      a.log_scale = 0.0;
      a.log_prob.assign(log_weights.size(), 0.0);
      a.log_value = log_weights;
    } else {
      a.log_scale = std::log(static_cast<double>(base));
      a.log_prob = {std::log(p_high), std::log1p(-p_high)};
      a.log_value = {std::log(high), std::log(low)};
    }
    return a;
  }

  void draw(KeyedStream& s, std::span<double> out) const {
    switch (kind) {
      case WeightKind::deterministic_vector:
        std::copy(log_weights.begin(), log_weights.end(), out.begin());
        return;
      case WeightKind::lognormal_iid:
        for (double& x : out) x = log_location + sigma * s.normal();
        return;
      case WeightKind::two_point_iid:
        for (double& x : out) x = s.uniform() < p_high ? std::log(high) : std::log(low);
        return;
      case WeightKind::custom_sampler:
        sampler(s, out);
        return;
    }
  }

  const std::vector<double>& monte_carlo_bank() const {
    std::call_once(bank_once, [this] {
      const auto b = static_cast<std::size_t>(base);
      bank.resize(mc.samples * b);
      for (std::size_t i = 0; i < mc.samples; ++i) {
        KeyedStream s(derive_key(mc.seed, i));
        draw(s, std::span<double>(bank.data() + i * b, b));
      }
    });
    return bank;
  }

  MomentEstimate moment(double q) const {
    const auto& bk = monte_carlo_bank();
    const auto b = static_cast<std::size_t>(base);
    const std::size_t n = mc.samples;
    const std::size_t nb = std::max<std::size_t>(1, std::min(mc.batches, n));
    const std::size_t per = n / nb;
    MomentEstimate est;
    est.batch_means.assign(nb, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      const std::size_t lo = k * per;
      const std::size_t hi = (k + 1 == nb) ? n : lo + per;
      double acc = 0.0;
      for (std::size_t i = lo; i < hi; ++i)
        for (std::size_t c = 0; c < b; ++c) acc += std::exp(q * bk[i * b + c]);
      est.batch_means[k] = acc / static_cast<double>(hi - lo);
      total += acc;
    }
    est.mean = total / static_cast<double>(n);
    if (nb > 1) {
      double ss = 0.0;
      for (double m : est.batch_means) ss += (m - est.mean) * (m - est.mean);
      est.std_error = std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb));
    }
    return est;
  }
};

}  // namespace detail

namespace {

using detail::ModelState;

TauValue tau_from_moment(const MomentEstimate& m, double log_b) {
  if (!std::isfinite(m.mean) || m.mean <= 0.0) return {-kInf, kInf, true};
  return {-std::log(m.mean) / log_b, m.std_error / (m.mean * log_b), false};
}

void check_normalization_mc(const ModelState& st) {
  const auto b = static_cast<std::size_t>(st.base);
  const std::size_t n = std::min(kNormalizationDraws, st.mc.samples);
  std::vector<double> row(b);
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    KeyedStream s(derive_key(st.mc.seed, i));
    st.draw(s, row);
    double tot = 0.0;
    for (double lw : row) {
      if (!std::isfinite(lw)) throw ConfigError("custom sampler produced a non-positive or non-finite weight");
      tot += std::exp(lw);
    }
    sum += tot;
    sum2 += tot * tot;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sum2 / static_cast<double>(n) - mean * mean);
  const double se = std::sqrt(var / static_cast<double>(n));
  if (std::abs(mean - 1.0) > 4.0 * se + 1e-12) {
    std::ostringstream os;
    os << "custom sampler '" << st.sampler_name << "' is not normalized: E sum W = " << mean << " +- " << se;
    throw ConfigError(os.str());
  }
}

}  // namespace

std::string_view to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::deterministic_vector: return "deterministic-vector";
    case WeightKind::lognormal_iid: return "lognormal-iid";
    case WeightKind::two_point_iid: return "two-point-iid";
    case WeightKind::custom_sampler: return "custom-sampler";
  }
  return "unknown";
}

WeightKind weight_kind_from_string(std::string_view name) {
  for (auto k : {WeightKind::deterministic_vector, WeightKind::lognormal_iid, WeightKind::two_point_iid,
                 WeightKind::custom_sampler})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown weight model kind '" + std::string(name) + "'");
}

std::string_view to_string(Degeneracy d) {
  switch (d) {
    case Degeneracy::nondegenerate: return "nondegenerate";
    case Degeneracy::critical: return "critical";
    case Degeneracy::degenerate: return "degenerate";
    case Degeneracy::indeterminate: return "indeterminate";
  }
  return "unknown";
}

WeightModel::WeightModel(std::shared_ptr<const detail::ModelState> state) : state_(std::move(state)) {}

WeightModel WeightModel::deterministic(std::vector<double> weights) {
  if (weights.size() < 2) throw ConfigError("deterministic model needs at least two weights");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("deterministic weights must be positive and finite");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("deterministic weights must sum to 1, got " + format_double(sum));
  auto st = std::make_shared<ModelState>();
  st->base = static_cast<int>(weights.size());
  st->kind = WeightKind::deterministic_vector;
  st->log_weights.resize(weights.size());
  std::transform(weights.begin(), weights.end(), st->log_weights.begin(), [](double w) { return std::log(w); });
  st->weights = std::move(weights);
  return WeightModel(std::move(st));
}

WeightModel WeightModel::lognormal(int base, double sigma2) {
  if (base < 2) throw ConfigError("lognormal model: base must be >= 2");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw ConfigError("lognormal model: sigma2 must be >= 0");
  auto st = std::make_shared<ModelState>();
  st->base = base;
  st->kind = WeightKind::lognormal_iid;
  st->sigma = std::sqrt(sigma2);
  st->log_location = -std::log(static_cast<double>(base)) - 0.5 * sigma2;
  st->params = {{"sigma2", sigma2}};
  return WeightModel(std::move(st));
}

WeightModel WeightModel::two_point(int base, double low, double high, double p_high) {
  if (base < 2) throw ConfigError("two-point model: base must be >= 2");
  if (!(low > 0.0) || !(high > 0.0) || !std::isfinite(low) || !std::isfinite(high))
    throw ConfigError("two-point model: values must be positive and finite");
  if (!(p_high > 0.0 && p_high < 1.0)) throw ConfigError("two-point model: p_high must lie in (0,1)");
  const double mean = p_high * high + (1.0 - p_high) * low;
  if (std::abs(mean * base - 1.0) > 1e-12)
    throw ConfigError("two-point model: E W_k must equal 1/b, got " + format_double(mean));
  auto st = std::make_shared<ModelState>();
  st->base = base;
  st->kind = WeightKind::two_point_iid;
  st->low = low;
  st->high = high;
  st->p_high = p_high;
  st->params = {{"low", low}, {"high", high}, {"p_high", p_high}};
  return WeightModel(std::move(st));
}

WeightModel WeightModel::custom(int base, std::string sampler_name, std::map<std::string, double> parameters,
                                LogSampler sampler, MonteCarloOptions mc) {
  if (base < 2) throw ConfigError("custom model: base must be >= 2");
  if (!sampler) throw ConfigError("custom model: sampler is empty");
  if (mc.samples < 2 || mc.batches < 2) throw ConfigError("custom model: Monte Carlo needs >= 2 samples and batches");
  auto st = std::make_shared<ModelState>();
  st->base = base;
  st->kind = WeightKind::custom_sampler;
  st->sampler_name = std::move(sampler_name);
  st->params = std::move(parameters);
  st->sampler = std::move(sampler);
  st->mc = mc;
  check_normalization_mc(*st);
  return WeightModel(std::move(st));
}

WeightModel WeightModel::uniform_iid(int base, double low, double high, MonteCarloOptions mc) {
  if (!(low > 0.0) || !(high > low)) throw ConfigError("uniform-iid sampler: need 0 < low < high");
  LogSampler s = [low, high](KeyedStream& ks, std::span<double> out) {
    for (double& x : out) x = std::log(low + (high - low) * ks.uniform());
  };
  return custom(base, "uniform-iid", {{"low", low}, {"high", high}}, std::move(s), mc);
}

int WeightModel::base() const noexcept { return state_->base; }
WeightKind WeightModel::kind() const noexcept { return state_->kind; }
bool WeightModel::analytic() const noexcept { return state_->analytic(); }
const std::string& WeightModel::sampler_name() const noexcept { return state_->sampler_name; }
const std::map<std::string, double>& WeightModel::parameters() const noexcept { return state_->params; }
const std::vector<double>& WeightModel::fixed_weights() const noexcept { return state_->weights; }
const MonteCarloOptions& WeightModel::monte_carlo() const noexcept { return state_->mc; }

std::string WeightModel::describe() const {
  std::ostringstream os;
  os << "kind=" << to_string(kind()) << " b=" << base();
  if (kind() == WeightKind::deterministic_vector) {
    os << " weights=";
    for (std::size_t i = 0; i < state_->weights.size(); ++i)
      os << (i ? "," : "") << format_double(state_->weights[i]);
  }
  if (kind() == WeightKind::custom_sampler) os << " sampler=" << sampler_name();
  for (const auto& [k, v] : parameters()) os << ' ' << k << '=' << format_double(v);
  return os.str();
}

void WeightModel::sample_log(KeyedStream& stream, std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(base())) throw std::invalid_argument("sample_log: span size must equal b");
  state_->draw(stream, out);
}

TauValue WeightModel::tau_tilde(double q) const {
  const auto& st = *state_;
  const double log_b = std::log(static_cast<double>(st.base));
  switch (st.kind) {
    case WeightKind::deterministic_vector:
    case WeightKind::two_point_iid:
      return {-st.atoms().log_moment(q) / log_b, 0.0, false};
    case WeightKind::lognormal_iid: {
      const double s2 = st.sigma * st.sigma;
      return {-(log_b + q * st.log_location + 0.5 * q * q * s2) / log_b, 0.0, false};
    }
    case WeightKind::custom_sampler:
      return tau_tilde_monte_carlo(q);
  }
  return {};
}

TauValue WeightModel::tau_tilde_monte_carlo(double q) const {
  return tau_from_moment(state_->moment(q), std::log(static_cast<double>(base())));
}

Derivative WeightModel::tau_tilde_prime(double q) const {
  const auto& st = *state_;
  const double log_b = std::log(static_cast<double>(st.base));
  switch (st.kind) {
    case WeightKind::deterministic_vector:
    case WeightKind::two_point_iid:
      return {-st.atoms().dlog_moment(q) / log_b, 0.0, 0.0, false};
    case WeightKind::lognormal_iid:
      return {-(st.log_location + q * st.sigma * st.sigma) / log_b, 0.0, 0.0, false};
    case WeightKind::custom_sampler:
      break;
  }

  // Central difference on the common Monte Carlo bank; batch-level
  // differences give the standard error, the 2h difference the truncation.
  const double h = 1e-5 * std::max(1.0, std::abs(q));
  const auto m0 = st.moment(q);
  const auto mp = st.moment(q + h);
  const auto mm = st.moment(q - h);
  const auto t0 = tau_from_moment(m0, log_b);
  const auto tp = tau_from_moment(mp, log_b);
  const auto tm = tau_from_moment(mm, log_b);
  Derivative d;
  if (t0.diverged) return {kNaN, kInf, kInf, true};
  if (tp.diverged || tm.diverged) {
    d.one_sided = true;
    if (tp.diverged && tm.diverged) return {kNaN, kInf, kInf, true};
    d.value = tp.diverged ? (t0.value - tm.value) / h : (tp.value - t0.value) / h;
    d.error = std::abs(d.value) * h;
    d.std_error = (tp.diverged ? tm.std_error : tp.std_error) / h;
    return d;
  }
  d.value = (tp.value - tm.value) / (2.0 * h);
  const auto m2p = st.moment(q + 2.0 * h);
  const auto m2m = st.moment(q - 2.0 * h);
  const auto t2p = tau_from_moment(m2p, log_b);
  const auto t2m = tau_from_moment(m2m, log_b);
  if (!t2p.diverged && !t2m.diverged) d.error = std::abs((t2p.value - t2m.value) / (4.0 * h) - d.value) / 3.0;
  const std::size_t nb = mp.batch_means.size();
  if (nb > 1) {
    std::vector<double> db(nb);
    for (std::size_t k = 0; k < nb; ++k)
      db[k] = (std::log(mm.batch_means[k]) - std::log(mp.batch_means[k])) / (2.0 * h * log_b);
    const double mean = std::accumulate(db.begin(), db.end(), 0.0) / static_cast<double>(nb);
    double ss = 0.0;
    for (double x : db) ss += (x - mean) * (x - mean);
    d.std_error = std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb));
  }
  return d;
}

double WeightModel::spectrum_gap(double q) const {
  const auto& st = *state_;
  const double log_b = std::log(static_cast<double>(st.base));
  switch (st.kind) {
    case WeightKind::deterministic_vector:
    case WeightKind::two_point_iid:
      return st.atoms().gap_numerator(q) / log_b;
    case WeightKind::lognormal_iid:
      return (log_b - 0.5 * q * q * st.sigma * st.sigma) / log_b;
    case WeightKind::custom_sampler:
      break;
  }
  const auto t = tau_tilde(q);
  const auto d = tau_tilde_prime(q);
  if (t.diverged || !std::isfinite(d.value)) return kNaN;
  return q * d.value - t.value;
}

OpenInterval WeightModel::j_interval() const {
  const auto& st = *state_;
  std::call_once(st.j_once, [this, &st] {
    try {
      auto positive = [this](double q) {
        const double g = spectrum_gap(q);
        return std::isfinite(g) && g > 0.0;
      };
      for (int i = 1; i < 20; ++i) {
        const double q = i / 20.0;
        if (!positive(q))
          throw ModelInconsistency("q tau~'(q) - tau~(q) <= 0 at q = " + format_double(q) +
                                   " although (0,1) must lie inside J");
      }
      auto edge = [&](double dir) {
        double inside = 0.5;
        const double probes_up[] = {1, 2, 4, 8, 16, 32, 64};
        const double probes_down[] = {0, -1, -2, -4, -8, -16, -32, -64};
        std::span<const double> probes = dir > 0 ? std::span<const double>(probes_up) : std::span<const double>(probes_down);
        for (double probe : probes) {
          if (std::abs(probe) > kJScanLimit) break;
          if (positive(probe)) {
            inside = probe;
            continue;
          }
          double a = inside;
          double b = probe;
          while (std::abs(b - a) > kJBisectionTolerance) {
            const double mid = 0.5 * (a + b);
            (positive(mid) ? a : b) = mid;
          }
          return 0.5 * (a + b);
        }
        return dir * kInf;
      };
      st.j = OpenInterval{edge(-1.0), edge(1.0)};
    } catch (...) {
      st.j_error = std::current_exception();
    }
  });
  if (st.j_error) std::rethrow_exception(st.j_error);
  return st.j;
}

Degeneracy WeightModel::classify() const {
  const auto d = tau_tilde_prime(1.0);
  if (!std::isfinite(d.value)) return Degeneracy::indeterminate;
  if (d.std_error > kCriticalTolerance) {
    if (std::abs(d.value) <= 4.0 * d.std_error + kCriticalTolerance) return Degeneracy::indeterminate;
  } else if (std::abs(d.value) <= kCriticalTolerance) {
    return Degeneracy::critical;
  }
  return d.value > 0.0 ? Degeneracy::nondegenerate : Degeneracy::degenerate;
}

bool WeightModel::analyzing_family_assumption_holds() const {
  const auto cls = classify();
  OpenInterval j;
  try {
    j = j_interval();
  } catch (const ModelInconsistency&) {
    return false;
  }
  if (cls == Degeneracy::nondegenerate) return j.lower < 0.0 && j.upper > 1.0;
  if (cls == Degeneracy::critical) return j.contains(0.0);
  return false;
}

std::vector<double> sample_weights(const WeightModel& model, std::uint64_t seed, const Word& w) {
  if (w.base() != model.base()) throw std::invalid_argument("sample_weights: word base differs from model base");
  auto stream = KeyedStream::for_node(seed, w.length(), w.index());
  std::vector<double> out(static_cast<std::size_t>(model.base()));
  model.sample_log(stream, out);
  for (double& x : out) x = std::exp(x);
  return out;
}

std::vector<double> q_transform(std::span<const double> weights, double q, double tau_q) {
  if (!std::isfinite(tau_q)) throw DomainError("q_transform: tau~(q) must be finite");
  const double scale = std::pow(static_cast<double>(weights.size()), tau_q);
  std::vector<double> out(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] > 0.0)) throw DomainError("q_transform: weights must be positive");
    out[k] = scale * std::pow(weights[k], q);
  }
  return out;
}

WeightModel tilted_model(const WeightModel& model, double q) {
  const auto t = model.tau_tilde(q);
  if (t.diverged) throw DomainError("tilted_model: tau~(q) diverges at q = " + format_double(q));
  const int b = model.base();
  const double scale = std::pow(static_cast<double>(b), t.value);
  switch (model.kind()) {
    case WeightKind::deterministic_vector:
      return WeightModel::deterministic(q_transform(model.fixed_weights(), q, t.value));
    case WeightKind::lognormal_iid:
      return WeightModel::lognormal(b, q * q * model.parameters().at("sigma2"));
    case WeightKind::two_point_iid: {
      const auto& p = model.parameters();
      return WeightModel::two_point(b, scale * std::pow(p.at("low"), q), scale * std::pow(p.at("high"), q),
                                    p.at("p_high"));
    }
    case WeightKind::custom_sampler:
      break;
  }
  auto params = model.parameters();
  params["tilt_q"] = q;
  const double shift = t.value * std::log(static_cast<double>(b));
  LogSampler s = [model, q, shift](KeyedStream& ks, std::span<double> out) {
    model.sample_log(ks, out);
    for (double& x : out) x = shift + q * x;
  };
  return WeightModel::custom(b, model.sampler_name(), std::move(params), std::move(s), model.monte_carlo());
}

TauFunction TauFunction::tabulate(const WeightModel& model, std::vector<double> grid) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("TauFunction: grid must be sorted");
  TauFunction f;
  f.q = std::move(grid);
  f.tau.reserve(f.q.size());
  f.tau_prime.reserve(f.q.size());
  for (double q : f.q) {
    f.tau.push_back(model.tau_tilde(q).value);
    f.tau_prime.push_back(model.tau_tilde_prime(q).value);
  }
  f.j = model.j_interval();
  return f;
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("uniform_grid: need step > 0 and hi >= lo");
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step));
  std::vector<double> g(n + 1);
  char buf[32];
  for (std::size_t i = 0; i <= n; ++i) {
    // snap to 12 significant digits so 0.1 steps land on 0.3, not 0.30000000000000004
    std::snprintf(buf, sizeof buf, "%.12g", lo + static_cast<double>(i) * step);
    g[i] = std::strtod(buf, nullptr);
  }
  return g;
}

}  // namespace mfc

#include "mfcascade/ubiquity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mfcascade/error.hpp"
#include "mfcascade/growth_speed.hpp"
#include "mfcascade/keyed_rng.hpp"
#include "mfcascade/stats.hpp"

namespace mfc {

namespace {

double inv_pow(int base, int k) { return 1.0 / static_cast<double>(ipow(base, k)); }

// Items of level k with x in [lo, hi]; the level is sorted by x.
std::span<const SystemItem> x_range(std::span<const SystemItem> level, double lo, double hi) {
  const auto first = std::lower_bound(level.begin(), level.end(), lo,
                                      [](const SystemItem& it, double v) { return it.x < v; });
  const auto last = std::upper_bound(first, level.end(), hi,
                                     [](double v, const SystemItem& it) { return v < it.x; });
  return {first, last};
}

constexpr double kScaledTol = 1e-9;

}  // namespace

int level_of(int base, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("radius must lie in (0, 1]");
  int k = 0;
  while (k < max_word_length(base) && lambda <= inv_pow(base, k + 1)) ++k;
  return k;
}

PointSystem PointSystem::badic(int base, int horizon) {
  if (base < 2) throw std::invalid_argument("badic_system: base must be >= 2");
  if (horizon < 0 || horizon > 24) throw std::invalid_argument("badic_system: horizon must lie in [0, 24]");
  std::vector<SystemItem> items;
  for (int j = 1; j <= horizon; ++j) {
    const std::uint64_t m = ipow(base, j);
    const double lambda = inv_pow(base, j);
    for (std::uint64_t k = 0; k <= m; ++k) items.push_back({static_cast<double>(k) / static_cast<double>(m), lambda, j});
  }
  // (x, j) keys are distinct by construction; dedup kept for custom-like safety
  items.erase(std::unique(items.begin(), items.end(),
                          [](const SystemItem& a, const SystemItem& b) { return a.level == b.level && a.x == b.x; }),
              items.end());
  return custom(base, std::move(items));
}

PointSystem PointSystem::custom(int base, std::vector<SystemItem> items) {
  if (base < 2) throw std::invalid_argument("point system: base must be >= 2");
  for (auto& it : items) {
    if (!(it.x >= 0.0 && it.x <= 1.0)) throw std::invalid_argument("point system: x must lie in [0, 1]");
    it.level = level_of(base, it.lambda);
  }
  std::stable_sort(items.begin(), items.end(), [](const SystemItem& a, const SystemItem& b) {
    return a.level != b.level ? a.level < b.level : a.x < b.x;
  });
  PointSystem s;
  s.base_ = base;
  s.items_ = std::move(items);
  const int top = s.items_.empty() ? -1 : s.items_.back().level;
  s.offsets_.assign(static_cast<std::size_t>(top + 2), 0);
  std::size_t pos = 0;
  for (int k = 0; k <= top; ++k) {
    s.offsets_[static_cast<std::size_t>(k)] = pos;
    while (pos < s.items_.size() && s.items_[pos].level == k) ++pos;
  }
  s.offsets_[static_cast<std::size_t>(top + 1)] = pos;
  return s;
}

std::span<const SystemItem> PointSystem::level(int k) const {
  if (k < 0 || k > max_level()) return {};
  const auto a = offsets_[static_cast<std::size_t>(k)];
  const auto b = offsets_[static_cast<std::size_t>(k) + 1];
  return std::span<const SystemItem>(items_).subspan(a, b - a);
}

CoveringReport PointSystem::covering_check(int grid_depth) const {
  CoveringReport rep;
  const int horizon = max_level();
  const int k0 = (horizon + 1) / 2;
  const std::uint64_t m = ipow(base_, grid_depth);
  for (std::uint64_t i = 1; i < m; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(m);
    bool hit = false;
    for (int k = std::max(k0, 0); k <= horizon && !hit; ++k) {
      const double reach = 0.25 * inv_pow(base_, k);
      for (const auto& it : x_range(level(k), t - reach, t + reach))
        if (std::abs(t - it.x) <= 0.25 * it.lambda) {
          hit = true;
          break;
        }
    }
    ++rep.grid_points;
    if (!hit) {
      if (rep.uncovered == 0) rep.first_uncovered = t;
      ++rep.uncovered;
    }
  }
  rep.passed = rep.grid_points > 0 && rep.uncovered == 0;
  return rep;
}

std::vector<SystemItem> balls_at(double t, int k, double r, const PointSystem& system) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("balls_at: r must lie in (0, 1]");
  std::vector<SystemItem> out;
  const double reach = r * inv_pow(system.base(), k);
  for (const auto& it : x_range(system.level(k), t - reach, t + reach))
    if (std::abs(t - it.x) <= r * it.lambda) out.push_back(it);
  return out;
}

Target select_target(const Word& w, double xi, const PointSystem& system) {
  if (!(xi > 1.0)) throw std::invalid_argument("select_target: xi must be > 1");
  if (w.base() != system.base()) throw std::invalid_argument("select_target: word base differs from system base");
  const int k = w.length() - 3;
  if (k < 1) throw std::invalid_argument("select_target: word length must be k + 3 with k >= 1");
  const int b = w.base();
  const double a = w.left();
  const double c = w.right();
  const double reach = 0.25 * inv_pow(b, k);
  std::optional<SystemItem> chosen;
  for (const auto& it : x_range(system.level(k), a - reach, c + reach)) {
    if (it.x - 0.25 * it.lambda <= c && it.x + 0.25 * it.lambda >= a) {
      chosen = it;  // sorted by x, ties keep the smallest original index
      break;
    }
  }
  Target out;
  if (!chosen) {
    const int len = static_cast<int>(std::floor(xi * w.length() + 1e-12));
    out.u = w.padded(len - w.length());
    out.fallback = true;
  } else {
    const double r = std::pow(chosen->lambda, xi);
    const double lo = std::max(0.0, chosen->x - r);
    const double hi = std::min(1.0, chosen->x + r);
    bool found = false;
    for (int m = 0; m <= max_word_length(b) && !found; ++m) {
      const double scale = static_cast<double>(ipow(b, m));
      const double i = std::ceil(lo * scale - kScaledTol);
      if (i + 1.0 <= hi * scale + kScaledTol && i + 1.0 <= scale) {
        out.u = Word(b, m, static_cast<std::uint64_t>(i));
        found = true;
      }
    }
    if (!found) throw ResourceError("select_target: target interval is below the addressable resolution");
    out.item = chosen;
  }
  out.ratio = static_cast<double>(out.u.length()) / (xi * static_cast<double>(k));
  return out;
}

TargetConstants measure_target_constants(const PointSystem& system, double xi, int k_min, int k_max) {
  if (k_min < 1 || k_max < k_min) throw std::invalid_argument("measure_target_constants: need 1 <= k_min <= k_max");
  TargetConstants tc;
  tc.c_low = std::numeric_limits<double>::infinity();
  tc.c_high = 0.0;
  for (int k = k_min; k <= k_max; ++k) {
    const std::uint64_t words = ipow(system.base(), k + 3);
    if (words > (std::uint64_t{1} << 22)) throw ResourceError("measure_target_constants: too many words");
    for (std::uint64_t i = 0; i < words; ++i) {
      const auto t = select_target(Word(system.base(), k + 3, i), xi, system);
      tc.c_low = std::min(tc.c_low, t.ratio);
      tc.c_high = std::max(tc.c_high, t.ratio);
      ++tc.words;
      if (t.fallback) ++tc.fallbacks;
    }
  }
  return tc;
}

IntervalSet::IntervalSet(std::vector<Interval> intervals) {
  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const auto& iv : intervals) {
    if (iv.hi < iv.lo) throw std::invalid_argument("IntervalSet: interval with hi < lo");
    if (!parts_.empty() && iv.lo <= parts_.back().hi)
      parts_.back().hi = std::max(parts_.back().hi, iv.hi);
    else
      parts_.push_back(iv);
  }
}

double IntervalSet::length() const {
  double s = 0.0;
  for (const auto& p : parts_) s += p.hi - p.lo;
  return s;
}

bool IntervalSet::contains(const IntervalSet& other) const {
  for (const auto& o : other.parts_) {
    const auto it = std::upper_bound(parts_.begin(), parts_.end(), o.lo,
                                     [](double v, const Interval& p) { return v < p.lo; });
    if (it == parts_.begin()) return false;
    const auto& p = *std::prev(it);
    if (!(p.lo <= o.lo && o.hi <= p.hi)) return false;
  }
  return true;
}

std::uint64_t IntervalSet::box_count(int base, int grid_depth) const {
  const std::uint64_t m = ipow(base, grid_depth);
  const double scale = static_cast<double>(m);
  std::uint64_t count = 0;
  std::uint64_t next_free = 0;  // first box not yet counted
  for (const auto& p : parts_) {
    const double lo = std::clamp(p.lo, 0.0, 1.0);
    const double hi = std::clamp(p.hi, 0.0, 1.0);
    if (p.hi < 0.0 || p.lo > 1.0) continue;
    const auto k0 = std::min(m - 1, static_cast<std::uint64_t>(std::floor(lo * scale)));
    const auto k1 = std::min(m - 1, static_cast<std::uint64_t>(std::floor(hi * scale)));
    const auto start = std::max(k0, next_free);
    if (k1 >= start) {
      count += k1 - start + 1;
      next_free = k1 + 1;
    }
  }
  return count;
}

IntervalSet CoverEstimate::set(int N) const {
  std::vector<Interval> all;
  for (int j = std::max(N, 0); j <= horizon && j < static_cast<int>(layers.size()); ++j)
    all.insert(all.end(), layers[static_cast<std::size_t>(j)].begin(), layers[static_cast<std::size_t>(j)].end());
  return IntervalSet(std::move(all));
}

bool CoverEstimate::empty() const { return final_set().empty(); }

std::vector<double> leaf_prefix_sums(const MassField& field) {
  const auto row = field.log_row(field.depth());
  std::vector<double> prefix(row.size() + 1, 0.0);
  for (std::size_t i = 0; i < row.size(); ++i) prefix[i + 1] = prefix[i] + std::exp(row[i]);
  return prefix;
}

BallMass ball_mass(const MassField& field, const std::vector<double>& prefix, double x, double l) {
  const double scale = static_cast<double>(ipow(field.base(), field.depth()));
  const double lo = std::max(0.0, x - l) * scale;
  const double hi = std::min(1.0, x + l) * scale;
  const auto leaves = static_cast<double>(prefix.size() - 1);
  const double first = std::floor(lo);
  const double last = std::max(first + 1.0, std::min(leaves, std::ceil(hi)));
  BallMass out;
  out.mass = prefix[static_cast<std::size_t>(last)] - prefix[static_cast<std::size_t>(first)];
  out.over_approximated = first != lo || last != hi;
  return out;
}

CoverEstimate limsup_cover(const PointSystem& system, const MassField& field, double alpha, double xi,
                           const EpsSequence& eps, int n_iter) {
  if (system.base() != field.base()) throw std::invalid_argument("limsup_cover: system and field bases differ");
  if (!(xi >= 1.0)) throw std::invalid_argument("limsup_cover: xi must be >= 1");
  if (n_iter < 1) throw std::invalid_argument("limsup_cover: iteration count must be >= 1");
  CoverEstimate cov;
  cov.base = system.base();
  cov.xi = xi;
  cov.alpha = alpha;
  cov.eps_spec = eps.describe();
  cov.iteration = n_iter;
  cov.horizon = std::min(system.max_level(), field.depth());
  cov.layers.assign(static_cast<std::size_t>(std::max(cov.horizon, 0)) + 1, {});
  cov.qualifying.assign(cov.layers.size(), 0);
  const auto prefix = leaf_prefix_sums(field);
  std::ostringstream diag;
  for (int j = 1; j <= cov.horizon; ++j) {
    const double e = eps(j);
    auto& layer = cov.layers[static_cast<std::size_t>(j)];
    for (const auto& it : system.level(j)) {
      const auto bm = ball_mass(field, prefix, it.x, it.lambda);
      if (!(bm.mass > 0.0)) continue;
      const double ll = std::log(it.lambda);
      const double lm = std::log(bm.mass);
      const double slack = 1e-12 * std::abs(ll);
      if (lm >= (alpha + e) * ll - slack && lm <= (alpha - e) * ll + slack) {
        const double r = std::pow(it.lambda, xi);
        layer.push_back({it.x - r, it.x + r});
        cov.over_approximated = cov.over_approximated || bm.over_approximated;
      }
    }
    cov.qualifying[static_cast<std::size_t>(j)] = layer.size();
    if (layer.empty()) diag << "level " << j << ": no qualifying balls; ";
  }
  cov.diagnostic = diag.str();
  return cov;
}

namespace {

DimensionEstimate regress(int base, const std::vector<int>& depths, const std::vector<std::uint64_t>& counts) {
  DimensionEstimate est;
  est.grid_depths = depths;
  est.counts = counts;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (counts[i] == 0)
      throw DomainError("box_dimension: empty set at grid depth " + std::to_string(depths[i]));
    x.push_back(depths[i] * std::log(static_cast<double>(base)));
    y.push_back(std::log(static_cast<double>(counts[i])));
  }
  const auto fit = stats::linear_fit(x, y);
  est.dimension = fit.slope;
  est.r_squared = fit.r_squared;
  return est;
}

}  // namespace

DimensionEstimate box_dimension(const CoverEstimate& cover, int grid_depth) {
  std::vector<int> depths;
  std::vector<std::uint64_t> counts;
  for (int g = std::max(1, grid_depth - 5); g <= grid_depth; ++g) {
    const int level = static_cast<int>(std::floor(g / cover.xi + 1e-9));
    if (level < cover.iteration || level > cover.horizon)
      throw DomainError("box_dimension: grid depth " + std::to_string(g) + " needs level " + std::to_string(level) +
                        " outside the cover range [" + std::to_string(cover.iteration) + ", " +
                        std::to_string(cover.horizon) + "]");
    const IntervalSet layer(cover.layers[static_cast<std::size_t>(level)]);
    depths.push_back(g);
    counts.push_back(layer.box_count(cover.base, g));
  }
  return regress(cover.base, depths, counts);
}

DimensionEstimate box_dimension(const IntervalSet& set, int base, int grid_depth) {
  if (set.empty()) throw DomainError("box_dimension: empty set");
  std::vector<int> depths;
  std::vector<std::uint64_t> counts;
  for (int g = std::max(1, grid_depth - 5); g <= grid_depth; ++g) {
    depths.push_back(g);
    counts.push_back(set.box_count(base, g));
  }
  return regress(base, depths, counts);
}

UbiquityResult conditioned_ubiquity_check(const CascadeTree& tree, double q, double xi, std::size_t samples,
                                          const PointSystem& system, int horizon, const UbiquityOptions& options) {
  if (samples == 0) throw std::invalid_argument("conditioned_ubiquity_check: sample count must be > 0");
  if (!(xi > 1.0)) throw std::invalid_argument("conditioned_ubiquity_check: xi must be > 1");
  if (horizon < 1) throw std::invalid_argument("conditioned_ubiquity_check: horizon must be >= 1");
  const Tilt tilt = tree.tilt(q);
  const double alpha = q * tree.model().tau_tilde_prime(q).value - tilt.tau_q;
  const auto sj = SjSequence::j_log_down(options.kappa);
  const auto rho = RhoSequence::power(options.rho_alpha);
  const double lb = std::log(static_cast<double>(tree.base()));

  FieldOptions fo;
  fo.q = q;
  const PointSampler sampler(leaf_masses(tree, horizon + 3, fo));

  UbiquityResult res;
  std::size_t passed = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto pt = sampler.sample(derive_key(options.sample_seed, s));
    UbiquitySample out;
    out.point = pt.word;
    out.t = pt.t;
    for (int k = (horizon + 1) / 2; k <= horizon && !out.passed; ++k) {
      if (k < 1 || balls_at(pt.t, k, 0.5, system).empty()) continue;
      const auto target = select_target(pt.word.prefix(k + 3), xi, system);
      const Word& u = target.u;
      const auto copy = leaf_masses(tree.subtree(u), options.gs_horizon, fo);
      const auto gs = growth_speed(copy, copy, alpha, options.N, options.eps, options.f, options.gs_horizon);
      const double log_total = copy.log_row(0)[0];
      const bool gs_ok = gs && *gs <= sj(u.length());
      const bool mass_ok = log_total >= -rho(u.length()) * lb;
      if (gs_ok && mass_ok) {
        out.passed = true;
        out.k = k;
        out.u = u.to_string();
        out.gs = *gs;
        out.total_mass = std::exp(log_total);
      }
    }
    if (out.passed) ++passed;
    res.samples.push_back(std::move(out));
  }
  res.fraction = static_cast<double>(passed) / static_cast<double>(samples);
  return res;
}

}  // namespace mfc

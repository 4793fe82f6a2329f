#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfcascade/mass_field.hpp"
#include "mfcascade/sequences.hpp"
#include "mfcascade/tree.hpp"
#include "mfcascade/word.hpp"

namespace mfc {

struct SystemItem {
  double x = 0.0;
  double lambda = 1.0;
  int level = 0;  // k with lambda in (b^-(k+1), b^-k]
};

struct CoveringReport {
  bool passed = false;
  std::size_t grid_points = 0;
  std::size_t uncovered = 0;  // grid points hit at no level of the window
  double first_uncovered = 0.0;
};

/// A family {(x_n, lambda_n)} grouped by resolution level. Items keep
/// their original order inside a level, so "smallest n" is well defined.
class PointSystem {
 public:
  /// {(k b^-j, b^-j) : 0 <= k <= b^j, 1 <= j <= horizon}, deduplicated by (x, j).
  static PointSystem badic(int base, int horizon);
  static PointSystem custom(int base, std::vector<SystemItem> items);

  int base() const noexcept { return base_; }
  std::size_t size() const noexcept { return items_.size(); }
  const std::vector<SystemItem>& items() const noexcept { return items_; }
  int max_level() const noexcept { return static_cast<int>(offsets_.size()) - 2; }
  /// Items of level k, sorted by x (stable); empty outside the range.
  std::span<const SystemItem> level(int k) const;

  /// Every grid point t = i b^-g (0 < i < b^g) lies in some closed ball
  /// B(x_n, lambda_n / 4) for at least one level in [ceil(H/2), H], H the
  /// horizon (finite proxy for "infinitely many").
  CoveringReport covering_check(int grid_depth) const;

 private:
  int base_ = 2;
  std::vector<SystemItem> items_;      // grouped by level
  std::vector<std::size_t> offsets_;  // level k occupies [offsets_[k], offsets_[k+1])
};

int level_of(int base, double lambda);

/// B_{k,r}(t): balls of level k with |t - x| <= r lambda (closed balls).
std::vector<SystemItem> balls_at(double t, int k, double r, const PointSystem& system);

struct Target {
  Word u;
  bool fallback = false;  // n(w) = 0: w padded with zeros
  std::optional<SystemItem> item;
  double ratio = 0.0;  // |u| / (xi k), k = |w| - 3
};

/// u(w) for |w| = k + 3 (k >= 1).
Target select_target(const Word& w, double xi, const PointSystem& system);

struct TargetConstants {
  double c_low = 0.0;   // min |u| / (xi k)
  double c_high = 0.0;  // max |u| / (xi k)
  std::size_t words = 0;
  std::size_t fallbacks = 0;
};

/// Measures the constants c' and c of c' xi k <= |u| <= c xi k over all
/// words of length k + 3, k in [k_min, k_max].
TargetConstants measure_target_constants(const PointSystem& system, double xi, int k_min, int k_max);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Union of closed intervals, kept sorted and merged.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> intervals);

  const std::vector<Interval>& intervals() const noexcept { return parts_; }
  bool empty() const noexcept { return parts_.empty(); }
  double length() const;
  bool contains(const IntervalSet& other) const;
  /// Number of half-open grid boxes [k b^-g, (k+1) b^-g) (the last one closed) that meet the set.
  std::uint64_t box_count(int base, int grid_depth) const;

 private:
  std::vector<Interval> parts_;
};

struct CoverEstimate {
  int base = 2;
  double xi = 1.0;
  double alpha = 0.0;
  std::string eps_spec;
  int iteration = 1;  // N_iter
  int horizon = 0;
  bool over_approximated = false;  // some ball mass included partial boundary boxes
  std::vector<std::size_t> qualifying;  // per level
  std::vector<std::vector<Interval>> layers;  // per level: [x - lambda^xi, x + lambda^xi]
  std::string diagnostic;

  /// S_N = union of layers N..horizon; S_{N+1} is a subset of S_N.
  IntervalSet set(int N) const;
  IntervalSet final_set() const { return set(iteration); }
  bool empty() const;
};

/// Ball mass mu([x - l, x + l] intersect [0,1]) from the deepest row of the
/// field: all leaves whose interior meets the ball.
struct BallMass {
  double mass = 0.0;
  bool over_approximated = false;
};
BallMass ball_mass(const MassField& field, const std::vector<double>& prefix, double x, double l);
std::vector<double> leaf_prefix_sums(const MassField& field);

CoverEstimate limsup_cover(const PointSystem& system, const MassField& field, double alpha, double xi,
                           const EpsSequence& eps, int n_iter);

struct DimensionEstimate {
  double dimension = 0.0;
  double r_squared = 0.0;
  std::vector<int> grid_depths;
  std::vector<std::uint64_t> counts;
};

/// Scale-matched box dimension of a limsup cover: at grid depth g the boxes
/// hitting the layer of level floor(g / xi) (radius about b^-g) are
/// counted; slope over g in [G-5, G]. DomainError when degenerate.
DimensionEstimate box_dimension(const CoverEstimate& cover, int grid_depth);
/// Plain box count regression of a fixed set over g in [G-5, G].
DimensionEstimate box_dimension(const IntervalSet& set, int base, int grid_depth);

struct UbiquityOptions {
  int gs_horizon = 12;
  int N = 1;
  EpsSequence eps = EpsSequence::assump(0.5);
  double f = 0.5;
  double kappa = 1.0;
  double rho_alpha = 2.0;
  std::uint64_t sample_seed = 0x5eed'0b1cULL;
};

struct UbiquitySample {
  Word point;
  double t = 0.0;
  bool passed = false;
  int k = -1;  // first successful level
  std::string u;
  int gs = -1;
  double total_mass = 0.0;
};

struct UbiquityResult {
  double fraction = 0.0;
  std::vector<UbiquitySample> samples;
};

/// Finite proxy for property (uu): fraction of mu_q-sampled t for which some
/// k in [ceil(H/2), H] with B_{k,1/2}(t) nonempty gives u = u(w^{(k+3)}(t))
/// with GS(mu_q^u, mu_q^u, q tau' - tau) <= S_|u| and ||mu_q^u|| >= b^{-rho_|u|}.
UbiquityResult conditioned_ubiquity_check(const CascadeTree& tree, double q, double xi, std::size_t samples,
                                          const PointSystem& system, int horizon, const UbiquityOptions& options = {});

}  // namespace mfc

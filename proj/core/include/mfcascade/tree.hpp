#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mfcascade/mass_field.hpp"
#include "mfcascade/weights.hpp"
#include "mfcascade/word.hpp"

namespace mfc {

/// ln W_q = shift + q ln W, with shift = tau~(q) ln b.
struct Tilt {
  double q = 1.0;
  double tau_q = 0.0;
  double shift = 0.0;

  double apply(double log_w) const noexcept { return shift + q * log_w; }
};

struct CriticalMass {
  double value = 0.0;              // T_d(w)
  std::optional<double> previous;  // T_{d-1}(w), absent for d = 0
  double gap = 0.0;                // |T_d - T_{d-1}|, 0 for d = 0
  bool nonpositive = false;        // finite-d artifact: T_d(w) <= 0
};

/// One realization of the cascade. Node weights are a pure function of
/// (seed, absolute word), so a tree is cheap to copy and `subtree(v)` is the
/// copy mu^v: same generator, words re-rooted at v.
///
/// Without prefetch every call recomputes weights from the key and is safe
/// to share across threads. `prefetch` stores weights up to a depth; it
/// must finish before concurrent readers start.
class CascadeTree {
 public:
  CascadeTree(WeightModel model, std::uint64_t seed);

  const WeightModel& model() const noexcept { return model_; }
  std::uint64_t seed() const noexcept { return seed_; }
  int base() const noexcept { return model_.base(); }
  /// Position of this view inside the full tree (empty word for mu itself).
  const Word& root() const noexcept { return root_; }

  CascadeTree subtree(const Word& v) const;

  /// Weights W(w) for a word relative to this view's root.
  std::vector<double> node_weights(const Word& w) const;
  void node_log_weights(const Word& w, std::span<double> out) const;
  /// Same, addressed by (depth, index) relative to the root; hot path.
  void node_log_weights_at(int depth, std::uint64_t index, std::span<double> out) const;

  void prefetch(int depth);
  int prefetched_depth() const noexcept;

  /// Tilt parameters for mu_q; DomainError when q is outside J.
  Tilt tilt(double q) const;

  /// ln of the weight product along w (optionally tilted).
  double log_path_product(const Word& w, const Tilt* tilt = nullptr) const;
  /// ln Y^(w, d): ln of the depth-d truncated total mass of the copy at w.
  double log_tail(const Word& w, int tail_depth, const Tilt* tilt = nullptr) const;

  double log_mass(const Word& w, int tail_depth) const;
  double mass(const Word& w, int tail_depth) const;
  double log_mass_q(double q, const Word& w, int tail_depth) const;
  double mass_q(double q, const Word& w, int tail_depth) const;
  /// Y^_q(w) at depth d; expectation 1 over realizations.
  double total_mass_q(double q, const Word& w, int depth) const;
  /// T_d(w) = -sum_{u in A^d} P(wu) ln P(wu) with P the full product from the root.
  CriticalMass critical_mass(const Word& w, int tail_depth) const;

  /// ln P(wu) relative to P(w), for all u in A^d, in index order (size b^d).
  std::vector<double> log_subtree_products(const Word& w, int d, const Tilt* tilt = nullptr) const;

 private:
  WeightModel model_;
  std::uint64_t seed_;
  Word root_;
  // cache_[k][i * b + c] = ln W_c of the node (k, i), relative to root_
  std::shared_ptr<const std::vector<std::vector<double>>> cache_;
};

struct FieldOptions {
  std::optional<double> q;
  ConstructionMode mode = ConstructionMode::nondegenerate;
  int tail_depth = 0;
  /// Upper bound on the number of stored doubles (all depths <= n + tail).
  std::size_t max_entries = std::size_t{1} << 27;
};

/// Number of doubles leaf_masses would hold; used for budget checks.
std::size_t field_entries(int base, int depth, int tail_depth);

/// Masses of every word with |w| <= n (relative to the tree's root), at
/// matched tail: a depth-j entry carries tail (n - j) + d, so every row
/// comes from the same depth-(n + d) products and rows are exactly additive.
/// ResourceError when the budget is exceeded.
MassField leaf_masses(const CascadeTree& tree, int n, const FieldOptions& options = {});

/// The mu_q field of the same realization, obtained from the leaves of a
/// tail-0 mu field: ln mu_q(I_u) = n shift + q ln mu(I_u) at depth n, then
/// summed upward. Equal to leaf_masses with options.q up to rounding.
MassField tilted_field(const MassField& mu, const Tilt& tilt);

/// mu_q-biased descent over a field's deepest row.
class PointSampler {
 public:
  explicit PointSampler(const MassField& field);

  struct Point {
    Word word;
    double t = 0.0;  // uniform inside I_word
  };

  int depth() const noexcept { return depth_; }
  Point sample(std::uint64_t key) const;

 private:
  int base_;
  int depth_;
  std::vector<std::vector<double>> sums_;  // linear subtree sums, normalized by the root
};

/// Draws a word of length n whose law is the normalized mu_q leaf mass.
Word sample_point(const CascadeTree& tree, double q, int n, std::uint64_t key, int tail_depth = 0);

}  // namespace mfc

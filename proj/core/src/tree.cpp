#include "mfcascade/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mfcascade/error.hpp"
#include "mfcascade/keyed_rng.hpp"

namespace mfc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One level down: next[i*b + c] = row[i] + ln W_c(node (depth, first + i)).
void expand_once(const CascadeTree& tree, int depth, std::uint64_t first, const std::vector<double>& row,
                 std::vector<double>& next, const Tilt* tilt) {
  const auto b = static_cast<std::size_t>(tree.base());
  next.resize(row.size() * b);
  std::vector<double> lw(b);
  for (std::size_t i = 0; i < row.size(); ++i) {
    tree.node_log_weights_at(depth, first + i, lw);
    for (std::size_t c = 0; c < b; ++c) {
      const double x = tilt ? tilt->apply(lw[c]) : lw[c];
      next[i * b + c] = row[i] + x;
    }
  }
}

// -sum exp(l) l over a block of absolute log-products.
double entropy_sum(std::span<const double> logs) {
  double s = 0.0;
  for (double l : logs) s -= std::exp(l) * l;
  return s;
}

void check_word(const CascadeTree& tree, const Word& w) {
  if (w.base() != tree.base()) throw std::invalid_argument("CascadeTree: word base differs from model base");
}

}  // namespace

CascadeTree::CascadeTree(WeightModel model, std::uint64_t seed)
    : model_(std::move(model)), seed_(seed), root_(Word::root(model_.base())) {}

CascadeTree CascadeTree::subtree(const Word& v) const {
  check_word(*this, v);
  CascadeTree out(model_, seed_);
  out.root_ = root_.concat(v);
  return out;
}

void CascadeTree::node_log_weights_at(int depth, std::uint64_t index, std::span<double> out) const {
  const auto b = static_cast<std::size_t>(base());
  if (out.size() != b) throw std::invalid_argument("node_log_weights: output span must have b entries");
  if (cache_ && depth < static_cast<int>(cache_->size())) {
    const auto& row = (*cache_)[static_cast<std::size_t>(depth)];
    std::copy_n(row.begin() + static_cast<std::ptrdiff_t>(index * b), b, out.begin());
    return;
  }
  const int abs_depth = root_.length() + depth;
  if (abs_depth > max_word_length(base())) throw ResourceError("node depth exceeds the addressable range");
  const std::uint64_t abs_index = root_.empty() ? index : root_.index() * ipow(base(), depth) + index;
  auto stream = KeyedStream::for_node(seed_, abs_depth, abs_index);
  model_.sample_log(stream, out);
  for (double x : out)
    if (!std::isfinite(x)) throw DomainError("non-finite weight at depth " + std::to_string(abs_depth));
}

void CascadeTree::node_log_weights(const Word& w, std::span<double> out) const {
  check_word(*this, w);
  node_log_weights_at(w.length(), w.index(), out);
}

std::vector<double> CascadeTree::node_weights(const Word& w) const {
  std::vector<double> out(static_cast<std::size_t>(base()));
  node_log_weights(w, out);
  for (double& x : out) x = std::exp(x);
  return out;
}

void CascadeTree::prefetch(int depth) {
  if (depth < 0) throw std::invalid_argument("prefetch: negative depth");
  cache_.reset();
  auto rows = std::make_shared<std::vector<std::vector<double>>>();
  const auto b = static_cast<std::size_t>(base());
  std::vector<double> lw(b);
  for (int k = 0; k < depth; ++k) {
    const std::uint64_t nodes = ipow(base(), k);
    std::vector<double> row(nodes * b);
    for (std::uint64_t i = 0; i < nodes; ++i) {
      node_log_weights_at(k, i, lw);
      std::copy(lw.begin(), lw.end(), row.begin() + static_cast<std::ptrdiff_t>(i * b));
    }
    rows->push_back(std::move(row));
  }
  cache_ = std::move(rows);
}

int CascadeTree::prefetched_depth() const noexcept { return cache_ ? static_cast<int>(cache_->size()) : 0; }

Tilt CascadeTree::tilt(double q) const {
  const auto j = model_.j_interval();
  if (!j.contains(q)) throw DomainError("q = " + std::to_string(q) + " is outside J");
  const auto t = model_.tau_tilde(q);
  if (t.diverged) throw DomainError("tau~(q) diverges at q = " + std::to_string(q));
  return Tilt{q, t.value, t.value * std::log(static_cast<double>(base()))};
}

double CascadeTree::log_path_product(const Word& w, const Tilt* tilt) const {
  check_word(*this, w);
  std::vector<double> lw(static_cast<std::size_t>(base()));
  double s = 0.0;
  for (int k = 0; k < w.length(); ++k) {
    const Word anc = w.prefix(k);
    node_log_weights_at(k, anc.index(), lw);
    const double x = lw[static_cast<std::size_t>(w.digit(k))];
    s += tilt ? tilt->apply(x) : x;
  }
  return s;
}

std::vector<double> CascadeTree::log_subtree_products(const Word& w, int d, const Tilt* tilt) const {
  check_word(*this, w);
  if (d < 0) throw std::invalid_argument("tail depth must be >= 0");
  if (w.length() + d > max_word_length(base())) throw ResourceError("tail depth exceeds the addressable range");
  std::vector<double> row{0.0};
  std::vector<double> next;
  std::uint64_t first = w.index();
  for (int level = 0; level < d; ++level) {
    expand_once(*this, w.length() + level, first, row, next, tilt);
    row.swap(next);
    first *= static_cast<std::uint64_t>(base());
  }
  return row;
}

double CascadeTree::log_tail(const Word& w, int tail_depth, const Tilt* tilt) const {
  if (tail_depth == 0) return 0.0;
  return log_sum_exp(log_subtree_products(w, tail_depth, tilt));
}

double CascadeTree::log_mass(const Word& w, int tail_depth) const {
  return log_path_product(w) + log_tail(w, tail_depth);
}

double CascadeTree::mass(const Word& w, int tail_depth) const { return std::exp(log_mass(w, tail_depth)); }

double CascadeTree::log_mass_q(double q, const Word& w, int tail_depth) const {
  const Tilt t = tilt(q);
  return log_path_product(w, &t) + log_tail(w, tail_depth, &t);
}

double CascadeTree::mass_q(double q, const Word& w, int tail_depth) const {
  return std::exp(log_mass_q(q, w, tail_depth));
}

double CascadeTree::total_mass_q(double q, const Word& w, int depth) const {
  const Tilt t = tilt(q);
  return std::exp(log_tail(w, depth, &t));
}

CriticalMass CascadeTree::critical_mass(const Word& w, int tail_depth) const {
  if (tail_depth < 0) throw std::invalid_argument("tail depth must be >= 0");
  const double base_log = log_path_product(w);
  std::vector<double> row{base_log};
  std::vector<double> next;
  std::uint64_t first = w.index();
  CriticalMass out;
  for (int level = 0; level < tail_depth; ++level) {
    if (level == tail_depth - 1) out.previous = entropy_sum(row);
    expand_once(*this, w.length() + level, first, row, next, nullptr);
    row.swap(next);
    first *= static_cast<std::uint64_t>(base());
  }
  out.value = entropy_sum(row);
  out.gap = out.previous ? std::abs(out.value - *out.previous) : 0.0;
  out.nonpositive = !(out.value > 0.0);
  return out;
}

std::size_t field_entries(int base, int depth, int tail_depth) {
  std::size_t total = 0;
  for (int k = 0; k <= depth; ++k) total += ipow(base, k);
  // deepest product row plus the row it is expanded from
  const std::size_t deepest = ipow(base, depth + tail_depth);
  return total + deepest + deepest / static_cast<std::size_t>(base);
}

namespace {

// Rows 0..n from the depth-`full` products; every row is summed directly
// from `deep`, so rows stay additive regardless of summation order.
MassField aggregate_rows(int b, int n, int full, const std::vector<double>& deep, bool critical, FieldMetadata meta) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n) + 1);
  if (critical) {
    std::vector<double> lin(deep.size());
    for (std::size_t i = 0; i < deep.size(); ++i) lin[i] = -std::exp(deep[i]) * deep[i];
    for (int j = 0; j <= n; ++j) {
      const std::size_t block = ipow(b, full - j);
      auto& row = rows[static_cast<std::size_t>(j)];
      row.resize(ipow(b, j));
      for (std::size_t i = 0; i < row.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < block; ++k) s += lin[i * block + k];
        if (s > 0.0) {
          row[i] = std::log(s);
        } else {
          row[i] = kNegInf;
          ++meta.nonpositive;
        }
      }
    }
  } else {
    for (int j = 0; j <= n; ++j) {
      const std::size_t block = ipow(b, full - j);
      auto& row = rows[static_cast<std::size_t>(j)];
      row.resize(ipow(b, j));
      for (std::size_t i = 0; i < row.size(); ++i)
        row[i] = log_sum_exp(std::span<const double>(deep).subspan(i * block, block));
    }
  }

  // Rows are aggregated independently from the deepest products; the
  // parent-vs-children defect measures accumulated rounding only.
  double worst = 0.0;
  std::vector<double> kids(static_cast<std::size_t>(b));
  for (int j = 0; j < n; ++j) {
    const auto& parent = rows[static_cast<std::size_t>(j)];
    const auto& child = rows[static_cast<std::size_t>(j) + 1];
    for (std::size_t i = 0; i < parent.size(); ++i) {
      if (!std::isfinite(parent[i])) continue;
      std::copy_n(child.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(b)), b, kids.begin());
      const double lse = log_sum_exp(kids);
      worst = std::max(worst, std::abs(std::expm1(lse - parent[i])));
    }
  }
  meta.tail_discrepancy = worst;
  return MassField(b, std::move(rows), std::move(meta));
}

}  // namespace

MassField leaf_masses(const CascadeTree& tree, int n, const FieldOptions& options) {
  if (n < 0 || options.tail_depth < 0) throw std::invalid_argument("leaf_masses: depths must be >= 0");
  const int b = tree.base();
  const int full = n + options.tail_depth;
  if (tree.root().length() + full > max_word_length(b)) throw ResourceError("leaf_masses: depth exceeds the addressable range");
  const std::size_t entries = field_entries(b, n, options.tail_depth);
  if (entries > options.max_entries)
    throw ResourceError("leaf_masses: " + std::to_string(entries) + " values exceed the budget of " +
                        std::to_string(options.max_entries));
  const bool critical = options.mode == ConstructionMode::critical;
  if (critical && options.q) throw std::invalid_argument("leaf_masses: the critical construction has no q family");

  std::optional<Tilt> tilt;
  if (options.q) tilt = tree.tilt(*options.q);
  const Tilt* tp = tilt ? &*tilt : nullptr;

  // ln P(u) for all |u| = n + d, relative to the tree root.
  std::vector<double> deep{0.0};
  std::vector<double> next;
  for (int level = 0; level < full; ++level) {
    expand_once(tree, level, 0, deep, next, tp);
    deep.swap(next);
  }
  std::vector<double>().swap(next);

  FieldMetadata meta;
  meta.seed = tree.seed();
  meta.model = tree.model().describe();
  meta.root = tree.root().to_string();
  meta.q = options.q;
  meta.tau_q = tilt ? tilt->tau_q : 0.0;
  meta.tail_depth = options.tail_depth;
  meta.mode = options.mode;

  return aggregate_rows(b, n, full, deep, critical, std::move(meta));
}

MassField tilted_field(const MassField& mu, const Tilt& tilt) {
  const auto& m = mu.metadata();
  if (m.q || m.tail_depth != 0 || m.mode != ConstructionMode::nondegenerate)
    throw std::invalid_argument("tilted_field: needs an untilted nondegenerate field with tail_depth 0");
  const int n = mu.depth();
  const auto leaves = mu.log_row(n);
  std::vector<double> deep(leaves.size());
  for (std::size_t i = 0; i < deep.size(); ++i) deep[i] = static_cast<double>(n) * tilt.shift + tilt.q * leaves[i];
  FieldMetadata meta = m;
  meta.q = tilt.q;
  meta.tau_q = tilt.tau_q;
  meta.tail_discrepancy = 0.0;
  return aggregate_rows(mu.base(), n, n, deep, false, std::move(meta));
}

PointSampler::PointSampler(const MassField& field) : base_(field.base()), depth_(field.depth()) {
  const double top = field.log_row(0)[0];
  if (!std::isfinite(top)) throw DomainError("PointSampler: field has no positive mass");
  sums_.resize(static_cast<std::size_t>(depth_) + 1);
  for (int k = 0; k <= depth_; ++k) {
    const auto row = field.log_row(k);
    auto& s = sums_[static_cast<std::size_t>(k)];
    s.resize(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) s[i] = std::exp(row[i] - top);
  }
}

PointSampler::Point PointSampler::sample(std::uint64_t key) const {
  KeyedStream stream(key);
  const auto b = static_cast<std::uint64_t>(base_);
  std::uint64_t index = 0;
  for (int k = 0; k < depth_; ++k) {
    const auto& kids = sums_[static_cast<std::size_t>(k) + 1];
    double total = 0.0;
    for (std::uint64_t c = 0; c < b; ++c) total += kids[index * b + c];
    const double u = stream.uniform() * total;
    double acc = 0.0;
    std::uint64_t pick = b - 1;
    for (std::uint64_t c = 0; c < b; ++c) {
      const double m = kids[index * b + c];
      acc += m;
      if (u < acc && m > 0.0) {
        pick = c;
        break;
      }
    }
    // rounding can leave u past the last positive child
    while (kids[index * b + pick] <= 0.0 && pick > 0) --pick;
    index = index * b + pick;
  }
  Point p;
  p.word = Word(base_, depth_, index);
  p.t = (static_cast<double>(index) + stream.uniform()) / static_cast<double>(ipow(base_, depth_));
  return p;
}

Word sample_point(const CascadeTree& tree, double q, int n, std::uint64_t key, int tail_depth) {
  FieldOptions opts;
  opts.q = q;
  opts.tail_depth = tail_depth;
  return PointSampler(leaf_masses(tree, n, opts)).sample(key).word;
}

}  // namespace mfc

#include "mfcascade/growth_speed.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfc {

namespace {

void check_pair(const MassField& a, const MassField& b, int n) {
  if (a.base() != b.base()) throw std::invalid_argument("fields have different bases");
  if (n > a.depth() || n > b.depth()) throw std::invalid_argument("field is shallower than the requested depth");
}

}  // namespace

std::vector<Word> neighbors(const Word& w, int N) {
  if (N < 0) throw std::invalid_argument("neighbors: N must be >= 0");
  const std::uint64_t size = ipow(w.base(), w.length());
  const std::uint64_t i = w.index();
  const std::uint64_t n = static_cast<std::uint64_t>(N);
  const std::uint64_t lo = i >= n ? i - n : 0;
  const std::uint64_t hi = std::min(size - 1, i + n);
  std::vector<Word> out;
  for (std::uint64_t k = lo; k <= hi; ++k) out.emplace_back(w.base(), w.length(), k);
  return out;
}

std::size_t LevelSetMask::count() const {
  return static_cast<std::size_t>(std::count(leaves.begin(), leaves.end(), std::uint8_t{1}));
}

std::vector<int> last_violation(const MassField& mu, double alpha, int N, const EpsSequence& eps, int n_max) {
  if (N < 0) throw std::invalid_argument("level set: N must be >= 0");
  if (n_max < 1 || n_max > mu.depth()) throw std::invalid_argument("level set: n_max outside the field depth");
  const int b = mu.base();
  const double lb = std::log(static_cast<double>(b));
  const std::size_t leaves = ipow(b, n_max);
  std::vector<int> last(leaves, -1);
  std::vector<std::uint8_t> bad_near;
  for (int n = 1; n <= n_max; ++n) {
    const auto row = mu.log_row(n);
    const double nn = static_cast<double>(n);
    const double e = eps(n);
    const double slack = 1e-12 * nn;
    const double lo = -nn * (alpha + e) - slack;
    const double hi = -nn * (alpha - e) + slack;
    // prefix count of out-of-band boxes, then a window of radius N
    std::vector<std::size_t> prefix(row.size() + 1, 0);
    for (std::size_t i = 0; i < row.size(); ++i) {
      const double x = row[i] / lb;
      prefix[i + 1] = prefix[i] + ((x >= lo && x <= hi) ? 0 : 1);
    }
    bad_near.assign(row.size(), 0);
    const auto radius = static_cast<std::size_t>(N);
    for (std::size_t i = 0; i < row.size(); ++i) {
      const std::size_t a = i >= radius ? i - radius : 0;
      const std::size_t c = std::min(row.size() - 1, i + radius);
      bad_near[i] = prefix[c + 1] - prefix[a] > 0 ? 1 : 0;
    }
    const std::size_t block = ipow(b, n_max - n);
    for (std::size_t leaf = 0; leaf < leaves; ++leaf)
      if (bad_near[leaf / block]) last[leaf] = n;
  }
  return last;
}

LevelSetMask level_set_mask(const MassField& mu, double alpha, int p, int N, const EpsSequence& eps, int n_max) {
  LevelSetMask mask;
  mask.n_max = n_max;
  mask.p = p;
  mask.alpha = alpha;
  mask.N = N;
  mask.vacuous = p > n_max;
  const auto last = last_violation(mu, alpha, N, eps, n_max);
  mask.leaves.resize(last.size());
  for (std::size_t i = 0; i < last.size(); ++i) mask.leaves[i] = last[i] < p ? 1 : 0;
  return mask;
}

double set_measure(const MassField& m, const LevelSetMask& mask) {
  const auto row = m.log_row(mask.n_max);
  if (row.size() != mask.leaves.size()) throw std::invalid_argument("set_measure: mask and field depth differ");
  double s = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i)
    if (mask.leaves[i]) s += std::exp(row[i]);
  return s;
}

std::optional<int> growth_speed(const MassField& m, const MassField& mu, double alpha, int N, const EpsSequence& eps,
                                double f, int n_max) {
  if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("growth_speed: f must lie in (0,1)");
  check_pair(m, mu, n_max);
  const auto last = last_violation(mu, alpha, N, eps, n_max);
  const auto row = m.log_row(n_max);
  std::vector<double> leaf(row.size());
  double total = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    leaf[i] = std::exp(row[i]);
    total += leaf[i];
  }
  const double target = f * total;
  for (int p = 1; p <= n_max; ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i)
      if (last[i] < p) s += leaf[i];
    if (s >= target) return p;
  }
  return std::nullopt;
}

double s_diagnostic(const MassField& m, const MassField& mu, double alpha, int N, double eps, double eta, int n) {
  if (N < 0) throw std::invalid_argument("s_diagnostic: N must be >= 0");
  check_pair(m, mu, n);
  const double lb = std::log(static_cast<double>(m.base()));
  const auto lm = m.log_row(n);
  const auto lmu = mu.log_row(n);
  const auto size = static_cast<std::ptrdiff_t>(lm.size());
  const double nn = static_cast<double>(n);
  double total = 0.0;
  for (int gamma : {-1, 1}) {
    const double ge = gamma * eta;
    const double scale = nn * (alpha - gamma * eps) * ge * lb;
    double s = 0.0;
    for (std::ptrdiff_t v = 0; v < size; ++v) {
      for (std::ptrdiff_t w = std::max<std::ptrdiff_t>(0, v - N); w <= std::min(size - 1, v + N); ++w) {
        const double mu_w = lmu[static_cast<std::size_t>(w)];
        const double x = ge == 0.0 ? 0.0 : ge * mu_w;
        s += std::exp(lm[static_cast<std::size_t>(v)] + x + scale);
      }
    }
    total += s;
  }
  return total;
}

}  // namespace mfc

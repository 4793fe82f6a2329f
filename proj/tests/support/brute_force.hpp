#pragma once

// Direct transcriptions of the definitions, written without the prefix
// sums and log-space shortcuts of the library. Slow on purpose.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace brute {

// masses[n][i] = mu(I_w) for |w| = n, i(w) = i, linear scale.
using Masses = std::vector<std::vector<double>>;

inline bool in_band(double mass, int b, int n, double alpha, double eps) {
  const double lo = std::pow(static_cast<double>(b), -n * (alpha + eps));
  const double hi = std::pow(static_cast<double>(b), -n * (alpha - eps));
  const double tol = 1e-11;
  return mass >= lo * (1.0 - tol) && mass <= hi * (1.0 + tol);
}

// Leaf t (index at depth n_max) belongs to E_{alpha,p}(N, eps) restricted
// to scales p..n_max.
inline bool leaf_in_set(const Masses& mu, int b, std::uint64_t leaf, int n_max, double alpha, int p, int N,
                        const std::function<double(int)>& eps) {
  for (int n = p; n <= n_max; ++n) {
    std::uint64_t ancestor = leaf;
    for (int k = n; k < n_max; ++k) ancestor /= static_cast<std::uint64_t>(b);
    const auto size = static_cast<long long>(mu[static_cast<std::size_t>(n)].size());
    for (long long v = 0; v < size; ++v) {
      const long long d = v - static_cast<long long>(ancestor);
      if (d < -N || d > N) continue;
      if (!in_band(mu[static_cast<std::size_t>(n)][static_cast<std::size_t>(v)], b, n, alpha, eps(n))) return false;
    }
  }
  return true;
}

inline std::vector<bool> mask(const Masses& mu, int b, int n_max, double alpha, int p, int N,
                              const std::function<double(int)>& eps) {
  std::vector<bool> out(mu[static_cast<std::size_t>(n_max)].size());
  for (std::uint64_t leaf = 0; leaf < out.size(); ++leaf) out[leaf] = leaf_in_set(mu, b, leaf, n_max, alpha, p, N, eps);
  return out;
}

inline std::optional<int> growth_speed(const Masses& m, const Masses& mu, int b, int n_max, double alpha, int N,
                                       const std::function<double(int)>& eps, double f) {
  const auto& leaves = m[static_cast<std::size_t>(n_max)];
  double total = 0.0;
  for (double x : leaves) total += x;
  for (int p = 1; p <= n_max; ++p) {
    const auto in = mask(mu, b, n_max, alpha, p, N, eps);
    double s = 0.0;
    for (std::size_t i = 0; i < leaves.size(); ++i)
      if (in[i]) s += leaves[i];
    if (s >= f * total) return p;
  }
  return std::nullopt;
}

}  // namespace brute

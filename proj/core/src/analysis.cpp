#include "mfcascade/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mfcascade/error.hpp"

namespace mfc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double ln_base(const MassField& f) { return std::log(static_cast<double>(f.base())); }

}  // namespace

double partition_function(const MassField& field, int n, double q) {
  if (n < 1) throw std::invalid_argument("partition_function: n must be >= 1");
  const auto row = field.log_row(n);
  double mx = kNegInf;
  for (double l : row)
    if (std::isfinite(l)) mx = std::max(mx, q * l);
  if (!std::isfinite(mx)) throw DomainError("partition_function: field row has no positive mass");
  double s = 0.0;
  for (double l : row)
    if (std::isfinite(l)) s += std::exp(q * l - mx);
  return -(mx + std::log(s)) / (static_cast<double>(n) * ln_base(field));
}

StructureFunction StructureFunction::compute(const MassField& field, int n, std::vector<double> q_grid) {
  StructureFunction sf;
  sf.word = field.metadata().root;
  sf.n = n;
  sf.tau.reserve(q_grid.size());
  for (double q : q_grid) sf.tau.push_back(partition_function(field, n, q));
  sf.q = std::move(q_grid);
  return sf;
}

LegendreValue legendre(std::span<const double> q, std::span<const double> tau, double alpha) {
  if (q.size() != tau.size() || q.size() < 3) throw std::invalid_argument("legendre: need matching grids of size >= 3");
  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!std::isfinite(tau[i])) continue;
    const double v = alpha * q[i] - tau[i];
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  if (!std::isfinite(best_val)) throw DomainError("legendre: tau is not finite anywhere on the grid");
  LegendreValue out{best_val, q[best], false};
  if (best == 0 || best + 1 == q.size() || !std::isfinite(tau[best - 1]) || !std::isfinite(tau[best + 1])) {
    out.at_boundary = true;
    return out;
  }
  // vertex of the parabola through three (possibly unevenly spaced) points
  const double x0 = q[best - 1], x1 = q[best], x2 = q[best + 1];
  const double f0 = alpha * x0 - tau[best - 1], f1 = best_val, f2 = alpha * x2 - tau[best + 1];
  const double d01 = (f1 - f0) / (x1 - x0);
  const double d12 = (f2 - f1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (a > 0.0) {
    const double xv = 0.5 * (x0 + x1) - d01 / (2.0 * a);
    if (xv > x0 && xv < x2) {
      const double fv = f1 + d01 * (xv - x1) + a * (xv - x0) * (xv - x1);
      if (fv <= f1) {
        out.value = fv;
        out.argmin_q = xv;
      }
    }
  }
  return out;
}

LegendreValue legendre(const TauFunction& tau, double alpha) { return legendre(tau.q, tau.tau, alpha); }

LegendreValue legendre(const StructureFunction& tau, double alpha) { return legendre(tau.q, tau.tau, alpha); }

std::vector<double> default_q_grid() { return uniform_grid(-10.0, 10.0, 1e-3); }

std::size_t box_count(const MassField& field, int n, double alpha, double eps) {
  if (n < 1) throw std::invalid_argument("box_count: n must be >= 1");
  const auto row = field.log_row(n);
  const double lb = ln_base(field);
  const double nn = static_cast<double>(n);
  const double slack = 1e-12 * nn;
  const double lo = -nn * (alpha + eps) - slack;
  const double hi = -nn * (alpha - eps) + slack;
  std::size_t count = 0;
  for (double l : row) {
    const double x = l / lb;
    if (x >= lo && x <= hi) ++count;
  }
  return count;
}

SpectrumEstimate ld_spectrum(const MassField& field, int n, std::vector<double> alpha_grid, const EpsSequence& eps) {
  SpectrumEstimate est;
  est.n = n;
  est.eps_spec = eps.describe();
  est.eps = eps(n);
  const double lb = ln_base(field);
  est.ld.reserve(alpha_grid.size());
  for (double a : alpha_grid) {
    const auto c = box_count(field, n, a, est.eps);
    est.ld.push_back(c == 0 ? kNegInf : std::log(static_cast<double>(c)) / (static_cast<double>(n) * lb));
  }
  est.alpha = std::move(alpha_grid);
  return est;
}

void attach_legendre(SpectrumEstimate& est, const TauFunction& tau) {
  est.legendre.clear();
  for (double a : est.alpha) est.legendre.push_back(legendre(tau, a).value);
}

std::optional<int> gs_prime(const MassField& field, double alpha, double tau_star, const EpsSequence& eps, int p_min,
                            int n_max) {
  if (!(tau_star > 0.0)) throw DomainError("gs_prime: tau*(alpha) must be > 0");
  if (n_max > field.depth()) throw std::invalid_argument("gs_prime: field is shallower than n_max");
  p_min = std::max(p_min, 1);
  const double lb = ln_base(field);
  // The condition must hold on [p, n_max]; scan down from n_max.
  std::optional<int> best;
  for (int n = n_max; n >= p_min; --n) {
    const double e = eps(n);
    const auto c = box_count(field, n, alpha, e);
    if (c == 0) break;
    const double lc = std::log(static_cast<double>(c)) / lb;
    const double nn = static_cast<double>(n);
    if (lc < nn * (tau_star - e) || lc > nn * (tau_star + e)) break;
    best = n;
  }
  return best;
}

std::optional<int> gs_prime(const CascadeTree& tree, const Word& w, double alpha, const EpsSequence& eps, int p_min,
                            int n_max) {
  const auto tau = TauFunction::tabulate(tree.model(), default_q_grid());
  const double ts = legendre(tau, alpha).value;
  const auto field = leaf_masses(tree.subtree(w), n_max);
  return gs_prime(field, alpha, ts, eps, p_min, n_max);
}

}  // namespace mfc

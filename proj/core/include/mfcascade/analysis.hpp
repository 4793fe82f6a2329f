#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfcascade/mass_field.hpp"
#include "mfcascade/sequences.hpp"
#include "mfcascade/tree.hpp"
#include "mfcascade/weights.hpp"

namespace mfc {

/// tau_n(q) = -(1/n) log_b sum_{|v|=n} mu(I_v)^q from row n of the field.
/// Entries stored as -infinity (zero mass) are left out of the sum.
double partition_function(const MassField& field, int n, double q);
inline double partition_function(const MassField& field, double q) {
  return partition_function(field, field.depth(), q);
}

struct StructureFunction {
  std::string word;  // root of the analyzed copy ("" for mu)
  int n = 0;
  std::vector<double> q;
  std::vector<double> tau;

  static StructureFunction compute(const MassField& field, int n, std::vector<double> q_grid);
};

struct LegendreValue {
  double value = 0.0;     // inf_q (alpha q - tau(q))
  double argmin_q = 0.0;  // refined minimizer
  bool at_boundary = false;
};

/// Discrete inf over a sorted q-grid with a parabolic step through the
/// minimizer and its two neighbours.
LegendreValue legendre(std::span<const double> q, std::span<const double> tau, double alpha);
LegendreValue legendre(const TauFunction& tau, double alpha);
LegendreValue legendre(const StructureFunction& tau, double alpha);

/// q in [-10, 10] with step 1e-3.
std::vector<double> default_q_grid();

/// #{|w| = n : b^{-n(alpha+eps)} <= mu(I_w) <= b^{-n(alpha-eps)}}, closed
/// bounds; the comparison is made in log_b units with 1e-12 * n slack so
/// exact ties are counted in.
std::size_t box_count(const MassField& field, int n, double alpha, double eps);

struct SpectrumEstimate {
  int n = 0;
  std::string eps_spec;
  double eps = 0.0;
  std::vector<double> alpha;
  std::vector<double> ld;        // (1/n) log_b N_n, -infinity when N_n = 0
  std::vector<double> legendre;  // tau*(alpha) when a tau was supplied, else empty
};

SpectrumEstimate ld_spectrum(const MassField& field, int n, std::vector<double> alpha_grid, const EpsSequence& eps);
/// Fills `legendre` from a tabulated tau.
void attach_legendre(SpectrumEstimate& est, const TauFunction& tau);

/// Smallest p in [p_min, n_max] such that for all n in [p, n_max]
/// b^{n(tau* - eps_n)} <= N_n(alpha, eps_n) <= b^{n(tau* + eps_n)}; empty
/// when none. DomainError when tau_star <= 0.
std::optional<int> gs_prime(const MassField& field, double alpha, double tau_star, const EpsSequence& eps, int p_min,
                            int n_max);
/// On the copy mu^w, with tau* taken from the model's tau~ on the default grid.
std::optional<int> gs_prime(const CascadeTree& tree, const Word& w, double alpha, const EpsSequence& eps, int p_min,
                            int n_max);

}  // namespace mfc

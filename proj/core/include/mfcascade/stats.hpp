#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mfc::stats {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope x. Throws DomainError on
/// fewer than two points or zero variance in x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct Spearman {
  double rho = 0.0;
  double p_less = 1.0;     // one-sided, H1: rho < 0
  double p_greater = 1.0;  // one-sided, H1: rho > 0
};

/// Rank correlation with average ranks for ties; p-values from the
/// Student-t approximation with n - 2 degrees of freedom.
Spearman spearman(std::span<const double> x, std::span<const double> y);

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Goodness of fit of `observed` counts to `probabilities` (summing to 1).
/// Cells with zero expected count must have zero observations.
ChiSquare chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probabilities);

double median(std::vector<double> xs);
double mean(std::span<const double> xs);
/// Standard error of the mean.
double standard_error(std::span<const double> xs);

}  // namespace mfc::stats

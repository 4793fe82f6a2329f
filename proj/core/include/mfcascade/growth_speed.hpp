#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mfcascade/mass_field.hpp"
#include "mfcascade/sequences.hpp"
#include "mfcascade/word.hpp"

namespace mfc {

/// All v with |v| = |w| and delta(v, w) <= N, clipped to [0,1], in index order.
std::vector<Word> neighbors(const Word& w, int N);

/// Leaves of depth n_max whose interval lies in the fine level set
/// E_{alpha,p}(N, eps) restricted to scales p..n_max.
struct LevelSetMask {
  int n_max = 0;
  int p = 1;
  double alpha = 0.0;
  int N = 0;
  bool vacuous = false;  // p > n_max: no condition, every leaf is in
  std::vector<std::uint8_t> leaves;

  std::size_t count() const;
};

/// Per leaf, the deepest scale n <= n_max at which the band condition
/// fails for some neighbour of the ancestor (-1 when it never fails).
/// mask(p) is exactly {leaf : last_violation < p}.
std::vector<int> last_violation(const MassField& mu, double alpha, int N, const EpsSequence& eps, int n_max);

LevelSetMask level_set_mask(const MassField& mu, double alpha, int p, int N, const EpsSequence& eps, int n_max);

/// Sum of m-masses (row mask.n_max) over the leaves in the mask.
double set_measure(const MassField& m, const LevelSetMask& mask);

/// Smallest p in [1, n_max] with m(mask(p)) >= f ||m||; empty when none.
std::optional<int> growth_speed(const MassField& m, const MassField& mu, double alpha, int N, const EpsSequence& eps,
                                double f, int n_max);

/// S_n^{N,eps,eta}(m, mu, alpha) over ordered pairs (v, w) at depth n with
/// delta(v, w) <= N.
double s_diagnostic(const MassField& m, const MassField& mu, double alpha, int N, double eps, double eta, int n);

}  // namespace mfc

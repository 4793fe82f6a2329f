#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfcascade/keyed_rng.hpp"
#include "mfcascade/word.hpp"

namespace mfc {

enum class WeightKind { deterministic_vector, lognormal_iid, two_point_iid, custom_sampler };

std::string_view to_string(WeightKind kind);
WeightKind weight_kind_from_string(std::string_view name);

enum class Degeneracy { nondegenerate, critical, degenerate, indeterminate };

std::string_view to_string(Degeneracy d);

/// Value of the moment function tau~(q) = -log_b E[sum_k W_k^q].
///
/// A diverging moment is reported with `diverged` set and `value` equal to
/// -infinity; it is never folded into a large negative number.
struct TauValue {
  double value = 0.0;
  double std_error = 0.0;  // 0 on the closed-form path
  bool diverged = false;

  bool finite() const noexcept { return !diverged; }
};

struct Derivative {
  double value = 0.0;
  double error = 0.0;      // truncation estimate of the finite difference
  double std_error = 0.0;  // Monte Carlo part, 0 on the closed-form path
  bool one_sided = false;  // boundary of the finite domain was hit
};

struct OpenInterval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double q) const noexcept { return q > lower && q < upper; }
};

/// Fills one node's log-weights ln W_0, ..., ln W_{b-1}.
using LogSampler = std::function<void(KeyedStream&, std::span<double>)>;

struct MonteCarloOptions {
  std::size_t samples = 1'000'000;
  std::size_t batches = 100;
  std::uint64_t seed = 0x4d43'7461'7521ULL;
};

namespace detail {
struct ModelState;
}

/// Law of the weight vector W = (W_0, ..., W_{b-1}) attached to every node.
///
/// The three parametric kinds have closed-form moments; `custom_sampler`
/// models go through a Monte Carlo bank drawn once (lazily, thread-safe)
/// from a fixed seed, so their tau~ estimates are deterministic as well.
/// Copies share the immutable state.
class WeightModel {
 public:
  static WeightModel deterministic(std::vector<double> weights);
  /// W_k = exp(X_k), X_k iid N(-ln b - sigma2/2, sigma2) so that E W_k = 1/b.
  static WeightModel lognormal(int base, double sigma2);
  /// W_k iid, equal to `high` with probability p_high and `low` otherwise.
  static WeightModel two_point(int base, double low, double high, double p_high);
  /// Arbitrary positive sampler; tau~ by Monte Carlo. Normalization is
  /// checked on the first 10^5 bank draws (4 standard errors).
  static WeightModel custom(int base, std::string sampler_name, std::map<std::string, double> parameters,
                            LogSampler sampler, MonteCarloOptions mc = {});
  /// Built-in custom sampler: W_k iid uniform on [low, high].
  static WeightModel uniform_iid(int base, double low, double high, MonteCarloOptions mc = {});

  int base() const noexcept;
  WeightKind kind() const noexcept;
  bool analytic() const noexcept;
  /// Name of the sampler for custom models, empty otherwise.
  const std::string& sampler_name() const noexcept;
  /// Scalar parameters (sigma2, low, high, p_high, sampler parameters).
  const std::map<std::string, double>& parameters() const noexcept;
  /// Component vector of a deterministic model; empty otherwise.
  const std::vector<double>& fixed_weights() const noexcept;
  const MonteCarloOptions& monte_carlo() const noexcept;

  /// One-line key=value description, stable across runs.
  std::string describe() const;

  void sample_log(KeyedStream& stream, std::span<double> out) const;

  TauValue tau_tilde(double q) const;
  /// Forces the Monte Carlo estimator even for analytic kinds.
  TauValue tau_tilde_monte_carlo(double q) const;
  Derivative tau_tilde_prime(double q) const;
  /// g(q) = q tau~'(q) - tau~(q). NaN when tau~ diverges at q.
  double spectrum_gap(double q) const;
  /// Interior of {q : g(q) > 0}. Endpoints are +-infinity when g stays
  /// positive up to |q| = 64. Cached after the first call.
  OpenInterval j_interval() const;
  Degeneracy classify() const;

  /// Whether J contains [0,1] (non-degenerate case) or 0 (critical case).
  /// Reported, not enforced.
  bool analyzing_family_assumption_holds() const;

 private:
  explicit WeightModel(std::shared_ptr<const detail::ModelState> state);
  std::shared_ptr<const detail::ModelState> state_;
};

/// The weight vector of node `w` in the realization keyed by `seed`.
std::vector<double> sample_weights(const WeightModel& model, std::uint64_t seed, const Word& w);

/// Tilt W -> W_q = (b^{tau~(q)} W_0^q, ..., b^{tau~(q)} W_{b-1}^q).
std::vector<double> q_transform(std::span<const double> weights, double q, double tau_q);

/// The law of W_q as a model of the same family where one exists
/// (deterministic, lognormal, two-point); custom models get a wrapped sampler.
WeightModel tilted_model(const WeightModel& model, double q);

/// tau~ tabulated on a grid together with its derivative and J.
struct TauFunction {
  std::vector<double> q;
  std::vector<double> tau;
  std::vector<double> tau_prime;
  OpenInterval j;

  static TauFunction tabulate(const WeightModel& model, std::vector<double> grid);
};

/// Evenly spaced grid lo, lo+step, ..., hi (hi included up to rounding).
std::vector<double> uniform_grid(double lo, double hi, double step);

}  // namespace mfc

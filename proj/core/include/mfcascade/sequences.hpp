#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace mfc {

/// Precision sequence eps_n.
///
/// Logs are natural by default; `log_base` switches every log in the
/// formula. Index 1 is evaluated as index 2 so that log 1 = 0 never appears.
class EpsSequence {
 public:
  enum class Kind { assump, log_power, custom };

  /// eps_n = n^{-1/2} (log n)^{1/2 + eta}
  static EpsSequence assump(double eta, double log_base = 0.0);
  /// eps_n = (log n)^{-eta}
  static EpsSequence log_power(double eta, double log_base = 0.0);
  static EpsSequence constant(double value);
  static EpsSequence custom(std::string name, std::function<double(double)> rule);

  Kind kind() const noexcept { return kind_; }
  double eta() const noexcept { return eta_; }
  /// e.g. "assump:0.5", "log-power:1", "constant:0.1".
  std::string describe() const;

  double operator()(int n) const;
  /// Real-valued evaluation of the rule (no index clamping below 2).
  double at(double x) const;
  /// Pointwise multiple c * eps_n.
  EpsSequence scaled(double factor) const;

 private:
  Kind kind_ = Kind::assump;
  double eta_ = 0.5;
  std::string name_;
  std::function<double(double)> rule_;
};

/// Parses the describe() form; ConfigError on anything else.
EpsSequence parse_eps_sequence(std::string_view text);

/// Scale sequence S_j (integer part of the formula).
class SjSequence {
 public:
  enum class Kind { exp_root, j_log_up, j_log_down };

  /// floor(exp((j (log j)^eta)^{1/(1+2 eta)}))
  static SjSequence exp_root(double eta, double log_base = 0.0);
  /// floor(j (log j)^{eta'}); ConfigError unless eta' > 2 eta.
  static SjSequence j_log_up(double eta, double eta_prime, double log_base = 0.0);
  /// floor(j (log j)^{-kappa})
  static SjSequence j_log_down(double kappa, double log_base = 0.0);

  Kind kind() const noexcept { return kind_; }
  std::string describe() const;

  long long operator()(int j) const;
  /// The formula before taking the integer part.
  double at(double x) const;

 private:
  Kind kind_ = Kind::j_log_down;
  double p1_ = 1.0;
  double p2_ = 0.0;
  double log_base_ = 0.0;
};

SjSequence parse_sj_sequence(std::string_view text);

/// rho_j = (log j)^{exponent}; exponent 1 + eta in the renewal argument,
/// alpha > 1 in the ubiquity one.
class RhoSequence {
 public:
  static RhoSequence renewal(double eta, double log_base = 0.0) { return RhoSequence(1.0 + eta, log_base); }
  static RhoSequence power(double alpha, double log_base = 0.0) { return RhoSequence(alpha, log_base); }

  double exponent() const noexcept { return exponent_; }
  double operator()(int j) const;
  double at(double x) const;

 private:
  RhoSequence(double exponent, double log_base);
  double exponent_;
  double log_base_;
};

}  // namespace mfc

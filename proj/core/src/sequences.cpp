#include "mfcascade/sequences.hpp"

#include <cmath>
#include <stdexcept>

#include "mfcascade/config_io.hpp"
#include "mfcascade/error.hpp"

namespace mfc {

namespace {

double log_in(double x, double base) { return base > 0.0 ? std::log(x) / std::log(base) : std::log(x); }

void check_log_base(double base) {
  if (base != 0.0 && !(base > 1.0)) throw ConfigError("log base must be > 1 (or 0 for natural log)");
}

double clamp_index(int n) {
  if (n < 1) throw std::invalid_argument("sequence index must be >= 1");
  return n < 2 ? 2.0 : static_cast<double>(n);
}

std::string head_of(std::string_view text, std::string_view& rest) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("sequence spec needs kind:parameters, got '" + std::string(text) + "'");
  rest = text.substr(colon + 1);
  return std::string(text.substr(0, colon));
}

}  // namespace

EpsSequence EpsSequence::assump(double eta, double log_base) {
  if (!(eta > 0.0)) throw ConfigError("assump sequence needs eta > 0");
  check_log_base(log_base);
  EpsSequence s;
  s.kind_ = Kind::assump;
  s.eta_ = eta;
  s.name_ = "assump:" + format_real(eta);
  s.rule_ = [eta, log_base](double x) { return std::pow(x, -0.5) * std::pow(log_in(x, log_base), 0.5 + eta); };
  return s;
}

EpsSequence EpsSequence::log_power(double eta, double log_base) {
  if (!(eta > 0.0)) throw ConfigError("log-power sequence needs eta > 0");
  check_log_base(log_base);
  EpsSequence s;
  s.kind_ = Kind::log_power;
  s.eta_ = eta;
  s.name_ = "log-power:" + format_real(eta);
  s.rule_ = [eta, log_base](double x) { return std::pow(log_in(x, log_base), -eta); };
  return s;
}

EpsSequence EpsSequence::constant(double value) {
  if (!(value >= 0.0)) throw ConfigError("constant eps must be >= 0");
  return custom("constant:" + format_real(value), [value](double) { return value; });
}

EpsSequence EpsSequence::custom(std::string name, std::function<double(double)> rule) {
  if (!rule) throw ConfigError("custom eps sequence needs a rule");
  EpsSequence s;
  s.kind_ = Kind::custom;
  s.eta_ = 0.0;
  s.name_ = std::move(name);
  s.rule_ = std::move(rule);
  return s;
}

std::string EpsSequence::describe() const { return name_; }

double EpsSequence::operator()(int n) const { return rule_(clamp_index(n)); }

double EpsSequence::at(double x) const { return rule_(x); }

EpsSequence EpsSequence::scaled(double factor) const {
  if (!(factor > 0.0)) throw ConfigError("eps scale factor must be > 0");
  EpsSequence s = *this;
  s.kind_ = Kind::custom;
  s.name_ = "scaled:" + format_real(factor) + ":" + name_;
  s.rule_ = [rule = rule_, factor](double x) { return factor * rule(x); };
  return s;
}

EpsSequence parse_eps_sequence(std::string_view text) {
  std::string_view rest;
  const auto kind = head_of(text, rest);
  if (kind == "assump") return EpsSequence::assump(parse_real(rest));
  if (kind == "log-power") return EpsSequence::log_power(parse_real(rest));
  if (kind == "constant") return EpsSequence::constant(parse_real(rest));
  if (kind == "scaled") {
    std::string_view inner;
    const double factor = parse_real(head_of(rest, inner));
    return parse_eps_sequence(inner).scaled(factor);
  }
  throw ConfigError("unknown eps sequence '" + std::string(text) + "'");
}

SjSequence SjSequence::exp_root(double eta, double log_base) {
  if (!(eta > 0.0)) throw ConfigError("exp-root sequence needs eta > 0");
  check_log_base(log_base);
  SjSequence s;
  s.kind_ = Kind::exp_root;
  s.p1_ = eta;
  s.log_base_ = log_base;
  return s;
}

SjSequence SjSequence::j_log_up(double eta, double eta_prime, double log_base) {
  if (!(eta > 0.0)) throw ConfigError("j-log-up sequence needs eta > 0");
  if (!(eta_prime > 2.0 * eta)) throw ConfigError("j-log-up sequence needs eta' > 2 eta");
  check_log_base(log_base);
  SjSequence s;
  s.kind_ = Kind::j_log_up;
  s.p1_ = eta;
  s.p2_ = eta_prime;
  s.log_base_ = log_base;
  return s;
}

SjSequence SjSequence::j_log_down(double kappa, double log_base) {
  if (!(kappa > 0.0)) throw ConfigError("j-log-down sequence needs kappa > 0");
  check_log_base(log_base);
  SjSequence s;
  s.kind_ = Kind::j_log_down;
  s.p1_ = kappa;
  s.log_base_ = log_base;
  return s;
}

std::string SjSequence::describe() const {
  switch (kind_) {
    case Kind::exp_root: return "exp-root:" + format_real(p1_);
    case Kind::j_log_up: return "j-log-up:" + format_real(p1_) + ":" + format_real(p2_);
    case Kind::j_log_down: return "j-log-down:" + format_real(p1_);
  }
  return {};
}

double SjSequence::at(double x) const {
  const double l = log_in(x, log_base_);
  switch (kind_) {
    case Kind::exp_root: return std::exp(std::pow(x * std::pow(l, p1_), 1.0 / (1.0 + 2.0 * p1_)));
    case Kind::j_log_up: return x * std::pow(l, p2_);
    case Kind::j_log_down: return x * std::pow(l, -p1_);
  }
  return 0.0;
}

long long SjSequence::operator()(int j) const { return static_cast<long long>(std::floor(at(clamp_index(j)))); }

SjSequence parse_sj_sequence(std::string_view text) {
  std::string_view rest;
  const auto kind = head_of(text, rest);
  if (kind == "exp-root") return SjSequence::exp_root(parse_real(rest));
  if (kind == "j-log-down") return SjSequence::j_log_down(parse_real(rest));
  if (kind == "j-log-up") {
    std::string_view second;
    const double eta = parse_real(head_of(rest, second));
    return SjSequence::j_log_up(eta, parse_real(second));
  }
  throw ConfigError("unknown S_j sequence '" + std::string(text) + "'");
}

RhoSequence::RhoSequence(double exponent, double log_base) : exponent_(exponent), log_base_(log_base) {
  if (!(exponent > 0.0)) throw ConfigError("rho exponent must be > 0");
  check_log_base(log_base);
}

double RhoSequence::at(double x) const { return std::pow(log_in(x, log_base_), exponent_); }

double RhoSequence::operator()(int j) const { return at(clamp_index(j)); }

}  // namespace mfc

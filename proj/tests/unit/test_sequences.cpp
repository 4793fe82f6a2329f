#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <mfcascade/error.hpp>
#include <mfcascade/sequences.hpp>

using namespace mfc;
using Catch::Matchers::WithinAbs;

TEST_CASE("eps sequences", "[sequences]") {
  const auto a = EpsSequence::assump(0.5);
  const double e2 = std::exp(2.0);
  // e^{-1} * 2^{1}
  CHECK_THAT(a.at(e2), WithinAbs(2.0 / std::exp(1.0), 1e-14));
  CHECK(a(1) == a(2));
  CHECK_THAT(a(16), WithinAbs(std::log(16.0) / 4.0, 1e-14));
  for (int n = 3; n < 200; ++n) CHECK(a(n) > 0.0);
  CHECK(a(100000) < a(1000));
  CHECK_THROWS(a(0));

  const auto lp = EpsSequence::log_power(1.0);
  CHECK_THAT(lp(100), WithinAbs(1.0 / std::log(100.0), 1e-14));
  const auto two = EpsSequence::assump(0.5, 2.0);
  CHECK_THAT(two.at(16.0), WithinAbs(0.25 * 4.0, 1e-14));
  CHECK(EpsSequence::constant(0.1)(7) == 0.1);
  CHECK_THAT(a.scaled(3.0)(10), WithinAbs(3.0 * a(10), 1e-15));
  CHECK(EpsSequence::custom("half", [](double) { return 0.5; })(3) == 0.5);
}

TEST_CASE("eps specs round trip", "[sequences]") {
  for (const char* s : {"assump:0.5", "log-power:1", "constant:0.10000000000000001", "scaled:2:assump:0.5"}) {
    const auto e = parse_eps_sequence(s);
    CHECK(parse_eps_sequence(e.describe()).describe() == e.describe());
    CHECK(parse_eps_sequence(e.describe())(9) == e(9));
  }
  CHECK_THROWS_AS(parse_eps_sequence("assump"), ConfigError);
  CHECK_THROWS_AS(parse_eps_sequence("wobble:1"), ConfigError);
  CHECK_THROWS_AS(parse_eps_sequence("assump:-1"), ConfigError);
}

TEST_CASE("scale sequences", "[sequences]") {
  const double e = std::exp(1.0);
  CHECK(std::floor(SjSequence::j_log_down(1.0).at(e)) == 2.0);
  CHECK(std::floor(SjSequence::exp_root(1.0).at(e)) == 4.0);
  const auto down = SjSequence::j_log_down(1.0);
  CHECK(down(2) == 2);
  CHECK(down(8) == 3);
  CHECK(down(16) == 5);
  const auto up = SjSequence::j_log_up(0.5, 1.5);
  CHECK(up(10) == static_cast<long long>(std::floor(10.0 * std::pow(std::log(10.0), 1.5))));
  CHECK_THROWS_AS(SjSequence::j_log_up(1.0, 2.0), ConfigError);
  CHECK_THROWS_AS(SjSequence::j_log_down(0.0), ConfigError);
  for (const char* s : {"j-log-down:1", "exp-root:1", "j-log-up:0.5:1.5"})
    CHECK(parse_sj_sequence(s).describe() == parse_sj_sequence(parse_sj_sequence(s).describe()).describe());
  CHECK_THROWS_AS(parse_sj_sequence("j-log-up:1:1"), ConfigError);
}

TEST_CASE("rho sequences", "[sequences]") {
  const auto r = RhoSequence::renewal(0.5);
  CHECK(r.exponent() == 1.5);
  CHECK_THAT(r.at(std::exp(2.0)), WithinAbs(std::pow(2.0, 1.5), 1e-12));
  CHECK_THAT(RhoSequence::power(2.0)(10), WithinAbs(std::pow(std::log(10.0), 2.0), 1e-12));
}

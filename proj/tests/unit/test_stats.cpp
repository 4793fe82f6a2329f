#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <mfcascade/error.hpp>
#include <mfcascade/stats.hpp>

using namespace mfc;
using Catch::Matchers::WithinAbs;

TEST_CASE("linear fit", "[stats]") {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const auto f = stats::linear_fit(x, y);
  CHECK_THAT(f.slope, WithinAbs(2.0, 1e-14));
  CHECK_THAT(f.intercept, WithinAbs(1.0, 1e-14));
  CHECK_THAT(f.r_squared, WithinAbs(1.0, 1e-14));
  CHECK_THROWS_AS(stats::linear_fit(std::vector<double>{1, 1}, std::vector<double>{1, 2}), DomainError);
}

TEST_CASE("spearman", "[stats]") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  std::vector<double> down(x.rbegin(), x.rend());
  const auto s = stats::spearman(x, down);
  CHECK(s.rho == -1.0);
  CHECK(s.p_less < 1e-6);
  CHECK(s.p_greater > 0.99);
  // scipy.stats.spearmanr([1,2,3,4,5], [2,1,4,3,5]) -> rho 0.8
  const auto t = stats::spearman(std::vector<double>{1, 2, 3, 4, 5}, std::vector<double>{2, 1, 4, 3, 5});
  CHECK_THAT(t.rho, WithinAbs(0.8, 1e-12));
  // two-sided p 0.104 from the t approximation
  CHECK_THAT(2.0 * t.p_greater, WithinAbs(0.10408803866182788, 1e-9));
  // ties get average ranks
  const auto u = stats::spearman(std::vector<double>{1, 2, 2, 3}, std::vector<double>{1, 2, 2, 3});
  CHECK_THAT(u.rho, WithinAbs(1.0, 1e-12));
}

TEST_CASE("chi square goodness of fit", "[stats]") {
  const std::vector<std::uint64_t> obs{25, 25, 25, 25};
  const std::vector<double> p{0.25, 0.25, 0.25, 0.25};
  const auto c = stats::chi_square_gof(obs, p);
  CHECK(c.statistic == 0.0);
  CHECK(c.dof == 3);
  CHECK(c.p_value == Catch::Approx(1.0));
  // scipy.stats.chisquare([10, 20, 30, 40]) -> 20, p 1.7e-4
  const auto d = stats::chi_square_gof(std::vector<std::uint64_t>{10, 20, 30, 40}, p);
  CHECK_THAT(d.statistic, WithinAbs(20.0, 1e-12));
  CHECK_THAT(d.p_value, WithinAbs(0.00016974243555282632, 1e-12));
}

TEST_CASE("summaries", "[stats]") {
  CHECK(stats::median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(stats::median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(stats::mean(x) == 2.5);
  CHECK_THAT(stats::standard_error(x), WithinAbs(std::sqrt(5.0 / 3.0) / 2.0, 1e-14));
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include <mfcascade/error.hpp>
#include <mfcascade/mass_field.hpp>
#include <mfcascade/tree.hpp>

using namespace mfc;

namespace {

// Both formats store log_b values, so ln -> log_b -> ln costs a couple of ulps.
void require_same(const MassField& a, const MassField& b, double rel = 0.0) {
  REQUIRE(a.depth() == b.depth());
  REQUIRE(a.base() == b.base());
  CHECK(a.metadata().seed == b.metadata().seed);
  CHECK(a.metadata().model == b.metadata().model);
  CHECK(a.metadata().q == b.metadata().q);
  CHECK(a.metadata().tail_depth == b.metadata().tail_depth);
  CHECK(a.metadata().mode == b.metadata().mode);
  for (int j = 0; j <= a.depth(); ++j) {
    const auto x = a.log_row(j), y = b.log_row(j);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (rel == 0.0 || std::isinf(y[i]))
        CHECK(x[i] == y[i]);
      else
        CHECK(std::abs(x[i] - y[i]) <= rel * std::abs(y[i]));
    }
  }
}

}  // namespace

TEST_CASE("csv round trip matches to rounding", "[mass_field]") {
  FieldOptions o;
  o.q = 0.5;
  const auto f = leaf_masses(CascadeTree(WeightModel::lognormal(2, 0.3), 9), 6, o);
  std::stringstream ss;
  write_csv(f, ss);
  const std::string text = ss.str();
  CHECK(text.rfind("#{", 0) == 0);
  CHECK(text.find("depth,index,log_b_mass\n") != std::string::npos);
  require_same(read_csv(ss), f, 1e-15);
}

TEST_CASE("binary round trip matches to rounding", "[mass_field]") {
  const auto f = leaf_masses(CascadeTree(WeightModel::two_point(3, 0.2, 0.6, 1.0 / 3.0), 4), 4);
  std::stringstream ss;
  write_binary(f, ss);
  CHECK(ss.str().substr(0, 4) == "MFCF");
  require_same(read_binary(ss), f, 1e-15);
}

TEST_CASE("zero masses survive serialization", "[mass_field]") {
  const double ninf = -std::numeric_limits<double>::infinity();
  FieldMetadata meta;
  meta.mode = ConstructionMode::critical;
  meta.nonpositive = 1;
  const MassField f(2, {{0.0}, {std::log(0.5), ninf}}, meta);
  std::stringstream a, b;
  write_csv(f, a);
  write_binary(f, b);
  require_same(read_csv(a), f, 1e-15);
  require_same(read_binary(b), f, 1e-15);
}

TEST_CASE("malformed input is rejected", "[mass_field]") {
  std::stringstream empty;
  CHECK_THROWS(read_csv(empty));
  std::stringstream junk("#{\"format\":\"other\"}\n");
  CHECK_THROWS(read_csv(junk));
  std::stringstream bad("XXXX");
  CHECK_THROWS(read_binary(bad));
  CHECK_THROWS(MassField(2, {{0.0}, {0.0}}, {}));  // wrong row size
}

TEST_CASE("log sum exp", "[mass_field]") {
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(log_sum_exp(std::vector<double>{}) == ninf);
  CHECK(log_sum_exp(std::vector<double>{ninf, ninf}) == ninf);
  CHECK(log_sum_exp(std::vector<double>{-1000.0, -1000.0}) == Catch::Approx(-1000.0 + std::log(2.0)));
  CHECK(log_sum_exp(std::vector<double>{0.0, ninf}) == 0.0);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <mfcascade/config_io.hpp>
#include <mfcascade/error.hpp>

using namespace mfc;

TEST_CASE("key value parsing", "[config]") {
  const auto kv = parse_key_values("# comment\n\na = 1\nb=two # trailing\n");
  REQUIRE(kv.size() == 2);
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("b") == "two");
  CHECK(parse_key_values(format_key_values(kv)) == kv);
  CHECK_THROWS_AS(parse_key_values("novalue\n"), ConfigError);
}

TEST_CASE("reals survive text", "[config]") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(parse_real(format_real(x)) == x);
  CHECK(format_real(0.25) == "0.25");
  CHECK(std::isinf(parse_real("inf")));
  CHECK_THROWS_AS(parse_real("1.0x"), ConfigError);
  CHECK(parse_integer("-17") == -17);
  CHECK_THROWS_AS(parse_integer("3.5"), ConfigError);
  const auto g = parse_real_list("-1:1:0.5");
  REQUIRE(g.size() == 5);
  CHECK(g[2] == 0.0);
  CHECK(parse_real_list("1,2.5,-3") == std::vector<double>{1.0, 2.5, -3.0});
  CHECK(parse_real_list(format_real_list({0.1, 0.7})) == std::vector<double>{0.1, 0.7});
}

TEST_CASE("models round trip", "[config]") {
  const std::vector<WeightModel> models = {
      WeightModel::deterministic({0.25, 0.75}), WeightModel::lognormal(3, 0.2), WeightModel::two_point(2, 0.3, 0.7, 0.5),
      WeightModel::uniform_iid(2, 0.2, 0.8, {1000, 10, 5})};
  for (const auto& m : models) {
    KeyValues kv;
    model_to_config(m, kv);
    const auto back = model_from_config(kv);
    CHECK(back.describe() == m.describe());
    CHECK(back.kind() == m.kind());
    CHECK(back.tau_tilde(2.0).value == m.tau_tilde(2.0).value);
  }
  CHECK_THROWS_AS(model_from_config(parse_key_values("model.kind=nope\n")), ConfigError);
  CHECK_THROWS_AS(model_from_config(parse_key_values("model.kind=lognormal-iid\n")), ConfigError);
}

TEST_CASE("model registry", "[config]") {
  ModelRegistry reg;
  reg.add("binomial", WeightModel::deterministic({0.25, 0.75}));
  reg.add("ln", WeightModel::lognormal(2, 0.1));
  const auto back = ModelRegistry::from_config(reg.to_config());
  CHECK(back.names() == reg.names());
  CHECK(back.get("ln").describe() == reg.get("ln").describe());
  CHECK_FALSE(back.contains("other"));
}

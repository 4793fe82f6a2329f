#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <mfcascade/error.hpp>
#include <mfcascade/tree.hpp>
#include <mfcascade/ubiquity.hpp>

using namespace mfc;
using Catch::Matchers::WithinAbs;

namespace {

const WeightModel kLebesgue = WeightModel::deterministic({0.5, 0.5});
const WeightModel kBinomial = WeightModel::deterministic({0.25, 0.75});

}  // namespace

TEST_CASE("b-adic point systems", "[ubiquity]") {
  CHECK(PointSystem::badic(2, 1).size() == 3);
  // dedup is by (x, j): x = 0, 1/2, 1 reappear at j = 2 with a smaller radius
  CHECK(PointSystem::badic(2, 2).size() == 8);
  const auto s = PointSystem::badic(2, 10);
  CHECK(s.max_level() == 10);
  CHECK(s.level(3).size() == 9);
  CHECK(s.level(11).empty());
  CHECK(level_of(2, 0.25) == 2);
  CHECK(level_of(2, 0.3) == 1);
  CHECK(level_of(3, 1.0 / 9.0) == 2);
  const auto cover = s.covering_check(10);
  CHECK(cover.passed);
  CHECK(cover.grid_points == 1023);
}

TEST_CASE("balls at a point", "[ubiquity]") {
  const auto s = PointSystem::badic(2, 6);
  const auto at0 = balls_at(0.0, 1, 0.5, s);
  REQUIRE(at0.size() == 1);
  CHECK(at0[0].x == 0.0);
  CHECK(at0[0].lambda == 0.5);
  // 1/3 sits at distance lambda/3 from the nearest level-3 point
  CHECK(balls_at(1.0 / 3.0, 3, 0.25, s).empty());
  CHECK(balls_at(1.0 / 3.0, 3, 0.5, s).size() == 1);
  CHECK(balls_at(0.5, 2, 0.25, PointSystem::custom(2, {})).empty());
  // closed balls: the boundary point counts
  CHECK(balls_at(0.125 + 0.25 * 0.125, 3, 0.25, s).size() == 1);
}

TEST_CASE("target selection", "[ubiquity]") {
  const auto s = PointSystem::badic(2, 6);
  const auto t = select_target(Word::parse(2, "01111"), 2.0, s);
  REQUIRE(t.item.has_value());
  CHECK(t.item->x == 0.5);
  CHECK(t.item->lambda == 0.25);
  CHECK(t.u == Word::parse(2, "0111"));
  CHECK_FALSE(t.fallback);

  const auto f = select_target(Word::parse(2, "0011"), 2.0, s);
  CHECK(f.fallback);
  CHECK(f.u == Word::parse(2, "00110000"));

  // same input, same output
  for (std::uint64_t i = 0; i < 64; ++i) {
    const Word w(2, 6, i);
    CHECK(select_target(w, 1.5, s).u == select_target(w, 1.5, s).u);
  }
  CHECK_THROWS(select_target(Word::parse(2, "011"), 2.0, s));
  CHECK_THROWS(select_target(Word::parse(2, "0111"), 1.0, s));

  const auto c = measure_target_constants(s, 2.0, 1, 5);
  CHECK(c.words == 16 + 32 + 64 + 128 + 256);
  CHECK(c.c_low > 0.0);
  CHECK(c.c_low <= c.c_high);
}

TEST_CASE("interval sets", "[ubiquity]") {
  const IntervalSet a({{0.5, 0.7}, {0.1, 0.2}, {0.15, 0.3}});
  REQUIRE(a.intervals().size() == 2);
  CHECK_THAT(a.length(), WithinAbs(0.4, 1e-15));
  CHECK(a.contains(IntervalSet({{0.12, 0.25}})));
  CHECK_FALSE(a.contains(IntervalSet({{0.25, 0.55}})));
  CHECK(IntervalSet({{0.0, 1.0}}).box_count(2, 5) == 32);
  CHECK(IntervalSet({{0.5, 0.5}}).box_count(2, 5) == 1);
  CHECK(IntervalSet({{1.0, 1.0}}).box_count(2, 5) == 1);
  CHECK_THROWS(IntervalSet({{0.3, 0.2}}));
}

TEST_CASE("box dimension of simple sets", "[ubiquity]") {
  CHECK_THAT(box_dimension(IntervalSet({{0.0, 1.0}}), 2, 16).dimension, WithinAbs(1.0, 0.02));
  CHECK_THAT(box_dimension(IntervalSet({{0.3, 0.3}}), 2, 16).dimension, WithinAbs(0.0, 0.05));
  CHECK_THROWS_AS(box_dimension(IntervalSet(), 2, 16), DomainError);
}

TEST_CASE("limsup covers of Lebesgue measure", "[ubiquity]") {
  const auto field = leaf_masses(CascadeTree(kLebesgue, 1), 14);
  const auto sys = PointSystem::badic(2, 14);
  const auto eps = EpsSequence::assump(0.5);
  const auto full = limsup_cover(sys, field, 1.0, 1.0, eps, 1);
  CHECK(full.final_set().length() > 0.999);
  CHECK(limsup_cover(sys, field, 2.0, 1.5, eps, 1).empty());

  const auto c = limsup_cover(sys, field, 1.0, 2.0, eps, 6);
  for (int n = 1; n < 6; ++n) CHECK(c.set(n).contains(c.set(n + 1)));

  const auto deep = leaf_masses(CascadeTree(kLebesgue, 1), 18);
  const auto dsys = PointSystem::badic(2, 18);
  for (double xi : {1.0, 1.5, 2.0}) {
    const auto d = box_dimension(limsup_cover(dsys, deep, 1.0, xi, eps, 1), 18);
    INFO("xi = " << xi);
    CHECK(std::abs(d.dimension - 1.0 / xi) <= 0.15);
  }
}

TEST_CASE("limsup cover of a binomial cascade", "[ubiquity]") {
  const auto field = leaf_masses(CascadeTree(kBinomial, 1), 16);
  const auto c = limsup_cover(PointSystem::badic(2, 16), field, 0.8112781244591328, 2.0, EpsSequence::assump(0.5), 1);
  CHECK_FALSE(c.empty());
  const auto d = box_dimension(c, 16);
  CHECK(d.dimension > 0.0);
  CHECK(d.dimension < 1.0);
}

TEST_CASE("ball masses", "[ubiquity]") {
  const auto field = leaf_masses(CascadeTree(kBinomial, 1), 6);
  const auto prefix = leaf_prefix_sums(field);
  const auto exact = ball_mass(field, prefix, 0.5, 0.25);
  CHECK_THAT(exact.mass, WithinAbs(field.mass(2, 1) + field.mass(2, 2), 1e-12));
  CHECK_FALSE(exact.over_approximated);
  CHECK(ball_mass(field, prefix, 0.5, 0.01).over_approximated);
  CHECK_THAT(ball_mass(field, prefix, 0.0, 2.0).mass, WithinAbs(1.0, 1e-12));
}

TEST_CASE("conditioned ubiquity", "[ubiquity]") {
  const auto sys = PointSystem::badic(2, 10);
  const auto leb = conditioned_ubiquity_check(CascadeTree(kLebesgue, 1), 0.0, 2.0, 50, sys, 10);
  CHECK(leb.fraction == 1.0);
  CHECK(leb.samples.size() == 50);
  const auto bin = conditioned_ubiquity_check(CascadeTree(kBinomial, 1), 1.0, 2.0, 200, sys, 10);
  CHECK(bin.fraction >= 0.9);
  CHECK_THROWS(conditioned_ubiquity_check(CascadeTree(kLebesgue, 1), 0.0, 2.0, 0, sys, 10));
}

#include <doctest.h>

#include <random>

#include "aoi_recruit/core_model.hpp"

using namespace aoi_recruit;
using doctest::Approx;

namespace {

ProblemInstance lh_table() { return make_instance({{0.5, 2.0, 0.6}, {0.5, 2.5, 0.7}}, 0.0001); }

ProblemInstance random_instance(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TypeParams> types;
  for (std::size_t i = 0; i < n; ++i) types.push_back({0.05 + 0.95 * u(rng), 5 * u(rng), 0.05 + 0.95 * u(rng)});
  return make_instance(types, u(rng));
}

}  // namespace

TEST_SUITE("core_model") {

TEST_CASE("success probability") {
  const auto lh = lh_table();
  CHECK(success_probability(lh, ActionSet{}) == 0.0);
  CHECK(success_probability(make_instance({{1, 3, 1}}, 0.5), ActionSet::of({0})) == 1.0);
  CHECK(success_probability(lh, ActionSet::of({0, 1})) == Approx(0.545).epsilon(1e-14));
}

TEST_CASE("expected recruitment cost") {
  const auto lh = lh_table();
  CHECK(expected_recruit_cost(lh, ActionSet{}) == 0.0);
  CHECK(expected_recruit_cost(lh, ActionSet::of({0})) == Approx(1.0).epsilon(1e-14));
  CHECK(expected_recruit_cost(lh, ActionSet::of({0, 1})) == Approx(2.25).epsilon(1e-14));
}

TEST_CASE("freshness gain") {
  CHECK(freshness_gain(0.0, 1, 1.0) == -4.0);
  for (Age d : {1u, 2u, 7u, 100u}) CHECK(freshness_gain(1.0, d, 1.0) == -1.0);
  CHECK(freshness_gain(0.545, 2, 1.0) == Approx(-4.64).epsilon(1e-14));
  CHECK(expected_freshness_gain(lh_table(), ActionSet::of({0, 1}), 2) ==
        Approx(-4.64).epsilon(1e-13));
  CHECK_THROWS_AS(expected_freshness_gain(lh_table(), ActionSet{}, 0), Error);
}

TEST_CASE("immediate cost") {
  CHECK(immediate_cost(make_instance({{1, 2, 1}}, 0.5), ActionSet{}, 1) == 2.0);
  const auto single = make_instance({{1, 2, 1}}, 0.5);
  for (Age d : {1u, 3u, 50u}) CHECK(immediate_cost(single, ActionSet::of({0}), d) == 1.5);
  CHECK(immediate_cost(make_instance({{0.5, 2, 0.6}}, 1.0), ActionSet{}, 1) == 4.0);
}

TEST_CASE("invalid actions and instances") {
  const auto lh = lh_table();
  CHECK_THROWS_AS(success_probability(lh, ActionSet::of({2})), Error);
  try {
    expected_recruit_cost(lh, ActionSet::of({5}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_action);
  }
  const auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::equivalence_failure;
  };
  CHECK(code([] { make_instance({}, 0.5); }) == Errc::invalid_instance);
  CHECK(code([] { make_instance({{1.5, 1, 1}}, 0.5); }) == Errc::invalid_instance);
  CHECK(code([] { make_instance({{0.5, -1, 1}}, 0.5); }) == Errc::invalid_instance);
  CHECK(code([] { make_instance({{0.5, 1, 1}}, 1.5); }) == Errc::invalid_instance);
  CHECK(code([] { make_instance({{0.5, 1, 1}}, 0.5, 0.0); }) == Errc::invalid_instance);
  CHECK(code([] { make_instance({{0.0, 1, 1}, {0.5, 1, 0.0}}, 0.5); }) == Errc::invalid_instance);
  CHECK_NOTHROW(make_instance({{0.0, 1, 1}}, 0.0));
  std::vector<TypeParams> many(31, {0.5, 1, 1});
  CHECK(code([&] { make_instance(many, 0.5); }) == Errc::invalid_instance);
}

TEST_CASE("action set") {
  const auto a = ActionSet::of({0, 2});
  CHECK(a.to_string() == "{0,2}");
  CHECK(ActionSet{}.to_string() == "{}");
  CHECK(a.size() == 2);
  CHECK(a.members() == std::vector<std::size_t>{0, 2});
  CHECK(ActionSet::of({3}) < ActionSet::of({0, 1}));
  CHECK(ActionSet::of({0}) < ActionSet::of({1}));
  CHECK(ActionSet::full(3).bits() == 7u);
}

TEST_CASE("enumeration") {
  const auto one = enumerate_action_stats(make_instance({{0.5, 2, 0.6}}, 0.5));
  REQUIRE(one.size() == 2);
  CHECK(one[0].action == ActionSet{});
  CHECK(one[0].success_prob == 0.0);
  CHECK(one[0].expected_cost == 0.0);
  CHECK(one[1].success_prob == Approx(0.3).epsilon(1e-14));
  CHECK(one[1].expected_cost == Approx(1.0).epsilon(1e-14));

  const auto lh = enumerate_action_stats(lh_table());
  REQUIRE(lh.size() == 4);
  CHECK(lh[1].action == ActionSet::of({0}));
  CHECK(lh[2].action == ActionSet::of({1}));
  CHECK(lh[3].action == ActionSet::of({0, 1}));
  CHECK(lh[1].success_prob == Approx(0.30));
  CHECK(lh[2].success_prob == Approx(0.35));
  CHECK(lh[3].success_prob == Approx(0.545));

  const auto twins = make_instance({{1, 1, 0.5}, {1, 2, 0.5}}, 0.5);
  const auto dedup = enumerate_action_stats(twins);
  REQUIRE(dedup.size() == 3);
  CHECK(dedup[1].action == ActionSet::of({0}));
  CHECK(dedup[1].success_prob == 0.5);
  CHECK(enumerate_all_action_stats(twins).size() == 4);
}

TEST_CASE("monotonicity, additivity and complement product") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto inst = random_instance(rng, 1 + trial % 5);
    const auto n = inst.size();
    const std::uint32_t all = (1u << n) - 1;
    for (std::uint32_t a = 0; a <= all; ++a) {
      const ActionSet sa(a);
      const double qa = success_probability(inst, sa);
      const double ea = expected_recruit_cost(inst, sa);
      double miss = 1.0;
      for (auto i : sa.members()) {
        miss *= 1.0 - inst.types[i].arrival_prob * inst.types[i].mean_sensing;
      }
      CHECK(1.0 - qa == Approx(miss).epsilon(1e-12));
      for (std::uint32_t b = 0; b <= all; ++b) {
        const ActionSet sb(b);
        if ((a & b) == a) {
          CHECK(qa <= success_probability(inst, sb) + 1e-15);
          CHECK(ea <= expected_recruit_cost(inst, sb) + 1e-15);
        }
        if ((a & b) == 0) {
          CHECK(std::abs(expected_recruit_cost(inst, sa | sb) - ea -
                         expected_recruit_cost(inst, sb)) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("enumeration matches direct evaluation") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = random_instance(rng, 1 + trial % 6);
    const auto all = enumerate_all_action_stats(inst);
    CHECK(all.size() == (std::size_t{1} << inst.size()));
    for (const auto& s : all) {
      CHECK(s.success_prob == success_probability(inst, s.action));
      CHECK(s.expected_cost == expected_recruit_cost(inst, s.action));
    }
    const auto d = enumerate_action_stats(inst);
    CHECK(d.front().action == ActionSet{});
    for (std::size_t k = 1; k < d.size(); ++k) CHECK(d[k].success_prob > d[k - 1].success_prob);
  }
}

}

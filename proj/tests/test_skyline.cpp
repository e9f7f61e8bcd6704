#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "tasq/error.hpp"
#include "tasq/skyline.hpp"

using namespace tasq;

TEST_CASE("area sums token-seconds") {
  CHECK(Skyline({4, 4, 1, 4}).area() == 13);
  CHECK(Skyline({2, 2, 2, 2, 1, 2, 2}).area() == 13);
  CHECK(Skyline({0}).area() == 0);
  CHECK_THROWS_AS(Skyline(std::vector<Tokens>{}), Error);
}

TEST_CASE("runtime is the skyline length") {
  CHECK(Skyline({4, 4, 1, 4}).runtime_seconds() == 4);
  CHECK(Skyline({7}).runtime_seconds() == 1);
  CHECK(simulate(Skyline({4, 4, 1, 4}), 2).runtime_seconds() == 7);
}

TEST_CASE("split_sections cuts at sign changes") {
  const auto sections = split_sections(Skyline({4, 4, 1, 4}), 2);
  REQUIRE(sections.size() == 3);
  CHECK(sections[0].values == std::vector<Tokens>{4, 4});
  CHECK(sections[0].over);
  CHECK(sections[0].start == 0);
  CHECK(sections[1].values == std::vector<Tokens>{1});
  CHECK_FALSE(sections[1].over);
  CHECK(sections[2].values == std::vector<Tokens>{4});
  CHECK(sections[2].over);

  SUBCASE("a value equal to the threshold starts its own section") {
    const auto s = split_sections(Skyline({3, 2, 3}), 2);
    REQUIRE(s.size() == 3);
    CHECK(s[0].over);
    CHECK_FALSE(s[1].over);
    CHECK(s[1].values == std::vector<Tokens>{2});
    CHECK(s[2].over);
  }
  SUBCASE("no crossing gives a single section") {
    const auto s = split_sections(Skyline({1, 1}), 5);
    REQUIRE(s.size() == 1);
    CHECK_FALSE(s[0].over);
    CHECK(s[0].values == std::vector<Tokens>{1, 1});
  }
  SUBCASE("threshold below 1 is rejected") {
    CHECK_THROWS_AS(split_sections(Skyline({1, 2}), 0), Error);
  }
  SUBCASE("sections concatenate back to the skyline") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const Skyline s = oracles::random_skyline(rng);
      const auto threshold = static_cast<Tokens>(rng.uniform_int(1, 60));
      std::vector<Tokens> glued;
      std::size_t expected_start = 0;
      for (const Section& sec : split_sections(s, threshold)) {
        CHECK(sec.start == expected_start);
        expected_start += sec.values.size();
        glued.insert(glued.end(), sec.values.begin(), sec.values.end());
      }
      CHECK(glued == std::vector<Tokens>(s.usage().begin(), s.usage().end()));
    }
  }
}

TEST_CASE("simulate reshapes over sections and keeps the area") {
  CHECK(simulate(Skyline({4, 4, 1, 4}), 2) == Skyline({2, 2, 2, 2, 1, 2, 2}));
  CHECK(simulate(Skyline({4, 4, 1, 4}), 10) == Skyline({4, 4, 1, 4}));
  CHECK(simulate(Skyline({5}), 2) == Skyline({2, 2, 1}));
  // a 10 token-second process takes 1 s at 10 tokens and 10 s at 1 token
  CHECK(simulate(Skyline({10}), 1) == Skyline(std::vector<Tokens>(10, 1)));
  CHECK_THROWS_AS(simulate(Skyline({1, 2}), 0), Error);
}

TEST_CASE("simulate properties over random skylines") {
  Rng rng(4242);
  for (int trial = 0; trial < 500; ++trial) {
    const Skyline s = oracles::random_skyline(rng);
    const auto t = static_cast<Tokens>(rng.uniform_int(1, 110));
    const Skyline sim = simulate(s, t);
    // exact area conservation
    CHECK(sim.area() == s.area());
    // cap respected / identity at or above the peak
    if (t < s.peak()) {
      CHECK(sim.peak() <= t);
    } else {
      CHECK(sim == s);
    }
    // run-time never shrinks, strictly growing when an over section exists
    CHECK(sim.runtime_seconds() >= s.runtime_seconds());
    bool has_over = false;
    for (const Section& sec : split_sections(s, t)) has_over = has_over || sec.over;
    if (has_over) CHECK(sim.runtime_seconds() > s.runtime_seconds());
    // deterministic, and idempotent at the cap
    CHECK(simulate(s, t) == sim);
    CHECK(simulate(sim, t) == sim);
  }
}

TEST_CASE("area_match uses the larger area as the base") {
  CHECK(area_match(Skyline({50, 50}), Skyline({100}), 0.0));
  const Skyline a100({100});
  const Skyline a129({129});
  CHECK(area_match(a100, a129, 0.30));        // 29/129 ~ 0.225
  CHECK_FALSE(area_match(a100, a129, 0.20));
  CHECK(area_match(Skyline({0, 0}), Skyline({0}), 0.0));  // both empty areas
  CHECK(area_match(a100, a129, 29.0 / 129.0 + 1e-9));
  CHECK_THROWS_AS(area_match(a100, a129, -0.1), Error);
}

TEST_CASE("skyline CSV round trip and strict parsing") {
  const Skyline s({4, 4, 1, 4});
  std::ostringstream out;
  s.to_csv(out);
  CHECK(out.str() == "second,tokens\n0,4\n1,4\n2,1\n3,4\n");
  std::istringstream in(out.str());
  CHECK(Skyline::from_csv(in) == s);

  SUBCASE("bad header") {
    std::istringstream bad("tokens,second\n0,1\n");
    CHECK_THROWS_WITH_AS(Skyline::from_csv(bad), doctest::Contains("line 1"), Error);
  }
  SUBCASE("gap in seconds") {
    std::istringstream bad("second,tokens\n0,1\n2,1\n");
    CHECK_THROWS_WITH_AS(Skyline::from_csv(bad), doctest::Contains("line 3"), Error);
  }
  SUBCASE("non-numeric row") {
    std::istringstream bad("second,tokens\n0,x\n");
    CHECK_THROWS_AS(Skyline::from_csv(bad), Error);
  }
  SUBCASE("no rows") {
    std::istringstream bad("second,tokens\n");
    CHECK_THROWS_AS(Skyline::from_csv(bad), Error);
  }
}

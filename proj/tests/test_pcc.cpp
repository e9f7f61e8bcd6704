#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tasq/error.hpp"
#include "tasq/pcc.hpp"

using namespace tasq;

TEST_CASE("fit_power_law recovers exact curves") {
  SUBCASE("inverse-proportional case") {
    const std::vector<AllocationRuntime> pts{{1, 100}, {2, 50}, {4, 25}};
    const PccFit fit = fit_power_law(pts);
    CHECK(fit.params.exponent == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(fit.params.scale == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(fit.n_points == 3);
    CHECK(fit.log_rmse == doctest::Approx(0.0).epsilon(1e-10));
  }
  SUBCASE("flat job") {
    const std::vector<AllocationRuntime> pts{{10, 100}, {100, 100}};
    const PccFit fit = fit_power_law(pts);
    CHECK(fit.params.exponent == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit.params.scale == doctest::Approx(100.0).epsilon(1e-12));
  }
  SUBCASE("noisy points match the normal-equation oracle") {
    Rng rng(555);
    std::vector<AllocationRuntime> pts;
    for (int i = 0; i < 20; ++i) {
      const double a = rng.uniform(1.0, 500.0);
      const double noise = 1.0 + rng.uniform(-0.01, 0.01);
      pts.push_back({a, 200.0 * std::pow(a, -0.5) * noise});
    }
    const PccFit fit = fit_power_law(pts);
    const PccParams expected = oracles::fit_normal_equations(pts);
    CHECK(fit.params.exponent ==
          doctest::Approx(expected.exponent).epsilon(1e-9));
    CHECK(fit.params.scale == doctest::Approx(expected.scale).epsilon(1e-9));
    CHECK(fit.params.exponent == doctest::Approx(-0.5).epsilon(0.05));
    CHECK(fit.params.scale == doctest::Approx(200.0).epsilon(0.05));
  }
  SUBCASE("fit of exact generated curves recovers the parameters") {
    Rng rng(556);
    for (int trial = 0; trial < 50; ++trial) {
      const PccParams truth = oracles::random_curve(rng);
      std::vector<AllocationRuntime> pts;
      const int n = static_cast<int>(rng.uniform_int(2, 12));
      for (int i = 0; i < n; ++i) {
        const double a = std::pow(2.0, i) * rng.uniform(1.0, 2.0);
        pts.push_back({a, predict_runtime(truth, a)});
      }
      const PccFit fit = fit_power_law(pts);
      CHECK(fit.params.exponent == doctest::Approx(truth.exponent).epsilon(1e-9));
      CHECK(fit.params.scale == doctest::Approx(truth.scale).epsilon(1e-9));
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(fit_power_law(std::vector<AllocationRuntime>{{2, 10}, {2, 12}}), Error);
    CHECK_THROWS_AS(fit_power_law(std::vector<AllocationRuntime>{{1, 10}, {2, 0.0}}), Error);
    CHECK_THROWS_AS(fit_power_law(std::vector<AllocationRuntime>{{0.5, 10}, {2, 5}}), Error);
  }
}

TEST_CASE("predict_runtime") {
  CHECK(predict_runtime({-1.0, 100.0}, 4) == doctest::Approx(25.0));
  CHECK(predict_runtime({0.0, 7.0}, 12345) == doctest::Approx(7.0));
  CHECK(predict_runtime({-0.5, 200.0}, 16) == doctest::Approx(50.0));
  CHECK_THROWS_AS(predict_runtime({-1.0, 100.0}, 0.5), Error);
}

TEST_CASE("optimal_tokens matches a direct scan") {
  CHECK(optimal_tokens({-1.0, 100.0}, 0.01, 10000) == 100);
  CHECK(optimal_tokens({0.0, 5.0}, 0.5, 10000) == 1);
  CHECK(optimal_tokens({-0.05, 10.0}, 0.01, 3) == 3);  // unclamped value is 5

  CHECK_THROWS_AS(optimal_tokens({0.1, 10.0}, 0.01, 100), Error);
  CHECK_THROWS_AS(optimal_tokens({-1.0, 10.0}, 0.0, 100), Error);
  CHECK_THROWS_AS(optimal_tokens({-1.0, 10.0}, 1.0, 100), Error);

  Rng rng(808);
  for (int trial = 0; trial < 300; ++trial) {
    const PccParams curve = oracles::random_curve(rng);
    const double threshold = rng.uniform(0.001, 0.5);
    const auto max_tokens = static_cast<Tokens>(rng.uniform_int(1, 4000));
    CHECK(optimal_tokens(curve, threshold, max_tokens) ==
          oracles::scan_optimal_tokens(curve, threshold, max_tokens));
  }

  SUBCASE("non-increasing in the threshold") {
    const PccParams curve{-0.7, 300.0};
    Tokens prev = optimal_tokens(curve, 0.001, 100000);
    for (double t = 0.002; t < 0.2; t += 0.002) {
      const Tokens current = optimal_tokens(curve, t, 100000);
      CHECK(current <= prev);
      prev = current;
    }
  }
}

TEST_CASE("min_tokens_within_loss matches a direct scan") {
  CHECK(min_tokens_within_loss({-1.0, 100.0}, 100, 0.05) == 96);
  CHECK(min_tokens_within_loss({0.0, 42.0}, 50, 0.0) == 1);
  CHECK(min_tokens_within_loss({-0.8, 100.0}, 73, 0.0) == 73);

  CHECK_THROWS_AS(min_tokens_within_loss({0.1, 100.0}, 100, 0.05), Error);
  CHECK_THROWS_AS(min_tokens_within_loss({-1.0, 100.0}, 100, -0.01), Error);

  Rng rng(809);
  for (int trial = 0; trial < 300; ++trial) {
    const PccParams curve = oracles::random_curve(rng);
    const auto reference = static_cast<Tokens>(rng.uniform_int(1, 3000));
    const double loss = rng.uniform(0.0, 0.6);
    CHECK(min_tokens_within_loss(curve, reference, loss) ==
          oracles::scan_min_tokens(curve, reference, loss));
  }

  SUBCASE("non-increasing in the loss budget") {
    const PccParams curve{-0.9, 500.0};
    Tokens prev = min_tokens_within_loss(curve, 800, 0.0);
    for (double loss = 0.01; loss < 0.5; loss += 0.01) {
      const Tokens current = min_tokens_within_loss(curve, 800, loss);
      CHECK(current <= prev);
      prev = current;
    }
  }
}

TEST_CASE("savings_cdf") {
  SUBCASE("by construction from min_tokens_within_loss") {
    // reductions 0.04 and 0.50 at a 5% loss budget
    const std::vector<CurveAtReference> jobs{{{-1.0, 100.0}, 100}, {{-0.07, 100.0}, 100}};
    CHECK(min_tokens_within_loss(jobs[0].params, 100, 0.05) == 96);
    CHECK(min_tokens_within_loss(jobs[1].params, 100, 0.05) == 50);
    const auto cdf = savings_cdf(jobs, 0.05);
    REQUIRE(cdf.size() == 2);
    CHECK(cdf[0].value == doctest::Approx(0.04));
    CHECK(cdf[0].cumulative == doctest::Approx(0.5));
    CHECK(cdf[1].value == doctest::Approx(0.50));
    CHECK(cdf[1].cumulative == doctest::Approx(1.0));
  }
  SUBCASE("flat-at-peak jobs with zero loss budget collapse to a step at 0") {
    const std::vector<CurveAtReference> jobs{{{-0.5, 10.0}, 40}, {{-1.2, 9.0}, 17}};
    const auto cdf = savings_cdf(jobs, 0.0);
    REQUIRE(cdf.size() == 1);
    CHECK(cdf[0].value == doctest::Approx(0.0));
    CHECK(cdf[0].cumulative == doctest::Approx(1.0));
  }
  SUBCASE("empty workload is rejected") {
    CHECK_THROWS_AS(savings_cdf(std::vector<CurveAtReference>{}, 0.05), Error);
  }
  SUBCASE("output is a valid CDF") {
    Rng rng(810);
    std::vector<CurveAtReference> jobs;
    for (int i = 0; i < 60; ++i)
      jobs.push_back({oracles::random_curve(rng), static_cast<Tokens>(rng.uniform_int(1, 900))});
    const auto cdf = savings_cdf(jobs, 0.05);
    double prev_value = -1.0;
    double prev_cumulative = 0.0;
    for (const auto& p : cdf) {
      CHECK(p.value >= 0.0);
      CHECK(p.value <= 1.0);
      CHECK(p.value > prev_value);
      CHECK(p.cumulative >= prev_cumulative);
      prev_value = p.value;
      prev_cumulative = p.cumulative;
    }
    CHECK(cdf.back().cumulative == doctest::Approx(1.0));
  }
}

#include <cmath>

#include "doctest.h"
#include "tasq/augment.hpp"
#include "tasq/error.hpp"

using namespace tasq;

namespace {

Job job_with_skyline(std::vector<Tokens> usage, Tokens allocation) {
  Job job;
  job.id = "aug";
  job.stage_count = 1;
  job.observed_allocation = allocation;
  job.observed_skyline = Skyline(std::move(usage));
  return job;
}

double allocation_at(const std::vector<AllocationRuntime>& points, std::size_t i) {
  return points[i].allocation;
}

}  // namespace

TEST_CASE("augment emits the observed point plus 80% and 60% simulations") {
  // a job allocated at its 54-token peak
  std::vector<Tokens> usage(20, 10);
  usage[5] = 54;
  const Job job = job_with_skyline(usage, 54);
  const auto points = augment(job);
  REQUIRE(points.size() == 3);
  CHECK(allocation_at(points, 0) == 32.0);  // round(0.6 * 54)
  CHECK(allocation_at(points, 1) == 43.0);  // round(0.8 * 54)
  CHECK(allocation_at(points, 2) == 54.0);
  CHECK(points[2].runtime == 20.0);
  // simulated runtimes agree with the simulator
  CHECK(points[0].runtime ==
        static_cast<double>(simulate(job.observed_skyline, 32).runtime_seconds()));
  CHECK(points[1].runtime ==
        static_cast<double>(simulate(job.observed_skyline, 43).runtime_seconds()));
}

TEST_CASE("augment clamps tiny allocations and deduplicates") {
  const Job job = job_with_skyline({1, 1, 1}, 1);
  const auto points = augment(job);
  REQUIRE(points.size() == 1);  // 80% and 60% of one token clamp back to 1
  CHECK(points[0].allocation == 1.0);
  CHECK_THROWS_AS(fit_targets(job), Error);  // degenerate augmentation
}

TEST_CASE("augment flat skyline matches the simulator oracle") {
  const Job job = job_with_skyline(std::vector<Tokens>(10, 5), 5);
  const auto points = augment(job);
  REQUIRE(points.size() == 3);
  // 60% cap = 3: the reshaped runtime comes straight from the simulator
  const Skyline at3 = simulate(job.observed_skyline, 3);
  CHECK(at3.area() == 50);
  CHECK(points[0].allocation == 3.0);
  CHECK(points[0].runtime == static_cast<double>(at3.runtime_seconds()));
  CHECK(points[1].allocation == 4.0);
  CHECK(points[2].allocation == 5.0);
}

TEST_CASE("over-allocated jobs get flat points above the peak") {
  // peak 10, allocated 15: extra points at 120% and 140% of the peak; the
  // 80% point coincides with 120% of the peak and deduplicates
  const Job job = job_with_skyline(std::vector<Tokens>(8, 10), 15);
  const auto points = augment(job);
  REQUIRE(points.size() == 4);
  CHECK(allocation_at(points, 0) == 9.0);   // round(0.6 * 15), below the peak
  CHECK(allocation_at(points, 1) == 12.0);  // round(0.8 * 15) == round(1.2 * peak)
  CHECK(allocation_at(points, 2) == 14.0);  // round(1.4 * peak)
  CHECK(allocation_at(points, 3) == 15.0);
  CHECK(points[0].runtime == 9.0);  // 80 token-seconds squeezed under 9 tokens
  CHECK(points[1].runtime == 8.0);  // at or above the peak: observed runtime
  CHECK(points[2].runtime == 8.0);
  CHECK(points[3].runtime == 8.0);
}

TEST_CASE("fit_targets spans the scalability spectrum") {
  SUBCASE("perfectly parallel: work spreads evenly across every cap") {
    // area 120 divides exactly at the 100%/80%/60% caps (10, 8, 6), so the
    // augmented points sit exactly on runtime = 120 / allocation
    const Job job = job_with_skyline(std::vector<Tokens>(12, 10), 10);
    const PccParams p = fit_targets(job);
    CHECK(p.exponent == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(p.scale == doctest::Approx(120.0).epsilon(1e-9));
  }
  SUBCASE("fully serial: runtime unchanged by the cap") {
    const Job job = job_with_skyline(std::vector<Tokens>(20, 1), 10);
    const PccParams p = fit_targets(job);
    CHECK(p.exponent == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.scale == doctest::Approx(20.0).epsilon(1e-9));
  }
  SUBCASE("mixed job lands strictly between") {
    const Job job = job_with_skyline({4, 4, 1, 1}, 4);
    const PccParams p = fit_targets(job);
    CHECK(p.exponent < 0.0);
    CHECK(p.exponent > -1.0);
  }
}

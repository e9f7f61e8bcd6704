#include "tasq/augment.hpp"

#include <algorithm>
#include <cmath>

#include "tasq/error.hpp"

namespace tasq {

namespace {

Tokens rounded_tokens(double value) {
  return static_cast<Tokens>(std::max(1.0, std::round(value)));
}

}  // namespace

std::vector<AllocationRuntime> augment(const Job& job) {
  const Skyline& sky = job.observed_skyline;
  const double observed_runtime = static_cast<double>(sky.runtime_seconds());
  const Tokens alloc = job.observed_allocation;

  std::vector<AllocationRuntime> points;
  points.push_back({static_cast<double>(alloc), observed_runtime});
  for (const double frac : {0.8, 0.6}) {
    const Tokens a = rounded_tokens(frac * alloc);
    points.push_back({static_cast<double>(a),
                      static_cast<double>(simulate(sky, a).runtime_seconds())});
  }
  if (alloc > sky.peak()) {
    // Over-allocated: anything at or above the peak runs in the observed
    // time, so the extra points are flat.
    const Tokens peak = std::max<Tokens>(1, sky.peak());
    for (const double frac : {1.2, 1.4}) {
      points.push_back({static_cast<double>(rounded_tokens(frac * peak)), observed_runtime});
    }
  }

  std::sort(points.begin(), points.end(),
            [](const AllocationRuntime& a, const AllocationRuntime& b) {
              return a.allocation < b.allocation;
            });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const AllocationRuntime& a, const AllocationRuntime& b) {
                             return a.allocation == b.allocation;
                           }),
               points.end());
  return points;
}

PccParams fit_targets(const Job& job) {
  const auto points = augment(job);
  return fit_power_law(points).params;
}

}  // namespace tasq

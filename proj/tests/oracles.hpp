#pragma once

// Independent oracles for the test suites. These are deliberate
// re-derivations (normal equations, brute-force scans, hand-rolled
// generators) that share no code with the library paths they check.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "tasq/pcc.hpp"
#include "tasq/rng.hpp"
#include "tasq/skyline.hpp"

namespace oracles {

// OLS in log-log space via the raw normal equations, solved with an explicit
// 2x2 inverse (the library uses the centered-covariance form).
inline tasq::PccParams fit_normal_equations(std::span<const tasq::AllocationRuntime> points) {
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  const double n = static_cast<double>(points.size());
  for (const auto& p : points) {
    const double x = std::log(p.allocation);
    const double y = std::log(p.runtime);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double det = sxx * n - sx * sx;
  const double slope = (n * sxy - sx * sy) / det;
  const double intercept = (sxx * sy - sx * sxy) / det;
  return {slope, std::exp(intercept)};
}

// First integer allocation whose marginal relative gain clears the
// threshold; the library's closed form must agree exactly.
inline tasq::Tokens scan_optimal_tokens(const tasq::PccParams& params, double threshold,
                                        tasq::Tokens max_tokens) {
  for (tasq::Tokens a = 1; a <= max_tokens; ++a) {
    if (std::abs(params.exponent) / static_cast<double>(a) <= threshold) return a;
  }
  return max_tokens;
}

inline tasq::Tokens scan_min_tokens(const tasq::PccParams& params, tasq::Tokens reference,
                                    double loss) {
  const double budget =
      (1.0 + loss) * params.scale * std::pow(static_cast<double>(reference), params.exponent);
  for (tasq::Tokens a = 1; a <= reference; ++a) {
    if (params.scale * std::pow(static_cast<double>(a), params.exponent) <= budget) return a;
  }
  return reference;
}

inline tasq::Skyline random_skyline(tasq::Rng& rng, std::size_t max_len = 64,
                                    tasq::Tokens max_tokens = 100) {
  const auto len = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_len)));
  std::vector<tasq::Tokens> usage(len);
  for (auto& v : usage) {
    // mix of idle seconds, valleys and spikes
    const double u = rng.uniform();
    if (u < 0.1) {
      v = 0;
    } else if (u < 0.6) {
      v = static_cast<tasq::Tokens>(rng.uniform_int(1, 8));
    } else {
      v = static_cast<tasq::Tokens>(rng.uniform_int(1, static_cast<std::int64_t>(max_tokens)));
    }
  }
  return tasq::Skyline(std::move(usage));
}

inline tasq::PccParams random_curve(tasq::Rng& rng) {
  return {-rng.uniform(0.0, 1.5), std::exp(rng.uniform(0.0, 8.0))};
}

}  // namespace oracles

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tasq/skyline.hpp"

namespace tasq {

// Parameters of the power-law performance characteristic curve
// runtime = scale * allocation^exponent. A non-increasing curve has
// exponent <= 0 and scale > 0.
struct PccParams {
  double exponent = 0.0;  // a
  double scale = 1.0;     // b, seconds at allocation 1
};

struct PccFit {
  PccParams params;
  std::size_t n_points = 0;
  double log_rmse = 0.0;  // residual RMSE in log-log space
};

struct AllocationRuntime {
  double allocation = 0.0;  // tokens
  double runtime = 0.0;     // seconds
};

// Ordinary least squares of log(runtime) on log(allocation). Requires at
// least two distinct allocations, all >= 1, and strictly positive runtimes.
PccFit fit_power_law(std::span<const AllocationRuntime> points);

// scale * allocation^exponent; allocation must be >= 1.
double predict_runtime(const PccParams& params, double allocation);

// Smallest integer allocation at which the relative marginal gain
// |exponent| / allocation has dropped to <= threshold, clamped to
// [1, max_tokens]. Requires exponent <= 0 and 0 < threshold < 1.
Tokens optimal_tokens(const PccParams& params, double threshold, Tokens max_tokens);

// Smallest integer allocation <= reference whose predicted runtime stays
// within (1 + loss) times the runtime at the reference allocation.
Tokens min_tokens_within_loss(const PccParams& params, Tokens reference_allocation, double loss);

struct CdfPoint {
  double value = 0.0;
  double cumulative = 0.0;
};

struct CurveAtReference {
  PccParams params;
  Tokens reference_allocation = 1;
};

// Empirical CDF of the per-job token reduction 1 - min_tokens/reference
// achievable within the given runtime loss.
std::vector<CdfPoint> savings_cdf(std::span<const CurveAtReference> jobs, double loss);

// Curve export: (allocation, predicted_runtime) rows over an inclusive
// integer grid.
void write_curve_csv(std::ostream& out, const PccParams& params, Tokens from, Tokens to,
                     Tokens step);

}  // namespace tasq

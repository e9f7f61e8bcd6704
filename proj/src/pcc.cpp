#include "tasq/pcc.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "tasq/error.hpp"

namespace tasq {

PccFit fit_power_law(std::span<const AllocationRuntime> points) {
  std::set<double> distinct;
  for (const auto& p : points) {
    if (p.allocation < 1.0) fail(ErrorKind::DomainError, "allocation must be >= 1");
    if (!(p.runtime > 0.0)) fail(ErrorKind::DomainError, "runtime must be > 0");
    distinct.insert(p.allocation);
  }
  if (distinct.size() < 2)
    fail(ErrorKind::InsufficientData, "need at least 2 distinct allocations to fit");

  const double n = static_cast<double>(points.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& p : points) {
    mean_x += std::log(p.allocation);
    mean_y += std::log(p.runtime);
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(p.allocation) - mean_x;
    const double dy = std::log(p.runtime) - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
  }

  PccFit fit;
  fit.params.exponent = sxy / sxx;
  fit.params.scale = std::exp(mean_y - fit.params.exponent * mean_x);
  fit.n_points = points.size();

  double sse = 0.0;
  for (const auto& p : points) {
    const double pred = fit.params.exponent * std::log(p.allocation) +
                        (mean_y - fit.params.exponent * mean_x);
    const double r = std::log(p.runtime) - pred;
    sse += r * r;
  }
  fit.log_rmse = std::sqrt(sse / n);
  return fit;
}

double predict_runtime(const PccParams& params, double allocation) {
  if (allocation < 1.0) fail(ErrorKind::DomainError, "allocation must be >= 1");
  return params.scale * std::pow(allocation, params.exponent);
}

namespace {

// Marginal relative gain of the curve at integer allocation A: |a| / A.
bool gain_below_threshold(const PccParams& params, Tokens allocation, double threshold) {
  return std::abs(params.exponent) / static_cast<double>(allocation) <= threshold;
}

}  // namespace

Tokens optimal_tokens(const PccParams& params, double threshold, Tokens max_tokens) {
  if (params.exponent > 0.0) fail(ErrorKind::InvalidCurve, "exponent must be <= 0");
  if (!(threshold > 0.0 && threshold < 1.0)) fail(ErrorKind::DomainError, "threshold must be in (0,1)");
  if (max_tokens < 1) fail(ErrorKind::DomainError, "max_tokens must be >= 1");

  // Closed form |a|/threshold, then adjust with the exact integer predicate
  // so the result agrees with a direct scan bit for bit.
  double candidate = std::ceil(std::abs(params.exponent) / threshold);
  if (!(candidate >= 1.0)) candidate = 1.0;
  if (candidate > static_cast<double>(max_tokens)) return max_tokens;
  Tokens a = static_cast<Tokens>(candidate);
  while (a > 1 && gain_below_threshold(params, a - 1, threshold)) --a;
  while (a < max_tokens && !gain_below_threshold(params, a, threshold)) ++a;
  return a;
}

Tokens min_tokens_within_loss(const PccParams& params, Tokens reference_allocation, double loss) {
  if (params.exponent > 0.0 || !(params.scale > 0.0))
    fail(ErrorKind::InvalidCurve, "curve must have exponent <= 0 and scale > 0");
  if (loss < 0.0) fail(ErrorKind::DomainError, "loss must be >= 0");
  if (reference_allocation < 1) fail(ErrorKind::DomainError, "reference allocation must be >= 1");

  const double budget = (1.0 + loss) * predict_runtime(params, reference_allocation);
  const auto within = [&](Tokens a) { return predict_runtime(params, a) <= budget; };

  if (params.exponent == 0.0) return 1;
  // Closed form A >= ref * (1+loss)^(1/a), adjusted with the exact predicate.
  double candidate =
      std::ceil(static_cast<double>(reference_allocation) * std::exp(std::log1p(loss) / params.exponent));
  if (!(candidate >= 1.0)) candidate = 1.0;
  if (candidate > static_cast<double>(reference_allocation))
    candidate = static_cast<double>(reference_allocation);
  Tokens a = static_cast<Tokens>(candidate);
  while (a > 1 && within(a - 1)) --a;
  while (a < reference_allocation && !within(a)) ++a;
  return a;
}

std::vector<CdfPoint> savings_cdf(std::span<const CurveAtReference> jobs, double loss) {
  if (jobs.empty()) fail(ErrorKind::EmptyInput, "savings CDF needs at least one job");
  std::vector<double> reductions;
  reductions.reserve(jobs.size());
  for (const auto& job : jobs) {
    const Tokens floor = min_tokens_within_loss(job.params, job.reference_allocation, loss);
    reductions.push_back(1.0 - static_cast<double>(floor) /
                                   static_cast<double>(job.reference_allocation));
  }
  std::sort(reductions.begin(), reductions.end());
  std::vector<CdfPoint> cdf;
  const double n = static_cast<double>(reductions.size());
  for (std::size_t i = 0; i < reductions.size(); ++i) {
    const double cumulative = static_cast<double>(i + 1) / n;
    if (!cdf.empty() && cdf.back().value == reductions[i]) {
      cdf.back().cumulative = cumulative;
    } else {
      cdf.push_back({reductions[i], cumulative});
    }
  }
  return cdf;
}

void write_curve_csv(std::ostream& out, const PccParams& params, Tokens from, Tokens to,
                     Tokens step) {
  if (from < 1 || to < from || step < 1) fail(ErrorKind::DomainError, "bad curve grid");
  out << "allocation,predicted_runtime\n";
  for (Tokens a = from; a <= to; a += step) out << a << ',' << predict_runtime(params, a) << '\n';
}

}  // namespace tasq

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tasq/net.hpp"
#include "tasq/pcc.hpp"
#include "tasq/workload.hpp"

namespace tasq {

// True when the curve is monotonically non-increasing: exponent <= 0 with a
// positive scale.
bool pattern_check(const PccParams& params);

// Point-list variant (the smoothed tree curve): every finite difference must
// be <= 0 across the grid.
bool pattern_check(std::span<const AllocationRuntime> curve);

struct PredictionRecord {
  PccParams predicted;
  PccParams truth;
  double observed_allocation = 1.0;
  double observed_runtime = 1.0;
  bool pattern = true;  // from pattern_check on the model's curve form
};

struct EvalReport {
  std::string model;
  double pattern_non_increasing = 0.0;  // fraction
  double mae_curve_params = 0.0;        // scaled-parameter space
  double median_ae_runtime = 0.0;       // |predicted - observed| / observed
  std::size_t n_jobs = 0;
};

// Metrics over aligned prediction/truth pairs. The parameter MAE is
// computed in the same scaled space as the training targets.
EvalReport score(std::span<const PredictionRecord> records, const ParamScales& scales);

std::string eval_reports_to_json(std::span<const EvalReport> reports);
std::string eval_reports_to_csv(std::span<const EvalReport> reports);

struct SimulatorValidationReport {
  std::vector<CdfPoint> tolerance_cdf;            // fraction of pairs matched per tolerance
  std::vector<std::size_t> outlier_histogram;     // jobs by outlier count (index = count)
  double median_ape = 0.0;                        // all (job, cap) pairs
  double mean_ape = 0.0;
  double median_ape_nonanomalous = 0.0;
  double mean_ape_nonanomalous = 0.0;
  double median_ape_fully_matched = 0.0;
  std::size_t n_jobs = 0;
  std::size_t n_anomalous = 0;
  std::size_t n_fully_matched = 0;
  std::size_t n_skipped_caps = 0;

  std::string to_json_text() const;
};

// Re-execute each job at the given fractions of its observed allocation via
// the oracle, check pairwise area conservation over a tolerance grid, count
// per-job outliers (area off the per-job median by more than
// outlier_tolerance), and compare the simulator's runtimes against the
// oracle's. Jobs whose oracle runtimes are not monotone non-increasing in
// the cap count as anomalous and are excluded from the non-anomalous APE.
using ExecutorOracle = std::function<Skyline(const Job&, Tokens)>;

SimulatorValidationReport validate_simulator(const std::vector<Job>& jobs,
                                             std::span<const double> cap_fractions,
                                             const ExecutorOracle& oracle,
                                             double outlier_tolerance = 0.30);

}  // namespace tasq

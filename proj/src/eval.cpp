#include "tasq/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "tasq/error.hpp"

using nlohmann::json;

namespace tasq {

bool pattern_check(const PccParams& params) {
  return params.exponent <= 0.0 && params.scale > 0.0;
}

bool pattern_check(std::span<const AllocationRuntime> curve) {
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].runtime > curve[i - 1].runtime) return false;
  return true;
}

namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double total = 0.0;
  for (const double v : values) total += v;
  return total / static_cast<double>(values.size());
}

}  // namespace

EvalReport score(std::span<const PredictionRecord> records, const ParamScales& scales) {
  if (records.empty()) fail(ErrorKind::EmptyInput, "no prediction records to score");
  EvalReport report;
  report.n_jobs = records.size();
  double mae = 0.0;
  std::size_t pattern_ok = 0;
  std::vector<double> runtime_errors;
  runtime_errors.reserve(records.size());
  for (const PredictionRecord& r : records) {
    if (r.pattern) ++pattern_ok;
    double pa = 0.0;
    double pb = 0.0;
    double ta = 0.0;
    double tb = 0.0;
    encode_params(r.predicted, scales, &pa, &pb);
    encode_params(r.truth, scales, &ta, &tb);
    mae += 0.5 * (std::abs(pa - ta) + std::abs(pb - tb));
    if (!(r.observed_runtime > 0.0)) fail(ErrorKind::DomainError, "observed runtime must be > 0");
    const double predicted = predict_runtime(r.predicted, r.observed_allocation);
    runtime_errors.push_back(std::abs(predicted - r.observed_runtime) / r.observed_runtime);
  }
  report.pattern_non_increasing =
      static_cast<double>(pattern_ok) / static_cast<double>(records.size());
  report.mae_curve_params = mae / static_cast<double>(records.size());
  report.median_ae_runtime = median(std::move(runtime_errors));
  return report;
}

std::string eval_reports_to_json(std::span<const EvalReport> reports) {
  json j = json::array();
  for (const EvalReport& r : reports) {
    j.push_back({{"model", r.model},
                 {"pattern_non_increasing", r.pattern_non_increasing},
                 {"mae_curve_params", r.mae_curve_params},
                 {"median_ae_runtime", r.median_ae_runtime},
                 {"n_jobs", r.n_jobs}});
  }
  return json{{"models", j}}.dump(2);
}

std::string eval_reports_to_csv(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "model,pattern_non_increasing,mae_curve_params,median_ae_runtime,n_jobs\n";
  for (const EvalReport& r : reports) {
    out << r.model << ',' << r.pattern_non_increasing << ',';
    if (std::isnan(r.mae_curve_params)) {
      out << "NA";  // curves without parameters (the smoothed grid)
    } else {
      out << r.mae_curve_params;
    }
    out << ',' << r.median_ae_runtime << ',' << r.n_jobs << '\n';
  }
  return out.str();
}

SimulatorValidationReport validate_simulator(const std::vector<Job>& jobs,
                                             std::span<const double> cap_fractions,
                                             const ExecutorOracle& oracle,
                                             double outlier_tolerance) {
  if (jobs.empty()) fail(ErrorKind::EmptyInput, "no jobs to validate");
  if (cap_fractions.empty()) fail(ErrorKind::EmptyInput, "no cap fractions");

  SimulatorValidationReport report;
  report.n_jobs = jobs.size();

  std::vector<double> pair_mismatch;  // relative area difference per execution pair
  std::vector<double> apes;
  std::vector<double> apes_nonanomalous;
  std::vector<double> apes_fully_matched;

  for (const Job& job : jobs) {
    // Deduplicated integer caps for this job.
    std::vector<Tokens> caps;
    for (const double frac : cap_fractions) {
      const auto cap = static_cast<Tokens>(
          std::max(1.0, std::round(frac * job.observed_allocation)));
      if (std::find(caps.begin(), caps.end(), cap) == caps.end()) caps.push_back(cap);
    }

    struct Execution {
      Tokens cap;
      TokenSeconds area;
      double runtime;
    };
    std::vector<Execution> executions;
    std::vector<double> job_apes;
    for (const Tokens cap : caps) {
      Skyline oracle_run{std::vector<Tokens>{0}};
      try {
        oracle_run = oracle(job, cap);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::InfeasibleCap) {
          ++report.n_skipped_caps;
          continue;
        }
        throw;
      }
      const double oracle_runtime = static_cast<double>(oracle_run.runtime_seconds());
      const Skyline simulated = simulate(job.observed_skyline, cap);
      const double sim_runtime = static_cast<double>(simulated.runtime_seconds());
      job_apes.push_back(std::abs(sim_runtime - oracle_runtime) / oracle_runtime);
      executions.push_back({cap, oracle_run.area(), oracle_runtime});
    }

    // Anomalous: runtime decreases somewhere as the cap shrinks.
    bool anomalous = false;
    {
      auto by_cap = executions;
      std::sort(by_cap.begin(), by_cap.end(),
                [](const Execution& a, const Execution& b) { return a.cap > b.cap; });
      for (std::size_t i = 1; i < by_cap.size(); ++i)
        if (by_cap[i].runtime < by_cap[i - 1].runtime) anomalous = true;
    }

    // pairwise area conservation
    std::vector<TokenSeconds> areas;
    for (const Execution& e : executions) areas.push_back(e.area);
    for (std::size_t i = 0; i < areas.size(); ++i)
      for (std::size_t j = i + 1; j < areas.size(); ++j) {
        const TokenSeconds hi = std::max(areas[i], areas[j]);
        const TokenSeconds diff = areas[i] > areas[j] ? areas[i] - areas[j] : areas[j] - areas[i];
        pair_mismatch.push_back(hi == 0 ? 0.0
                                        : static_cast<double>(diff) / static_cast<double>(hi));
      }

    // outliers: executions whose area is off the per-job median area
    std::size_t outliers = 0;
    if (!areas.empty()) {
      std::vector<double> area_values(areas.begin(), areas.end());
      const double med = median(area_values);
      for (const TokenSeconds a : areas) {
        const double hi = std::max(static_cast<double>(a), med);
        if (hi > 0.0 && std::abs(static_cast<double>(a) - med) / hi > outlier_tolerance)
          ++outliers;
      }
    }
    if (report.outlier_histogram.size() <= outliers)
      report.outlier_histogram.resize(outliers + 1, 0);
    ++report.outlier_histogram[outliers];
    if (anomalous) ++report.n_anomalous;
    const bool fully_matched = outliers == 0;
    if (fully_matched) ++report.n_fully_matched;

    for (const double ape : job_apes) {
      apes.push_back(ape);
      if (!anomalous) apes_nonanomalous.push_back(ape);
      if (fully_matched) apes_fully_matched.push_back(ape);
    }
  }

  // tolerance CDF over a 1% grid
  std::sort(pair_mismatch.begin(), pair_mismatch.end());
  for (int pct = 0; pct <= 100; ++pct) {
    const double tol = pct / 100.0;
    const auto matched = static_cast<double>(
        std::upper_bound(pair_mismatch.begin(), pair_mismatch.end(), tol) - pair_mismatch.begin());
    report.tolerance_cdf.push_back(
        {tol, pair_mismatch.empty() ? 1.0 : matched / static_cast<double>(pair_mismatch.size())});
  }

  report.median_ape = median(apes);
  report.mean_ape = mean(apes);
  report.median_ape_nonanomalous = median(apes_nonanomalous);
  report.mean_ape_nonanomalous = mean(apes_nonanomalous);
  report.median_ape_fully_matched = median(apes_fully_matched);
  return report;
}

std::string SimulatorValidationReport::to_json_text() const {
  json j;
  json cdf = json::array();
  for (const CdfPoint& p : tolerance_cdf) cdf.push_back(json::array({p.value, p.cumulative}));
  j["tolerance_cdf"] = std::move(cdf);
  j["outlier_histogram"] = outlier_histogram;
  j["median_ape"] = median_ape;
  j["mean_ape"] = mean_ape;
  j["median_ape_nonanomalous"] = median_ape_nonanomalous;
  j["mean_ape_nonanomalous"] = mean_ape_nonanomalous;
  j["median_ape_fully_matched"] = median_ape_fully_matched;
  j["n_jobs"] = n_jobs;
  j["n_anomalous"] = n_anomalous;
  j["n_fully_matched"] = n_fully_matched;
  j["n_skipped_caps"] = n_skipped_caps;
  return j.dump(2);
}

}  // namespace tasq

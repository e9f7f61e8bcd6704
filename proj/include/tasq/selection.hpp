#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tasq/features.hpp"
#include "tasq/workload.hpp"

namespace tasq {

struct KmeansResult {
  std::vector<int> assignments;
  Matrix centers;
  double inertia = 0.0;
  std::uint32_t iterations = 0;
};

// Lloyd's iterations with k-means++ seeding; converges when the largest
// center shift drops below 1e-6 or after 100 iterations. Deterministic per
// seed.
KmeansResult kmeans(const Matrix& points, std::uint32_t k, std::uint64_t seed);

// Index of the nearest center (ties to the lower index).
int nearest_center(const Matrix& centers, const double* point);

// Two-sample Kolmogorov-Smirnov statistic, sup_x |F_a(x) - F_b(x)|.
double ks_statistic(std::span<const double> sample_a, std::span<const double> sample_b);

struct SelectionConfig {
  std::optional<Tokens> allocation_min;
  std::optional<Tokens> allocation_max;
  // Submission-order window over the workload file, the stand-in for a
  // wall-clock time frame.
  std::optional<std::size_t> index_min;
  std::optional<std::size_t> index_max;
  std::vector<std::string> template_allowlist;  // empty = all templates
  std::uint32_t k = 8;
  std::uint32_t subset_size = 200;
  std::uint32_t per_template_cap = 3;
  std::uint64_t seed = 0;

  static SelectionConfig from_json_text(const std::string& text);
  static SelectionConfig from_file(const std::string& path);
  std::string to_json_text() const;
};

struct SelectionReport {
  std::vector<double> population_proportions;
  std::vector<double> pool_proportions;
  std::vector<double> subset_proportions;
  std::vector<std::uint32_t> quotas;
  std::vector<double> ks_before;  // per feature, pool vs population
  std::vector<double> ks_after;   // per feature, subset vs population
  double ks_before_max = 0.0;
  double ks_after_max = 0.0;
  std::vector<std::string> warnings;

  std::string to_json_text() const;
};

struct SelectionResult {
  std::vector<std::size_t> subset_indexes;  // indexes into the pool
  SelectionReport report;
};

// Step 1 of the selection: filter the population into the pre-selected pool
// by the config constraints. Returns indexes into `jobs`.
std::vector<std::size_t> filter_pool(const std::vector<Job>& jobs, const SelectionConfig& config);

// Steps 2-4: cluster the population, stratified-undersample the pool to the
// population's cluster proportions with a per-template cap, and score the
// result with per-feature KS statistics (max reported).
SelectionResult select_subset(const std::vector<Job>& population,
                              const std::vector<std::size_t>& pool_indexes,
                              const SelectionConfig& config);

// Core of step 3, exposed for direct testing: largest-remainder quotas over
// the population proportions, uniform sampling without replacement within
// each cluster, template cap enforced globally, deficits spilled to other
// clusters with a warning.
std::vector<std::size_t> stratified_sample(const std::vector<std::size_t>& pool_indexes,
                                           const std::vector<int>& pool_assignments,
                                           const std::vector<std::string>& pool_templates,
                                           const std::vector<double>& population_proportions,
                                           std::uint32_t subset_size,
                                           std::uint32_t per_template_cap, std::uint64_t seed,
                                           std::vector<std::uint32_t>* quotas_out,
                                           std::vector<std::string>* warnings);

}  // namespace tasq

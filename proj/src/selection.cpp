#include "tasq/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "tasq/error.hpp"
#include "tasq/kernels.hpp"
#include "tasq/rng.hpp"

using nlohmann::json;

namespace tasq {

int nearest_center(const Matrix& centers, const double* point) {
  int best = 0;
  double best_dist = kernels::sqdist(centers.row(0), point, centers.cols);
  for (std::size_t c = 1; c < centers.rows; ++c) {
    const double dist = kernels::sqdist(centers.row(c), point, centers.cols);
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<int>(c);
    }
  }
  return best;
}

KmeansResult kmeans(const Matrix& points, std::uint32_t k, std::uint64_t seed) {
  if (k < 1) fail(ErrorKind::ConfigError, "k must be >= 1");
  if (points.rows < k)
    fail(ErrorKind::ConfigError, "k = " + std::to_string(k) + " exceeds " +
                                     std::to_string(points.rows) + " points");
  const std::size_t n = points.rows;
  const std::size_t d = points.cols;
  Rng rng(seed);

  // k-means++ seeding
  Matrix centers(k, d);
  std::vector<double> dist2(n, 0.0);
  {
    const auto first = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    std::copy(points.row(first), points.row(first) + d, centers.row(0));
    for (std::uint32_t c = 1; c < k; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double best = kernels::sqdist(points.row(i), centers.row(0), d);
        for (std::uint32_t pc = 1; pc < c; ++pc)
          best = std::min(best, kernels::sqdist(points.row(i), centers.row(pc), d));
        dist2[i] = best;
        total += best;
      }
      std::size_t pick = 0;
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double cumulative = 0.0;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          cumulative += dist2[i];
          if (cumulative >= target) {
            pick = i;
            break;
          }
        }
      } else {
        pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
      }
      std::copy(points.row(pick), points.row(pick) + d, centers.row(c));
    }
  }

  KmeansResult result;
  result.assignments.assign(n, 0);
  Matrix sums(k, d);
  std::vector<std::size_t> counts(k, 0);
  for (std::uint32_t iter = 0; iter < 100; ++iter) {
    result.iterations = iter + 1;
    for (std::size_t i = 0; i < n; ++i)
      result.assignments[i] = nearest_center(centers, points.row(i));

    std::fill(sums.data.begin(), sums.data.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      kernels::axpy(1.0, points.row(i), sums.row(result.assignments[i]), d);
      ++counts[result.assignments[i]];
    }
    // empty cluster: adopt the point farthest from its assigned center
    for (std::uint32_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t farthest = 0;
      double farthest_dist = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[result.assignments[i]] <= 1) continue;
        const double dist =
            kernels::sqdist(points.row(i), centers.row(result.assignments[i]), d);
        if (dist > farthest_dist) {
          farthest_dist = dist;
          farthest = i;
        }
      }
      const int old = result.assignments[farthest];
      kernels::axpy(-1.0, points.row(farthest), sums.row(old), d);
      --counts[old];
      result.assignments[farthest] = static_cast<int>(c);
      kernels::axpy(1.0, points.row(farthest), sums.row(c), d);
      ++counts[c];
    }

    double max_shift = 0.0;
    for (std::uint32_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < d; ++j) {
        const double updated = sums.at(c, j) / static_cast<double>(counts[c]);
        max_shift = std::max(max_shift, std::abs(updated - centers.at(c, j)));
        centers.at(c, j) = updated;
      }
    }
    if (max_shift < 1e-6) break;
  }

  for (std::size_t i = 0; i < n; ++i)
    result.assignments[i] = nearest_center(centers, points.row(i));
  result.centers = std::move(centers);
  result.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    result.inertia +=
        kernels::sqdist(points.row(i), result.centers.row(result.assignments[i]), d);
  return result;
}

double ks_statistic(std::span<const double> sample_a, std::span<const double> sample_b) {
  if (sample_a.empty() || sample_b.empty())
    fail(ErrorKind::EmptyInput, "KS statistic needs non-empty samples");
  std::vector<double> a(sample_a.begin(), sample_a.end());
  std::vector<double> b(sample_b.begin(), sample_b.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

std::vector<std::size_t> filter_pool(const std::vector<Job>& jobs, const SelectionConfig& config) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    if (config.index_min && i < *config.index_min) continue;
    if (config.index_max && i > *config.index_max) continue;
    if (config.allocation_min && job.observed_allocation < *config.allocation_min) continue;
    if (config.allocation_max && job.observed_allocation > *config.allocation_max) continue;
    if (!config.template_allowlist.empty() &&
        std::find(config.template_allowlist.begin(), config.template_allowlist.end(),
                  job.template_id) == config.template_allowlist.end())
      continue;
    pool.push_back(i);
  }
  return pool;
}

std::vector<std::size_t> stratified_sample(const std::vector<std::size_t>& pool_indexes,
                                           const std::vector<int>& pool_assignments,
                                           const std::vector<std::string>& pool_templates,
                                           const std::vector<double>& population_proportions,
                                           std::uint32_t subset_size,
                                           std::uint32_t per_template_cap, std::uint64_t seed,
                                           std::vector<std::uint32_t>* quotas_out,
                                           std::vector<std::string>* warnings) {
  const std::size_t k = population_proportions.size();
  if (pool_indexes.size() != pool_assignments.size() ||
      pool_indexes.size() != pool_templates.size())
    fail(ErrorKind::ShapeError, "pool arrays differ in length");

  // Largest-remainder quotas.
  std::vector<std::uint32_t> quotas(k, 0);
  {
    std::vector<double> exact(k);
    std::uint32_t assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
      exact[c] = population_proportions[c] * static_cast<double>(subset_size);
      quotas[c] = static_cast<std::uint32_t>(std::floor(exact[c]));
      assigned += quotas[c];
    }
    std::vector<std::size_t> by_remainder(k);
    std::iota(by_remainder.begin(), by_remainder.end(), 0);
    std::stable_sort(by_remainder.begin(), by_remainder.end(), [&](std::size_t x, std::size_t y) {
      return exact[x] - std::floor(exact[x]) > exact[y] - std::floor(exact[y]);
    });
    for (std::size_t r = 0; assigned < subset_size; ++r, ++assigned) ++quotas[by_remainder[r % k]];
  }
  if (quotas_out != nullptr) *quotas_out = quotas;

  // Shuffled candidate order per cluster.
  const Rng root(seed);
  std::vector<std::vector<std::size_t>> candidates(k);  // positions into pool arrays
  for (std::size_t p = 0; p < pool_indexes.size(); ++p) {
    const int c = pool_assignments[p];
    if (c < 0 || static_cast<std::size_t>(c) >= k)
      fail(ErrorKind::ShapeError, "pool assignment out of range");
    candidates[c].push_back(p);
  }
  for (std::size_t c = 0; c < k; ++c) {
    Rng rng = root.fork(c);
    rng.shuffle(candidates[c]);
  }

  std::map<std::string, std::uint32_t> template_counts;
  std::vector<bool> taken(pool_indexes.size(), false);
  std::vector<std::size_t> subset;
  subset.reserve(subset_size);
  std::vector<std::size_t> cursor(k, 0);

  auto take_from = [&](std::size_t c) -> bool {
    auto& list = candidates[c];
    for (std::size_t& pos = cursor[c]; pos < list.size(); ++pos) {
      const std::size_t p = list[pos];
      if (taken[p]) continue;
      auto& count = template_counts[pool_templates[p]];
      if (count >= per_template_cap) continue;
      ++count;
      taken[p] = true;
      subset.push_back(pool_indexes[p]);
      ++pos;
      return true;
    }
    return false;
  };

  std::vector<std::uint32_t> deficits(k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::uint32_t q = 0; q < quotas[c]; ++q) {
      if (!take_from(c)) {
        deficits[c] = quotas[c] - q;
        break;
      }
    }
  }

  std::uint32_t total_deficit = 0;
  for (const std::uint32_t d : deficits) total_deficit += d;
  if (total_deficit > 0) {
    if (warnings != nullptr) {
      std::ostringstream msg;
      msg << "quota deficit of " << total_deficit << " spilled across clusters (per cluster:";
      for (std::size_t c = 0; c < k; ++c) msg << ' ' << deficits[c];
      msg << ')';
      warnings->push_back(msg.str());
    }
    // Spill proportionally: walk clusters by population proportion, largest
    // first, taking one at a time.
    std::vector<std::size_t> spill_order(k);
    std::iota(spill_order.begin(), spill_order.end(), 0);
    std::stable_sort(spill_order.begin(), spill_order.end(), [&](std::size_t x, std::size_t y) {
      return population_proportions[x] > population_proportions[y];
    });
    std::uint32_t remaining = total_deficit;
    bool progress = true;
    while (remaining > 0 && progress) {
      progress = false;
      for (const std::size_t c : spill_order) {
        if (remaining == 0) break;
        if (take_from(c)) {
          --remaining;
          progress = true;
        }
      }
    }
    if (remaining > 0) {
      std::ostringstream msg;
      msg << "pool exhausted with " << remaining << " slots unfilled (cluster deficits:";
      for (std::size_t c = 0; c < k; ++c) msg << ' ' << deficits[c];
      msg << ')';
      fail(ErrorKind::InfeasibleSelection, msg.str());
    }
  }
  return subset;
}

namespace {

std::vector<double> proportions(const std::vector<int>& assignments, std::size_t k) {
  std::vector<double> p(k, 0.0);
  for (const int a : assignments) p[a] += 1.0;
  for (double& v : p) v /= static_cast<double>(assignments.size());
  return p;
}

std::vector<double> feature_column(const Matrix& m, const std::vector<std::size_t>& rows,
                                   std::size_t col) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const std::size_t r : rows) out.push_back(m.at(r, col));
  return out;
}

}  // namespace

SelectionResult select_subset(const std::vector<Job>& population,
                              const std::vector<std::size_t>& pool_indexes,
                              const SelectionConfig& config) {
  if (population.empty()) fail(ErrorKind::EmptyInput, "empty population");
  if (pool_indexes.empty()) fail(ErrorKind::EmptyInput, "empty pre-selected pool");

  // Clustering runs on standardized job vectors fitted over the population.
  Featurizer featurizer;
  featurizer.fit(population);
  Matrix vectors(population.size(), featurizer.job_width());
  for (std::size_t i = 0; i < population.size(); ++i) {
    const auto row = featurizer.job_vector(population[i]);
    std::copy(row.begin(), row.end(), vectors.row(i));
  }

  const KmeansResult clusters = kmeans(vectors, config.k, config.seed);

  std::vector<int> pool_assignments;
  std::vector<std::string> pool_templates;
  pool_assignments.reserve(pool_indexes.size());
  for (const std::size_t idx : pool_indexes) {
    pool_assignments.push_back(nearest_center(clusters.centers, vectors.row(idx)));
    pool_templates.push_back(population[idx].template_id);
  }

  SelectionResult result;
  result.report.population_proportions = proportions(clusters.assignments, config.k);
  result.report.pool_proportions = proportions(pool_assignments, config.k);

  const auto subset =
      stratified_sample(pool_indexes, pool_assignments, pool_templates,
                        result.report.population_proportions, config.subset_size,
                        config.per_template_cap, config.seed, &result.report.quotas,
                        &result.report.warnings);
  result.subset_indexes = subset;

  std::vector<int> subset_assignments;
  for (const std::size_t idx : subset)
    subset_assignments.push_back(nearest_center(clusters.centers, vectors.row(idx)));
  result.report.subset_proportions = proportions(subset_assignments, config.k);

  // Per-feature KS against the population, before (pool) and after (subset).
  std::vector<std::size_t> all_rows(population.size());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  for (std::size_t f = 0; f < vectors.cols; ++f) {
    const auto pop_col = feature_column(vectors, all_rows, f);
    const double before = ks_statistic(pop_col, feature_column(vectors, pool_indexes, f));
    const double after = ks_statistic(pop_col, feature_column(vectors, subset, f));
    result.report.ks_before.push_back(before);
    result.report.ks_after.push_back(after);
    result.report.ks_before_max = std::max(result.report.ks_before_max, before);
    result.report.ks_after_max = std::max(result.report.ks_after_max, after);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Config / report serialization
// ---------------------------------------------------------------------------

std::string SelectionConfig::to_json_text() const {
  json j;
  if (allocation_min) j["allocation_min"] = *allocation_min;
  if (allocation_max) j["allocation_max"] = *allocation_max;
  if (index_min) j["index_min"] = *index_min;
  if (index_max) j["index_max"] = *index_max;
  if (!template_allowlist.empty()) j["template_allowlist"] = template_allowlist;
  j["k"] = k;
  j["subset_size"] = subset_size;
  j["per_template_cap"] = per_template_cap;
  j["seed"] = seed;
  return j.dump();
}

SelectionConfig SelectionConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("selection config: ") + e.what());
  }
  SelectionConfig cfg;
  try {
    if (j.contains("allocation_min")) cfg.allocation_min = j.at("allocation_min").get<Tokens>();
    if (j.contains("allocation_max")) cfg.allocation_max = j.at("allocation_max").get<Tokens>();
    if (j.contains("index_min")) cfg.index_min = j.at("index_min").get<std::size_t>();
    if (j.contains("index_max")) cfg.index_max = j.at("index_max").get<std::size_t>();
    if (j.contains("template_allowlist"))
      cfg.template_allowlist = j.at("template_allowlist").get<std::vector<std::string>>();
    cfg.k = j.value("k", cfg.k);
    cfg.subset_size = j.value("subset_size", cfg.subset_size);
    cfg.per_template_cap = j.value("per_template_cap", cfg.per_template_cap);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("selection config: ") + e.what());
  }
  if (cfg.k < 1) fail(ErrorKind::ConfigError, "k must be >= 1");
  if (cfg.subset_size < 1) fail(ErrorKind::ConfigError, "subset_size must be >= 1");
  if (cfg.per_template_cap < 1) fail(ErrorKind::ConfigError, "per_template_cap must be >= 1");
  return cfg;
}

SelectionConfig SelectionConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

std::string SelectionReport::to_json_text() const {
  json j;
  j["population_proportions"] = population_proportions;
  j["pool_proportions"] = pool_proportions;
  j["subset_proportions"] = subset_proportions;
  j["quotas"] = quotas;
  j["ks_before"] = ks_before;
  j["ks_after"] = ks_after;
  j["ks_before_max"] = ks_before_max;
  j["ks_after_max"] = ks_after_max;
  j["warnings"] = warnings;
  return j.dump(2);
}

}  // namespace tasq

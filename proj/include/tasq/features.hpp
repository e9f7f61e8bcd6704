#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tasq/workload.hpp"

namespace tasq {

// Fixed list of categorical levels; the last entry is always the Other
// bucket that absorbs unknown levels.
class Vocabulary {
 public:
  explicit Vocabulary(std::vector<std::string> levels);

  static const Vocabulary& physical_ops();    // 35 named kinds + Other
  static const Vocabulary& partition_kinds();  // 4 named kinds + Other
  static Vocabulary from_file(const std::string& path);  // one level per line

  std::size_t size() const { return levels_.size(); }
  std::size_t other_index() const { return levels_.size() - 1; }
  const std::string& name(std::size_t index) const { return levels_.at(index); }
  const std::vector<std::string>& levels() const { return levels_; }

  // Index of the level; unknown names land in the Other bucket.
  std::size_t index_of(const std::string& name, bool* known = nullptr) const;

 private:
  std::vector<std::string> levels_;
};

// Row-major dense matrix; the only shape the featurizer and the networks
// need.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const Matrix&) const = default;
};

// Per-feature standardization statistics fitted in log1p space.
struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> stddev;

  void fit(const std::vector<std::vector<double>>& raw_rows);
  // log1p then standardize, in place.
  void apply(std::vector<double>& raw_row) const;
  bool fitted() const { return !mean.empty(); }

  bool operator==(const FeatureStats&) const = default;
};

// Job -> model inputs. Numeric operator metrics are aggregated by mean at
// the job level, categorical metrics by frequency count; operator and stage
// counts are appended. All numeric entries go through log1p then
// standardization with corpus statistics fitted on the training split.
class Featurizer {
 public:
  // 3 cardinalities, average row length, 3 costs, 3 counts.
  static constexpr std::size_t kNumericCount = 10;

  Featurizer();
  Featurizer(Vocabulary ops, Vocabulary parts);

  std::size_t operator_width() const;  // P_O
  std::size_t job_width() const;       // P_J

  // Raw (pre-transform) rows; used when fitting statistics.
  std::vector<double> raw_operator_row(const Operator& op) const;
  std::vector<double> raw_job_vector(const Job& job) const;

  // Fit standardization statistics over the given training jobs.
  void fit(const std::vector<Job>& jobs);

  std::vector<double> featurize_operator(const Operator& op) const;
  std::vector<double> job_vector(const Job& job) const;
  Matrix operator_matrix(const Job& job) const;

  const Vocabulary& ops() const { return ops_; }
  const Vocabulary& parts() const { return parts_; }
  const FeatureStats& operator_stats() const { return op_stats_; }
  const FeatureStats& job_stats() const { return job_stats_; }
  void set_stats(FeatureStats op_stats, FeatureStats job_stats);

 private:
  Vocabulary ops_;
  Vocabulary parts_;
  FeatureStats op_stats_;
  FeatureStats job_stats_;
};

// N x N binary adjacency of the operator DAG, rows/columns in operator list
// order. Rejects edges to unknown ids and cyclic graphs.
Matrix adjacency(const Job& job);

}  // namespace tasq

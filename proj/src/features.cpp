#include "tasq/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "tasq/error.hpp"

namespace tasq {

Vocabulary::Vocabulary(std::vector<std::string> levels) : levels_(std::move(levels)) {
  if (levels_.empty() || levels_.back() != "Other")
    fail(ErrorKind::ConfigError, "vocabulary must end with the Other bucket");
}

const Vocabulary& Vocabulary::physical_ops() {
  static const Vocabulary vocab({
      "TableScan",       "IndexScan",        "ExtractRows",     "Filter",
      "Project",         "ComputeScalar",    "HashJoin",        "MergeJoin",
      "NestedLoopJoin",  "BroadcastJoin",    "CrossJoin",       "HashAggregate",
      "StreamAggregate", "PartialAggregate", "WindowAggregate", "Sort",
      "TopSort",         "Exchange",         "ShuffleExchange", "BroadcastExchange",
      "RangePartition",  "HashPartition",    "Union",           "UnionAll",
      "Intersect",       "Except",           "SequenceProject", "Spool",
      "LazySpool",       "EagerSpool",       "Split",           "Coalesce",
      "Assert",          "RowCount",         "OutputInserter",  "Other",
  });
  return vocab;
}

const Vocabulary& Vocabulary::partition_kinds() {
  static const Vocabulary vocab({"Hash", "Range", "RoundRobin", "Broadcast", "Other"});
  return vocab;
}

Vocabulary Vocabulary::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open vocabulary file " + path);
  std::vector<std::string> levels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) levels.push_back(line);
  }
  return Vocabulary(std::move(levels));
}

std::size_t Vocabulary::index_of(const std::string& name, bool* known) const {
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i] == name) {
      if (known != nullptr) *known = true;
      return i;
    }
  }
  if (known != nullptr) *known = false;
  return other_index();
}

namespace {

// Missing or negative metrics are zero-imputed before the log1p transform.
double clean(double v) { return std::isfinite(v) && v > 0.0 ? v : 0.0; }

void numeric_fields(const Operator& op, double* out) {
  out[0] = op.estimated_cardinality;
  out[1] = op.input_cardinality;
  out[2] = op.input_children_cardinality;
  out[3] = op.average_row_length;
  out[4] = op.estimated_cost;
  out[5] = op.estimated_exclusive_cost;
  out[6] = op.estimated_total_cost;
  out[7] = static_cast<double>(op.partition_count);
  out[8] = static_cast<double>(op.partitioning_column_count);
  out[9] = static_cast<double>(op.sort_column_count);
}

}  // namespace

void FeatureStats::fit(const std::vector<std::vector<double>>& raw_rows) {
  if (raw_rows.empty()) fail(ErrorKind::EmptyInput, "cannot fit statistics on an empty corpus");
  const std::size_t width = raw_rows.front().size();
  mean.assign(width, 0.0);
  stddev.assign(width, 0.0);
  const double n = static_cast<double>(raw_rows.size());
  for (const auto& row : raw_rows)
    for (std::size_t i = 0; i < width; ++i) mean[i] += std::log1p(clean(row[i]));
  for (std::size_t i = 0; i < width; ++i) mean[i] /= n;
  for (const auto& row : raw_rows)
    for (std::size_t i = 0; i < width; ++i) {
      const double d = std::log1p(clean(row[i])) - mean[i];
      stddev[i] += d * d;
    }
  for (std::size_t i = 0; i < width; ++i) {
    stddev[i] = std::sqrt(stddev[i] / n);
    if (stddev[i] <= 0.0) stddev[i] = 1.0;  // constant feature maps to 0
  }
}

void FeatureStats::apply(std::vector<double>& raw_row) const {
  if (raw_row.size() != mean.size())
    fail(ErrorKind::ShapeError, "feature row width does not match fitted statistics");
  for (std::size_t i = 0; i < raw_row.size(); ++i)
    raw_row[i] = (std::log1p(clean(raw_row[i])) - mean[i]) / stddev[i];
}

Featurizer::Featurizer()
    : ops_(Vocabulary::physical_ops()), parts_(Vocabulary::partition_kinds()) {}

Featurizer::Featurizer(Vocabulary ops, Vocabulary parts)
    : ops_(std::move(ops)), parts_(std::move(parts)) {}

std::size_t Featurizer::operator_width() const {
  return kNumericCount + ops_.size() + parts_.size();
}

std::size_t Featurizer::job_width() const {
  return kNumericCount + ops_.size() + parts_.size() + 2;
}

std::vector<double> Featurizer::raw_operator_row(const Operator& op) const {
  std::vector<double> row(kNumericCount, 0.0);
  numeric_fields(op, row.data());
  return row;
}

std::vector<double> Featurizer::raw_job_vector(const Job& job) const {
  if (job.operators.empty()) fail(ErrorKind::EmptyJob, "job has no operators");
  std::vector<double> row(job_width(), 0.0);
  double fields[kNumericCount];
  for (const Operator& op : job.operators) {
    numeric_fields(op, fields);
    for (std::size_t i = 0; i < kNumericCount; ++i) row[i] += fields[i];
    const std::size_t op_slot = op.physical_op < ops_.size() ? op.physical_op : ops_.other_index();
    row[kNumericCount + op_slot] += 1.0;
    const std::size_t part_slot =
        op.partition_kind < parts_.size() ? op.partition_kind : parts_.other_index();
    row[kNumericCount + ops_.size() + part_slot] += 1.0;
  }
  const double n = static_cast<double>(job.operators.size());
  for (std::size_t i = 0; i < kNumericCount; ++i) row[i] /= n;
  row[job_width() - 2] = n;
  row[job_width() - 1] = static_cast<double>(job.stage_count);
  return row;
}

void Featurizer::fit(const std::vector<Job>& jobs) {
  if (jobs.empty()) fail(ErrorKind::EmptyInput, "cannot fit featurizer on an empty workload");
  std::vector<std::vector<double>> op_rows;
  std::vector<std::vector<double>> job_rows;
  job_rows.reserve(jobs.size());
  for (const Job& job : jobs) {
    for (const Operator& op : job.operators) op_rows.push_back(raw_operator_row(op));
    job_rows.push_back(raw_job_vector(job));
  }
  op_stats_.fit(op_rows);
  job_stats_.fit(job_rows);
}

std::vector<double> Featurizer::featurize_operator(const Operator& op) const {
  if (!op_stats_.fitted()) fail(ErrorKind::ConfigError, "featurizer statistics not fitted");
  std::vector<double> numeric = raw_operator_row(op);
  op_stats_.apply(numeric);
  std::vector<double> row(operator_width(), 0.0);
  std::copy(numeric.begin(), numeric.end(), row.begin());
  const std::size_t op_slot = op.physical_op < ops_.size() ? op.physical_op : ops_.other_index();
  row[kNumericCount + op_slot] = 1.0;
  const std::size_t part_slot =
      op.partition_kind < parts_.size() ? op.partition_kind : parts_.other_index();
  row[kNumericCount + ops_.size() + part_slot] = 1.0;
  return row;
}

std::vector<double> Featurizer::job_vector(const Job& job) const {
  if (!job_stats_.fitted()) fail(ErrorKind::ConfigError, "featurizer statistics not fitted");
  std::vector<double> row = raw_job_vector(job);
  job_stats_.apply(row);
  return row;
}

Matrix Featurizer::operator_matrix(const Job& job) const {
  if (job.operators.empty()) fail(ErrorKind::EmptyJob, "job has no operators");
  Matrix m(job.operators.size(), operator_width());
  for (std::size_t r = 0; r < job.operators.size(); ++r) {
    const auto row = featurize_operator(job.operators[r]);
    std::copy(row.begin(), row.end(), m.row(r));
  }
  return m;
}

void Featurizer::set_stats(FeatureStats op_stats, FeatureStats job_stats) {
  op_stats_ = std::move(op_stats);
  job_stats_ = std::move(job_stats);
}

Matrix adjacency(const Job& job) {
  const std::size_t n = job.operators.size();
  Matrix m(n, n);
  auto index_of = [&](int id) -> std::size_t {
    for (std::size_t i = 0; i < n; ++i)
      if (job.operators[i].id == id) return i;
    fail(ErrorKind::InvalidDag, "edge references unknown operator id " + std::to_string(id));
  };
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& [parent, child] : job.edges) {
    const std::size_t p = index_of(parent);
    const std::size_t c = index_of(child);
    if (p == c) fail(ErrorKind::InvalidDag, "self edge on operator " + std::to_string(parent));
    if (m.at(p, c) == 0.0) {
      m.at(p, c) = 1.0;
      ++indegree[c];
    }
  }
  // Kahn's algorithm; anything left over sits on a cycle.
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) queue.push_back(i);
  std::size_t seen = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.back();
    queue.pop_back();
    ++seen;
    for (std::size_t v = 0; v < n; ++v) {
      if (m.at(u, v) != 0.0 && --indegree[v] == 0) queue.push_back(v);
    }
  }
  if (seen != n) fail(ErrorKind::InvalidDag, "operator graph contains a cycle");
  return m;
}

}  // namespace tasq

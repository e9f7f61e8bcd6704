#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tasq/skyline.hpp"

namespace tasq {

// One node of the query plan DAG with its compile-time metrics. physical_op
// and partition_kind are indexes into the fixed vocabularies owned by the
// features module (the last slot of each vocabulary is the Other bucket).
struct Operator {
  int id = 0;
  std::uint16_t physical_op = 0;
  double estimated_cardinality = 0.0;
  double input_cardinality = 0.0;
  double input_children_cardinality = 0.0;
  double average_row_length = 0.0;
  double estimated_cost = 0.0;
  double estimated_exclusive_cost = 0.0;
  double estimated_total_cost = 0.0;
  std::uint32_t partition_count = 0;
  std::uint32_t partitioning_column_count = 0;
  std::uint32_t sort_column_count = 0;
  std::uint16_t partition_kind = 0;

  bool operator==(const Operator&) const = default;
};

struct Task {
  Tokens token_demand = 1;
  std::uint32_t duration = 1;  // seconds
  std::uint32_t stage = 0;

  bool operator==(const Task&) const = default;
};

struct Job {
  std::string id;
  std::string template_id;
  std::vector<Operator> operators;
  std::vector<std::pair<int, int>> edges;  // (parent_id, child_id)
  std::uint32_t stage_count = 0;
  std::vector<Task> tasks;
  Tokens observed_allocation = 1;
  Skyline observed_skyline{std::vector<Tokens>{0}};

  Tokens max_task_demand() const;
  bool operator==(const Job&) const = default;
};

struct GeneratorConfig {
  std::uint32_t n_jobs = 1000;
  std::uint32_t n_templates = 50;
  double peaky_fraction = 0.35;
  double over_allocated_fraction = 0.30;
  double runtime_log_mean = 5.2;  // log seconds at the job's natural width
  double runtime_log_sigma = 0.9;
  double serial_fraction_min = 0.05;  // serial share of the time budget
  double serial_fraction_max = 0.80;
  std::uint32_t max_fanout = 48;
  std::uint32_t max_task_demand = 3;

  void validate() const;
  static GeneratorConfig from_json_text(const std::string& text);
  static GeneratorConfig from_file(const std::string& path);  // JSON or key=value
  std::string to_json_text() const;

  bool operator==(const GeneratorConfig&) const = default;
};

struct Workload {
  std::vector<Job> jobs;
  std::uint64_t seed = 0;
  GeneratorConfig config;

  bool operator==(const Workload&) const = default;
};

// Deterministic synthetic workload: DAG jobs whose task structure plants a
// learnable relationship between compile-time features and the scalability
// of the job (serial chains vs parallel fan-outs).
Workload generate(const GeneratorConfig& config, std::uint64_t seed);

// Shape classifier used by the generator: peak over mean usage at or above
// this ratio counts as peaky.
inline constexpr double kPeakyRatio = 3.0;
bool is_peaky(const Skyline& skyline);

// Ground-truth executor: greedy list scheduling with a barrier between
// stages. Within a stage, tasks start strictly in FIFO order (by task index)
// as soon as the queue head fits under the cap. The cap must cover the
// largest single task demand.
Skyline execute_at_cap(const Job& job, Tokens cap);

// JSONL persistence, one job per line. A callback receives non-fatal
// warnings (e.g. unknown operator names mapped to the Other bucket).
using WarningSink = std::function<void(const std::string&)>;

void save(const Workload& workload, const std::string& path);
Workload load(const std::string& path, const WarningSink& warn = nullptr);

std::string job_to_json_line(const Job& job);
Job job_from_json_line(const std::string& line, std::size_t line_no,
                       const WarningSink& warn = nullptr);

}  // namespace tasq

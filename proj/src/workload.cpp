#include "tasq/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "tasq/error.hpp"
#include "tasq/features.hpp"
#include "tasq/rng.hpp"

using nlohmann::json;

namespace tasq {

Tokens Job::max_task_demand() const {
  Tokens m = 0;
  for (const Task& t : tasks) m = std::max(m, t.token_demand);
  return m;
}

void GeneratorConfig::validate() const {
  if (n_jobs < 1 || n_templates < 1) fail(ErrorKind::ConfigError, "sizes must be >= 1");
  if (peaky_fraction < 0.0 || peaky_fraction > 1.0)
    fail(ErrorKind::ConfigError, "peaky_fraction must be in [0,1]");
  if (over_allocated_fraction < 0.0 || over_allocated_fraction > 1.0)
    fail(ErrorKind::ConfigError, "over_allocated_fraction must be in [0,1]");
  if (!(serial_fraction_min >= 0.0 && serial_fraction_max < 1.0 &&
        serial_fraction_min <= serial_fraction_max))
    fail(ErrorKind::ConfigError, "serial fraction bounds must satisfy 0 <= min <= max < 1");
  if (max_fanout < 16) fail(ErrorKind::ConfigError, "max_fanout must be >= 16");
  if (max_task_demand < 1) fail(ErrorKind::ConfigError, "max_task_demand must be >= 1");
  if (!(runtime_log_sigma >= 0.0) || !std::isfinite(runtime_log_mean))
    fail(ErrorKind::ConfigError, "bad runtime distribution parameters");
}

bool is_peaky(const Skyline& skyline) {
  const TokenSeconds a = skyline.area();
  if (a == 0) return false;
  const double mean = static_cast<double>(a) / static_cast<double>(skyline.runtime_seconds());
  return static_cast<double>(skyline.peak()) / mean >= kPeakyRatio;
}

Skyline execute_at_cap(const Job& job, Tokens cap) {
  if (cap < 1) fail(ErrorKind::InfeasibleCap, "cap must be >= 1");
  const Tokens needed = job.max_task_demand();
  if (cap < needed)
    fail(ErrorKind::InfeasibleCap, "cap " + std::to_string(cap) + " below largest task demand " +
                                       std::to_string(needed));

  std::vector<std::vector<const Task*>> stages(job.stage_count);
  for (const Task& t : job.tasks) {
    if (t.stage >= job.stage_count)
      fail(ErrorKind::ConfigError, "task stage " + std::to_string(t.stage) + " out of range");
    stages[t.stage].push_back(&t);
  }

  std::vector<Tokens> usage;
  auto paint = [&usage](std::uint64_t start, std::uint32_t duration, Tokens demand) {
    if (usage.size() < start + duration) usage.resize(start + duration, 0);
    for (std::uint64_t s = start; s < start + duration; ++s) usage[s] += demand;
  };

  // end-time heap of running tasks within the current stage
  using Running = std::pair<std::uint64_t, Tokens>;
  std::uint64_t barrier = 0;
  for (const auto& queue : stages) {
    std::priority_queue<Running, std::vector<Running>, std::greater<>> running;
    std::uint64_t now = barrier;
    std::uint64_t stage_end = barrier;
    std::uint64_t used = 0;
    std::size_t qi = 0;
    while (qi < queue.size()) {
      while (!running.empty() && running.top().first <= now) {
        used -= running.top().second;
        running.pop();
      }
      const Task& t = *queue[qi];
      if (used + t.token_demand <= cap) {
        paint(now, t.duration, t.token_demand);
        running.push({now + t.duration, t.token_demand});
        stage_end = std::max(stage_end, now + t.duration);
        used += t.token_demand;
        ++qi;
      } else {
        now = running.top().first;
      }
    }
    barrier = stage_end;
  }
  if (usage.size() < barrier) usage.resize(barrier, 0);
  if (usage.empty()) usage.push_back(0);
  return Skyline(std::move(usage));
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

namespace {

struct StagePlan {
  bool parallel = false;
  std::uint32_t fanout = 1;       // tasks in the stage
  Tokens demand = 1;              // tokens per task
  double work_weight = 1.0;       // share of the serial/parallel work pool
  std::uint32_t n_operators = 1;
  std::vector<std::uint16_t> op_kinds;
  std::vector<std::uint16_t> part_kinds;
};

struct TemplatePlan {
  bool peaky = false;
  double serial_fraction = 0.3;
  std::vector<StagePlan> stages;
};

// Operator kinds that plausibly sit on scan/join fan-out stages vs. on
// order-sensitive serial stages. Indexes into Vocabulary::physical_ops().
constexpr std::uint16_t kParallelOps[] = {0, 2, 3, 4, 6, 11, 13, 18, 21, 30};
constexpr std::uint16_t kSerialOps[] = {7, 12, 15, 16, 26, 27, 33, 34};

TemplatePlan draw_template(Rng rng, const GeneratorConfig& cfg) {
  TemplatePlan plan;
  plan.peaky = rng.bernoulli(cfg.peaky_fraction);
  // serial_fraction is the serial share of the job's time budget at its
  // natural width. Peaky jobs are dominated by a low tail in time; the hard
  // peak/mean guarantee is enforced per job in realize_job.
  if (plan.peaky) {
    plan.serial_fraction = rng.uniform(0.80, 0.92);
  } else {
    plan.serial_fraction = rng.uniform(cfg.serial_fraction_min, cfg.serial_fraction_max);
  }
  const int n_serial = static_cast<int>(rng.uniform_int(2, 4));
  const int n_parallel = plan.peaky ? 1 : static_cast<int>(rng.uniform_int(2, 4));
  std::vector<StagePlan> stages;
  for (int i = 0; i < n_serial; ++i) {
    StagePlan s;
    s.parallel = false;
    s.fanout = 1;
    s.demand = plan.peaky ? 1
                          : static_cast<Tokens>(rng.uniform_int(
                                1, std::min<std::int64_t>(2, cfg.max_task_demand)));
    s.work_weight = rng.uniform(0.5, 1.5);
    stages.push_back(s);
  }
  for (int i = 0; i < n_parallel; ++i) {
    StagePlan s;
    s.parallel = true;
    if (plan.peaky) {
      s.fanout = static_cast<std::uint32_t>(
          rng.uniform_int(std::max<std::int64_t>(16, cfg.max_fanout / 2), cfg.max_fanout));
      s.demand = 1;
    } else {
      s.fanout = static_cast<std::uint32_t>(
          rng.uniform_int(4, std::max<std::int64_t>(6, cfg.max_fanout / 3)));
      s.demand = static_cast<Tokens>(rng.uniform_int(1, cfg.max_task_demand));
    }
    s.work_weight = rng.uniform(0.5, 1.5);
    stages.push_back(s);
  }
  rng.shuffle(stages);
  for (StagePlan& s : stages) {
    s.n_operators = static_cast<std::uint32_t>(rng.uniform_int(1, 3));
    for (std::uint32_t k = 0; k < s.n_operators; ++k) {
      if (s.parallel) {
        s.op_kinds.push_back(
            kParallelOps[rng.uniform_int(0, static_cast<std::int64_t>(std::size(kParallelOps)) - 1)]);
        const double u = rng.uniform();
        s.part_kinds.push_back(u < 0.6 ? 0 : (u < 0.85 ? 2 : 1));  // Hash/RoundRobin/Range
      } else {
        s.op_kinds.push_back(
            kSerialOps[rng.uniform_int(0, static_cast<std::int64_t>(std::size(kSerialOps)) - 1)]);
        s.part_kinds.push_back(rng.bernoulli(0.5) ? 1 : 3);  // Range/Broadcast
      }
    }
  }
  plan.stages = std::move(stages);
  return plan;
}

Job realize_job(Rng rng, const TemplatePlan& plan, const GeneratorConfig& cfg,
                std::uint32_t job_index, std::uint32_t template_index) {
  Job job;
  {
    char buf[32];
    std::snprintf(buf, sizeof buf, "job-%06u", job_index);
    job.id = buf;
    std::snprintf(buf, sizeof buf, "tmpl-%03u", template_index);
    job.template_id = buf;
  }
  job.stage_count = static_cast<std::uint32_t>(plan.stages.size());

  // Time budget at the job's natural width; caps below the peak stretch the
  // parallel stages, which is exactly the scalability signal the models are
  // meant to pick up.
  double time_budget = rng.lognormal(cfg.runtime_log_mean, cfg.runtime_log_sigma);
  time_budget = std::clamp(time_budget, 40.0, 20000.0);

  double serial_weight_total = 0.0;
  double parallel_weight_total = 0.0;
  for (const StagePlan& s : plan.stages)
    (s.parallel ? parallel_weight_total : serial_weight_total) += s.work_weight;

  TokenSeconds serial_time = 0;
  TokenSeconds parallel_area = 0;
  Tokens peak_demand = 1;
  std::uint32_t last_serial_stage = 0;
  Tokens last_serial_demand = 1;
  for (std::uint32_t si = 0; si < plan.stages.size(); ++si) {
    const StagePlan& s = plan.stages[si];
    const double pool = s.parallel ? (1.0 - plan.serial_fraction) * time_budget
                                   : plan.serial_fraction * time_budget;
    const double total = s.parallel ? parallel_weight_total : serial_weight_total;
    const double share = total > 0.0 ? pool * s.work_weight / total : 0.0;
    const auto duration = static_cast<std::uint32_t>(std::max(1.0, std::round(share)));
    if (s.parallel) {
      for (std::uint32_t k = 0; k < s.fanout; ++k)
        job.tasks.push_back({s.demand, duration, si});
      parallel_area += static_cast<TokenSeconds>(s.fanout) * s.demand * duration;
      peak_demand = std::max(peak_demand, static_cast<Tokens>(s.fanout * s.demand));
    } else {
      job.tasks.push_back({s.demand, duration, si});
      serial_time += duration;
      peak_demand = std::max(peak_demand, s.demand);
      last_serial_stage = si;
      last_serial_demand = s.demand;
    }
  }

  const bool over = rng.bernoulli(cfg.over_allocated_fraction);
  double alloc = over ? std::round(peak_demand * rng.uniform(1.1, 1.5))
                      : std::round(peak_demand * rng.uniform(0.45, 0.95));
  alloc = std::max(alloc, static_cast<double>(job.max_task_demand()));
  job.observed_allocation = static_cast<Tokens>(std::max(1.0, alloc));

  // Peaky guarantee: with skyline peak c, serial demand ds and parallel area
  // Ap, the peak/mean ratio is (c*Ts + Ap) / (ds*Ts + Ap); extend the tail
  // until it clears the classifier threshold with margin.
  if (plan.peaky) {
    const double ratio_target = kPeakyRatio * 1.15;
    const double c = std::min<double>(job.observed_allocation, peak_demand);
    const double ds = static_cast<double>(last_serial_demand);
    if (c > ratio_target * ds) {
      const double needed = (ratio_target - 1.0) * static_cast<double>(parallel_area) /
                            (c - ratio_target * ds);
      if (static_cast<double>(serial_time) < needed) {
        const auto extra = static_cast<std::uint32_t>(
            std::ceil(needed - static_cast<double>(serial_time)));
        for (auto& t : job.tasks) {
          if (t.stage == last_serial_stage) {
            t.duration += extra;
            break;
          }
        }
      }
    }
  }

  // Operators carry the compile-time signal: costs and cardinalities track
  // the stage work (token-seconds), partition counts track the fan-out,
  // sort columns mark the serial stages.
  int next_id = 0;
  std::vector<double> stage_area(plan.stages.size(), 0.0);
  for (const Task& t : job.tasks)
    stage_area[t.stage] += static_cast<double>(t.token_demand) * t.duration;
  for (std::uint32_t si = 0; si < plan.stages.size(); ++si) {
    const StagePlan& s = plan.stages[si];
    const double share = stage_area[si];
    for (std::uint32_t k = 0; k < s.n_operators; ++k) {
      Operator op;
      op.id = next_id++;
      op.physical_op = s.op_kinds[k];
      op.partition_kind = s.part_kinds[k];
      op.estimated_total_cost = share * rng.uniform(0.9, 1.1);
      op.estimated_cost = op.estimated_total_cost * rng.uniform(0.5, 0.9);
      op.estimated_exclusive_cost = op.estimated_total_cost * rng.uniform(0.2, 0.6);
      op.estimated_cardinality = share * rng.uniform(20.0, 60.0);
      op.input_cardinality = op.estimated_cardinality * rng.uniform(0.5, 2.0);
      op.input_children_cardinality = op.input_cardinality * rng.uniform(0.3, 1.5);
      op.average_row_length = rng.uniform(8.0, 512.0);
      op.partition_count = s.parallel ? s.fanout : 1;
      op.partitioning_column_count =
          s.parallel ? static_cast<std::uint32_t>(rng.uniform_int(1, 3)) : 0;
      op.sort_column_count = s.parallel ? 0 : static_cast<std::uint32_t>(rng.uniform_int(1, 4));
      job.operators.push_back(op);
    }
  }
  // Edges: every operator of a stage reads from 1-2 operators of the
  // previous stage, which keeps the graph acyclic by construction.
  std::vector<std::vector<int>> by_stage(plan.stages.size());
  {
    std::size_t op_cursor = 0;
    for (std::uint32_t si = 0; si < plan.stages.size(); ++si)
      for (std::uint32_t k = 0; k < plan.stages[si].n_operators; ++k)
        by_stage[si].push_back(job.operators[op_cursor++].id);
  }
  for (std::uint32_t si = 1; si < plan.stages.size(); ++si) {
    for (const int child : by_stage[si]) {
      const auto& parents = by_stage[si - 1];
      const int n_parents = static_cast<int>(
          rng.uniform_int(1, std::min<std::int64_t>(2, static_cast<std::int64_t>(parents.size()))));
      std::vector<int> chosen;
      for (int p = 0; p < n_parents; ++p) {
        const int parent = parents[rng.uniform_int(0, static_cast<std::int64_t>(parents.size()) - 1)];
        if (std::find(chosen.begin(), chosen.end(), parent) == chosen.end()) {
          chosen.push_back(parent);
          job.edges.emplace_back(parent, child);
        }
      }
    }
  }

  job.observed_skyline = execute_at_cap(job, job.observed_allocation);
  return job;
}

}  // namespace

Workload generate(const GeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  Workload workload;
  workload.seed = seed;
  workload.config = config;
  const Rng root(seed);
  std::vector<TemplatePlan> templates;
  templates.reserve(config.n_templates);
  for (std::uint32_t t = 0; t < config.n_templates; ++t)
    templates.push_back(draw_template(root.fork(t), config));
  workload.jobs.reserve(config.n_jobs);
  for (std::uint32_t j = 0; j < config.n_jobs; ++j) {
    Rng rng = root.fork(0x100000000ull + j);
    // quadratic skew: low-index templates recur more often
    const double u = rng.uniform();
    const auto template_index =
        std::min<std::uint32_t>(static_cast<std::uint32_t>(u * u * config.n_templates),
                                config.n_templates - 1);
    workload.jobs.push_back(realize_job(rng, templates[template_index], config, j, template_index));
  }
  return workload;
}

// ---------------------------------------------------------------------------
// JSONL persistence
// ---------------------------------------------------------------------------

namespace {

json operator_to_json(const Operator& op) {
  const auto& ops = Vocabulary::physical_ops();
  const auto& parts = Vocabulary::partition_kinds();
  return json{{"id", op.id},
              {"physical_op", ops.name(std::min<std::size_t>(op.physical_op, ops.other_index()))},
              {"estimated_cardinality", op.estimated_cardinality},
              {"input_cardinality", op.input_cardinality},
              {"input_children_cardinality", op.input_children_cardinality},
              {"average_row_length", op.average_row_length},
              {"estimated_cost", op.estimated_cost},
              {"estimated_exclusive_cost", op.estimated_exclusive_cost},
              {"estimated_total_cost", op.estimated_total_cost},
              {"partition_count", op.partition_count},
              {"partitioning_column_count", op.partitioning_column_count},
              {"sort_column_count", op.sort_column_count},
              {"partition_kind",
               parts.name(std::min<std::size_t>(op.partition_kind, parts.other_index()))}};
}

Operator operator_from_json(const json& j, std::size_t line_no, const WarningSink& warn) {
  Operator op;
  op.id = j.at("id").get<int>();
  const auto op_name = j.at("physical_op").get<std::string>();
  bool known = false;
  op.physical_op = static_cast<std::uint16_t>(Vocabulary::physical_ops().index_of(op_name, &known));
  if (!known && warn)
    warn("line " + std::to_string(line_no) + ": unknown physical_op '" + op_name +
         "' mapped to Other");
  const auto part_name = j.at("partition_kind").get<std::string>();
  op.partition_kind =
      static_cast<std::uint16_t>(Vocabulary::partition_kinds().index_of(part_name, &known));
  if (!known && warn)
    warn("line " + std::to_string(line_no) + ": unknown partition_kind '" + part_name +
         "' mapped to Other");
  op.estimated_cardinality = j.at("estimated_cardinality").get<double>();
  op.input_cardinality = j.at("input_cardinality").get<double>();
  op.input_children_cardinality = j.at("input_children_cardinality").get<double>();
  op.average_row_length = j.at("average_row_length").get<double>();
  op.estimated_cost = j.at("estimated_cost").get<double>();
  op.estimated_exclusive_cost = j.at("estimated_exclusive_cost").get<double>();
  op.estimated_total_cost = j.at("estimated_total_cost").get<double>();
  op.partition_count = j.at("partition_count").get<std::uint32_t>();
  op.partitioning_column_count = j.at("partitioning_column_count").get<std::uint32_t>();
  op.sort_column_count = j.at("sort_column_count").get<std::uint32_t>();
  return op;
}

}  // namespace

std::string job_to_json_line(const Job& job) {
  json j;
  j["id"] = job.id;
  j["template_id"] = job.template_id;
  j["stage_count"] = job.stage_count;
  j["observed_allocation"] = job.observed_allocation;
  json ops = json::array();
  for (const Operator& op : job.operators) ops.push_back(operator_to_json(op));
  j["operators"] = std::move(ops);
  json edges = json::array();
  for (const auto& [p, c] : job.edges) edges.push_back(json::array({p, c}));
  j["edges"] = std::move(edges);
  json tasks = json::array();
  for (const Task& t : job.tasks)
    tasks.push_back(json::array({t.token_demand, t.duration, t.stage}));
  j["tasks"] = std::move(tasks);
  j["observed_skyline"] = std::vector<Tokens>(job.observed_skyline.usage().begin(),
                                              job.observed_skyline.usage().end());
  return j.dump();
}

Job job_from_json_line(const std::string& line, std::size_t line_no, const WarningSink& warn) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
  }
  try {
    Job job;
    job.id = j.at("id").get<std::string>();
    job.template_id = j.value("template_id", std::string{});
    job.stage_count = j.at("stage_count").get<std::uint32_t>();
    job.observed_allocation = j.at("observed_allocation").get<Tokens>();
    if (job.observed_allocation < 1)
      fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": observed_allocation < 1");
    for (const json& jo : j.at("operators")) job.operators.push_back(operator_from_json(jo, line_no, warn));
    for (const json& je : j.at("edges"))
      job.edges.emplace_back(je.at(0).get<int>(), je.at(1).get<int>());
    for (const json& jt : j.at("tasks"))
      job.tasks.push_back({jt.at(0).get<Tokens>(), jt.at(1).get<std::uint32_t>(),
                           jt.at(2).get<std::uint32_t>()});
    job.observed_skyline = Skyline(j.at("observed_skyline").get<std::vector<Tokens>>());
    if (job.observed_skyline.peak() > job.observed_allocation)
      fail(ErrorKind::ParseError,
           "line " + std::to_string(line_no) + ": skyline peak exceeds observed allocation");
    return job;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
  }
}

void save(const Workload& workload, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path + " for writing");
  json meta;
  meta["seed"] = workload.seed;
  meta["generator_config"] = json::parse(workload.config.to_json_text());
  out << meta.dump() << '\n';
  for (const Job& job : workload.jobs) out << job_to_json_line(job) << '\n';
}

Workload load(const std::string& path, const WarningSink& warn) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  Workload workload;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (first) {
      first = false;
      // optional meta line (no "id" field)
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, "line 1: " + std::string(e.what()));
      }
      if (j.is_object() && !j.contains("id")) {
        workload.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("generator_config"))
          workload.config = GeneratorConfig::from_json_text(j.at("generator_config").dump());
        continue;
      }
    }
    workload.jobs.push_back(job_from_json_line(line, line_no, warn));
  }
  std::unordered_set<std::string> ids;
  for (const Job& job : workload.jobs)
    if (!ids.insert(job.id).second) fail(ErrorKind::ParseError, "duplicate job id " + job.id);
  return workload;
}

std::string GeneratorConfig::to_json_text() const {
  json j;
  j["n_jobs"] = n_jobs;
  j["n_templates"] = n_templates;
  j["peaky_fraction"] = peaky_fraction;
  j["over_allocated_fraction"] = over_allocated_fraction;
  j["runtime_log_mean"] = runtime_log_mean;
  j["runtime_log_sigma"] = runtime_log_sigma;
  j["serial_fraction_min"] = serial_fraction_min;
  j["serial_fraction_max"] = serial_fraction_max;
  j["max_fanout"] = max_fanout;
  j["max_task_demand"] = max_task_demand;
  return j.dump();
}

GeneratorConfig GeneratorConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("generator config: ") + e.what());
  }
  GeneratorConfig cfg;
  try {
    cfg.n_jobs = j.value("n_jobs", cfg.n_jobs);
    cfg.n_templates = j.value("n_templates", cfg.n_templates);
    cfg.peaky_fraction = j.value("peaky_fraction", cfg.peaky_fraction);
    cfg.over_allocated_fraction = j.value("over_allocated_fraction", cfg.over_allocated_fraction);
    cfg.runtime_log_mean = j.value("runtime_log_mean", cfg.runtime_log_mean);
    cfg.runtime_log_sigma = j.value("runtime_log_sigma", cfg.runtime_log_sigma);
    cfg.serial_fraction_min = j.value("serial_fraction_min", cfg.serial_fraction_min);
    cfg.serial_fraction_max = j.value("serial_fraction_max", cfg.serial_fraction_max);
    cfg.max_fanout = j.value("max_fanout", cfg.max_fanout);
    cfg.max_task_demand = j.value("max_task_demand", cfg.max_task_demand);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("generator config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

GeneratorConfig GeneratorConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return from_json_text(text);
  // flat key=value lines
  json j = json::object();
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      j[key] = std::stod(value);
    } catch (const std::exception&) {
      fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": bad number '" + value + "'");
    }
  }
  return from_json_text(j.dump());
}

}  // namespace tasq

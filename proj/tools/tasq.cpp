// tasq: train, apply and analyze token-allocation performance curves for
// DAG-structured jobs.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include "tasq/artifact.hpp"
#include "tasq/augment.hpp"
#include "tasq/error.hpp"
#include "tasq/eval.hpp"
#include "tasq/features.hpp"
#include "tasq/pcc.hpp"
#include "tasq/selection.hpp"
#include "tasq/skyline.hpp"
#include "tasq/svg.hpp"
#include "tasq/workload.hpp"

using nlohmann::json;

namespace {

int exit_code_for(tasq::ErrorKind kind) {
  using tasq::ErrorKind;
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidSkyline:
      return 3;
    case ErrorKind::VersionMismatch:
      return 4;
    case ErrorKind::ConfigError:
      return 5;
    case ErrorKind::InfeasibleCap:
    case ErrorKind::InfeasibleSelection:
      return 6;
    case ErrorKind::DomainError:
    case ErrorKind::InvalidThreshold:
    case ErrorKind::InvalidCurve:
    case ErrorKind::InvalidDag:
    case ErrorKind::InsufficientData:
    case ErrorKind::InsufficientGrid:
    case ErrorKind::EmptyInput:
    case ErrorKind::EmptyJob:
    case ErrorKind::ShapeError:
      return 7;
    case ErrorKind::IoError:
      return 8;
    case ErrorKind::TrainingDiverged:
      return 9;
  }
  return 1;
}

// Shortest round-trip decimal form, identical to the JSON files.
std::string fmt(double value) { return json(value).dump(); }

void warn_to_stderr(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) tasq::fail(tasq::ErrorKind::IoError, "cannot open " + path + " for writing");
  return out;
}

std::vector<tasq::AllocationRuntime> read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) tasq::fail(tasq::ErrorKind::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) tasq::fail(tasq::ErrorKind::ParseError, "line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "allocation,runtime")
    tasq::fail(tasq::ErrorKind::ParseError, "line 1: expected header 'allocation,runtime'");
  std::vector<tasq::AllocationRuntime> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      tasq::fail(tasq::ErrorKind::ParseError,
                 "line " + std::to_string(line_no) + ": expected 'allocation,runtime'");
    try {
      points.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::exception&) {
      tasq::fail(tasq::ErrorKind::ParseError, "line " + std::to_string(line_no) + ": not a number");
    }
  }
  return points;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

struct GenWorkloadArgs {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  std::uint32_t n_jobs_override = 0;
};

int run_gen_workload(const GenWorkloadArgs& args) {
  tasq::GeneratorConfig config;
  if (!args.config_path.empty()) config = tasq::GeneratorConfig::from_file(args.config_path);
  if (args.n_jobs_override > 0) config.n_jobs = args.n_jobs_override;
  const tasq::Workload workload = tasq::generate(config, args.seed);
  tasq::save(workload, args.out);
  std::cout << "wrote " << workload.jobs.size() << " jobs to " << args.out << '\n';
  return 0;
}

struct SimulateArgs {
  std::string in;
  std::string out;
  tasq::Tokens tokens = 1;
};

int run_simulate(const SimulateArgs& args) {
  const tasq::Skyline input = tasq::Skyline::from_csv_file(args.in);
  const tasq::Skyline result = tasq::simulate(input, args.tokens);
  result.to_csv_file(args.out);
  std::cout << "runtime " << input.runtime_seconds() << "s -> " << result.runtime_seconds()
            << "s, area " << result.area() << '\n';
  return 0;
}

struct AugmentArgs {
  std::string workload;
  std::string out;
  std::string targets;
};

int run_augment(const AugmentArgs& args) {
  const tasq::Workload workload = tasq::load(args.workload, warn_to_stderr);
  auto out = open_out(args.out);
  out << "job_id,allocation,runtime\n";
  std::ofstream targets;
  if (!args.targets.empty()) {
    targets = open_out(args.targets);
    targets << "job_id,a,b\n";
  }
  for (const tasq::Job& job : workload.jobs) {
    const auto points = tasq::augment(job);
    for (const auto& p : points)
      out << job.id << ',' << fmt(p.allocation) << ',' << fmt(p.runtime) << '\n';
    if (targets.is_open()) {
      const tasq::PccParams params = tasq::fit_power_law(points).params;
      targets << job.id << ',' << fmt(params.exponent) << ',' << fmt(params.scale) << '\n';
    }
  }
  return 0;
}

struct FitPccArgs {
  std::string points;
  std::string out;
  std::string svg;
  std::string curve_csv;
};

int run_fit_pcc(const FitPccArgs& args) {
  const auto points = read_points_csv(args.points);
  const tasq::PccFit fit = tasq::fit_power_law(points);
  json j;
  j["a"] = fit.params.exponent;
  j["b"] = fit.params.scale;
  j["n_points"] = fit.n_points;
  j["log_rmse"] = fit.log_rmse;
  auto out = open_out(args.out);
  out << j.dump(2) << '\n';

  tasq::Tokens lo = 1;
  tasq::Tokens hi = 1;
  for (const auto& p : points) {
    lo = std::min(lo, static_cast<tasq::Tokens>(p.allocation));
    hi = std::max(hi, static_cast<tasq::Tokens>(p.allocation));
  }
  if (!args.curve_csv.empty()) {
    auto curve = open_out(args.curve_csv);
    tasq::write_curve_csv(curve, fit.params, std::max<tasq::Tokens>(1, lo), hi, 1);
  }
  if (!args.svg.empty()) {
    std::vector<tasq::SvgPoint> chart;
    for (tasq::Tokens a = std::max<tasq::Tokens>(1, lo); a <= hi; ++a)
      chart.push_back({static_cast<double>(a), tasq::predict_runtime(fit.params, a)});
    tasq::write_svg_file(args.svg, tasq::svg_line_chart(chart, "performance characteristic curve",
                                                        "allocation (tokens)", "runtime (s)"));
  }
  return 0;
}

struct SelectArgs {
  std::string workload;
  std::string config_path;
  std::string out;
  std::string report;
  std::int64_t seed_override = -1;
};

int run_select(const SelectArgs& args) {
  const tasq::Workload workload = tasq::load(args.workload, warn_to_stderr);
  tasq::SelectionConfig config;
  if (!args.config_path.empty()) config = tasq::SelectionConfig::from_file(args.config_path);
  if (args.seed_override >= 0) config.seed = static_cast<std::uint64_t>(args.seed_override);
  const auto pool = tasq::filter_pool(workload.jobs, config);
  const tasq::SelectionResult result = tasq::select_subset(workload.jobs, pool, config);
  for (const std::string& w : result.report.warnings) warn_to_stderr(w);

  tasq::Workload subset;
  subset.seed = workload.seed;
  subset.config = workload.config;
  for (const std::size_t idx : result.subset_indexes) subset.jobs.push_back(workload.jobs[idx]);
  tasq::save(subset, args.out);
  if (!args.report.empty()) {
    auto report = open_out(args.report);
    report << result.report.to_json_text() << '\n';
  }
  std::cout << "selected " << subset.jobs.size() << " of " << pool.size() << " pooled jobs; KS "
            << fmt(result.report.ks_before_max) << " -> " << fmt(result.report.ks_after_max)
            << '\n';
  return 0;
}

struct TrainArgs {
  std::string data;
  std::string model = "mlp";
  std::string loss = "lf2";
  std::string config_path;
  std::string gbrt_path;
  std::string out;
  std::int64_t seed_override = -1;
};

int run_train(const TrainArgs& args) {
  const tasq::Workload workload = tasq::load(args.data, warn_to_stderr);
  tasq::TrainingConfig config;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) tasq::fail(tasq::ErrorKind::IoError, "cannot open " + args.config_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    config = tasq::TrainingConfig::from_json_text(buffer.str());
  }
  config.loss_kind = tasq::loss_kind_from_string(args.loss);
  if (args.seed_override >= 0) config.seed = static_cast<std::uint64_t>(args.seed_override);
  const tasq::ModelKind kind = tasq::model_kind_from_string(args.model);

  std::optional<tasq::ModelArtifact> distill;
  if (!args.gbrt_path.empty()) distill = tasq::ModelArtifact::load(args.gbrt_path);
  const tasq::ModelArtifact artifact =
      tasq::train_artifact(kind, workload.jobs, config, distill ? &*distill : nullptr);
  artifact.save(args.out);
  std::cout << "trained " << artifact.model_version << " on " << workload.jobs.size()
            << " jobs\n";
  return 0;
}

struct PredictArgs {
  std::string artifact;
  std::string jobs;
  std::string out;
};

int run_predict(const PredictArgs& args) {
  const tasq::ModelArtifact artifact = tasq::ModelArtifact::load(args.artifact);
  const tasq::Workload workload = tasq::load(args.jobs, warn_to_stderr);
  auto out = open_out(args.out);
  out << "job_id,a,b\n";
  for (const tasq::Job& job : workload.jobs) {
    const tasq::PccParams params = artifact.predict(job);
    out << job.id << ',' << fmt(params.exponent) << ',' << fmt(params.scale) << '\n';
  }
  return 0;
}

struct RecommendArgs {
  std::string artifact;
  std::string jobs;
  std::string out;
  double threshold = -1.0;
  double max_loss = -1.0;
  tasq::Tokens max_tokens = 100000;
};

int run_recommend(const RecommendArgs& args) {
  if ((args.threshold < 0.0) == (args.max_loss < 0.0))
    tasq::fail(tasq::ErrorKind::ConfigError, "pass exactly one of --threshold or --max-loss");
  const tasq::ModelArtifact artifact = tasq::ModelArtifact::load(args.artifact);
  const tasq::Workload workload = tasq::load(args.jobs, warn_to_stderr);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!args.out.empty()) {
    file = open_out(args.out);
    out = &file;
  }
  *out << "job_id,recommended_tokens\n";
  for (const tasq::Job& job : workload.jobs) {
    tasq::PccParams params = artifact.predict(job);
    // recommendation path clamps the slope to a valid curve
    params.exponent = std::min(params.exponent, 0.0);
    const tasq::Tokens tokens =
        args.threshold >= 0.0
            ? tasq::optimal_tokens(params, args.threshold, args.max_tokens)
            : tasq::min_tokens_within_loss(params, job.observed_allocation, args.max_loss);
    *out << job.id << ',' << tokens << '\n';
  }
  return 0;
}

struct EvaluateArgs {
  std::vector<std::string> artifacts;
  std::string truth;
  std::string out;
  std::string csv;
};

int run_evaluate(const EvaluateArgs& args) {
  const tasq::Workload workload = tasq::load(args.truth, warn_to_stderr);
  if (workload.jobs.empty()) tasq::fail(tasq::ErrorKind::EmptyInput, "no ground-truth jobs");

  std::vector<tasq::PccParams> truths;
  truths.reserve(workload.jobs.size());
  for (const tasq::Job& job : workload.jobs) truths.push_back(tasq::fit_targets(job));

  std::vector<tasq::EvalReport> reports;
  for (const std::string& path : args.artifacts) {
    const tasq::ModelArtifact artifact = tasq::ModelArtifact::load(path);
    if (artifact.kind == tasq::ModelKind::Gbrt) {
      // Two curve constructions share the same runtime point predictions.
      std::vector<double> runtime_errors;
      std::size_t ss_ok = 0;
      std::vector<tasq::PredictionRecord> pl_records;
      for (std::size_t i = 0; i < workload.jobs.size(); ++i) {
        const tasq::Job& job = workload.jobs[i];
        const auto grid = tasq::default_grid(job.observed_allocation);
        if (tasq::pattern_check(tasq::gbrt_curve_ss(artifact, job, grid))) ++ss_ok;
        const tasq::PccFit pl = tasq::gbrt_curve_pl(artifact, job, grid);
        tasq::PredictionRecord record;
        record.predicted = pl.params;
        record.truth = truths[i];
        record.observed_allocation = static_cast<double>(job.observed_allocation);
        record.observed_runtime = static_cast<double>(job.observed_skyline.runtime_seconds());
        record.pattern = tasq::pattern_check(pl.params);
        pl_records.push_back(record);
        const double direct = artifact.predict_runtime_at(job, job.observed_allocation);
        runtime_errors.push_back(std::abs(direct - record.observed_runtime) /
                                 record.observed_runtime);
      }
      std::sort(runtime_errors.begin(), runtime_errors.end());
      const std::size_t n = runtime_errors.size();
      const double median_runtime = n % 2 == 1
                                        ? runtime_errors[n / 2]
                                        : 0.5 * (runtime_errors[n / 2 - 1] + runtime_errors[n / 2]);
      tasq::EvalReport ss;
      ss.model = "gbrt_ss";
      ss.pattern_non_increasing = static_cast<double>(ss_ok) / static_cast<double>(n);
      ss.mae_curve_params = std::nan("");  // SS has no curve parameters
      ss.median_ae_runtime = median_runtime;
      ss.n_jobs = n;
      reports.push_back(ss);

      tasq::EvalReport pl = tasq::score(pl_records, artifact.scales);
      pl.model = "gbrt_pl";
      pl.median_ae_runtime = median_runtime;  // point prediction is the direct model output
      reports.push_back(pl);
    } else {
      std::vector<tasq::PredictionRecord> records;
      for (std::size_t i = 0; i < workload.jobs.size(); ++i) {
        const tasq::Job& job = workload.jobs[i];
        tasq::PredictionRecord record;
        record.predicted = artifact.predict(job);
        record.truth = truths[i];
        record.observed_allocation = static_cast<double>(job.observed_allocation);
        record.observed_runtime = static_cast<double>(job.observed_skyline.runtime_seconds());
        record.pattern = tasq::pattern_check(record.predicted);
        records.push_back(record);
      }
      tasq::EvalReport report = tasq::score(records, artifact.scales);
      report.model = tasq::to_string(artifact.kind);
      reports.push_back(report);
    }
  }

  auto out = open_out(args.out);
  out << tasq::eval_reports_to_json(reports) << '\n';
  if (!args.csv.empty()) {
    auto csv = open_out(args.csv);
    csv << tasq::eval_reports_to_csv(reports);
  }
  for (const tasq::EvalReport& r : reports) {
    std::cout << r.model << ": pattern " << fmt(r.pattern_non_increasing) << ", params MAE "
              << (std::isnan(r.mae_curve_params) ? std::string("NA") : fmt(r.mae_curve_params))
              << ", median runtime AE " << fmt(r.median_ae_runtime) << '\n';
  }
  return 0;
}

struct ValidateSimArgs {
  std::string workload;
  std::string out;
  std::string caps = "1.0,0.8,0.6,0.2";
  double tolerance = 0.30;
};

int run_validate_sim(const ValidateSimArgs& args) {
  const tasq::Workload workload = tasq::load(args.workload, warn_to_stderr);
  std::vector<double> fractions;
  {
    std::istringstream in(args.caps);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        fractions.push_back(std::stod(item));
      } catch (const std::exception&) {
        tasq::fail(tasq::ErrorKind::ConfigError, "bad cap fraction '" + item + "'");
      }
    }
  }
  const auto report = tasq::validate_simulator(
      workload.jobs, fractions,
      [](const tasq::Job& job, tasq::Tokens cap) { return tasq::execute_at_cap(job, cap); },
      args.tolerance);
  auto out = open_out(args.out);
  out << report.to_json_text() << '\n';
  std::cout << "MedianAPE " << fmt(report.median_ape) << " (non-anomalous "
            << fmt(report.median_ape_nonanomalous) << ", " << report.n_anomalous
            << " anomalous of " << report.n_jobs << " jobs)\n";
  return 0;
}

struct SavingsArgs {
  std::string artifact;
  std::string workload;
  std::string out;
  std::string svg;
  double loss = 0.05;
};

int run_savings_cdf(const SavingsArgs& args) {
  const tasq::ModelArtifact artifact = tasq::ModelArtifact::load(args.artifact);
  const tasq::Workload workload = tasq::load(args.workload, warn_to_stderr);
  std::vector<tasq::CurveAtReference> curves;
  for (const tasq::Job& job : workload.jobs) {
    tasq::PccParams params = artifact.predict(job);
    params.exponent = std::min(params.exponent, 0.0);
    curves.push_back({params, job.observed_allocation});
  }
  const auto cdf = tasq::savings_cdf(curves, args.loss);
  auto out = open_out(args.out);
  out << "reduction,cumulative_fraction\n";
  for (const auto& p : cdf) out << fmt(p.value) << ',' << fmt(p.cumulative) << '\n';
  if (!args.svg.empty()) {
    std::vector<tasq::SvgPoint> chart;
    for (const auto& p : cdf) chart.push_back({p.value, p.cumulative});
    tasq::write_svg_file(args.svg,
                         tasq::svg_line_chart(chart, "token reduction CDF", "reduction fraction",
                                              "cumulative fraction of jobs"));
  }
  return 0;
}

struct ServeArgs {
  std::string artifact;
  int port = 8080;
  double threshold = 0.01;
  tasq::Tokens max_tokens = 100000;
};

int run_serve(const ServeArgs& args) {
  const tasq::ModelArtifact artifact = tasq::ModelArtifact::load(args.artifact);
  httplib::Server server;
  server.Post("/predict", [&](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      const tasq::Job job = tasq::job_from_json_line(req.body, 1, nullptr);
      tasq::PccParams params = artifact.predict(job);
      body["a"] = params.exponent;
      body["b"] = params.scale;
      params.exponent = std::min(params.exponent, 0.0);
      body["recommended_tokens"] =
          tasq::optimal_tokens(params, args.threshold, args.max_tokens);
      body["model_version"] = artifact.model_version;
      body["api_version"] = 1;
      res.status = 200;
    } catch (const tasq::Error& e) {
      body = {{"error", e.what()}, {"api_version", 1}};
      res.status = 400;
    }
    res.set_content(body.dump(), "application/json");
  });
  int port = args.port;
  if (port == 0) {
    port = server.bind_to_any_port("127.0.0.1");
    std::cout << "listening on 127.0.0.1:" << port << std::endl;
    return server.listen_after_bind() ? 0 : 1;
  }
  std::cout << "listening on 127.0.0.1:" << port << std::endl;
  return server.listen("127.0.0.1", port) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"token-allocation performance curve toolkit"};
  app.require_subcommand(1);

  GenWorkloadArgs gen_args;
  auto* gen = app.add_subcommand("gen-workload", "generate a synthetic workload");
  gen->add_option("--config", gen_args.config_path, "generator config (JSON or key=value)");
  gen->add_option("--seed", gen_args.seed, "generator seed");
  gen->add_option("--out", gen_args.out, "output workload JSONL")->required();
  gen->add_option("--n-jobs", gen_args.n_jobs_override, "override the configured job count");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "reshape a skyline under a new allocation");
  sim->add_option("--in", sim_args.in, "input skyline CSV")->required();
  sim->add_option("--tokens", sim_args.tokens, "new allocation")->required();
  sim->add_option("--out", sim_args.out, "output skyline CSV")->required();

  AugmentArgs aug_args;
  auto* aug = app.add_subcommand("augment", "synthesize (allocation, runtime) points per job");
  aug->add_option("--workload", aug_args.workload, "workload JSONL")->required();
  aug->add_option("--out", aug_args.out, "output points CSV")->required();
  aug->add_option("--targets", aug_args.targets, "output fitted target params CSV");

  FitPccArgs fit_args;
  auto* fit = app.add_subcommand("fit-pcc", "fit a power-law curve to points");
  fit->add_option("--points", fit_args.points, "points CSV (allocation,runtime)")->required();
  fit->add_option("--out", fit_args.out, "output params JSON")->required();
  fit->add_option("--svg", fit_args.svg, "optional SVG chart");
  fit->add_option("--curve", fit_args.curve_csv, "optional curve CSV export");

  SelectArgs sel_args;
  auto* sel = app.add_subcommand("select", "stratified workload subset selection");
  sel->add_option("--workload", sel_args.workload, "population workload JSONL")->required();
  sel->add_option("--config", sel_args.config_path, "selection config JSON");
  sel->add_option("--out", sel_args.out, "subset workload JSONL")->required();
  sel->add_option("--report", sel_args.report, "selection report JSON");
  sel->add_option("--seed", sel_args.seed_override, "override the config seed");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a predictor on a workload");
  train->add_option("--data", train_args.data, "training workload JSONL")->required();
  train->add_option("--model", train_args.model, "gbrt|mlp|gnn")->required();
  train->add_option("--loss", train_args.loss, "lf1|lf2|lf3 (networks only)");
  train->add_option("--config", train_args.config_path, "training config JSON");
  train->add_option("--gbrt", train_args.gbrt_path, "tree-model artifact for LF3 distillation");
  train->add_option("--out", train_args.out, "output artifact JSON")->required();
  train->add_option("--seed", train_args.seed_override, "override the config seed");

  PredictArgs pred_args;
  auto* pred = app.add_subcommand("predict", "predict curve parameters for jobs");
  pred->add_option("--artifact", pred_args.artifact, "model artifact")->required();
  pred->add_option("--jobs", pred_args.jobs, "jobs JSONL")->required();
  pred->add_option("--out", pred_args.out, "output CSV")->required();

  RecommendArgs rec_args;
  auto* rec = app.add_subcommand("recommend", "recommend token counts");
  rec->add_option("--artifact", rec_args.artifact, "model artifact")->required();
  rec->add_option("--jobs", rec_args.jobs, "jobs JSONL")->required();
  rec->add_option("--out", rec_args.out, "output CSV (stdout when omitted)");
  rec->add_option("--threshold", rec_args.threshold, "marginal-gain threshold (fraction/token)");
  rec->add_option("--max-loss", rec_args.max_loss, "acceptable runtime loss fraction");
  rec->add_option("--max-tokens", rec_args.max_tokens, "recommendation upper bound");

  EvaluateArgs eval_args;
  auto* eval = app.add_subcommand("evaluate", "score artifacts against ground truth");
  eval->add_option("--artifact", eval_args.artifacts, "model artifact (repeatable)")->required();
  eval->add_option("--truth", eval_args.truth, "ground-truth workload JSONL")->required();
  eval->add_option("--out", eval_args.out, "report JSON")->required();
  eval->add_option("--csv", eval_args.csv, "report CSV table");

  ValidateSimArgs val_args;
  auto* val = app.add_subcommand("validate-sim", "compare the simulator against the executor");
  val->add_option("--workload", val_args.workload, "workload JSONL")->required();
  val->add_option("--out", val_args.out, "report JSON")->required();
  val->add_option("--caps", val_args.caps, "comma-separated cap fractions");
  val->add_option("--tolerance", val_args.tolerance, "outlier area tolerance");

  SavingsArgs sav_args;
  auto* sav = app.add_subcommand("savings-cdf", "CDF of achievable token reductions");
  sav->add_option("--artifact", sav_args.artifact, "model artifact")->required();
  sav->add_option("--workload", sav_args.workload, "workload JSONL")->required();
  sav->add_option("--loss", sav_args.loss, "acceptable runtime loss fraction");
  sav->add_option("--out", sav_args.out, "output CDF CSV")->required();
  sav->add_option("--svg", sav_args.svg, "optional SVG chart");

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "HTTP prediction endpoint");
  serve->add_option("--artifact", serve_args.artifact, "model artifact")->required();
  serve->add_option("--port", serve_args.port, "port (0 = ephemeral)");
  serve->add_option("--threshold", serve_args.threshold, "recommendation threshold");
  serve->add_option("--max-tokens", serve_args.max_tokens, "recommendation upper bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return run_gen_workload(gen_args);
    if (sim->parsed()) return run_simulate(sim_args);
    if (aug->parsed()) return run_augment(aug_args);
    if (fit->parsed()) return run_fit_pcc(fit_args);
    if (sel->parsed()) return run_select(sel_args);
    if (train->parsed()) return run_train(train_args);
    if (pred->parsed()) return run_predict(pred_args);
    if (rec->parsed()) return run_recommend(rec_args);
    if (eval->parsed()) return run_evaluate(eval_args);
    if (val->parsed()) return run_validate_sim(val_args);
    if (sav->parsed()) return run_savings_cdf(sav_args);
    if (serve->parsed()) return run_serve(serve_args);
  } catch (const tasq::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

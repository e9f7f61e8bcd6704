#include "tasq/artifact.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tasq/error.hpp"

using nlohmann::json;

namespace tasq {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Gbrt: return "gbrt";
    case ModelKind::Mlp: return "mlp";
    case ModelKind::Gnn: return "gnn";
  }
  return "mlp";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "gbrt") return ModelKind::Gbrt;
  if (name == "mlp") return ModelKind::Mlp;
  if (name == "gnn") return ModelKind::Gnn;
  fail(ErrorKind::ConfigError, "unknown model kind '" + name + "'");
}

std::vector<Tokens> default_grid(Tokens observed_allocation) {
  std::vector<Tokens> grid;
  for (int pct = 60; pct <= 140; pct += 5) {
    const auto a = static_cast<Tokens>(
        std::max(1.0, std::round(observed_allocation * (pct / 100.0))));
    if (grid.empty() || grid.back() != a) grid.push_back(a);
  }
  return grid;
}

namespace {

std::vector<double> gbrt_row(const Featurizer& featurizer, const Job& job, double allocation) {
  std::vector<double> row = featurizer.job_vector(job);
  row.push_back(allocation);
  return row;
}

}  // namespace

PccParams ModelArtifact::predict(const Job& job) const {
  switch (kind) {
    case ModelKind::Mlp: {
      const NetOutput out = mlp->forward(featurizer.job_vector(job));
      return decode_params(out.u, out.v, scales);
    }
    case ModelKind::Gnn: {
      const Matrix features = featurizer.operator_matrix(job);
      const Matrix adj_norm = normalized_adjacency(adjacency(job));
      const NetOutput out = gnn->forward(features, adj_norm);
      return decode_params(out.u, out.v, scales);
    }
    case ModelKind::Gbrt:
      return gbrt_curve_pl(*this, job, default_grid(job.observed_allocation)).params;
  }
  fail(ErrorKind::ConfigError, "artifact has no model");
}

double ModelArtifact::predict_runtime_at(const Job& job, Tokens allocation) const {
  if (kind == ModelKind::Gbrt) {
    const auto row = gbrt_row(featurizer, job, static_cast<double>(allocation));
    return gbrt->predict_runtime(row.data());
  }
  return predict_runtime(predict(job), static_cast<double>(allocation));
}

std::vector<NetExample> build_net_examples(const std::vector<Job>& jobs,
                                           const Featurizer& featurizer,
                                           const ParamScales& scales,
                                           const ModelArtifact* gbrt_for_distill) {
  std::vector<NetExample> examples;
  examples.reserve(jobs.size());
  for (const Job& job : jobs) {
    NetExample ex;
    ex.job_features = featurizer.job_vector(job);
    ex.op_features = featurizer.operator_matrix(job);
    ex.adj_norm = normalized_adjacency(adjacency(job));
    const PccParams target = fit_targets(job);
    encode_params(target, scales, &ex.target_a_scaled, &ex.target_b_scaled);
    ex.observed_allocation = static_cast<double>(job.observed_allocation);
    ex.observed_runtime = static_cast<double>(job.observed_skyline.runtime_seconds());
    if (gbrt_for_distill != nullptr)
      ex.gbrt_runtime = gbrt_for_distill->predict_runtime_at(job, job.observed_allocation);
    examples.push_back(std::move(ex));
  }
  return examples;
}

ModelArtifact train_artifact(ModelKind kind, const std::vector<Job>& jobs,
                             const TrainingConfig& config,
                             const ModelArtifact* gbrt_for_distill) {
  if (jobs.empty()) fail(ErrorKind::EmptyInput, "cannot train on an empty workload");
  if (kind != ModelKind::Gbrt && config.loss_kind == LossKind::LF3 && gbrt_for_distill == nullptr)
    fail(ErrorKind::ConfigError, "LF3 requires a trained tree-model artifact");

  ModelArtifact artifact;
  artifact.kind = kind;
  artifact.config = config;
  artifact.featurizer.fit(jobs);

  // Targets for every job; also the basis for the parameter scales.
  std::vector<PccParams> targets;
  targets.reserve(jobs.size());
  for (const Job& job : jobs) targets.push_back(fit_targets(job));
  if (config.sigma_a > 0.0 && config.sigma_logb > 0.0) {
    artifact.scales = {config.sigma_a, config.sigma_logb};
  } else {
    artifact.scales = derive_scales(targets);
  }

  std::ostringstream version;
  version << "tasq-" << to_string(kind) << '-' << to_string(config.loss_kind) << "-seed"
          << config.seed << "-fmt" << kArtifactFormatVersion;
  artifact.model_version = version.str();

  if (kind == ModelKind::Gbrt) {
    // Tree rows: job features + allocation column; one row per augmented
    // point, runtime as target.
    std::vector<std::vector<double>> rows;
    std::vector<double> runtimes;
    for (const Job& job : jobs) {
      for (const AllocationRuntime& point : augment(job)) {
        rows.push_back(gbrt_row(artifact.featurizer, job, point.allocation));
        runtimes.push_back(point.runtime);
      }
    }
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      std::copy(rows[r].begin(), rows[r].end(), m.row(r));
    artifact.gbrt = Gbrt::train(m, runtimes, config.gbrt, config.seed);
    return artifact;
  }

  const auto examples =
      build_net_examples(jobs, artifact.featurizer,
                         artifact.scales,
                         config.loss_kind == LossKind::LF3 ? gbrt_for_distill : nullptr);
  Rng rng(config.seed);
  if (kind == ModelKind::Mlp) {
    std::vector<std::size_t> sizes;
    sizes.push_back(artifact.featurizer.job_width());
    for (const std::size_t h : config.hidden) sizes.push_back(h);
    sizes.push_back(2);
    artifact.mlp = Mlp(sizes, rng);
    train_model(*artifact.mlp, examples, config, artifact.scales);
  } else {
    artifact.gnn = Gnn(artifact.featurizer.operator_width(), config.gcn_hidden,
                       config.head_hidden, rng);
    train_model(*artifact.gnn, examples, config, artifact.scales);
  }
  return artifact;
}

std::vector<AllocationRuntime> gbrt_curve_ss(const ModelArtifact& artifact, const Job& job,
                                             const std::vector<Tokens>& grid) {
  if (artifact.kind != ModelKind::Gbrt || !artifact.gbrt)
    fail(ErrorKind::ConfigError, "SS curve needs a tree-model artifact");
  constexpr std::size_t kWindow = 3;
  if (grid.size() < kWindow)
    fail(ErrorKind::InsufficientGrid, "grid must have at least " + std::to_string(kWindow) +
                                          " points");
  std::vector<double> raw;
  raw.reserve(grid.size());
  for (const Tokens a : grid) {
    const auto row = gbrt_row(artifact.featurizer, job, static_cast<double>(a));
    raw.push_back(artifact.gbrt->predict_runtime(row.data()));
  }
  std::vector<AllocationRuntime> smoothed(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(grid.size() - 1, i + 1);
    double total = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) total += raw[k];
    smoothed[i] = {static_cast<double>(grid[i]), total / static_cast<double>(hi - lo + 1)};
  }
  return smoothed;
}

PccFit gbrt_curve_pl(const ModelArtifact& artifact, const Job& job,
                     const std::vector<Tokens>& grid) {
  if (artifact.kind != ModelKind::Gbrt || !artifact.gbrt)
    fail(ErrorKind::ConfigError, "PL curve needs a tree-model artifact");
  if (grid.size() < 2) fail(ErrorKind::InsufficientGrid, "grid must have at least 2 points");
  std::vector<AllocationRuntime> points;
  points.reserve(grid.size());
  for (const Tokens a : grid) {
    const auto row = gbrt_row(artifact.featurizer, job, static_cast<double>(a));
    points.push_back({static_cast<double>(a), artifact.gbrt->predict_runtime(row.data())});
  }
  return fit_power_law(points);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

json stats_to_json(const FeatureStats& stats) {
  return json{{"mean", stats.mean}, {"stddev", stats.stddev}};
}

FeatureStats stats_from_json(const json& j) {
  FeatureStats stats;
  stats.mean = j.at("mean").get<std::vector<double>>();
  stats.stddev = j.at("stddev").get<std::vector<double>>();
  return stats;
}

}  // namespace

std::string ModelArtifact::to_json_text() const {
  json j;
  j["format"] = "tasq-model";
  j["format_version"] = kArtifactFormatVersion;
  j["kind"] = to_string(kind);
  j["model_version"] = model_version;
  j["op_vocab"] = featurizer.ops().levels();
  j["part_vocab"] = featurizer.parts().levels();
  j["op_stats"] = stats_to_json(featurizer.operator_stats());
  j["job_stats"] = stats_to_json(featurizer.job_stats());
  j["scales"] = {{"sigma_a", scales.sigma_a}, {"sigma_logb", scales.sigma_logb}};
  j["config"] = json::parse(config.to_json_text());
  switch (kind) {
    case ModelKind::Gbrt: j["model"] = json::parse(gbrt->to_json_text()); break;
    case ModelKind::Mlp: j["model"] = json::parse(mlp->to_json_text()); break;
    case ModelKind::Gnn: j["model"] = json::parse(gnn->to_json_text()); break;
  }
  return j.dump();
}

ModelArtifact ModelArtifact::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("artifact: ") + e.what());
  }
  ModelArtifact artifact;
  try {
    if (j.value("format", std::string{}) != "tasq-model")
      fail(ErrorKind::ParseError, "not a tasq model artifact");
    const int version = j.at("format_version").get<int>();
    if (version != kArtifactFormatVersion)
      fail(ErrorKind::VersionMismatch, "artifact format version " + std::to_string(version) +
                                           ", expected " +
                                           std::to_string(kArtifactFormatVersion));
    artifact.kind = model_kind_from_string(j.at("kind").get<std::string>());
    artifact.model_version = j.value("model_version", std::string{});
    artifact.featurizer =
        Featurizer(Vocabulary(j.at("op_vocab").get<std::vector<std::string>>()),
                   Vocabulary(j.at("part_vocab").get<std::vector<std::string>>()));
    artifact.featurizer.set_stats(stats_from_json(j.at("op_stats")),
                                  stats_from_json(j.at("job_stats")));
    artifact.scales.sigma_a = j.at("scales").at("sigma_a").get<double>();
    artifact.scales.sigma_logb = j.at("scales").at("sigma_logb").get<double>();
    artifact.config = TrainingConfig::from_json_text(j.at("config").dump());
    const std::string model_text = j.at("model").dump();
    switch (artifact.kind) {
      case ModelKind::Gbrt: artifact.gbrt = Gbrt::from_json_text(model_text); break;
      case ModelKind::Mlp: artifact.mlp = Mlp::from_json_text(model_text); break;
      case ModelKind::Gnn: artifact.gnn = Gnn::from_json_text(model_text); break;
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorKind::ParseError, std::string("artifact: ") + e.what());
  }
  return artifact;
}

void ModelArtifact::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path + " for writing");
  out << to_json_text() << '\n';
}

ModelArtifact ModelArtifact::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

}  // namespace tasq

#include <cstring>
#include <filesystem>

#include "doctest.h"
#include "json.hpp"
#include "tasq/artifact.hpp"
#include "tasq/error.hpp"

using namespace tasq;

namespace {

Workload tiny_workload(std::uint32_t n) {
  GeneratorConfig config;
  config.n_jobs = n;
  config.n_templates = 6;
  return generate(config, 20240601);
}

TrainingConfig tiny_net_config() {
  TrainingConfig config;
  config.epochs = 6;
  config.batch_size = 8;
  config.hidden = {16};
  config.gcn_hidden = {8, 8};
  config.head_hidden = {8};
  config.gbrt.rounds = 20;
  config.gbrt.max_depth = 3;
  config.seed = 5;
  return config;
}

}  // namespace

TEST_CASE("default grid spans 60% to 140% in 5% steps") {
  const auto grid = default_grid(100);
  REQUIRE(grid.size() == 17);
  CHECK(grid.front() == 60);
  CHECK(grid.back() == 140);
  CHECK(grid[8] == 100);
  // tiny allocations deduplicate after rounding but stay ascending
  const auto small = default_grid(2);
  for (std::size_t i = 1; i < small.size(); ++i) CHECK(small[i] > small[i - 1]);
}

TEST_CASE("artifact round trips preserve predictions bit for bit") {
  const Workload w = tiny_workload(24);
  const TrainingConfig config = tiny_net_config();

  for (const ModelKind kind : {ModelKind::Mlp, ModelKind::Gnn, ModelKind::Gbrt}) {
    const ModelArtifact artifact = train_artifact(kind, w.jobs, config);
    const std::string text = artifact.to_json_text();
    const ModelArtifact restored = ModelArtifact::from_json_text(text);
    CHECK(restored.to_json_text() == text);  // byte-stable re-serialization
    for (const Job& job : w.jobs) {
      const PccParams a = artifact.predict(job);
      const PccParams b = restored.predict(job);
      CHECK(std::memcmp(&a.exponent, &b.exponent, sizeof(double)) == 0);
      CHECK(std::memcmp(&a.scale, &b.scale, sizeof(double)) == 0);
    }
  }
}

TEST_CASE("format version mismatch is rejected") {
  const Workload w = tiny_workload(12);
  const ModelArtifact artifact = train_artifact(ModelKind::Mlp, w.jobs, tiny_net_config());
  nlohmann::json j = nlohmann::json::parse(artifact.to_json_text());
  j["format_version"] = 999;
  try {
    ModelArtifact::from_json_text(j.dump());
    FAIL("expected a version mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::VersionMismatch);
  }
  j["format"] = "something-else";
  CHECK_THROWS_AS(ModelArtifact::from_json_text(j.dump()), Error);
}

TEST_CASE("network artifacts always decode valid curves") {
  const Workload w = tiny_workload(16);
  const ModelArtifact mlp = train_artifact(ModelKind::Mlp, w.jobs, tiny_net_config());
  for (const Job& job : w.jobs) {
    const PccParams p = mlp.predict(job);
    CHECK(p.exponent < 0.0);
    CHECK(p.scale > 0.0);
  }
}

TEST_CASE("tree-model curves") {
  const Workload w = tiny_workload(20);
  const ModelArtifact gbrt = train_artifact(ModelKind::Gbrt, w.jobs, tiny_net_config());
  const Job& job = w.jobs.front();
  const auto grid = default_grid(job.observed_allocation);

  const auto ss = gbrt_curve_ss(gbrt, job, grid);
  CHECK(ss.size() == grid.size());
  const PccFit pl = gbrt_curve_pl(gbrt, job, grid);
  CHECK(pl.n_points == grid.size());
  CHECK(pl.params.scale > 0.0);

  CHECK_THROWS_AS(gbrt_curve_ss(gbrt, job, std::vector<Tokens>{5, 6}), Error);
  const ModelArtifact mlp = train_artifact(ModelKind::Mlp, w.jobs, tiny_net_config());
  CHECK_THROWS_AS(gbrt_curve_ss(mlp, job, grid), Error);
}

TEST_CASE("LF3 requires a tree artifact") {
  const Workload w = tiny_workload(12);
  TrainingConfig config = tiny_net_config();
  config.loss_kind = LossKind::LF3;
  CHECK_THROWS_AS(train_artifact(ModelKind::Mlp, w.jobs, config), Error);

  const ModelArtifact gbrt = train_artifact(ModelKind::Gbrt, w.jobs, tiny_net_config());
  const ModelArtifact mlp = train_artifact(ModelKind::Mlp, w.jobs, config, &gbrt);
  CHECK(mlp.kind == ModelKind::Mlp);
  CHECK(mlp.config.loss_kind == LossKind::LF3);
}

TEST_CASE("artifact file save/load") {
  const Workload w = tiny_workload(10);
  const ModelArtifact artifact = train_artifact(ModelKind::Mlp, w.jobs, tiny_net_config());
  const auto path =
      (std::filesystem::temp_directory_path() / "tasq_test_artifact.json").string();
  artifact.save(path);
  const ModelArtifact loaded = ModelArtifact::load(path);
  CHECK(loaded.to_json_text() == artifact.to_json_text());
  std::filesystem::remove(path);
}

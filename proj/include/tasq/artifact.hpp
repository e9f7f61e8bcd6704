#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tasq/augment.hpp"
#include "tasq/features.hpp"
#include "tasq/gbrt.hpp"
#include "tasq/net.hpp"
#include "tasq/pcc.hpp"
#include "tasq/workload.hpp"

namespace tasq {

enum class ModelKind { Gbrt, Mlp, Gnn };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

inline constexpr int kArtifactFormatVersion = 1;

// Serialized predictor: one of the three model families plus everything
// needed to run it on a raw job (vocabularies, feature statistics, parameter
// scales, config echo).
struct ModelArtifact {
  ModelKind kind = ModelKind::Mlp;
  std::string model_version;
  Featurizer featurizer;
  ParamScales scales;
  TrainingConfig config;
  std::optional<Gbrt> gbrt;
  std::optional<Mlp> mlp;
  std::optional<Gnn> gnn;

  // Curve parameters for a job. Networks decode their outputs (always a
  // non-increasing curve); the tree model fits a power law through its grid
  // predictions, so the slope sign is unconstrained.
  PccParams predict(const Job& job) const;

  // Runtime prediction at one allocation: direct model output for the tree
  // model, the decoded curve for the networks.
  double predict_runtime_at(const Job& job, Tokens allocation) const;

  std::string to_json_text() const;
  static ModelArtifact from_json_text(const std::string& text);
  void save(const std::string& path) const;
  static ModelArtifact load(const std::string& path);
};

// Featurize a workload into network training examples. Targets come from
// the area-preserving augmentation; gbrt_for_distill supplies the runtime
// anchor for LF3 (may be null otherwise).
std::vector<NetExample> build_net_examples(const std::vector<Job>& jobs,
                                           const Featurizer& featurizer,
                                           const ParamScales& scales,
                                           const ModelArtifact* gbrt_for_distill);

// Train an artifact of the requested kind on a workload. LF3 network
// training requires a previously trained tree-model artifact.
ModelArtifact train_artifact(ModelKind kind, const std::vector<Job>& jobs,
                             const TrainingConfig& config,
                             const ModelArtifact* gbrt_for_distill = nullptr);

// Prediction grid around the observed allocation: 60% to 140% in 5% steps,
// deduplicated after rounding.
std::vector<Tokens> default_grid(Tokens observed_allocation);

// Tree-model curve construction. SS: grid predictions smoothed with a
// centered moving average (window 3). PL: power-law fit through the raw
// grid predictions.
std::vector<AllocationRuntime> gbrt_curve_ss(const ModelArtifact& artifact, const Job& job,
                                             const std::vector<Tokens>& grid);
PccFit gbrt_curve_pl(const ModelArtifact& artifact, const Job& job,
                     const std::vector<Tokens>& grid);

}  // namespace tasq

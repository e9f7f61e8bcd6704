#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tasq/features.hpp"
#include "tasq/gbrt.hpp"
#include "tasq/pcc.hpp"
#include "tasq/rng.hpp"

namespace tasq {

enum class LossKind { LF1, LF2, LF3 };

const char* to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

// Scaling of the two curve parameters; targets are trained in the scaled
// space (a / sigma_a, log b / sigma_logb).
struct ParamScales {
  double sigma_a = 1.0;
  double sigma_logb = 1.0;

  bool operator==(const ParamScales&) const = default;
};

// Decode raw network outputs (u, v) into curve parameters. The decoding
// pins the signs: a = -sigma_a * exp(u) < 0 and b = exp(sigma_logb * v) > 0,
// so every decoded curve is monotonically non-increasing regardless of the
// weights.
PccParams decode_params(double u, double v, const ParamScales& scales);

// Scaled-space encoding of target parameters; requires b > 0.
void encode_params(const PccParams& params, const ParamScales& scales, double* a_scaled,
                   double* b_scaled);

// Inverse of encode_params.
PccParams decode_scaled(double a_scaled, double b_scaled, const ParamScales& scales);

struct TrainingConfig {
  LossKind loss_kind = LossKind::LF2;
  double w_runtime = 0.5;   // weight of the runtime term (LF2, LF3)
  double w_distill = 0.5;   // weight of the tree-distillation term (LF3)
  double sigma_a = 0.0;     // 0 = derive from the training targets
  double sigma_logb = 0.0;
  double learning_rate = 1e-3;
  std::uint32_t epochs = 200;
  std::uint32_t batch_size = 32;
  std::vector<std::size_t> hidden = {64, 64};            // MLP hidden widths
  std::vector<std::size_t> gcn_hidden = {32, 32, 32};    // GCN layer widths
  std::vector<std::size_t> head_hidden = {32};           // GNN head hidden widths
  double holdout_fraction = 0.0;  // > 0 enables early stopping on a holdout
  std::uint32_t patience = 20;
  GbrtConfig gbrt;  // boosting rounds / depth for the tree model
  std::uint64_t seed = 0;

  std::string to_json_text() const;
  static TrainingConfig from_json_text(const std::string& text);
  bool operator==(const TrainingConfig&) const = default;
};

// One training example, fully featurized.
struct NetExample {
  std::vector<double> job_features;  // MLP input
  Matrix op_features;                // GNN input
  Matrix adj_norm;                   // symmetric-normalized self-looped adjacency
  double target_a_scaled = 0.0;
  double target_b_scaled = 0.0;
  double observed_allocation = 1.0;
  double observed_runtime = 1.0;
  double gbrt_runtime = 0.0;  // tree-model runtime prediction, for LF3
};

struct NetOutput {
  double u = 0.0;
  double v = 0.0;
};

struct LossGrad {
  double loss = 0.0;
  double du = 0.0;
  double dv = 0.0;
};

// Loss value and its gradient with respect to the raw outputs, for one
// example. LF1: scaled-parameter MAE. LF2: adds the relative runtime error
// at the observed allocation. LF3: adds the relative gap to the tree
// model's runtime prediction.
LossGrad loss_and_grad(LossKind kind, const NetOutput& out, const NetExample& ex,
                       const TrainingConfig& config, const ParamScales& scales);

// Fully connected network with tanh hidden layers and a linear 2-unit
// output. Parameters live in one flat vector (per layer: row-major W then
// b), which keeps the optimizer and the finite-difference checks simple.
class Mlp {
 public:
  struct Cache {
    std::vector<std::vector<double>> acts;  // acts[0] = input
  };

  Mlp() = default;
  Mlp(std::vector<std::size_t> layer_sizes, Rng& rng);

  NetOutput forward(std::span<const double> input, Cache* cache = nullptr) const;
  void backward(const Cache& cache, double du, double dv, std::vector<double>& grad) const;

  NetOutput forward_example(const NetExample& ex, Cache* cache = nullptr) const {
    return forward(ex.job_features, cache);
  }
  void backward_example(const NetExample&, const Cache& cache, double du, double dv,
                        std::vector<double>& grad) const {
    backward(cache, du, dv, grad);
  }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<std::size_t>& layer_sizes() const { return layer_sizes_; }

  std::string to_json_text() const;
  static Mlp from_json_text(const std::string& text);
  bool operator==(const Mlp&) const = default;

 private:
  std::vector<std::size_t> layer_sizes_;
  std::vector<double> params_;
};

// Graph network: a stack of GCN layers over the symmetric-normalized
// adjacency, attention pooling against a learned global context, and a
// fully connected head.
class Gnn {
 public:
  struct Cache {
    Matrix input;
    std::vector<Matrix> aggregated;  // per GCN layer: adj_norm * H_prev
    std::vector<Matrix> activated;   // per GCN layer: tanh output
    std::vector<double> mean_embedding;
    std::vector<double> context;         // tanh(Wc * mean + bc)
    std::vector<double> attention;       // sigmoid(u_n . c)
    std::vector<double> graph_embedding; // sum_n att_n * u_n
    Mlp::Cache head;
  };

  Gnn() = default;
  Gnn(std::size_t input_width, std::vector<std::size_t> gcn_widths,
      std::vector<std::size_t> head_hidden, Rng& rng);

  NetOutput forward(const Matrix& node_features, const Matrix& adj_norm,
                    Cache* cache = nullptr) const;
  void backward(const Matrix& adj_norm, const Cache& cache, double du, double dv,
                std::vector<double>& grad) const;

  NetOutput forward_example(const NetExample& ex, Cache* cache = nullptr) const {
    return forward(ex.op_features, ex.adj_norm, cache);
  }
  void backward_example(const NetExample& ex, const Cache& cache, double du, double dv,
                        std::vector<double>& grad) const {
    backward(ex.adj_norm, cache, du, dv, grad);
  }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::string to_json_text() const;
  static Gnn from_json_text(const std::string& text);
  bool operator==(const Gnn&) const = default;

 private:
  void compute_offsets();

  std::size_t input_width_ = 0;
  std::vector<std::size_t> gcn_widths_;
  std::vector<std::size_t> head_hidden_;
  std::vector<double> params_;
  // offsets into params_: per GCN layer (W, b), context (W, b), head handled
  // by an embedded Mlp view
  std::vector<std::size_t> offsets_;
  std::size_t head_offset_ = 0;
  std::vector<std::size_t> head_sizes_;
};

// D^-1/2 (A + A^T + I) D^-1/2 over the binary adjacency; treats the DAG as
// undirected for message passing.
Matrix normalized_adjacency(const Matrix& adj);

struct TrainResult {
  std::vector<double> epoch_losses;
  double final_loss = 0.0;
  std::uint32_t best_epoch = 0;
};

// Mini-batch Adam on the selected loss; deterministic for a fixed seed.
// Throws training-diverged if the loss stops being finite.
template <typename Model>
TrainResult train_model(Model& model, const std::vector<NetExample>& examples,
                        const TrainingConfig& config, const ParamScales& scales);

// Derive sigma_a / sigma_logb from target parameters (standard deviations;
// zero-variance falls back to 1).
ParamScales derive_scales(std::span<const PccParams> targets);

}  // namespace tasq

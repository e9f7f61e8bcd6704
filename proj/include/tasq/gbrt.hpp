#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tasq/features.hpp"

namespace tasq {

enum class GbrtObjective {
  SquaredLog,  // squared error on log(runtime); the default
  Gamma,       // gamma deviance with log link
};

struct GbrtConfig {
  std::uint32_t rounds = 200;
  std::uint32_t max_depth = 6;
  double learning_rate = 0.1;
  double l2_lambda = 1.0;
  std::uint32_t min_samples_leaf = 2;
  std::uint32_t max_bins = 64;
  GbrtObjective objective = GbrtObjective::SquaredLog;

  bool operator==(const GbrtConfig&) const = default;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left when value <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(const double* row) const;
  bool operator==(const Tree&) const = default;
};

// Gradient-boosted regression trees over job feature rows, predicting
// log(runtime). Exact histogram splits; fully deterministic.
class Gbrt {
 public:
  // rows: n x width feature matrix; runtimes: strictly positive targets.
  static Gbrt train(const Matrix& rows, const std::vector<double>& runtimes,
                    const GbrtConfig& config, std::uint64_t seed);

  double predict_log(const double* row) const;
  double predict_runtime(const double* row) const;

  const std::vector<Tree>& trees() const { return trees_; }
  double base_score() const { return base_score_; }
  const GbrtConfig& config() const { return config_; }
  // Per-round value of the training objective, after adding that round's tree.
  const std::vector<double>& round_losses() const { return round_losses_; }

  std::string to_json_text() const;
  static Gbrt from_json_text(const std::string& text);
  bool operator==(const Gbrt&) const = default;

 private:
  GbrtConfig config_;
  double base_score_ = 0.0;
  std::vector<Tree> trees_;
  std::vector<double> round_losses_;
};

}  // namespace tasq

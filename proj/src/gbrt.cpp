#include "tasq/gbrt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "tasq/error.hpp"

using nlohmann::json;

namespace tasq {

double Tree::predict(const double* row) const {
  std::int32_t node = 0;
  while (nodes[node].feature >= 0) {
    const TreeNode& n = nodes[node];
    node = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[node].value;
}

namespace {

struct GradHess {
  double grad = 0.0;
  double hess = 0.0;
};

// Gradients of the objective with respect to the current score F, where the
// model predicts runtime = exp(F).
GradHess grad_hess(GbrtObjective objective, double f, double y) {
  switch (objective) {
    case GbrtObjective::SquaredLog:
      return {f - std::log(y), 1.0};
    case GbrtObjective::Gamma: {
      const double r = y * std::exp(-f);
      return {1.0 - r, r};
    }
  }
  return {};
}

double objective_value(GbrtObjective objective, double f, double y) {
  switch (objective) {
    case GbrtObjective::SquaredLog: {
      const double d = f - std::log(y);
      return 0.5 * d * d;
    }
    case GbrtObjective::Gamma: {
      // deviance up to a constant in y
      const double r = y * std::exp(-f);
      return r - std::log(r) - 1.0;
    }
  }
  return 0.0;
}

// Quantile-ish bin edges per feature: distinct sorted values collapsed to at
// most max_bins buckets. Thresholds are actual data values, so the split
// rule `value <= threshold` is exact on the training data.
std::vector<std::vector<double>> build_bin_edges(const Matrix& rows, std::uint32_t max_bins) {
  std::vector<std::vector<double>> edges(rows.cols);
  std::vector<double> column;
  for (std::size_t f = 0; f < rows.cols; ++f) {
    column.resize(rows.rows);
    for (std::size_t r = 0; r < rows.rows; ++r) column[r] = rows.at(r, f);
    std::sort(column.begin(), column.end());
    column.erase(std::unique(column.begin(), column.end()), column.end());
    auto& e = edges[f];
    if (column.size() <= 1) continue;  // constant feature, never split
    if (column.size() <= max_bins) {
      e.assign(column.begin(), column.end() - 1);  // top value never splits
    } else {
      for (std::uint32_t b = 1; b < max_bins; ++b) {
        const std::size_t idx = b * column.size() / max_bins;
        e.push_back(column[idx - 1]);
      }
      e.erase(std::unique(e.begin(), e.end()), e.end());
    }
  }
  return edges;
}

struct SplitResult {
  double gain = 0.0;
  std::int32_t feature = -1;
  double threshold = 0.0;
};

}  // namespace

Gbrt Gbrt::train(const Matrix& rows, const std::vector<double>& runtimes,
                 const GbrtConfig& config, std::uint64_t seed) {
  (void)seed;  // training is deterministic; the seed is part of the config echo only
  if (rows.rows == 0) fail(ErrorKind::EmptyInput, "empty training set");
  if (rows.rows != runtimes.size())
    fail(ErrorKind::ShapeError, "rows and targets differ in length");
  for (const double y : runtimes)
    if (!(y > 0.0)) fail(ErrorKind::DomainError, "runtimes must be > 0");

  Gbrt model;
  model.config_ = config;

  const std::size_t n = rows.rows;
  // Base score on the objective's natural scale.
  if (config.objective == GbrtObjective::SquaredLog) {
    double s = 0.0;
    for (const double y : runtimes) s += std::log(y);
    model.base_score_ = s / static_cast<double>(n);
  } else {
    double s = 0.0;
    for (const double y : runtimes) s += y;
    model.base_score_ = std::log(s / static_cast<double>(n));
  }

  const auto edges = build_bin_edges(rows, config.max_bins);

  // Bin codes per (row, feature): bin b holds values with
  // edges[b-1] < value <= edges[b], so a prefix sum over bins 0..b is
  // exactly the population of the split `value <= edges[b]`.
  std::vector<std::uint16_t> codes(n * rows.cols);
  for (std::size_t f = 0; f < rows.cols; ++f) {
    const auto& e = edges[f];
    for (std::size_t r = 0; r < n; ++r) {
      const double v = rows.at(r, f);
      codes[r * rows.cols + f] =
          static_cast<std::uint16_t>(std::lower_bound(e.begin(), e.end(), v) - e.begin());
    }
  }

  std::vector<double> score(n, model.base_score_);
  std::vector<GradHess> gh(n);
  std::vector<std::int32_t> leaf_of(n);

  for (std::uint32_t round = 0; round < config.rounds; ++round) {
    for (std::size_t r = 0; r < n; ++r)
      gh[r] = grad_hess(config.objective, score[r], runtimes[r]);

    Tree tree;
    tree.nodes.push_back({});
    std::fill(leaf_of.begin(), leaf_of.end(), 0);
    // frontier of expandable leaves at the current depth
    std::vector<std::int32_t> frontier{0};

    for (std::uint32_t depth = 0; depth < config.max_depth && !frontier.empty(); ++depth) {
      // Histograms per frontier leaf and feature.
      const std::size_t n_leaves = frontier.size();
      std::vector<std::int32_t> leaf_slot(tree.nodes.size(), -1);
      for (std::size_t i = 0; i < n_leaves; ++i) leaf_slot[frontier[i]] = static_cast<std::int32_t>(i);

      std::vector<SplitResult> best(n_leaves);
      std::vector<double> totals_g(n_leaves, 0.0);
      std::vector<double> totals_h(n_leaves, 0.0);
      std::vector<std::size_t> counts(n_leaves, 0);
      for (std::size_t r = 0; r < n; ++r) {
        const std::int32_t slot = leaf_of[r] >= 0 ? leaf_slot[leaf_of[r]] : -1;
        if (slot < 0) continue;
        totals_g[slot] += gh[r].grad;
        totals_h[slot] += gh[r].hess;
        ++counts[slot];
      }

      for (std::size_t f = 0; f < rows.cols; ++f) {
        const auto& e = edges[f];
        if (e.empty()) continue;
        const std::size_t n_bins = e.size() + 1;
        std::vector<double> hist_g(n_leaves * n_bins, 0.0);
        std::vector<double> hist_h(n_leaves * n_bins, 0.0);
        std::vector<std::uint32_t> hist_c(n_leaves * n_bins, 0);
        for (std::size_t r = 0; r < n; ++r) {
          const std::int32_t slot = leaf_of[r] >= 0 ? leaf_slot[leaf_of[r]] : -1;
          if (slot < 0) continue;
          const std::size_t bin = codes[r * rows.cols + f];
          hist_g[slot * n_bins + bin] += gh[r].grad;
          hist_h[slot * n_bins + bin] += gh[r].hess;
          ++hist_c[slot * n_bins + bin];
        }
        for (std::size_t i = 0; i < n_leaves; ++i) {
          double gl = 0.0;
          double hl = 0.0;
          std::size_t cl = 0;
          const double gt = totals_g[i];
          const double ht = totals_h[i];
          const double parent_obj = gt * gt / (ht + config.l2_lambda);
          for (std::size_t b = 0; b + 1 < n_bins; ++b) {
            gl += hist_g[i * n_bins + b];
            hl += hist_h[i * n_bins + b];
            cl += hist_c[i * n_bins + b];
            const std::size_t cr = counts[i] - cl;
            if (cl < config.min_samples_leaf || cr < config.min_samples_leaf) continue;
            const double gr = gt - gl;
            const double hr = ht - hl;
            const double gain = 0.5 * (gl * gl / (hl + config.l2_lambda) +
                                       gr * gr / (hr + config.l2_lambda) - parent_obj);
            if (gain > best[i].gain + 1e-12) {
              best[i].gain = gain;
              best[i].feature = static_cast<std::int32_t>(f);
              best[i].threshold = e[b];
            }
          }
        }
      }

      // Apply splits; children become the next frontier.
      std::vector<std::int32_t> next_frontier;
      bool any = false;
      for (std::size_t i = 0; i < n_leaves; ++i) {
        if (best[i].feature < 0) continue;
        any = true;
        const auto left = static_cast<std::int32_t>(tree.nodes.size());
        const auto right = left + 1;
        {
          // write through the index; push_back below reallocates the nodes
          TreeNode& node = tree.nodes[frontier[i]];
          node.feature = best[i].feature;
          node.threshold = best[i].threshold;
          node.left = left;
          node.right = right;
        }
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        next_frontier.push_back(left);
        next_frontier.push_back(right);
      }
      if (!any) break;
      for (std::size_t r = 0; r < n; ++r) {
        std::int32_t node = leaf_of[r];
        if (node < 0) continue;
        const TreeNode& parent = tree.nodes[node];
        if (parent.feature < 0) continue;
        leaf_of[r] = rows.at(r, parent.feature) <= parent.threshold ? parent.left : parent.right;
      }
      frontier = std::move(next_frontier);
    }

    // Leaf values: -G / (H + lambda).
    std::vector<double> leaf_g(tree.nodes.size(), 0.0);
    std::vector<double> leaf_h(tree.nodes.size(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      leaf_g[leaf_of[r]] += gh[r].grad;
      leaf_h[leaf_of[r]] += gh[r].hess;
    }
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      if (tree.nodes[i].feature < 0)
        tree.nodes[i].value = -leaf_g[i] / (leaf_h[i] + config.l2_lambda);
    }

    for (std::size_t r = 0; r < n; ++r)
      score[r] += config.learning_rate * tree.nodes[leaf_of[r]].value;
    model.trees_.push_back(std::move(tree));

    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      loss += objective_value(config.objective, score[r], runtimes[r]);
    model.round_losses_.push_back(loss / static_cast<double>(n));
  }

  return model;
}

double Gbrt::predict_log(const double* row) const {
  double f = base_score_;
  for (const Tree& tree : trees_) f += config_.learning_rate * tree.predict(row);
  return f;
}

double Gbrt::predict_runtime(const double* row) const { return std::exp(predict_log(row)); }

std::string Gbrt::to_json_text() const {
  json j;
  j["config"] = {{"rounds", config_.rounds},
                 {"max_depth", config_.max_depth},
                 {"learning_rate", config_.learning_rate},
                 {"l2_lambda", config_.l2_lambda},
                 {"min_samples_leaf", config_.min_samples_leaf},
                 {"max_bins", config_.max_bins},
                 {"objective", config_.objective == GbrtObjective::Gamma ? "gamma" : "squared_log"}};
  j["base_score"] = base_score_;
  json trees = json::array();
  for (const Tree& tree : trees_) {
    json nodes = json::array();
    for (const TreeNode& n : tree.nodes)
      nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  j["round_losses"] = round_losses_;
  return j.dump();
}

Gbrt Gbrt::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("gbrt: ") + e.what());
  }
  Gbrt model;
  try {
    const json& c = j.at("config");
    model.config_.rounds = c.at("rounds").get<std::uint32_t>();
    model.config_.max_depth = c.at("max_depth").get<std::uint32_t>();
    model.config_.learning_rate = c.at("learning_rate").get<double>();
    model.config_.l2_lambda = c.at("l2_lambda").get<double>();
    model.config_.min_samples_leaf = c.at("min_samples_leaf").get<std::uint32_t>();
    model.config_.max_bins = c.at("max_bins").get<std::uint32_t>();
    model.config_.objective = c.at("objective").get<std::string>() == "gamma"
                                  ? GbrtObjective::Gamma
                                  : GbrtObjective::SquaredLog;
    model.base_score_ = j.at("base_score").get<double>();
    for (const json& jt : j.at("trees")) {
      Tree tree;
      for (const json& jn : jt) {
        tree.nodes.push_back({jn.at(0).get<std::int32_t>(), jn.at(1).get<double>(),
                              jn.at(2).get<std::int32_t>(), jn.at(3).get<std::int32_t>(),
                              jn.at(4).get<double>()});
      }
      model.trees_.push_back(std::move(tree));
    }
    model.round_losses_ = j.value("round_losses", std::vector<double>{});
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("gbrt: ") + e.what());
  }
  return model;
}

}  // namespace tasq

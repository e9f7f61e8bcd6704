#include "tasq/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "json.hpp"
#include "tasq/error.hpp"
#include "tasq/kernels.hpp"

using nlohmann::json;

namespace tasq {

const char* to_string(LossKind kind) {
  switch (kind) {
    case LossKind::LF1: return "lf1";
    case LossKind::LF2: return "lf2";
    case LossKind::LF3: return "lf3";
  }
  return "lf2";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "lf1") return LossKind::LF1;
  if (name == "lf2") return LossKind::LF2;
  if (name == "lf3") return LossKind::LF3;
  fail(ErrorKind::ConfigError, "unknown loss kind '" + name + "'");
}

PccParams decode_params(double u, double v, const ParamScales& scales) {
  // Exponents clamped so decoded values stay finite and strictly signed
  // even for extreme raw outputs.
  const double uu = std::clamp(u, -50.0, 50.0);
  const double logb = std::clamp(scales.sigma_logb * v, -500.0, 500.0);
  return {-scales.sigma_a * std::exp(uu), std::exp(logb)};
}

void encode_params(const PccParams& params, const ParamScales& scales, double* a_scaled,
                   double* b_scaled) {
  if (!(params.scale > 0.0)) fail(ErrorKind::DomainError, "curve scale must be > 0");
  *a_scaled = params.exponent / scales.sigma_a;
  *b_scaled = std::log(params.scale) / scales.sigma_logb;
}

PccParams decode_scaled(double a_scaled, double b_scaled, const ParamScales& scales) {
  return {a_scaled * scales.sigma_a, std::exp(b_scaled * scales.sigma_logb)};
}

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

LossGrad loss_and_grad(LossKind kind, const NetOutput& out, const NetExample& ex,
                       const TrainingConfig& config, const ParamScales& scales) {
  LossGrad lg;
  const double exp_u = std::exp(out.u);
  const double a_scaled_hat = -exp_u;
  const double ra = a_scaled_hat - ex.target_a_scaled;
  const double rb = out.v - ex.target_b_scaled;
  lg.loss = 0.5 * (std::abs(ra) + std::abs(rb));
  lg.du = 0.5 * sgn(ra) * (-exp_u);
  lg.dv = 0.5 * sgn(rb);
  if (kind == LossKind::LF1) return lg;

  if (!(ex.observed_runtime > 0.0))
    fail(ErrorKind::DomainError, "observed runtime must be > 0 for runtime losses");
  const double a_hat = scales.sigma_a * a_scaled_hat;  // d a_hat / du = a_hat
  const double log_alloc = std::log(ex.observed_allocation);
  const double predicted = std::exp(scales.sigma_logb * out.v + a_hat * log_alloc);

  const double rel = (predicted - ex.observed_runtime) / ex.observed_runtime;
  lg.loss += config.w_runtime * std::abs(rel);
  const double c = config.w_runtime * sgn(rel) / ex.observed_runtime;
  lg.du += c * predicted * log_alloc * a_hat;
  lg.dv += c * predicted * scales.sigma_logb;
  if (kind == LossKind::LF2) return lg;

  if (!(ex.gbrt_runtime > 0.0))
    fail(ErrorKind::DomainError, "LF3 requires a tree-model runtime prediction");
  const double rel_g = (predicted - ex.gbrt_runtime) / ex.gbrt_runtime;
  lg.loss += config.w_distill * std::abs(rel_g);
  const double cg = config.w_distill * sgn(rel_g) / ex.gbrt_runtime;
  lg.du += cg * predicted * log_alloc * a_hat;
  lg.dv += cg * predicted * scales.sigma_logb;
  return lg;
}

// ---------------------------------------------------------------------------
// Dense layer stack shared by the MLP and the GNN head
// ---------------------------------------------------------------------------

namespace {

std::size_t stack_param_count(const std::vector<std::size_t>& sizes) {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) count += sizes[l + 1] * (sizes[l] + 1);
  return count;
}

void stack_init(double* p, const std::vector<std::size_t>& sizes, Rng& rng) {
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    const double r = std::sqrt(6.0 / static_cast<double>(in + out));
    for (std::size_t i = 0; i < out * in; ++i) p[off + i] = rng.uniform(-r, r);
    off += out * in;
    for (std::size_t i = 0; i < out; ++i) p[off + i] = 0.0;
    off += out;
  }
}

// tanh between layers, linear final layer; cache.acts[l] is the input to
// layer l.
void stack_forward(const double* p, const std::vector<std::size_t>& sizes,
                   std::span<const double> input, Mlp::Cache& cache) {
  cache.acts.assign(1, std::vector<double>(input.begin(), input.end()));
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    const auto& x = cache.acts.back();
    std::vector<double> z(out);
    for (std::size_t o = 0; o < out; ++o)
      z[o] = kernels::dot(p + off + o * in, x.data(), in) + p[off + out * in + o];
    const bool last = l + 2 == sizes.size();
    if (!last)
      for (double& zo : z) zo = std::tanh(zo);
    cache.acts.push_back(std::move(z));
    off += out * (in + 1);
  }
}

// dout: gradient at the stack output; grads accumulate at gbase with the
// same layout as the parameters; dinput (optional) receives the gradient at
// the stack input.
void stack_backward(const double* p, const std::vector<std::size_t>& sizes,
                    const Mlp::Cache& cache, std::span<const double> dout, double* gbase,
                    double* dinput) {
  const std::size_t n_layers = sizes.size() - 1;
  std::vector<std::size_t> offsets(n_layers);
  std::size_t off = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = off;
    off += sizes[l + 1] * (sizes[l] + 1);
  }
  std::vector<double> delta(dout.begin(), dout.end());
  for (std::size_t li = n_layers; li-- > 0;) {
    const std::size_t in = sizes[li];
    const std::size_t out = sizes[li + 1];
    const auto& x = cache.acts[li];
    const std::size_t w_off = offsets[li];
    for (std::size_t o = 0; o < out; ++o) {
      kernels::axpy(delta[o], x.data(), gbase + w_off + o * in, in);
      gbase[w_off + out * in + o] += delta[o];
    }
    if (li == 0 && dinput == nullptr) break;
    std::vector<double> dprev(in, 0.0);
    for (std::size_t o = 0; o < out; ++o)
      kernels::axpy(delta[o], p + w_off + o * in, dprev.data(), in);
    if (li == 0) {
      std::copy(dprev.begin(), dprev.end(), dinput);
      break;
    }
    // through the tanh of the previous layer's output
    const auto& h = cache.acts[li];
    for (std::size_t i = 0; i < in; ++i) dprev[i] *= 1.0 - h[i] * h[i];
    delta = std::move(dprev);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Mlp
// ---------------------------------------------------------------------------

Mlp::Mlp(std::vector<std::size_t> layer_sizes, Rng& rng) : layer_sizes_(std::move(layer_sizes)) {
  if (layer_sizes_.size() < 2) fail(ErrorKind::ConfigError, "MLP needs at least two layer sizes");
  params_.assign(stack_param_count(layer_sizes_), 0.0);
  stack_init(params_.data(), layer_sizes_, rng);
}

NetOutput Mlp::forward(std::span<const double> input, Cache* cache) const {
  if (input.size() != layer_sizes_.front())
    fail(ErrorKind::ShapeError, "MLP input width " + std::to_string(input.size()) +
                                    " != " + std::to_string(layer_sizes_.front()));
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  stack_forward(params_.data(), layer_sizes_, input, c);
  return {c.acts.back()[0], c.acts.back()[1]};
}

void Mlp::backward(const Cache& cache, double du, double dv, std::vector<double>& grad) const {
  if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);
  const double dout[2] = {du, dv};
  stack_backward(params_.data(), layer_sizes_, cache, std::span<const double>(dout, 2),
                 grad.data(), nullptr);
}

std::string Mlp::to_json_text() const {
  json j;
  j["layer_sizes"] = layer_sizes_;
  j["params"] = params_;
  return j.dump();
}

Mlp Mlp::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("mlp: ") + e.what());
  }
  Mlp m;
  try {
    m.layer_sizes_ = j.at("layer_sizes").get<std::vector<std::size_t>>();
    m.params_ = j.at("params").get<std::vector<double>>();
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("mlp: ") + e.what());
  }
  if (m.params_.size() != stack_param_count(m.layer_sizes_))
    fail(ErrorKind::ShapeError, "mlp parameter count does not match layer sizes");
  return m;
}

// ---------------------------------------------------------------------------
// Gnn
// ---------------------------------------------------------------------------

Matrix normalized_adjacency(const Matrix& adj) {
  if (adj.rows != adj.cols) fail(ErrorKind::ShapeError, "adjacency must be square");
  const std::size_t n = adj.rows;
  Matrix sym(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      sym.at(i, j) = (i == j || adj.at(i, j) != 0.0 || adj.at(j, i) != 0.0) ? 1.0 : 0.0;
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i)
    inv_sqrt_deg[i] = 1.0 / std::sqrt(kernels::sum(sym.row(i), n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sym.at(i, j) *= inv_sqrt_deg[i] * inv_sqrt_deg[j];
  return sym;
}

Gnn::Gnn(std::size_t input_width, std::vector<std::size_t> gcn_widths,
         std::vector<std::size_t> head_hidden, Rng& rng)
    : input_width_(input_width),
      gcn_widths_(std::move(gcn_widths)),
      head_hidden_(std::move(head_hidden)) {
  if (gcn_widths_.empty()) fail(ErrorKind::ConfigError, "GNN needs at least one GCN layer");
  compute_offsets();
  params_.assign(offsets_.back(), 0.0);
  // GCN layers
  std::size_t prev = input_width_;
  std::size_t slot = 0;
  for (const std::size_t width : gcn_widths_) {
    const double r = std::sqrt(6.0 / static_cast<double>(prev + width));
    for (std::size_t i = 0; i < width * prev; ++i)
      params_[offsets_[slot] + i] = rng.uniform(-r, r);
    slot += 2;  // bias slot stays zero
    prev = width;
  }
  // context transform
  const std::size_t d = gcn_widths_.back();
  const double rc = std::sqrt(6.0 / static_cast<double>(2 * d));
  for (std::size_t i = 0; i < d * d; ++i) params_[offsets_[slot] + i] = rng.uniform(-rc, rc);
  // head
  stack_init(params_.data() + head_offset_, head_sizes_, rng);
}

void Gnn::compute_offsets() {
  offsets_.clear();
  std::size_t off = 0;
  std::size_t prev = input_width_;
  for (const std::size_t width : gcn_widths_) {
    offsets_.push_back(off);  // W
    off += width * prev;
    offsets_.push_back(off);  // b
    off += width;
    prev = width;
  }
  const std::size_t d = gcn_widths_.back();
  offsets_.push_back(off);  // context W
  off += d * d;
  offsets_.push_back(off);  // context b
  off += d;
  head_offset_ = off;
  head_sizes_.clear();
  head_sizes_.push_back(d);
  for (const std::size_t h : head_hidden_) head_sizes_.push_back(h);
  head_sizes_.push_back(2);
  off += stack_param_count(head_sizes_);
  offsets_.push_back(off);  // total
}

NetOutput Gnn::forward(const Matrix& node_features, const Matrix& adj_norm, Cache* cache) const {
  if (node_features.cols != input_width_)
    fail(ErrorKind::ShapeError, "GNN input width " + std::to_string(node_features.cols) +
                                    " != " + std::to_string(input_width_));
  if (adj_norm.rows != node_features.rows || adj_norm.cols != node_features.rows)
    fail(ErrorKind::ShapeError, "adjacency shape does not match node count");
  const std::size_t n = node_features.rows;
  if (n == 0) fail(ErrorKind::EmptyJob, "GNN needs at least one node");

  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.input = node_features;
  c.aggregated.clear();
  c.activated.clear();

  const Matrix* h_prev = &c.input;
  std::size_t prev_width = input_width_;
  std::size_t slot = 0;
  for (const std::size_t width : gcn_widths_) {
    Matrix aggregated(n, prev_width);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double w = adj_norm.at(i, j);
        if (w != 0.0) kernels::axpy(w, h_prev->row(j), aggregated.row(i), prev_width);
      }
    Matrix activated(n, width);
    const double* w_base = params_.data() + offsets_[slot];
    const double* b_base = params_.data() + offsets_[slot + 1];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < width; ++o)
        activated.at(i, o) =
            std::tanh(kernels::dot(w_base + o * prev_width, aggregated.row(i), prev_width) +
                      b_base[o]);
    c.aggregated.push_back(std::move(aggregated));
    c.activated.push_back(std::move(activated));
    h_prev = &c.activated.back();
    prev_width = width;
    slot += 2;
  }

  const Matrix& embeddings = c.activated.back();
  const std::size_t d = gcn_widths_.back();
  c.mean_embedding.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    kernels::axpy(1.0 / static_cast<double>(n), embeddings.row(i), c.mean_embedding.data(), d);

  // global context: tanh of a learned transform of the mean embedding
  const double* wc = params_.data() + offsets_[slot];
  const double* bc = params_.data() + offsets_[slot + 1];
  c.context.assign(d, 0.0);
  for (std::size_t o = 0; o < d; ++o)
    c.context[o] = std::tanh(kernels::dot(wc + o * d, c.mean_embedding.data(), d) + bc[o]);

  // attention: squashed similarity of each node to the context
  c.attention.assign(n, 0.0);
  c.graph_embedding.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = kernels::dot(embeddings.row(i), c.context.data(), d);
    const double att = 1.0 / (1.0 + std::exp(-s));
    c.attention[i] = att;
    kernels::axpy(att, embeddings.row(i), c.graph_embedding.data(), d);
  }

  stack_forward(params_.data() + head_offset_, head_sizes_, c.graph_embedding, c.head);
  return {c.head.acts.back()[0], c.head.acts.back()[1]};
}

void Gnn::backward(const Matrix& adj_norm, const Cache& cache, double du, double dv,
                   std::vector<double>& grad) const {
  if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);
  const std::size_t n = cache.input.rows;
  const std::size_t d = gcn_widths_.back();
  const Matrix& embeddings = cache.activated.back();

  // head
  std::vector<double> d_graph(d, 0.0);
  {
    const double dout[2] = {du, dv};
    stack_backward(params_.data() + head_offset_, head_sizes_, cache.head,
                   std::span<const double>(dout, 2), grad.data() + head_offset_, d_graph.data());
  }

  // attention pooling
  Matrix d_embed(n, d);
  std::vector<double> d_context(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double att = cache.attention[i];
    const double d_att = kernels::dot(d_graph.data(), embeddings.row(i), d);
    kernels::axpy(att, d_graph.data(), d_embed.row(i), d);
    const double d_s = att * (1.0 - att) * d_att;
    kernels::axpy(d_s, embeddings.row(i), d_context.data(), d);
    kernels::axpy(d_s, cache.context.data(), d_embed.row(i), d);
  }
  // context transform
  {
    const std::size_t slot = offsets_.size() - 3;  // context W slot
    const double* wc = params_.data() + offsets_[slot];
    double* gwc = grad.data() + offsets_[slot];
    double* gbc = grad.data() + offsets_[slot + 1];
    std::vector<double> d_pre(d);
    for (std::size_t o = 0; o < d; ++o) {
      const double ctx = cache.context[o];
      d_pre[o] = (1.0 - ctx * ctx) * d_context[o];
    }
    std::vector<double> d_mean(d, 0.0);
    for (std::size_t o = 0; o < d; ++o) {
      kernels::axpy(d_pre[o], cache.mean_embedding.data(), gwc + o * d, d);
      gbc[o] += d_pre[o];
      kernels::axpy(d_pre[o], wc + o * d, d_mean.data(), d);
    }
    for (std::size_t i = 0; i < n; ++i)
      kernels::axpy(1.0 / static_cast<double>(n), d_mean.data(), d_embed.row(i), d);
  }

  // GCN stack, top down
  for (std::size_t li = gcn_widths_.size(); li-- > 0;) {
    const std::size_t width = gcn_widths_[li];
    const std::size_t prev_width = li == 0 ? input_width_ : gcn_widths_[li - 1];
    const Matrix& activated = cache.activated[li];
    const Matrix& aggregated = cache.aggregated[li];
    const double* w_base = params_.data() + offsets_[2 * li];
    double* gw = grad.data() + offsets_[2 * li];
    double* gb = grad.data() + offsets_[2 * li + 1];

    Matrix d_agg(n, prev_width);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t o = 0; o < width; ++o) {
        const double h = activated.at(i, o);
        const double dz = d_embed.at(i, o) * (1.0 - h * h);
        if (dz == 0.0) continue;
        kernels::axpy(dz, aggregated.row(i), gw + o * prev_width, prev_width);
        gb[o] += dz;
        kernels::axpy(dz, w_base + o * prev_width, d_agg.row(i), prev_width);
      }
    }
    if (li == 0) break;
    Matrix d_prev(n, prev_width);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double w = adj_norm.at(i, j);
        if (w != 0.0) kernels::axpy(w, d_agg.row(i), d_prev.row(j), prev_width);
      }
    d_embed = std::move(d_prev);
  }
}

std::string Gnn::to_json_text() const {
  json j;
  j["input_width"] = input_width_;
  j["gcn_widths"] = gcn_widths_;
  j["head_hidden"] = head_hidden_;
  j["params"] = params_;
  return j.dump();
}

Gnn Gnn::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("gnn: ") + e.what());
  }
  Gnn g;
  try {
    g.input_width_ = j.at("input_width").get<std::size_t>();
    g.gcn_widths_ = j.at("gcn_widths").get<std::vector<std::size_t>>();
    g.head_hidden_ = j.at("head_hidden").get<std::vector<std::size_t>>();
    g.params_ = j.at("params").get<std::vector<double>>();
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("gnn: ") + e.what());
  }
  g.compute_offsets();
  if (g.params_.size() != g.offsets_.back())
    fail(ErrorKind::ShapeError, "gnn parameter count does not match architecture");
  return g;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

ParamScales derive_scales(std::span<const PccParams> targets) {
  if (targets.empty()) fail(ErrorKind::EmptyInput, "no targets to derive scales from");
  double mean_a = 0.0;
  double mean_lb = 0.0;
  for (const auto& t : targets) {
    if (!(t.scale > 0.0)) fail(ErrorKind::DomainError, "target scale must be > 0");
    mean_a += t.exponent;
    mean_lb += std::log(t.scale);
  }
  const double n = static_cast<double>(targets.size());
  mean_a /= n;
  mean_lb /= n;
  double var_a = 0.0;
  double var_lb = 0.0;
  for (const auto& t : targets) {
    var_a += (t.exponent - mean_a) * (t.exponent - mean_a);
    var_lb += (std::log(t.scale) - mean_lb) * (std::log(t.scale) - mean_lb);
  }
  ParamScales scales;
  scales.sigma_a = std::sqrt(var_a / n);
  scales.sigma_logb = std::sqrt(var_lb / n);
  if (scales.sigma_a < 1e-12) scales.sigma_a = 1.0;
  if (scales.sigma_logb < 1e-12) scales.sigma_logb = 1.0;
  return scales;
}

template <typename Model>
TrainResult train_model(Model& model, const std::vector<NetExample>& examples,
                        const TrainingConfig& config, const ParamScales& scales) {
  if (examples.empty()) fail(ErrorKind::EmptyInput, "no training examples");

  const Rng root(config.seed);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<std::size_t> holdout;
  if (config.holdout_fraction > 0.0) {
    Rng split_rng = root.fork(0xd1f7);
    split_rng.shuffle(order);
    const auto n_holdout = static_cast<std::size_t>(
        config.holdout_fraction * static_cast<double>(examples.size()));
    holdout.assign(order.end() - static_cast<std::ptrdiff_t>(n_holdout), order.end());
    order.resize(order.size() - n_holdout);
  }
  if (order.empty()) fail(ErrorKind::ConfigError, "holdout leaves no training examples");

  auto& params = model.params();
  std::vector<double> grad(params.size(), 0.0);
  std::vector<double> adam_m(params.size(), 0.0);
  std::vector<double> adam_v(params.size(), 0.0);
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  std::uint64_t step = 0;

  const auto evaluate = [&](const std::vector<std::size_t>& idx) {
    double total = 0.0;
    for (const std::size_t i : idx) {
      const NetOutput out = model.forward_example(examples[i]);
      total += loss_and_grad(config.loss_kind, out, examples[i], config, scales).loss;
    }
    return total / static_cast<double>(idx.size());
  };

  TrainResult result;
  std::vector<double> best_params = params;
  double best_holdout = std::numeric_limits<double>::infinity();
  std::uint32_t since_best = 0;

  const std::uint32_t batch_size = std::max<std::uint32_t>(1, config.batch_size);
  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng = root.fork(0xe0000 + epoch);
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const NetExample& ex = examples[order[k]];
        typename Model::Cache cache;
        const NetOutput out = model.forward_example(ex, &cache);
        const LossGrad lg = loss_and_grad(config.loss_kind, out, ex, config, scales);
        epoch_loss += lg.loss;
        model.backward_example(ex, cache, lg.du * inv, lg.dv * inv, grad);
      }
      ++step;
      const double corr1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double corr2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t i = 0; i < params.size(); ++i) {
        adam_m[i] = kBeta1 * adam_m[i] + (1.0 - kBeta1) * grad[i];
        adam_v[i] = kBeta2 * adam_v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        params[i] -= config.learning_rate * (adam_m[i] / corr1) /
                     (std::sqrt(adam_v[i] / corr2) + kEps);
      }
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss))
      fail(ErrorKind::TrainingDiverged, "non-finite loss at epoch " + std::to_string(epoch));
    result.epoch_losses.push_back(epoch_loss);

    if (!holdout.empty()) {
      const double h = evaluate(holdout);
      if (h < best_holdout) {
        best_holdout = h;
        best_params = params;
        result.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= config.patience) {
        break;
      }
    }
  }
  if (!holdout.empty()) params = best_params;
  result.final_loss = evaluate(order);
  return result;
}

template TrainResult train_model<Mlp>(Mlp&, const std::vector<NetExample>&,
                                      const TrainingConfig&, const ParamScales&);
template TrainResult train_model<Gnn>(Gnn&, const std::vector<NetExample>&,
                                      const TrainingConfig&, const ParamScales&);

// ---------------------------------------------------------------------------
// TrainingConfig serialization
// ---------------------------------------------------------------------------

std::string TrainingConfig::to_json_text() const {
  json j;
  j["loss_kind"] = to_string(loss_kind);
  j["w_runtime"] = w_runtime;
  j["w_distill"] = w_distill;
  j["sigma_a"] = sigma_a;
  j["sigma_logb"] = sigma_logb;
  j["learning_rate"] = learning_rate;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["hidden"] = hidden;
  j["gcn_hidden"] = gcn_hidden;
  j["head_hidden"] = head_hidden;
  j["holdout_fraction"] = holdout_fraction;
  j["patience"] = patience;
  j["seed"] = seed;
  j["gbrt"] = {{"rounds", gbrt.rounds},
               {"max_depth", gbrt.max_depth},
               {"learning_rate", gbrt.learning_rate},
               {"l2_lambda", gbrt.l2_lambda},
               {"min_samples_leaf", gbrt.min_samples_leaf},
               {"max_bins", gbrt.max_bins},
               {"objective", gbrt.objective == GbrtObjective::Gamma ? "gamma" : "squared_log"}};
  return j.dump();
}

TrainingConfig TrainingConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("training config: ") + e.what());
  }
  TrainingConfig cfg;
  try {
    if (j.contains("loss_kind")) cfg.loss_kind = loss_kind_from_string(j.at("loss_kind"));
    cfg.w_runtime = j.value("w_runtime", cfg.w_runtime);
    cfg.w_distill = j.value("w_distill", cfg.w_distill);
    cfg.sigma_a = j.value("sigma_a", cfg.sigma_a);
    cfg.sigma_logb = j.value("sigma_logb", cfg.sigma_logb);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.hidden = j.value("hidden", cfg.hidden);
    cfg.gcn_hidden = j.value("gcn_hidden", cfg.gcn_hidden);
    cfg.head_hidden = j.value("head_hidden", cfg.head_hidden);
    cfg.holdout_fraction = j.value("holdout_fraction", cfg.holdout_fraction);
    cfg.patience = j.value("patience", cfg.patience);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("gbrt")) {
      const json& g = j.at("gbrt");
      cfg.gbrt.rounds = g.value("rounds", cfg.gbrt.rounds);
      cfg.gbrt.max_depth = g.value("max_depth", cfg.gbrt.max_depth);
      cfg.gbrt.learning_rate = g.value("learning_rate", cfg.gbrt.learning_rate);
      cfg.gbrt.l2_lambda = g.value("l2_lambda", cfg.gbrt.l2_lambda);
      cfg.gbrt.min_samples_leaf = g.value("min_samples_leaf", cfg.gbrt.min_samples_leaf);
      cfg.gbrt.max_bins = g.value("max_bins", cfg.gbrt.max_bins);
      if (g.contains("objective"))
        cfg.gbrt.objective = g.at("objective").get<std::string>() == "gamma"
                                 ? GbrtObjective::Gamma
                                 : GbrtObjective::SquaredLog;
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("training config: ") + e.what());
  }
  if (!(cfg.w_runtime >= 0.0) || !(cfg.w_distill >= 0.0))
    fail(ErrorKind::ConfigError, "loss component weights must be >= 0");
  return cfg;
}

}  // namespace tasq

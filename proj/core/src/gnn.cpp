#include "xeval/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "message_passing.hpp"
#include "xeval/error.hpp"
#include "xeval/random.hpp"

namespace xeval {

std::size_t GnnModel::input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }

std::size_t GnnModel::hidden_dim() const { return layers.empty() ? 0 : layers.back().weight.rows(); }

void GnnModel::validate() const {
  if (layers.empty()) throw DataError("model has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const DenseLayer& layer = layers[k];
    if (layer.weight.rows() == 0 || layer.weight.cols() == 0)
      throw DataError("layer " + std::to_string(k) + " has an empty weight matrix");
    if (layer.bias.size() != layer.weight.rows())
      throw DataError("layer " + std::to_string(k) + " bias length does not match its output");
    if (k > 0 && layer.weight.cols() != layers[k - 1].weight.rows())
      throw DataError("layer " + std::to_string(k) + " input does not match previous output");
    if (!layer.weight.all_finite() ||
        !std::all_of(layer.bias.begin(), layer.bias.end(), [](double x) { return std::isfinite(x); }))
      throw DataError("layer " + std::to_string(k) + " has non-finite parameters");
  }
  if (scorer.size() != 2 * hidden_dim()) throw DataError("scorer length must be 2 * hidden_dim");
  if (!std::all_of(scorer.begin(), scorer.end(), [](double x) { return std::isfinite(x); }))
    throw DataError("scorer has non-finite parameters");
}

GnnModel init_model(std::size_t input_dim, ModelShape shape, std::uint64_t seed) {
  if (input_dim == 0 || shape.layers == 0 || shape.hidden_dim == 0)
    throw UsageError("model dimensions and layer count must be positive");
  Rng rng(seed);
  GnnModel m;
  m.seed = seed;
  std::size_t in = input_dim;
  for (std::size_t k = 0; k < shape.layers; ++k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    DenseLayer layer{Matrix(shape.hidden_dim, in), std::vector<double>(shape.hidden_dim)};
    for (double& w : layer.weight.values()) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias) b = rng.uniform(-bound, bound);
    m.layers.push_back(std::move(layer));
    in = shape.hidden_dim;
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(2 * shape.hidden_dim));
  m.scorer.resize(2 * shape.hidden_dim);
  for (double& w : m.scorer) w = rng.uniform(-bound, bound);
  return m;
}

namespace {

void check_compatible(const PropertyGraph& g, const GnnModel& m) {
  if (m.layers.empty()) throw DataError("model has no layers");
  if (g.feature_dim() != m.input_dim())
    throw DataError("feature dimension " + std::to_string(g.feature_dim()) +
                    " does not match model input dimension " + std::to_string(m.input_dim()));
}

void check_index(const EmbeddingMatrix& e, NodeIndex v) {
  if (v >= e.rows()) throw UsageError("node index " + std::to_string(v) + " out of range");
}

}  // namespace

EmbeddingMatrix gnn_forward(const PropertyGraph& g, const GnnModel& m) {
  check_compatible(g, m);
  return detail::forward(g, m, nullptr).inputs.back();
}

EmbeddingMatrix gnn_forward_masked(const PropertyGraph& g, const GnnModel& m,
                                   std::span<const double> edge_weights) {
  check_compatible(g, m);
  if (edge_weights.size() != g.edge_count())
    throw UsageError("edge weight count does not match edge count");
  return detail::forward(g, m, edge_weights.data()).inputs.back();
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double ex = std::exp(x);
  return ex / (1.0 + ex);
}

double link_logit(const EmbeddingMatrix& e, const GnnModel& m, NodeIndex u, NodeIndex v) {
  check_index(e, u);
  check_index(e, v);
  const std::size_t d = e.cols();
  if (m.scorer.size() != 2 * d) throw DataError("scorer does not match embedding width");
  auto hu = e.row(u);
  auto hv = e.row(v);
  double z = 0.0;
  for (std::size_t i = 0; i < d; ++i) z += m.scorer[i] * (hu[i] + hv[i]);
  for (std::size_t i = 0; i < d; ++i) z += m.scorer[d + i] * (hu[i] * hv[i]);
  return z;
}

double score_link(const EmbeddingMatrix& e, const GnnModel& m, NodeIndex u, NodeIndex v) {
  return sigmoid(link_logit(e, m, u, v));
}

std::vector<double> flatten_parameters(const GnnModel& m) {
  std::vector<double> out;
  for (const DenseLayer& layer : m.layers) {
    out.insert(out.end(), layer.weight.values().begin(), layer.weight.values().end());
    out.insert(out.end(), layer.bias.begin(), layer.bias.end());
  }
  out.insert(out.end(), m.scorer.begin(), m.scorer.end());
  return out;
}

GnnModel with_parameters(const GnnModel& shape, std::span<const double> params) {
  GnnModel m = shape;
  std::size_t pos = 0;
  auto take = [&](std::vector<double>& dst) {
    if (pos + dst.size() > params.size()) throw UsageError("parameter vector too short");
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(pos), dst.size(), dst.begin());
    pos += dst.size();
  };
  for (DenseLayer& layer : m.layers) {
    take(layer.weight.values());
    take(layer.bias);
  }
  take(m.scorer);
  if (pos != params.size()) throw UsageError("parameter vector too long");
  return m;
}

double link_loss(const PropertyGraph& g, const GnnModel& m, std::span<const LinkExample> examples) {
  const EmbeddingMatrix e = gnn_forward(g, m);
  double total = 0.0;
  for (const LinkExample& ex : examples) {
    const double z = link_logit(e, m, ex.pair.u, ex.pair.v);
    total += detail::softplus(z) - ex.label * z;
  }
  return examples.empty() ? 0.0 : total / static_cast<double>(examples.size());
}

LossGradient link_loss_gradient(const PropertyGraph& g, const GnnModel& m,
                                std::span<const LinkExample> examples) {
  check_compatible(g, m);
  const auto trace = detail::forward(g, m, nullptr);
  const Matrix& e = trace.output();
  detail::ModelGradient grad(m);
  Matrix d_out(e.rows(), e.cols());
  double total = 0.0;
  const double inv_n = examples.empty() ? 0.0 : 1.0 / static_cast<double>(examples.size());
  for (const LinkExample& ex : examples) {
    const double z = link_logit(e, m, ex.pair.u, ex.pair.v);
    total += detail::softplus(z) - ex.label * z;
    const double d_logit = (sigmoid(z) - ex.label) * inv_n;
    detail::scorer_backward(m, e, ex.pair.u, ex.pair.v, d_logit, d_out, &grad.scorer);
  }
  detail::backward(g, m, trace, std::move(d_out), nullptr, &grad, nullptr);
  return {total * inv_n, grad.flatten()};
}

std::vector<NodePair> edge_pairs(const PropertyGraph& g) {
  std::vector<NodePair> out;
  std::set<NodePair> seen;
  for (const EdgeRecord& e : g.edges()) {
    if (e.src == e.dst) continue;
    const NodePair key{std::min(e.src, e.dst), std::max(e.src, e.dst)};
    if (seen.insert(key).second) out.push_back({e.src, e.dst});
  }
  return out;
}

std::vector<NodePair> sample_negatives(const PropertyGraph& g, std::span<const NodePair> positives,
                                       std::uint64_t seed) {
  std::set<NodePair> excluded;
  for (const NodePair& p : positives) excluded.insert({std::min(p.u, p.v), std::max(p.u, p.v)});
  for (const EdgeRecord& e : g.edges())
    excluded.insert({std::min(e.src, e.dst), std::max(e.src, e.dst)});

  std::vector<NodePair> candidates;
  for (NodeIndex u = 0; u < g.node_count(); ++u)
    for (NodeIndex v = u + 1; v < g.node_count(); ++v)
      if (!excluded.contains({u, v})) candidates.push_back({u, v});

  // Partial Fisher-Yates: the first `want` slots become the sample.
  const std::size_t want = std::min(positives.size(), candidates.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t j = i + rng.index(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(want);
  return candidates;
}

TrainResult train(const PropertyGraph& g, std::span<const NodePair> positives,
                  std::span<const NodePair> negatives, const TrainOptions& options) {
  if (positives.empty() && negatives.empty()) throw UsageError("empty training set");
  if (!(options.learning_rate > 0.0) || !std::isfinite(options.learning_rate))
    throw UsageError("learning rate must be positive and finite");

  std::set<NodePair> positive_keys;
  for (const NodePair& p : positives) positive_keys.insert({std::min(p.u, p.v), std::max(p.u, p.v)});
  for (const NodePair& p : negatives)
    if (positive_keys.contains({std::min(p.u, p.v), std::max(p.u, p.v)}))
      throw UsageError("positive and negative training pairs overlap");

  std::vector<LinkExample> examples;
  for (const NodePair& p : positives) examples.push_back({p, 1.0});
  for (const NodePair& p : negatives) examples.push_back({p, 0.0});
  for (const LinkExample& ex : examples)
    if (ex.pair.u >= g.node_count() || ex.pair.v >= g.node_count())
      throw UsageError("training pair references an unknown node");

  TrainResult result;
  result.model = init_model(g.feature_dim(), options.shape, options.seed);
  std::vector<double> params = flatten_parameters(result.model);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const LossGradient lg = link_loss_gradient(g, result.model, examples);
    if (!std::isfinite(lg.loss))
      throw NumericError("training loss became non-finite at epoch " + std::to_string(epoch) +
                         " (try a smaller learning rate)");
    result.loss_trace.push_back(lg.loss);
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i] -= options.learning_rate * lg.gradient[i];
    result.model = with_parameters(result.model, params);
  }
  return result;
}

}  // namespace xeval

#include "xeval/explainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "message_passing.hpp"
#include "xeval/diagnostics.hpp"
#include "xeval/error.hpp"
#include "xeval/random.hpp"

namespace xeval {

MaskMlp init_mask_mlp(std::size_t embedding_dim, const MaskOptions& options) {
  if (embedding_dim == 0 || options.hidden == 0)
    throw UsageError("mask MLP dimensions must be positive");
  Rng rng(options.seed);
  MaskMlp mlp;
  const double in_bound = 1.0 / std::sqrt(static_cast<double>(2 * embedding_dim));
  mlp.hidden_weight = Matrix(options.hidden, 2 * embedding_dim);
  for (double& w : mlp.hidden_weight.values()) w = rng.uniform(-in_bound, in_bound);
  mlp.hidden_bias.resize(options.hidden);
  for (double& b : mlp.hidden_bias) b = rng.uniform(-in_bound, in_bound);
  const double out_bound = 1.0 / std::sqrt(static_cast<double>(options.hidden));
  mlp.output_weight.resize(options.hidden);
  for (double& w : mlp.output_weight) w = rng.uniform(-out_bound, out_bound);
  mlp.output_bias = options.initial_bias;
  return mlp;
}

namespace {

struct MlpTrace {
  std::vector<double> hidden;  // edge_count x hidden, post-ReLU
  std::vector<double> weights;
};

// Fills the concatenated endpoint rows of edge e into `input`.
void edge_input(const PropertyGraph& g, const EmbeddingMatrix& emb, EdgeIndex e,
                std::vector<double>& input) {
  const std::size_t d = emb.cols();
  input.resize(2 * d);
  auto a = emb.row(g.edge(e).src);
  auto b = emb.row(g.edge(e).dst);
  std::copy(a.begin(), a.end(), input.begin());
  std::copy(b.begin(), b.end(), input.begin() + static_cast<std::ptrdiff_t>(d));
}

MlpTrace run_mlp(const MaskMlp& mlp, const PropertyGraph& g, const EmbeddingMatrix& emb) {
  if (mlp.hidden_weight.cols() != 2 * emb.cols())
    throw DataError("mask MLP input width does not match the embedding width");
  const std::size_t h = mlp.hidden_weight.rows();
  MlpTrace t;
  t.hidden.resize(g.edge_count() * h);
  t.weights.resize(g.edge_count());
  std::vector<double> input;
  for (EdgeIndex e = 0; e < g.edge_count(); ++e) {
    edge_input(g, emb, e, input);
    double out = mlp.output_bias;
    for (std::size_t j = 0; j < h; ++j) {
      const double pre = dot(mlp.hidden_weight.row(j), input) + mlp.hidden_bias[j];
      const double act = pre > 0.0 ? pre : 0.0;
      t.hidden[e * h + j] = act;
      out += mlp.output_weight[j] * act;
    }
    t.weights[e] = sigmoid(out);
  }
  return t;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

std::vector<double> edge_mask_weights(const MaskMlp& mlp, const PropertyGraph& g,
                                      const EmbeddingMatrix& embeddings) {
  return run_mlp(mlp, g, embeddings).weights;
}

double mask_loss(const MaskObjective& obj, const MaskMlp& mlp) {
  const auto weights = edge_mask_weights(mlp, obj.graph, obj.embeddings);
  const EmbeddingMatrix masked = gnn_forward_masked(obj.graph, obj.model, weights);
  const double z = link_logit(masked, obj.model, obj.target.u, obj.target.v);
  return detail::softplus(z) - obj.label * z + obj.sparsity * mean(weights);
}

LossGradient mask_loss_gradient(const MaskObjective& obj, const MaskMlp& mlp) {
  const PropertyGraph& g = obj.graph;
  const MlpTrace mt = run_mlp(mlp, g, obj.embeddings);
  const auto trace = detail::forward(g, obj.model, mt.weights.data());
  const Matrix& out = trace.output();
  const double z = link_logit(out, obj.model, obj.target.u, obj.target.v);
  const double loss = detail::softplus(z) - obj.label * z + obj.sparsity * mean(mt.weights);

  Matrix d_out(out.rows(), out.cols());
  detail::scorer_backward(obj.model, out, obj.target.u, obj.target.v, sigmoid(z) - obj.label,
                          d_out, nullptr);
  std::vector<double> d_weight(g.edge_count(), 0.0);
  detail::backward(g, obj.model, trace, std::move(d_out), mt.weights.data(), nullptr, &d_weight);

  const std::size_t h = mlp.hidden_weight.rows();
  const std::size_t in_dim = mlp.hidden_weight.cols();
  MaskMlp grad;
  grad.hidden_weight = Matrix(h, in_dim);
  grad.hidden_bias.assign(h, 0.0);
  grad.output_weight.assign(h, 0.0);
  grad.output_bias = 0.0;

  const double sparsity_grad =
      g.edge_count() ? obj.sparsity / static_cast<double>(g.edge_count()) : 0.0;
  std::vector<double> input;
  for (EdgeIndex e = 0; e < g.edge_count(); ++e) {
    const double w = mt.weights[e];
    const double d_o = (d_weight[e] + sparsity_grad) * w * (1.0 - w);
    if (d_o == 0.0) continue;
    grad.output_bias += d_o;
    edge_input(g, obj.embeddings, e, input);
    for (std::size_t j = 0; j < h; ++j) {
      const double act = mt.hidden[e * h + j];
      grad.output_weight[j] += d_o * act;
      if (act <= 0.0) continue;
      const double d_pre = d_o * mlp.output_weight[j];
      grad.hidden_bias[j] += d_pre;
      auto gw = grad.hidden_weight.row(j);
      for (std::size_t i = 0; i < in_dim; ++i) gw[i] += d_pre * input[i];
    }
  }
  return {loss, flatten_parameters(grad)};
}

std::vector<double> flatten_parameters(const MaskMlp& mlp) {
  std::vector<double> out(mlp.hidden_weight.values());
  out.insert(out.end(), mlp.hidden_bias.begin(), mlp.hidden_bias.end());
  out.insert(out.end(), mlp.output_weight.begin(), mlp.output_weight.end());
  out.push_back(mlp.output_bias);
  return out;
}

MaskMlp with_parameters(const MaskMlp& shape, std::span<const double> params) {
  MaskMlp mlp = shape;
  const std::size_t expected = mlp.hidden_weight.values().size() + mlp.hidden_bias.size() +
                               mlp.output_weight.size() + 1;
  if (params.size() != expected) throw UsageError("mask parameter vector has the wrong length");
  auto it = params.begin();
  for (double& w : mlp.hidden_weight.values()) w = *it++;
  for (double& b : mlp.hidden_bias) b = *it++;
  for (double& w : mlp.output_weight) w = *it++;
  mlp.output_bias = *it;
  return mlp;
}

EdgeMask learn_mask(const PropertyGraph& g, const GnnModel& m, const LinkTarget& target,
                    const MaskOptions& options) {
  if (target.src >= g.node_count() || target.dst >= g.node_count())
    throw UsageError("target node index out of range");
  if (options.sparsity < 0.0) throw UsageError("sparsity coefficient must be non-negative");

  const EmbeddingMatrix embeddings = gnn_forward(g, m);
  EdgeMask mask;
  mask.target = target;
  mask.original_score = score_link(embeddings, m, target.src, target.dst);
  if (!std::isfinite(mask.original_score))
    throw NumericError("original link score is not finite");

  const MaskObjective objective{g,        m, embeddings, {target.src, target.dst},
                                mask.original_score >= 0.5 ? 1.0 : 0.0, options.sparsity};
  MaskMlp mlp = init_mask_mlp(embeddings.cols(), options);
  std::vector<double> params = flatten_parameters(mlp);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const LossGradient lg = mask_loss_gradient(objective, mlp);
    if (!std::isfinite(lg.loss))
      throw NumericError("mask loss diverged at epoch " + std::to_string(epoch));
    mask.loss_trace.push_back(lg.loss);
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i] -= options.learning_rate * lg.gradient[i];
    mlp = with_parameters(mlp, params);
  }
  mask.weights = edge_mask_weights(mlp, g, embeddings);
  mask.masked_score = score_link(gnn_forward_masked(g, m, mask.weights), m, target.src, target.dst);
  mask.mlp = std::move(mlp);
  return mask;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

SubgraphExplanation extract_explanation(const PropertyGraph& g, const EdgeMask& mask,
                                        const ExtractOptions& options) {
  if (options.top_k == 0) throw UsageError("top_k must be at least 1");
  if (mask.weights.size() != g.edge_count())
    throw UsageError("mask does not cover the graph's edges");

  std::vector<EdgeIndex> ranked(g.edge_count());
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(), [&](EdgeIndex a, EdgeIndex b) {
    return mask.weights[a] > mask.weights[b];
  });

  std::size_t k = options.top_k;
  if (k > ranked.size()) {
    warn("top_k " + std::to_string(k) + " exceeds edge count " + std::to_string(ranked.size()) +
         "; clamping");
    k = ranked.size();
  }

  const NodeIndex u = mask.target.src;
  const NodeIndex v = mask.target.dst;
  DisjointSets sets(g.node_count());
  for (std::size_t i = 0; i < k; ++i) sets.unite(g.edge(ranked[i]).src, g.edge(ranked[i]).dst);
  if (options.enforce_connectivity) {
    while (sets.find(u) != sets.find(v) && k < ranked.size()) {
      sets.unite(g.edge(ranked[k]).src, g.edge(ranked[k]).dst);
      ++k;
    }
  }

  SubgraphExplanation out;
  out.target = mask.target;
  for (std::size_t i = 0; i < k; ++i) {
    const EdgeIndex e = ranked[i];
    if (options.enforce_connectivity) {
      const std::size_t root = sets.find(g.edge(e).src);
      if (root != sets.find(u) && root != sets.find(v)) continue;
    }
    out.edges.push_back({e, mask.weights[e]});
  }

  // Connected means: a single component that holds both endpoints.
  bool connected = sets.find(u) == sets.find(v);
  for (const WeightedEdge& we : out.edges)
    connected = connected && sets.find(g.edge(we.edge).src) == sets.find(u);
  out.connected = connected;
  out.important_features.scores.assign(g.feature_dim(), 0.0);
  return out;
}

FeatureImportance explanation_feature_importance(const PropertyGraph& g, const GnnModel& m,
                                                 const SubgraphExplanation& explanation) {
  std::set<NodeIndex> members{explanation.target.src, explanation.target.dst};
  for (const WeightedEdge& we : explanation.edges) {
    members.insert(g.edge(we.edge).src);
    members.insert(g.edge(we.edge).dst);
  }
  const std::vector<NodeIndex> member_list(members.begin(), members.end());
  const NodeIndex u = explanation.target.src;
  const NodeIndex v = explanation.target.dst;
  return occlusion_importance(g, m, member_list, [&](const EmbeddingMatrix& e, NodeIndex) {
    return score_link(e, m, u, v);
  });
}

SubgraphExplanation explain_link(const PropertyGraph& g, const GnnModel& m,
                                 const LinkTarget& target, const MaskOptions& mask_options,
                                 const ExtractOptions& extract_options) {
  const EdgeMask mask = learn_mask(g, m, target, mask_options);
  SubgraphExplanation out = extract_explanation(g, mask, extract_options);
  out.important_features = explanation_feature_importance(g, m, out);
  return out;
}

}  // namespace xeval

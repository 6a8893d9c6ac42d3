#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xeval/gnn.hpp"
#include "xeval/graph.hpp"
#include "xeval/importance.hpp"

namespace xeval {

struct LinkTarget {
  NodeIndex src = 0;
  NodeIndex dst = 0;
  std::string relation;

  friend bool operator==(const LinkTarget&, const LinkTarget&) = default;
};

// Edge-scoring MLP shared by every edge: o_e = w2 . ReLU(W1 [h_i | h_j] + b1) + b2,
// mask weight = sigmoid(o_e), where (i, j) are the edge's endpoints and h
// are rows of the frozen embedding matrix.
struct MaskMlp {
  Matrix hidden_weight;  // hidden x (2 * embedding_dim)
  std::vector<double> hidden_bias;
  std::vector<double> output_weight;
  double output_bias = 0.0;

  friend bool operator==(const MaskMlp&, const MaskMlp&) = default;
};

struct MaskOptions {
  double sparsity = 0.1;  // weight of the mean-mask-weight penalty
  std::size_t epochs = 100;
  double learning_rate = 0.1;
  std::size_t hidden = 16;
  std::uint64_t seed = 42;
  double initial_bias = 2.0;  // starting output bias; large values start every weight near 1
};

struct EdgeMask {
  LinkTarget target;
  std::vector<double> weights;  // one per graph edge, each in (0, 1)
  MaskMlp mlp;
  double original_score = 0.0;
  double masked_score = 0.0;
  std::vector<double> loss_trace;
};

MaskMlp init_mask_mlp(std::size_t embedding_dim, const MaskOptions& options);

std::vector<double> edge_mask_weights(const MaskMlp& mlp, const PropertyGraph& g,
                                      const EmbeddingMatrix& embeddings);

// Fidelity + sparsity objective for one target pair, with the model frozen.
struct MaskObjective {
  const PropertyGraph& graph;
  const GnnModel& model;
  const EmbeddingMatrix& embeddings;  // unmasked gnn_forward output, the MLP's input
  NodePair target;
  double label = 1.0;  // the original prediction, thresholded at 0.5
  double sparsity = 0.0;
};

double mask_loss(const MaskObjective& objective, const MaskMlp& mlp);
LossGradient mask_loss_gradient(const MaskObjective& objective, const MaskMlp& mlp);

std::vector<double> flatten_parameters(const MaskMlp& mlp);
MaskMlp with_parameters(const MaskMlp& shape, std::span<const double> params);

// Trains the mask MLP by gradient descent. Throws NumericError if the
// original score or the loss is non-finite.
EdgeMask learn_mask(const PropertyGraph& g, const GnnModel& m, const LinkTarget& target,
                    const MaskOptions& options);

struct WeightedEdge {
  EdgeIndex edge = 0;
  double weight = 0.0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

struct SubgraphExplanation {
  LinkTarget target;
  std::vector<WeightedEdge> edges;  // weight descending, edge index ascending on ties
  FeatureImportance important_features;
  bool connected = false;

  friend bool operator==(const SubgraphExplanation&, const SubgraphExplanation&) = default;
};

struct ExtractOptions {
  std::size_t top_k = 5;
  bool enforce_connectivity = true;
};

// Ranks all edges by mask weight and keeps the top_k. With connectivity
// enforced, next-ranked edges are added until src and dst share a component
// (or edges run out) and components touching neither endpoint are dropped.
// important_features is left empty; see explanation_feature_importance.
SubgraphExplanation extract_explanation(const PropertyGraph& g, const EdgeMask& mask,
                                        const ExtractOptions& options);

// Occlusion importance of the target's link score over the explanation's
// nodes (plus both endpoints).
FeatureImportance explanation_feature_importance(const PropertyGraph& g, const GnnModel& m,
                                                 const SubgraphExplanation& explanation);

// learn_mask + extract_explanation + explanation_feature_importance.
SubgraphExplanation explain_link(const PropertyGraph& g, const GnnModel& m,
                                 const LinkTarget& target, const MaskOptions& mask_options,
                                 const ExtractOptions& extract_options);

}  // namespace xeval

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "xeval/graph.hpp"
#include "xeval/matrix.hpp"

namespace xeval {

// Per-node representation rows, one per graph node.
using EmbeddingMatrix = Matrix;

// weight is (out x in); the layer computes ReLU(weight * x + bias).
struct DenseLayer {
  Matrix weight;
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Mean-aggregation message-passing network plus a symmetric link scorer.
//
// Layer update for node v with incident edges inc(v):
//   a_v = (h_v + sum_{(u,e) in inc(v)} w_e * h_u) / (1 + |inc(v)|)
//   h_v' = ReLU(W a_v + b)
// with w_e = 1 for the plain forward pass. The scorer reads
// [h_u + h_v | h_u * h_v] (elementwise product), so scores are symmetric.
struct GnnModel {
  std::vector<DenseLayer> layers;
  std::vector<double> scorer;  // length 2 * hidden_dim()
  std::uint64_t seed = 0;

  std::size_t layer_count() const noexcept { return layers.size(); }
  std::size_t input_dim() const;
  std::size_t hidden_dim() const;

  // Throws DataError if dimensions do not chain or a parameter is non-finite.
  void validate() const;

  friend bool operator==(const GnnModel&, const GnnModel&) = default;
};

struct ModelShape {
  std::size_t layers = 2;
  std::size_t hidden_dim = 16;
};

// Uniform initialisation in [-1/sqrt(fan_in), 1/sqrt(fan_in)] from `seed`.
GnnModel init_model(std::size_t input_dim, ModelShape shape, std::uint64_t seed);

EmbeddingMatrix gnn_forward(const PropertyGraph& g, const GnnModel& m);

// Forward pass with each edge's message scaled by edge_weights[e] before
// mean aggregation. An all-ones weight vector reproduces gnn_forward exactly.
EmbeddingMatrix gnn_forward_masked(const PropertyGraph& g, const GnnModel& m,
                                   std::span<const double> edge_weights);

double link_logit(const EmbeddingMatrix& e, const GnnModel& m, NodeIndex u, NodeIndex v);
double score_link(const EmbeddingMatrix& e, const GnnModel& m, NodeIndex u, NodeIndex v);

double sigmoid(double x);

struct NodePair {
  NodeIndex u = 0;
  NodeIndex v = 0;

  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

struct LinkExample {
  NodePair pair;
  double label = 0.0;  // 1 for a link, 0 for a non-link
};

struct TrainOptions {
  ModelShape shape;
  double learning_rate = 0.05;
  std::size_t epochs = 200;
  std::uint64_t seed = 42;
};

struct TrainResult {
  GnnModel model;
  std::vector<double> loss_trace;  // loss before each epoch's update
};

// Full-batch gradient descent on mean binary cross-entropy. Positives and
// negatives must be disjoint and not both empty. Throws NumericError if the
// loss becomes non-finite.
TrainResult train(const PropertyGraph& g, std::span<const NodePair> positives,
                  std::span<const NodePair> negatives, const TrainOptions& options);

// One uniformly drawn non-adjacent pair (u != v, no edge either way, not a
// positive) per positive. Fewer are returned if the graph runs out.
std::vector<NodePair> sample_negatives(const PropertyGraph& g, std::span<const NodePair> positives,
                                       std::uint64_t seed);

// Every edge as an (src, dst) pair, deduplicated, in edge order.
std::vector<NodePair> edge_pairs(const PropertyGraph& g);

// Flat parameter view: layer weights then biases per layer, then scorer.
std::vector<double> flatten_parameters(const GnnModel& m);
GnnModel with_parameters(const GnnModel& shape, std::span<const double> params);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

double link_loss(const PropertyGraph& g, const GnnModel& m, std::span<const LinkExample> examples);
LossGradient link_loss_gradient(const PropertyGraph& g, const GnnModel& m,
                                std::span<const LinkExample> examples);

// Versioned little-endian binary checkpoint.
void write_checkpoint(const GnnModel& m, std::ostream& out);
GnnModel read_checkpoint(std::istream& in);
void save_checkpoint(const GnnModel& m, const std::filesystem::path& path);
GnnModel load_checkpoint(const std::filesystem::path& path);

}  // namespace xeval

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "xeval/explainer.hpp"
#include "xeval/gnn.hpp"
#include "xeval/graph.hpp"
#include "xeval/importance.hpp"

namespace xeval {

struct Clustering {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;  // node -> cluster id in [0, k)
  Matrix centroids;                     // k x dim
  double inertia = 0.0;
  std::size_t iterations = 0;
  std::vector<double> inertia_trace;  // inertia after each assignment step

  std::vector<NodeIndex> members(std::size_t cluster) const;
};

struct ClusterOptions {
  std::size_t k = 0;  // 0 selects ceil(sqrt(rows))
  std::uint64_t seed = 42;
  // First farthest-first centre; drawn from `seed` when unset.
  std::optional<std::size_t> start;
  std::size_t max_iterations = 100;
};

std::size_t default_cluster_count(std::size_t rows);

// Lloyd's algorithm from farthest-first seeding. Ties go to the lowest
// index (for the next centre) and the lowest cluster id (for assignment);
// an emptied cluster keeps its previous centroid.
Clustering cluster_embeddings(const EmbeddingMatrix& rows, const ClusterOptions& options);

// Fraction of rows whose cluster's majority label equals their own label.
double cluster_purity(std::span<const std::size_t> assignment, std::span<const std::size_t> labels);

// Occlusion importance for one cluster. The probe for member v is the mean
// link score from v to its co-members. Singleton clusters give a zero vector
// with a warning.
FeatureImportance cluster_feature_importance(const PropertyGraph& g, const GnnModel& m,
                                             const Clustering& c, std::size_t cluster);

// Jaccard similarity of the top-m feature sets. Returns 0 with a warning if
// either side ranks no feature.
double overlap_score(const FeatureImportance& a, const FeatureImportance& b, std::size_t top_m);
double overlap_score(const SubgraphExplanation& explanation, const FeatureImportance& fi,
                     std::size_t top_m);

}  // namespace xeval

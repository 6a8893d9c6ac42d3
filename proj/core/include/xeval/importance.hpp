#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "xeval/gnn.hpp"
#include "xeval/graph.hpp"

namespace xeval {

// Non-negative per-feature importance scores, indexed by feature.
struct FeatureImportance {
  std::vector<double> scores;
  std::string method = "occlusion";

  // Indices of the (up to) m highest positive scores, ordered by score
  // descending then index ascending. Zero-score features are never ranked.
  std::vector<std::size_t> top(std::size_t m) const;

  friend bool operator==(const FeatureImportance&, const FeatureImportance&) = default;
};

// Quantity whose sensitivity to a member's features is measured. It sees the
// embeddings of a (possibly perturbed) graph and the member being perturbed.
using OcclusionProbe = std::function<double(const EmbeddingMatrix&, NodeIndex member)>;

// For each feature f: mean over members v of |probe(E, v) - probe(E_f^v, v)|,
// where E_f^v are the embeddings after zeroing feature f of node v only.
// g is never modified.
FeatureImportance occlusion_importance(const PropertyGraph& g, const GnnModel& m,
                                       std::span<const NodeIndex> members,
                                       const OcclusionProbe& probe);

}  // namespace xeval

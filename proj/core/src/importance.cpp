#include "xeval/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xeval {

std::vector<std::size_t> FeatureImportance::top(std::size_t m) const {
  std::vector<std::size_t> idx;
  for (std::size_t f = 0; f < scores.size(); ++f)
    if (scores[f] > 0.0) idx.push_back(f);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  if (idx.size() > m) idx.resize(m);
  return idx;
}

FeatureImportance occlusion_importance(const PropertyGraph& g, const GnnModel& m,
                                       std::span<const NodeIndex> members,
                                       const OcclusionProbe& probe) {
  const std::size_t d = g.feature_dim();
  FeatureImportance out{std::vector<double>(d, 0.0), "occlusion"};
  if (members.empty()) return out;

  const EmbeddingMatrix base = gnn_forward(g, m);
  for (NodeIndex v : members) {
    const double reference = probe(base, v);
    for (std::size_t f = 0; f < d; ++f) {
      std::vector<double> features = g.node(v).features;
      if (features[f] == 0.0) continue;  // zeroing is a no-op
      features[f] = 0.0;
      const EmbeddingMatrix perturbed = gnn_forward(g.with_node_features(v, std::move(features)), m);
      out.scores[f] += std::abs(reference - probe(perturbed, v));
    }
  }
  for (double& s : out.scores) s /= static_cast<double>(members.size());
  return out;
}

}  // namespace xeval

#include "xeval/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "xeval/diagnostics.hpp"
#include "xeval/error.hpp"
#include "xeval/random.hpp"

namespace xeval {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

std::vector<NodeIndex> Clustering::members(std::size_t cluster) const {
  std::vector<NodeIndex> out;
  for (NodeIndex v = 0; v < assignment.size(); ++v)
    if (assignment[v] == cluster) out.push_back(v);
  return out;
}

std::size_t default_cluster_count(std::size_t rows) {
  auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(rows))));
  return std::clamp<std::size_t>(k, rows ? 1 : 0, rows);
}

Clustering cluster_embeddings(const EmbeddingMatrix& rows, const ClusterOptions& options) {
  const std::size_t n = rows.rows();
  const std::size_t k = options.k ? options.k : default_cluster_count(n);
  if (k < 1 || k > n)
    throw UsageError("cluster count " + std::to_string(k) + " must lie in [1, " +
                     std::to_string(n) + "]");

  // Farthest-first seeding.
  std::size_t start = 0;
  if (options.start) {
    if (*options.start >= n) throw UsageError("clustering start row out of range");
    start = *options.start;
  } else {
    Rng rng(options.seed);
    start = rng.index(n);
  }
  std::vector<std::size_t> centres{start};
  std::vector<bool> chosen(n, false);
  chosen[start] = true;
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(rows.row(i), rows.row(start));
  while (centres.size() < k) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!chosen[i] && (best == n || nearest[i] > nearest[best])) best = i;
    centres.push_back(best);
    chosen[best] = true;
    for (std::size_t i = 0; i < n; ++i)
      nearest[i] = std::min(nearest[i], squared_distance(rows.row(i), rows.row(best)));
  }

  Clustering c;
  c.k = k;
  c.centroids = Matrix(k, rows.cols());
  for (std::size_t j = 0; j < k; ++j) {
    auto src = rows.row(centres[j]);
    std::copy(src.begin(), src.end(), c.centroids.row(j).begin());
  }
  c.assignment.assign(n, k);  // k marks "unassigned" so the first pass always changes

  const std::size_t max_iter = std::max<std::size_t>(1, options.max_iterations);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const double d = squared_distance(rows.row(i), c.centroids.row(j));
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      inertia += best_d;
      if (c.assignment[i] != best) {
        c.assignment[i] = best;
        changed = true;
      }
    }
    c.inertia_trace.push_back(inertia);
    c.iterations = iter + 1;
    if (!changed) break;

    Matrix sums(k, rows.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = sums.row(c.assignment[i]);
      auto src = rows.row(i);
      for (std::size_t f = 0; f < src.size(); ++f) dst[f] += src[f];
      ++counts[c.assignment[i]];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      auto dst = c.centroids.row(j);
      auto src = sums.row(j);
      for (std::size_t f = 0; f < src.size(); ++f) dst[f] = src[f] / static_cast<double>(counts[j]);
    }
  }
  c.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    c.inertia += squared_distance(rows.row(i), c.centroids.row(c.assignment[i]));
  return c;
}

double cluster_purity(std::span<const std::size_t> assignment, std::span<const std::size_t> labels) {
  if (assignment.size() != labels.size()) throw UsageError("assignment and label counts differ");
  if (assignment.empty()) return 1.0;
  std::map<std::size_t, std::map<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < assignment.size(); ++i) ++counts[assignment[i]][labels[i]];
  std::size_t agree = 0;
  for (const auto& [cluster, by_label] : counts) {
    std::size_t best = 0;
    for (const auto& [label, count] : by_label) best = std::max(best, count);
    agree += best;
  }
  return static_cast<double>(agree) / static_cast<double>(assignment.size());
}

FeatureImportance cluster_feature_importance(const PropertyGraph& g, const GnnModel& m,
                                             const Clustering& c, std::size_t cluster) {
  if (c.assignment.size() != g.node_count())
    throw UsageError("clustering does not match the graph's node count");
  if (cluster >= c.k) throw UsageError("cluster id out of range");
  const std::vector<NodeIndex> members = c.members(cluster);
  if (members.empty()) throw UsageError("cluster " + std::to_string(cluster) + " is empty");
  if (members.size() == 1) {
    warn("cluster " + std::to_string(cluster) + " is a singleton; importance defined as zero");
    return {std::vector<double>(g.feature_dim(), 0.0), "occlusion"};
  }
  return occlusion_importance(g, m, members, [&](const EmbeddingMatrix& e, NodeIndex v) {
    double total = 0.0;
    for (NodeIndex w : members)
      if (w != v) total += score_link(e, m, v, w);
    return total / static_cast<double>(members.size() - 1);
  });
}

double overlap_score(const FeatureImportance& a, const FeatureImportance& b, std::size_t top_m) {
  if (top_m == 0) throw UsageError("top_m must be at least 1");
  std::vector<std::size_t> sa = a.top(top_m);
  std::vector<std::size_t> sb = b.top(top_m);
  if (sa.empty() || sb.empty()) {
    warn("feature importance set is empty; overlap scored as 0");
    return 0.0;
  }
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<std::size_t> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  const std::size_t unite = sa.size() + sb.size() - common.size();
  return static_cast<double>(common.size()) / static_cast<double>(unite);
}

double overlap_score(const SubgraphExplanation& explanation, const FeatureImportance& fi,
                     std::size_t top_m) {
  return overlap_score(explanation.important_features, fi, top_m);
}

}  // namespace xeval

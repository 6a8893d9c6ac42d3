#include <gtest/gtest.h>

#include <numeric>

#include "oracles.hpp"
#include "xeval/cluster.hpp"
#include "xeval/diagnostics.hpp"
#include "xeval/error.hpp"

using namespace xeval;
using namespace xeval::testing;

namespace {

Matrix random_rows(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, dim);
  for (double& x : m.values()) x = rng.uniform(-3.0, 3.0);
  return m;
}

// Edgeless graph of all-ones features with a diagonal single-layer model and
// a scorer that only reads h_u + h_v. Each member's logit to a co-member then
// moves by exactly coef[f] when feature f is zeroed.
struct LinearFixture {
  PropertyGraph graph;
  GnnModel model;
  std::vector<double> coef;
};

LinearFixture linear_fixture() {
  const std::vector<double> diag{1.0, 2.0, 0.5, 1.0};
  const std::vector<double> sum_weights{0.3, -0.6, 1.4, 0.0};
  std::vector<NodeRecord> nodes;
  for (int i = 0; i < 4; ++i) nodes.push_back({"n" + std::to_string(i), "", std::vector<double>(4, 1.0)});
  LinearFixture fx{PropertyGraph::build(nodes, {}), {}, {}};
  DenseLayer layer{Matrix(4, 4), std::vector<double>(4, 0.0)};
  for (std::size_t f = 0; f < 4; ++f) {
    layer.weight(f, f) = diag[f];
    fx.coef.push_back(std::abs(diag[f] * sum_weights[f]));
  }
  fx.model.layers.push_back(layer);
  fx.model.scorer = sum_weights;
  fx.model.scorer.resize(8, 0.0);
  return fx;
}

Clustering single_cluster(std::size_t n) {
  Clustering c;
  c.k = 1;
  c.assignment.assign(n, 0);
  return c;
}

FeatureImportance scores(std::vector<double> s) {
  FeatureImportance fi;
  fi.scores = std::move(s);
  return fi;
}

}  // namespace

TEST(Cluster, EveryRowItsOwnCluster) {
  const Matrix rows = random_rows(7, 3, 1);
  ClusterOptions opt;
  opt.k = 7;
  const Clustering c = cluster_embeddings(rows, opt);
  EXPECT_EQ(c.inertia, 0.0);
  std::vector<std::size_t> sorted = c.assignment;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> ids(7);
  std::iota(ids.begin(), ids.end(), 0);
  EXPECT_EQ(sorted, ids);
}

TEST(Cluster, SeparatedBlobsArePure) {
  const Blobs blobs = two_blobs(25, 4, 3);
  ClusterOptions opt;
  opt.k = 2;
  const Clustering c = cluster_embeddings(blobs.rows, opt);
  EXPECT_EQ(cluster_purity(c.assignment, blobs.labels), 1.0);
}

TEST(Cluster, IdenticalRows) {
  const Matrix rows(5, 2, 1.5);
  ClusterOptions opt;
  opt.k = 3;
  const Clustering c = cluster_embeddings(rows, opt);
  EXPECT_EQ(c.inertia, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(c.centroids(i, 0), 1.5);
    EXPECT_EQ(c.centroids(i, 1), 1.5);
  }
  EXPECT_EQ(c.assignment, std::vector<std::size_t>(5, 0));
  EXPECT_EQ(cluster_embeddings(rows, opt).assignment, c.assignment);
}

TEST(Cluster, RejectsOutOfRangeK) {
  const Matrix rows = random_rows(4, 2, 2);
  ClusterOptions opt;
  opt.k = 5;
  EXPECT_THROW(cluster_embeddings(rows, opt), UsageError);
  EXPECT_EQ(default_cluster_count(10), 4u);
  EXPECT_EQ(default_cluster_count(9), 3u);
  opt.k = 0;
  EXPECT_EQ(cluster_embeddings(rows, opt).k, 2u);
}

TEST(Cluster, InertiaNonIncreasingAndCentroidsAreMeans) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix rows = random_rows(40, 3, seed);
    ClusterOptions opt;
    opt.k = 5;
    opt.seed = seed;
    const Clustering c = cluster_embeddings(rows, opt);
    for (std::size_t i = 1; i < c.inertia_trace.size(); ++i)
      EXPECT_LE(c.inertia_trace[i], c.inertia_trace[i - 1] + 1e-12);
    for (std::size_t k = 0; k < c.k; ++k) {
      const auto members = c.members(k);
      if (members.empty()) continue;
      for (std::size_t d = 0; d < 3; ++d) {
        double mean = 0.0;
        for (NodeIndex v : members) mean += rows(v, d);
        EXPECT_NEAR(c.centroids(k, d), mean / static_cast<double>(members.size()), 1e-12);
      }
    }
  }
}

TEST(Cluster, PermutationCovariant) {
  const Matrix rows = random_rows(30, 3, 9);
  std::vector<std::size_t> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(4);
  for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
  Matrix permuted(30, 3);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t d = 0; d < 3; ++d) permuted(i, d) = rows(perm[i], d);

  ClusterOptions opt;
  opt.k = 4;
  opt.start = 6;
  const Clustering base = cluster_embeddings(rows, opt);
  opt.start = static_cast<std::size_t>(std::find(perm.begin(), perm.end(), 6) - perm.begin());
  const Clustering moved = cluster_embeddings(permuted, opt);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(moved.assignment[i], base.assignment[perm[i]]);
}

TEST(Importance, IgnoredFeatureScoresZero) {
  const LinearFixture fx = linear_fixture();
  const FeatureImportance fi = cluster_feature_importance(fx.graph, fx.model, single_cluster(4), 0);
  EXPECT_EQ(fi.scores[3], 0.0);
  EXPECT_EQ(fi.method, "occlusion");
}

TEST(Importance, LinearFixtureFollowsCoefficientMagnitude) {
  const LinearFixture fx = linear_fixture();
  const FeatureImportance fi = cluster_feature_importance(fx.graph, fx.model, single_cluster(4), 0);
  std::vector<std::size_t> want(4);
  std::iota(want.begin(), want.end(), 0);
  std::stable_sort(want.begin(), want.end(), [&](std::size_t a, std::size_t b) { return fx.coef[a] > fx.coef[b]; });
  want.pop_back();  // the zero-coefficient feature is never ranked
  EXPECT_EQ(fi.top(4), want);
}

TEST(Importance, GraphUnchanged) {
  Rng rng(5);
  const PropertyGraph g = random_graph(8, 0.4, 3, rng);
  const PropertyGraph copy = g;
  const GnnModel m = init_model(3, ModelShape{2, 4}, 1);
  const FeatureImportance fi = cluster_feature_importance(g, m, single_cluster(8), 0);
  EXPECT_EQ(g, copy);
  for (double s : fi.scores) {
    EXPECT_TRUE(std::isfinite(s));
    EXPECT_GE(s, 0.0);
  }
  EXPECT_EQ(cluster_feature_importance(g, m, single_cluster(8), 0), fi);
}

TEST(Importance, SingletonClusterWarns) {
  const LinearFixture fx = linear_fixture();
  Clustering c;
  c.k = 2;
  c.assignment = {0, 0, 0, 1};
  ScopedWarningCapture capture;
  const FeatureImportance fi = cluster_feature_importance(fx.graph, fx.model, c, 1);
  EXPECT_EQ(fi.scores, std::vector<double>(4, 0.0));
  EXPECT_EQ(capture.messages().size(), 1u);
}

TEST(Overlap, JaccardExamples) {
  const FeatureImportance a = scores({0, 3, 2, 1, 0});
  const FeatureImportance b = scores({0, 0, 3, 2, 1});
  EXPECT_EQ(a.top(3), (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(overlap_score(a, b, 3), 0.5);
  EXPECT_DOUBLE_EQ(overlap_score(b, a, 3), 0.5);
  EXPECT_DOUBLE_EQ(overlap_score(a, a, 3), 1.0);
  EXPECT_DOUBLE_EQ(overlap_score(scores({1, 1, 0, 0}), scores({0, 0, 1, 1}), 2), 0.0);
}

TEST(Overlap, TopOrdersByScoreThenIndex) {
  EXPECT_EQ(scores({1, 2, 2, 0, 1}).top(10), (std::vector<std::size_t>{1, 2, 0, 4}));
}

TEST(Overlap, EmptySideWarnsAndScoresZero) {
  ScopedWarningCapture capture;
  EXPECT_EQ(overlap_score(scores({0, 0}), scores({1, 0}), 2), 0.0);
  EXPECT_EQ(capture.messages().size(), 1u);
  SubgraphExplanation x;
  x.important_features = scores({0, 1});
  EXPECT_EQ(overlap_score(x, scores({0, 1}), 1), 1.0);
}

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "xeval/error.hpp"
#include "xeval/gnn.hpp"

using namespace xeval;
using namespace xeval::testing;

namespace {

GnnModel identity_model(std::size_t dim) {
  GnnModel m;
  DenseLayer layer{Matrix(dim, dim), std::vector<double>(dim, 0.0)};
  for (std::size_t i = 0; i < dim; ++i) layer.weight(i, i) = 1.0;
  m.layers.push_back(layer);
  m.scorer.assign(2 * dim, 0.0);
  return m;
}

PropertyGraph lab_graph() {
  return load_graph(fixture_path("lab/nodes.tsv"), fixture_path("lab/edges.tsv"));
}

// Two 5-node rings with distinct feature profiles joined by one edge.
PropertyGraph communities() {
  std::vector<NodeRecord> nodes;
  for (int i = 0; i < 10; ++i) {
    const bool left = i < 5;
    nodes.push_back({"v" + std::to_string(i), "",
                     {left ? 1.0 : 0.0, left ? 0.8 + 0.05 * i : 0.1, left ? 0.0 : 1.0,
                      left ? 0.1 : 0.6 + 0.05 * i}});
  }
  std::vector<EdgeRecord> edges;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 5; ++i) {
      edges.push_back({static_cast<NodeIndex>(5 * c + i), "r", static_cast<NodeIndex>(5 * c + (i + 1) % 5)});
      edges.push_back({static_cast<NodeIndex>(5 * c + i), "r", static_cast<NodeIndex>(5 * c + (i + 2) % 5)});
    }
  edges.push_back({4, "r", 5});
  return PropertyGraph::build(std::move(nodes), std::move(edges));
}

}  // namespace

TEST(Forward, ZeroFeaturesAndBiasesGiveZeroEmbeddings) {
  const PropertyGraph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}}, 3, 1);
  std::vector<NodeRecord> nodes = g.nodes();
  for (auto& n : nodes) n.features.assign(3, 0.0);
  const PropertyGraph zero = PropertyGraph::build(nodes, g.edges());
  GnnModel m = init_model(3, ModelShape{2, 5}, 9);
  for (auto& l : m.layers) std::fill(l.bias.begin(), l.bias.end(), 0.0);
  const Matrix e = gnn_forward(zero, m);
  for (double x : e.values()) EXPECT_EQ(x, 0.0);
}

TEST(Forward, HandComputedMeanAggregation) {
  std::vector<NodeRecord> nodes{{"a", "", {1, 0}}, {"b", "", {0, 1}}, {"c", "", {1, 1}}};
  const PropertyGraph g = PropertyGraph::build(nodes, {{0, "r", 1}, {1, "r", 2}});
  const Matrix e = gnn_forward(g, identity_model(2));
  EXPECT_DOUBLE_EQ(e(1, 0), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(e(1, 1), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(e(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(e(0, 1), 0.5);
}

TEST(Forward, MatchesDenseReference) {
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const PropertyGraph g = random_graph(9, 0.3, 3, rng);
    const GnnModel m = init_model(3, ModelShape{1 + rng.index(3), 4}, rng.next());
    const Matrix got = gnn_forward(g, m);
    const Matrix want = reference_forward(g, m);
    for (std::size_t i = 0; i < got.values().size(); ++i)
      EXPECT_NEAR(got.values()[i], want.values()[i], 1e-12);
    std::vector<double> w(g.edge_count());
    for (double& x : w) x = rng.uniform();
    const Matrix got_masked = gnn_forward_masked(g, m, w);
    const Matrix want_masked = reference_forward(g, m, w);
    for (std::size_t i = 0; i < got_masked.values().size(); ++i)
      EXPECT_NEAR(got_masked.values()[i], want_masked.values()[i], 1e-12);
  }
}

TEST(Forward, MultiEdgesCountPerEdge) {
  std::vector<NodeRecord> nodes{{"a", "", {1}}, {"b", "", {0}}};
  const PropertyGraph g = PropertyGraph::build(nodes, {{0, "r", 1}, {0, "s", 1}});
  const Matrix e = gnn_forward(g, identity_model(1));
  EXPECT_DOUBLE_EQ(e(1, 0), 2.0 / 3.0);
}

TEST(Forward, AllOnesMaskIsBitwiseIdentical) {
  Rng rng(6);
  const PropertyGraph g = random_graph(12, 0.3, 4, rng);
  const GnnModel m = init_model(4, ModelShape{3, 6}, 2);
  EXPECT_EQ(gnn_forward_masked(g, m, std::vector<double>(g.edge_count(), 1.0)), gnn_forward(g, m));
}

TEST(Forward, DimensionMismatch) {
  const PropertyGraph g = make_graph(3, {{0, 1}}, 2, 0);
  EXPECT_THROW(gnn_forward(g, init_model(3, {}, 1)), DataError);
}

TEST(Forward, DeterministicInitialisation) {
  EXPECT_EQ(init_model(3, {}, 5), init_model(3, {}, 5));
  EXPECT_NE(init_model(3, {}, 5), init_model(3, {}, 6));
  const GnnModel m = init_model(4, ModelShape{2, 8}, 1);
  for (double w : m.layers[0].weight.values()) EXPECT_LE(std::abs(w), 0.5);
  for (double w : m.layers[1].weight.values()) EXPECT_LE(std::abs(w), 1.0 / std::sqrt(8.0));
}

TEST(Score, ZeroScorerGivesHalf) {
  const PropertyGraph g = make_graph(4, {{0, 1}, {2, 3}}, 2, 3);
  GnnModel m = init_model(2, {}, 3);
  std::fill(m.scorer.begin(), m.scorer.end(), 0.0);
  const Matrix e = gnn_forward(g, m);
  for (NodeIndex u = 0; u < 4; ++u)
    for (NodeIndex v = 0; v < 4; ++v) EXPECT_EQ(score_link(e, m, u, v), 0.5);
}

TEST(Score, SymmetricAndInUnitInterval) {
  Rng rng(8);
  const PropertyGraph g = random_graph(10, 0.3, 3, rng);
  const GnnModel m = init_model(3, {}, 8);
  const Matrix e = gnn_forward(g, m);
  for (NodeIndex u = 0; u < 10; ++u)
    for (NodeIndex v = 0; v < 10; ++v) {
      const double s = score_link(e, m, u, v);
      EXPECT_EQ(s, score_link(e, m, v, u));
      EXPECT_GT(s, 0.0);
      EXPECT_LT(s, 1.0);
    }
  EXPECT_THROW(score_link(e, m, 0, 10), UsageError);
}

TEST(Train, ZeroEpochsReturnsInitialisation) {
  const PropertyGraph g = lab_graph();
  const auto pos = edge_pairs(g);
  TrainOptions opt;
  opt.epochs = 0;
  const TrainResult r = train(g, pos, sample_negatives(g, pos, 1), opt);
  EXPECT_EQ(r.model, init_model(g.feature_dim(), opt.shape, opt.seed));
  EXPECT_TRUE(r.loss_trace.empty());
}

TEST(Train, LossNonIncreasingForHalvedLearningRate) {
  const PropertyGraph g = lab_graph();
  const auto pos = edge_pairs(g);
  const auto neg = sample_negatives(g, pos, 3);
  TrainOptions opt;
  opt.epochs = 150;
  bool monotone = false;
  for (opt.learning_rate = 4.0; opt.learning_rate > 1e-4 && !monotone; opt.learning_rate /= 2) {
    const TrainResult r = train(g, pos, neg, opt);
    monotone = std::is_sorted(r.loss_trace.rbegin(), r.loss_trace.rend());
  }
  EXPECT_TRUE(monotone);
}

TEST(Train, LearnsCommunities) {
  const PropertyGraph g = communities();
  const auto pos = edge_pairs(g);
  TrainOptions opt;
  opt.shape = {2, 8};
  opt.learning_rate = 0.5;
  opt.epochs = 300;
  const TrainResult r = train(g, pos, sample_negatives(g, pos, 2), opt);
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front());
  const Matrix e = gnn_forward(g, r.model);
  double min_within = 1.0, max_cross = 0.0;
  for (NodeIndex u = 0; u < 10; ++u)
    for (NodeIndex v = u + 1; v < 10; ++v) {
      const double s = score_link(e, r.model, u, v);
      if ((u < 5) == (v < 5)) min_within = std::min(min_within, s);
      else max_cross = std::max(max_cross, s);
    }
  EXPECT_GT(min_within, max_cross);
}

TEST(Train, DeterministicGivenSeed) {
  const PropertyGraph g = lab_graph();
  const auto pos = edge_pairs(g);
  const auto neg = sample_negatives(g, pos, 3);
  TrainOptions opt;
  opt.epochs = 20;
  const TrainResult a = train(g, pos, neg, opt);
  const TrainResult b = train(g, pos, neg, opt);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  EXPECT_EQ(a.loss_trace.size(), 20u);
}

TEST(Train, Errors) {
  const PropertyGraph g = lab_graph();
  const auto pos = edge_pairs(g);
  EXPECT_THROW(train(g, {}, {}, {}), UsageError);
  EXPECT_THROW(train(g, pos, pos, {}), UsageError);
  TrainOptions wild;
  wild.learning_rate = 1e300;
  wild.epochs = 50;
  EXPECT_THROW(train(g, pos, sample_negatives(g, pos, 1), wild), NumericError);
}

TEST(Train, GradientMatchesFiniteDifferences) {
  const PropertyGraph g = lab_graph();
  const GnnModel m = init_model(g.feature_dim(), ModelShape{2, 5}, 12);
  std::vector<LinkExample> ex;
  const auto pos = edge_pairs(g);
  for (const auto& p : pos) ex.push_back({p, 1.0});
  for (const auto& p : sample_negatives(g, pos, 4)) ex.push_back({p, 0.0});
  const LossGradient lg = link_loss_gradient(g, m, ex);
  EXPECT_DOUBLE_EQ(lg.loss, link_loss(g, m, ex));
  const double err = gradient_relative_error(
      [&](std::span<const double> p) { return link_loss(g, with_parameters(m, p), ex); },
      flatten_parameters(m), lg.gradient);
  EXPECT_LE(err, 1e-4);
}

TEST(NegativeSampling, DrawsDistinctNonEdges) {
  const PropertyGraph g = lab_graph();
  const auto pos = edge_pairs(g);
  const auto neg = sample_negatives(g, pos, 9);
  EXPECT_EQ(neg.size(), pos.size());
  std::set<std::pair<NodeIndex, NodeIndex>> seen;
  for (const NodePair& p : neg) {
    EXPECT_NE(p.u, p.v);
    EXPECT_FALSE(g.edge_between(p.u, p.v).has_value());
    EXPECT_TRUE(seen.insert({std::min(p.u, p.v), std::max(p.u, p.v)}).second);
  }
  EXPECT_EQ(sample_negatives(g, pos, 9), neg);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const PropertyGraph g = lab_graph();
  const GnnModel m = init_model(g.feature_dim(), ModelShape{3, 7}, 77);
  std::stringstream buf;
  write_checkpoint(m, buf);
  const GnnModel back = read_checkpoint(buf);
  EXPECT_EQ(back, m);
  const Matrix a = gnn_forward(g, m), b = gnn_forward(g, back);
  EXPECT_EQ(score_link(a, m, 0, 4), score_link(b, back, 0, 4));
}

TEST(Checkpoint, RejectsCorruption) {
  const GnnModel m = init_model(3, {}, 1);
  std::stringstream buf;
  write_checkpoint(m, buf);
  const std::string bytes = buf.str();

  std::istringstream bad_magic("NOTAGNN!" + bytes.substr(8));
  EXPECT_THROW(read_checkpoint(bad_magic), DataError);
  std::istringstream truncated(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(read_checkpoint(truncated), DataError);
  std::istringstream trailing(bytes + "x");
  EXPECT_THROW(read_checkpoint(trailing), DataError);
  EXPECT_THROW(load_checkpoint("/nonexistent/model.ckpt"), UsageError);
}

#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "xeval/error.hpp"
#include "xeval/evaluator.hpp"
#include "xeval/json_io.hpp"

using namespace xeval;
using namespace xeval::testing;

namespace {

struct Lab {
  PropertyGraph graph;
  GnnModel model;
  CorpusIndex corpus;
  KnowledgeBase kb;
  Lexicon lexicon;
  std::vector<TargetSpec> targets;
};

const Lab& lab() {
  static const Lab instance = [] {
    Lab l;
    l.graph = load_graph(fixture_path("lab/nodes.tsv"), fixture_path("lab/edges.tsv"));
    const auto pos = edge_pairs(l.graph);
    TrainOptions opt;
    opt.shape = {2, 8};
    opt.learning_rate = 0.5;
    opt.epochs = 150;
    opt.seed = 7;
    l.model = train(l.graph, pos, sample_negatives(l.graph, pos, 7), opt).model;
    l.corpus = build_index(fixture_path("lab/corpus.jsonl"));
    l.kb = load_kb(fixture_path("lab/lab.kb"));
    l.lexicon = load_lexicon(fixture_path("lab/lexicon.tsv"));
    l.targets = load_targets(fixture_path("lab/targets.tsv"));
    return l;
  }();
  return instance;
}

EvaluatorConfig lab_config() {
  EvaluatorConfig c;
  c.mask.epochs = 40;
  c.extract.top_k = 4;
  c.cluster_k = 2;
  c.top_m = 2;
  return c;
}

std::string dump(const Evaluator& ev, const EvidenceReport& r) {
  return report_to_json(ev.graph(), r, ev.knowledge_base()).dump();
}

}  // namespace

TEST(Fuse, WorkedExample) {
  ChannelWeights w{2, 1, 1, 0};
  const std::map<Channel, double> scores{{Channel::cluster_overlap, 1.0}, {Channel::path, 0.5}, {Channel::text, 0.0}};
  EXPECT_DOUBLE_EQ(fuse(scores, w), 0.625);
  EXPECT_EQ(classify(0.625, {}), Verdict::moderate);
}

TEST(Fuse, ZeroAndUnitCases) {
  std::map<Channel, double> zeros, ones;
  for (Channel c : kAllChannels) {
    zeros[c] = 0.0;
    ones[c] = 1.0;
  }
  const ChannelWeights equal{1, 1, 1, 1};
  EXPECT_EQ(fuse(zeros, equal), 0.0);
  EXPECT_EQ(classify(fuse(zeros, equal), {}), Verdict::weak);
  EXPECT_EQ(fuse(ones, equal), 1.0);
  EXPECT_EQ(classify(fuse(ones, equal), {}), Verdict::strong);
}

TEST(Fuse, Errors) {
  const std::map<Channel, double> scores{{Channel::path, 0.5}};
  EXPECT_THROW(fuse(scores, ChannelWeights{1, 0, 1, 1}), UsageError);
  EXPECT_THROW(fuse(scores, ChannelWeights{-1, 1, 1, 1}), UsageError);
  EXPECT_THROW(fuse({}, ChannelWeights{}), UsageError);
}

TEST(Fuse, MonotoneAndScaleInvariant) {
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    ChannelWeights w{rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0.1, 3)};
    std::map<Channel, double> s;
    for (Channel c : kAllChannels) s[c] = rng.uniform();
    const double base = fuse(s, w);
    EXPECT_GE(base, 0.0);
    EXPECT_LE(base, 1.0);

    const double factor = rng.uniform(0.01, 100.0);
    ChannelWeights scaled = w;
    for (Channel c : kAllChannels) scaled[c] *= factor;
    EXPECT_NEAR(fuse(s, scaled), base, 1e-12);

    auto bumped = s;
    const Channel c = kAllChannels[rng.index(4)];
    bumped[c] = std::min(1.0, bumped[c] + rng.uniform());
    EXPECT_GE(fuse(bumped, w), base);
  }
}

TEST(Classify, Thresholds) {
  EXPECT_EQ(classify(0.66, {}), Verdict::strong);
  EXPECT_EQ(classify(0.6599, {}), Verdict::moderate);
  EXPECT_EQ(classify(0.33, {}), Verdict::moderate);
  EXPECT_EQ(classify(0.3299, {}), Verdict::weak);
  EXPECT_EQ(verdict_name(Verdict::strong), "strong");
}

TEST(Targets, ReadWithAndWithoutHeader) {
  std::istringstream with("src_id\trelation\tdst_id\na\tr\tb\n\nc\ts\td\n");
  EXPECT_EQ(read_targets(with), (std::vector<TargetSpec>{{"a", "r", "b"}, {"c", "s", "d"}}));
  std::istringstream without("a\tr\tb\n");
  EXPECT_EQ(read_targets(without).size(), 1u);
  std::istringstream bad("a\tr\tb\nonly two\tcols\n");
  try {
    read_targets(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_EQ(to_string(goal_for({"Alice", "knows", "bob-2"})), "knows(alice, bob_2)");
}

TEST(Evaluator, AllChannelsDisabledIsRejected) {
  EvaluatorConfig c = lab_config();
  c.weights = {0, 0, 0, 0};
  EXPECT_THROW(Evaluator(lab().graph, lab().model, c, lab().corpus, lab().kb, lab().lexicon), UsageError);
  // Reasoner weight alone but no knowledge base.
  c.weights = {0, 0, 0, 1};
  EXPECT_THROW(Evaluator(lab().graph, lab().model, c), UsageError);
}

TEST(Evaluator, PayloadsMatchChannels) {
  const Evaluator ev(lab().graph, lab().model, lab_config(), lab().corpus, lab().kb, lab().lexicon);
  EXPECT_EQ(ev.active_channels().size(), 4u);
  for (const TargetSpec& t : lab().targets) {
    const EvidenceReport r = ev.evaluate_prediction(t);
    EXPECT_EQ(r.explanation.has_value(), r.channels.contains(Channel::cluster_overlap));
    EXPECT_EQ(r.paths.has_value(), r.channels.contains(Channel::path));
    EXPECT_EQ(r.text.has_value(), r.channels.contains(Channel::text));
    EXPECT_EQ(r.goal.has_value(), r.channels.contains(Channel::reasoner));
    EXPECT_EQ(r.proof.has_value(), r.channels.at(Channel::reasoner) == 1.0);
    EXPECT_EQ(r.aggregate, fuse(r.channels, ev.config().weights));
    EXPECT_EQ(r.verdict, classify(r.aggregate, ev.config().thresholds));
    for (const auto& [c, s] : r.channels) {
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, 1.0);
    }
  }
}

TEST(Evaluator, MissingCorpusDropsTextChannel) {
  const Evaluator ev(lab().graph, lab().model, lab_config(), std::nullopt, lab().kb, lab().lexicon);
  const EvidenceReport r = ev.evaluate_prediction(lab().targets[0]);
  EXPECT_FALSE(r.channels.contains(Channel::text));
  EXPECT_FALSE(r.text.has_value());
  EXPECT_EQ(ev.active_channels().size(), 3u);
}

TEST(Evaluator, TargetOwnTripleIsNotAFact) {
  const Evaluator ev(lab().graph, lab().model, lab_config(), lab().corpus, lab().kb, lab().lexicon);
  // alice knows bob is an edge of the graph, so only the rules could entail it.
  const EvidenceReport r = ev.evaluate_prediction({"alice", "knows", "bob"});
  if (r.proof)
    for (const ProofStep& s : r.proof->steps)
      if (s.kind == ProofStep::Kind::asserted) EXPECT_NE(*s.atom, *r.goal);
  EXPECT_THROW(ev.evaluate_prediction({"alice", "knows", "alice"}), UsageError);
}

TEST(Batch, SingletonMatchesSingleEvaluation) {
  const Evaluator ev(lab().graph, lab().model, lab_config(), lab().corpus, lab().kb, lab().lexicon);
  const BatchResult b = ev.evaluate_batch({lab().targets[1]});
  ASSERT_EQ(b.reports.size(), 1u);
  ASSERT_TRUE(b.reports[0]);
  EXPECT_EQ(dump(ev, *b.reports[0]), dump(ev, ev.evaluate_prediction(lab().targets[1])));
}

TEST(Batch, FailingTargetBecomesErrorRecord) {
  const Evaluator ev(lab().graph, lab().model, lab_config(), lab().corpus, lab().kb, lab().lexicon);
  const BatchResult b = ev.evaluate_batch({lab().targets[0], {"alice", "knows", "mallory"}, lab().targets[2]}, 2);
  ASSERT_EQ(b.reports.size(), 3u);
  EXPECT_TRUE(b.reports[0]);
  EXPECT_FALSE(b.reports[1]);
  EXPECT_TRUE(b.reports[2]);
  ASSERT_EQ(b.errors.size(), 1u);
  EXPECT_EQ(b.errors[0].index, 1u);
  EXPECT_NE(b.errors[0].message.find("mallory"), std::string::npos);
  EXPECT_EQ(b.summary.reports, 2u);
  EXPECT_EQ(b.summary.errors, 1u);
}

TEST(Batch, SummaryMeansMatchHandAverages) {
  const Evaluator ev(lab().graph, lab().model, lab_config(), lab().corpus, lab().kb, lab().lexicon);
  const BatchResult b = ev.evaluate_batch(lab().targets, 1);
  ASSERT_EQ(b.reports.size(), 4u);
  std::map<Channel, double> sums;
  double aggregate = 0.0;
  std::map<Verdict, std::size_t> verdicts;
  for (const auto& r : b.reports) {
    ASSERT_TRUE(r);
    for (const auto& [c, s] : r->channels) sums[c] += s;
    aggregate += r->aggregate;
    ++verdicts[r->verdict];
  }
  for (const auto& [c, s] : sums) {
    EXPECT_NEAR(b.summary.channel_means.at(c), s / 4.0, 1e-12);
    EXPECT_EQ(b.summary.channel_counts.at(c), 4u);
  }
  EXPECT_NEAR(b.summary.aggregate_mean, aggregate / 4.0, 1e-12);
  for (const auto& [v, n] : verdicts) EXPECT_EQ(b.summary.verdicts.at(v), n);
  EXPECT_EQ(b.summary.targets, 4u);
}

TEST(Batch, ThreadCountDoesNotChangeResults) {
  const Evaluator ev(lab().graph, lab().model, lab_config(), lab().corpus, lab().kb, lab().lexicon);
  std::vector<TargetSpec> targets = lab().targets;
  targets.insert(targets.end(), lab().targets.begin(), lab().targets.end());
  const BatchResult one = ev.evaluate_batch(targets, 1);
  const BatchResult four = ev.evaluate_batch(targets, 4);
  for (std::size_t i = 0; i < targets.size(); ++i)
    EXPECT_EQ(dump(ev, *one.reports[i]), dump(ev, *four.reports[i]));
  EXPECT_EQ(summary_to_json(one.summary, one.errors).dump(), summary_to_json(four.summary, four.errors).dump());
}

#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "xeval/error.hpp"
#include "xeval/text.hpp"

using namespace xeval;
using namespace xeval::testing;

namespace {

CorpusIndex three_docs() {
  return CorpusIndex::build({{"d1", "Alice met Bob. Bob left!"},
                             {"d2", "Carol knows alice"},
                             {"d3", "Nobody here? Alice Smith writes."}});
}

TextEvidence item(double score) {
  TextEvidence e;
  e.score = score;
  return e;
}

}  // namespace

TEST(Corpus, EmptyCorpusHasNoPostings) {
  std::istringstream in("");
  const CorpusIndex idx = read_corpus(in);
  EXPECT_EQ(idx.posting_count(), 0u);
  EXPECT_EQ(idx.sentence_count(), 0u);
  EXPECT_TRUE(retrieve_evidence(idx, "a", "b", 5).empty());
}

TEST(Corpus, SplitsSentences) {
  const CorpusIndex idx = CorpusIndex::build({{"x", "A b. C d."}});
  EXPECT_EQ(idx.sentence_count(), 2u);
  EXPECT_EQ(idx.documents()[0].sentences, (std::vector<std::string>{"A b.", "C d."}));
  EXPECT_EQ(split_sentences("v1.2 is out. Really"), (std::vector<std::string>{"v1.2 is out.", "Really"}));
  EXPECT_EQ(tokenize("Ada-Lovelace, 1815!"), (std::vector<std::string>{"ada", "lovelace", "1815"}));
}

TEST(Corpus, PostingsMatchHandBuiltIndex) {
  const CorpusIndex idx = three_docs();
  const std::map<std::string, std::vector<Posting>> want{
      {"alice", {{0, 0}, {1, 0}, {2, 1}}},
      {"met", {{0, 0}}},
      {"bob", {{0, 0}, {0, 1}}},
      {"left", {{0, 1}}},
      {"carol", {{1, 0}}},
      {"knows", {{1, 0}}},
      {"nobody", {{2, 0}}},
      {"here", {{2, 0}}},
      {"smith", {{2, 1}}},
      {"writes", {{2, 1}}},
  };
  EXPECT_EQ(idx.postings(), want);
  EXPECT_EQ(idx.sentence_count(), 5u);
  EXPECT_EQ(idx.token_count(), 13u);
  EXPECT_TRUE(idx.lookup("zed").empty());
}

TEST(Corpus, ReadsJsonLinesAndReportsBadLines) {
  std::istringstream good(R"({"id": "a", "text": "One. Two."})" "\n\n" R"({"id": "b", "text": "Three"})" "\n");
  const CorpusIndex idx = read_corpus(good);
  EXPECT_EQ(idx.documents().size(), 2u);
  EXPECT_EQ(idx.sentence_count(), 3u);

  for (const char* bad : {"{\"id\": \"a\", \"text\": \"x\"}\n{not json\n", "{\"id\": \"a\", \"text\": \"x\"}\n{\"id\": 3, \"text\": \"y\"}\n",
                          "{\"id\": \"a\", \"text\": \"x\"}\n[1, 2]\n"}) {
    std::istringstream in(bad);
    try {
      read_corpus(in);
      ADD_FAILURE() << "accepted " << bad;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 2u);
    }
  }
  EXPECT_THROW(build_index("/nonexistent/corpus.jsonl"), UsageError);
}

TEST(Retrieve, BothNamesRankAboveOne) {
  const CorpusIndex idx = CorpusIndex::build({{"B", "Bob sleeps."}, {"A", "Later. Alice met Bob."}});
  const auto ev = retrieve_evidence(idx, "alice", "Bob", 10);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].doc_id, "A");
  EXPECT_EQ(ev[0].sentence_index, 1u);
  EXPECT_EQ(ev[0].score, 2.0);
  EXPECT_EQ(ev[0].sentence, "Alice met Bob.");
  EXPECT_EQ(ev[1].doc_id, "B");
  EXPECT_EQ(ev[1].score, 1.0);
  EXPECT_EQ(text_channel_score(ev), 1.0);
  EXPECT_EQ(retrieve_evidence(idx, "alice", "Bob", 1).size(), 1u);
}

TEST(Retrieve, MultiTokenNamesMustBeContiguous) {
  const CorpusIndex idx = three_docs();
  const auto ev = retrieve_evidence(idx, "alice smith", "carol", 10);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].doc_id, "d2");
  EXPECT_EQ(ev[0].matched, (std::vector<std::string>{"carol"}));
  EXPECT_EQ(ev[1].doc_id, "d3");
  EXPECT_EQ(text_channel_score(ev), 0.5);
}

TEST(Retrieve, AbsentNameNeverScoresTwo) {
  const CorpusIndex idx = three_docs();
  const auto ev = retrieve_evidence(idx, "alice", "zed", 10);
  EXPECT_EQ(ev.size(), 3u);
  for (const auto& e : ev) EXPECT_EQ(e.score, 1.0);
  EXPECT_TRUE(retrieve_evidence(idx, "zed", "quux", 10).empty());
}

TEST(Retrieve, GrowthNeverRemovesMatches) {
  std::vector<std::pair<std::string, std::string>> docs{{"d1", "Alice met Bob."}, {"d2", "Bob left."}};
  const auto before = retrieve_evidence(CorpusIndex::build(docs), "alice", "bob", 100);
  docs.push_back({"d0", "Alice and Bob again. Alice alone."});
  const auto after = retrieve_evidence(CorpusIndex::build(docs), "alice", "bob", 100);
  for (const TextEvidence& e : before) EXPECT_NE(std::find(after.begin(), after.end(), e), after.end());
  EXPECT_GT(after.size(), before.size());
}

TEST(ChannelScore, ThreeLevels) {
  EXPECT_EQ(text_channel_score({}), 0.0);
  EXPECT_EQ(text_channel_score({item(2)}), 1.0);
  EXPECT_EQ(text_channel_score({item(1), item(1)}), 0.5);
  EXPECT_EQ(text_channel_score({item(1), item(2)}), 1.0);
}

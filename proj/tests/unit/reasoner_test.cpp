#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "xeval/error.hpp"
#include "xeval/reasoner.hpp"

using namespace xeval;
using namespace xeval::testing;

namespace {

Lexicon socrates_lexicon() {
  Lexicon lex;
  lex.templates = {{"Man", "<arg> is a man."},
                   {"Mortal", "<arg> is mortal."},
                   {"Man subClassOf Mortal", "All men are mortal."}};
  return lex;
}

KnowledgeBase socrates() { return load_kb(fixture_path("socrates/socrates.kb")); }

const char* kAncestors = R"(
parent(a, b). parent(b, c). parent(c, d). parent(d, e).
ancestor(X, Y) :- parent(X, Y).
ancestor(X, Z) :- parent(X, Y), ancestor(Y, Z).
ancestor(X, Z) :- ancestor(X, Y), ancestor(Y, Z).
Person(X) :- parent(X, Y).
)";

}  // namespace

TEST(ParseKb, SubClassSugar) {
  const KnowledgeBase kb = parse_kb("Man subClassOf Mortal.");
  ASSERT_EQ(kb.rules().size(), 1u);
  EXPECT_EQ(kb.rules()[0], (Rule{parse_atom("Mortal(X)"), {parse_atom("Man(X)")}}));
  EXPECT_EQ(to_string(kb.rules()[0]), "Mortal(X) :- Man(X)");
}

TEST(ParseKb, EmptyBodyIsSyntaxError) {
  try {
    parse_kb("# header\nMortal(X) :- .");
    FAIL() << "accepted an empty body";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_GT(e.column(), 0u);
  }
  EXPECT_THROW(parse_kb("Man(socrates)"), ParseError);
  EXPECT_THROW(parse_kb("Man(socrates, plato, x)."), ParseError);
}

TEST(ParseKb, SemanticErrors) {
  EXPECT_THROW(parse_kb("Mortal(Y) :- Man(X)."), DataError);
  EXPECT_THROW(parse_kb("Man(socrates). Man(a, b)."), DataError);
  EXPECT_THROW(parse_kb("Man(X)."), DataError);
}

TEST(ParseKb, SocratesFixture) {
  const KnowledgeBase kb = socrates();
  EXPECT_EQ(kb.rules().size(), 1u);
  ASSERT_EQ(kb.facts().size(), 1u);
  EXPECT_EQ(kb.facts()[0], parse_atom("Man(socrates)"));
  EXPECT_THROW(load_kb("/nonexistent.kb"), UsageError);
}

TEST(Entails, SocratesThreeStepProof) {
  const KnowledgeBase kb = socrates();
  const EntailmentResult r = entails(kb, parse_atom("Mortal(socrates)"));
  ASSERT_TRUE(r.entailed);
  ASSERT_TRUE(r.proof);
  const auto& steps = r.proof->steps;
  ASSERT_EQ(steps.size(), 3u);
  EXPECT_EQ(steps[0].kind, ProofStep::Kind::axiom);
  EXPECT_EQ(steps[1].kind, ProofStep::Kind::asserted);
  EXPECT_EQ(steps[1].atom, parse_atom("Man(socrates)"));
  EXPECT_EQ(steps[2].kind, ProofStep::Kind::derived);
  EXPECT_EQ(steps[2].premises, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(check_proof(kb, *r.proof), std::nullopt);
}

TEST(Entails, AssertedGoalIsOneStep) {
  const EntailmentResult r = entails(socrates(), parse_atom("Man(socrates)"));
  ASSERT_TRUE(r.proof);
  ASSERT_EQ(r.proof->steps.size(), 1u);
  EXPECT_EQ(r.proof->steps[0].kind, ProofStep::Kind::asserted);
}

TEST(Entails, AncestorPairsMatchNaiveFixpoint) {
  const KnowledgeBase kb = parse_kb(kAncestors);
  const auto oracle = naive_fixpoint(kb);
  const Reasoner reasoner(kb);
  std::size_t entailed = 0;
  for (const char* x : {"a", "b", "c", "d", "e"})
    for (const char* y : {"a", "b", "c", "d", "e"}) {
      const Atom goal{"ancestor", {Term::constant(x), Term::constant(y)}};
      const EntailmentResult r = reasoner.entails(goal);
      EXPECT_EQ(r.entailed, oracle.contains(to_string(goal))) << to_string(goal);
      if (r.entailed) {
        ++entailed;
        EXPECT_EQ(check_proof(kb, *r.proof), std::nullopt);
      }
    }
  EXPECT_EQ(entailed, 10u);
}

TEST(Entails, Errors) {
  const KnowledgeBase kb = socrates();
  EXPECT_THROW(entails(kb, parse_atom("Man(X)")), UsageError);
  EXPECT_THROW(entails(kb, parse_atom("Man(a, b)")), UsageError);
  EXPECT_FALSE(entails(kb, parse_atom("Unknown(a)")).entailed);
}

TEST(Entails, Monotone) {
  Rng rng(12);
  for (int t = 0; t < 30; ++t) {
    const KnowledgeBase kb = random_kb(rng);
    const Reasoner base(kb);
    const auto before = base.derived_facts();
    const KnowledgeBase grown = kb.with_facts({herbrand_base(kb)[rng.index(herbrand_base(kb).size())]});
    const Reasoner bigger(grown);
    for (const Atom& a : before) EXPECT_TRUE(bigger.entails(a).entailed) << to_string(a);
  }
}

TEST(ChannelScore, SocratesAndPlato) {
  const KnowledgeBase kb = socrates();
  const ReasonerScore yes = reasoner_channel_score(kb, parse_atom("Mortal(socrates)"));
  EXPECT_EQ(yes.score, 1.0);
  EXPECT_TRUE(yes.proof);
  const ReasonerScore no = reasoner_channel_score(kb, parse_atom("Mortal(plato)"));
  EXPECT_EQ(no.score, 0.0);
  EXPECT_FALSE(no.proof);
}

TEST(ProofText, SocratesWithLexicon) {
  const KnowledgeBase kb = socrates();
  const Proof proof = *entails(kb, parse_atom("Mortal(socrates)")).proof;
  const std::string text = proof_to_text(proof, kb, socrates_lexicon());
  EXPECT_EQ(text, "All men are mortal. Socrates is a man. Socrates is mortal.");
  EXPECT_EQ(proof_to_text(proof, kb, socrates_lexicon()), text);
}

TEST(ProofText, DefaultTemplates) {
  const KnowledgeBase kb = parse_kb("likes(a, b). Fan(X) :- likes(X, Y).");
  const Proof proof = *entails(kb, parse_atom("Fan(a)")).proof;
  EXPECT_EQ(proof_to_text(proof, kb, {}),
            "If likes(X, Y) holds, then X is a Fan. Likes(a, b) holds. A is a Fan.");
}

TEST(Lexicon, ReadsTabSeparatedTemplates) {
  std::istringstream in("# comment\nMan\t<arg> is a man.\n\nis_a\t<arg1> is a <arg2>.\n");
  const Lexicon lex = read_lexicon(in);
  EXPECT_EQ(lex.templates.size(), 2u);
  EXPECT_EQ(render_atom(parse_atom("is_a(socrates, man)"), lex), "socrates is a man.");
  std::istringstream bad("Man <arg>\n");
  EXPECT_THROW(read_lexicon(bad), ParseError);
}

TEST(CheckProof, RejectsTampering) {
  const KnowledgeBase kb = socrates();
  const Proof good = *entails(kb, parse_atom("Mortal(socrates)")).proof;

  Proof wrong_head = good;
  wrong_head.steps[2].atom = parse_atom("Mortal(plato)");
  wrong_head.goal = parse_atom("Mortal(plato)");
  EXPECT_TRUE(check_proof(kb, wrong_head));

  Proof fake_fact = good;
  fake_fact.steps[1].atom = parse_atom("Man(plato)");
  EXPECT_TRUE(check_proof(kb, fake_fact));

  Proof forward_ref = good;
  forward_ref.steps[2].premises = {0, 2};
  EXPECT_TRUE(check_proof(kb, forward_ref));

  Proof no_axiom = good;
  no_axiom.steps[2].premises = {1, 1};
  EXPECT_TRUE(check_proof(kb, no_axiom));

  Proof wrong_goal = good;
  wrong_goal.goal = parse_atom("Man(socrates)");
  EXPECT_TRUE(check_proof(kb, wrong_goal));

  EXPECT_TRUE(check_proof(kb, Proof{good.goal, {}}));
}

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xeval {

// A constant starts with a lowercase letter or digit; a variable starts with
// an uppercase letter or '_'.
struct Term {
  enum class Kind : std::uint8_t { constant, variable };

  Kind kind = Kind::constant;
  std::string name;

  static Term constant(std::string name) { return {Kind::constant, std::move(name)}; }
  static Term variable(std::string name) { return {Kind::variable, std::move(name)}; }
  bool is_variable() const noexcept { return kind == Kind::variable; }

  friend auto operator<=>(const Term&, const Term&) = default;
};

// Unary (concept) or binary (role) atom.
struct Atom {
  std::string predicate;
  std::vector<Term> args;

  std::size_t arity() const noexcept { return args.size(); }
  bool ground() const;

  friend auto operator<=>(const Atom&, const Atom&) = default;
};

struct Rule {
  Atom head;
  std::vector<Atom> body;  // non-empty; every head variable occurs here

  friend bool operator==(const Rule&, const Rule&) = default;
};

std::string to_string(const Term& t);
std::string to_string(const Atom& a);
std::string to_string(const Rule& r);  // "Head(X) :- B1(X), B2(X, Y)"

// Parses "Pred(a)" or "pred(a, b)" (no trailing period).
Atom parse_atom(std::string_view text);

// Validated TBox rules plus ground ABox facts with consistent arities.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  // Throws DataError on an unsafe rule, a non-ground fact or an arity clash.
  static KnowledgeBase build(std::vector<Rule> rules, std::vector<Atom> facts);

  const std::vector<Rule>& rules() const noexcept { return rules_; }
  const std::vector<Atom>& facts() const noexcept { return facts_; }
  const std::map<std::string, std::size_t>& arities() const noexcept { return arities_; }
  std::optional<std::size_t> arity(std::string_view predicate) const;

  // New knowledge base with extra facts appended (validated again).
  KnowledgeBase with_facts(std::vector<Atom> extra) const;

 private:
  std::vector<Rule> rules_;
  std::vector<Atom> facts_;
  std::map<std::string, std::size_t> arities_;
};

// Grammar, one statement per '.', '#' starts a comment:
//   Pred(a).                      fact
//   Head(X) :- B1(X), B2(X, Y).   rule
//   Man subClassOf Mortal.        sugar for Mortal(X) :- Man(X).
// Errors are ParseError (line, column) or DataError for semantic problems.
KnowledgeBase parse_kb(std::string_view source);
KnowledgeBase load_kb(const std::filesystem::path& path);

struct ProofStep {
  enum class Kind : std::uint8_t { axiom, asserted, derived };

  Kind kind = Kind::asserted;
  std::optional<Atom> atom;           // absent for axiom steps
  std::optional<std::size_t> rule;    // rule index for axiom and derived steps
  std::vector<std::size_t> premises;  // derived: [axiom step, body atom steps...]

  friend bool operator==(const ProofStep&, const ProofStep&) = default;
};

// Replayable derivation. Axiom steps (the rules used) come first in rule
// order, then facts in derivation order; the last step proves the goal.
struct Proof {
  Atom goal;
  std::vector<ProofStep> steps;

  friend bool operator==(const Proof&, const Proof&) = default;
};

struct EntailmentResult {
  bool entailed = false;
  std::optional<Proof> proof;
};

// Saturates a knowledge base once (semi-naive forward chaining to the least
// fixpoint) and answers ground queries against it.
class Reasoner {
 public:
  explicit Reasoner(const KnowledgeBase& kb);
  ~Reasoner();
  Reasoner(Reasoner&&) noexcept;
  Reasoner& operator=(Reasoner&&) noexcept;

  // Throws UsageError for a non-ground goal or an arity mismatch.
  EntailmentResult entails(const Atom& goal) const;

  // Every ground atom of the fixpoint, in derivation order.
  std::vector<Atom> derived_facts() const;
  std::size_t rounds() const;

  const KnowledgeBase& knowledge_base() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

EntailmentResult entails(const KnowledgeBase& kb, const Atom& goal);

// Independent replay check: each step must be an ABox fact, a rule, or a
// rule head instantiated by a substitution whose body atoms are the earlier
// premise steps. Returns an explanation of the first failure, or nullopt.
std::optional<std::string> check_proof(const KnowledgeBase& kb, const Proof& proof);

struct ReasonerScore {
  double score = 0.0;  // exactly 0 or 1
  std::optional<Proof> proof;
};

ReasonerScore reasoner_channel_score(const KnowledgeBase& kb, const Atom& goal);
ReasonerScore reasoner_channel_score(const Reasoner& reasoner, const Atom& goal);

// Sentence templates keyed by predicate name ("<arg>", "<arg1>", "<arg2>"
// placeholders) or by rule text, either canonical ("Mortal(X) :- Man(X)")
// or in subClassOf form ("Man subClassOf Mortal").
struct Lexicon {
  std::map<std::string, std::string> templates;
};

// Tab-separated "key<TAB>template" lines; '#' comments and blanks skipped.
Lexicon read_lexicon(std::istream& in);
Lexicon load_lexicon(const std::filesystem::path& path);

std::string render_atom(const Atom& atom, const Lexicon& lexicon);
std::string render_rule(const Rule& rule, const Lexicon& lexicon);

// One sentence per step in step order, each capitalised, joined by spaces.
std::string proof_to_text(const Proof& proof, const KnowledgeBase& kb, const Lexicon& lexicon);

}  // namespace xeval

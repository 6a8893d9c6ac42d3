#include <algorithm>
#include <array>
#include <set>
#include <unordered_map>

#include "xeval/error.hpp"
#include "xeval/reasoner.hpp"

namespace xeval {

namespace {

using Id = std::uint32_t;
constexpr Id kNoRule = static_cast<Id>(-1);

// A rule term compiled to either a variable slot or a constant id.
struct Slot {
  bool is_variable = false;
  Id value = 0;
};

struct CompiledAtom {
  Id predicate = 0;
  std::size_t arity = 0;
  std::array<Slot, 2> args{};
};

struct CompiledRule {
  CompiledAtom head;
  std::vector<CompiledAtom> body;
  std::size_t variable_count = 0;
};

struct FactRecord {
  Id predicate = 0;
  std::array<Id, 2> args{};
  Id rule = kNoRule;          // kNoRule for ABox facts
  std::vector<Id> premises;   // fact ids matched by the rule body, in body order
};

}  // namespace

struct Reasoner::State {
  KnowledgeBase kb;
  std::unordered_map<std::string, Id> constant_ids;
  std::vector<std::string> constant_names;
  std::unordered_map<std::string, Id> predicate_ids;
  std::vector<std::string> predicate_names;
  std::vector<std::size_t> predicate_arity;
  std::vector<CompiledRule> rules;

  std::vector<FactRecord> facts;
  std::vector<std::vector<Id>> by_predicate;  // ascending fact ids
  std::unordered_map<std::uint64_t, Id> lookup;
  std::size_t rounds = 0;

  Id intern_constant(const std::string& name) {
    auto [it, inserted] = constant_ids.emplace(name, static_cast<Id>(constant_names.size()));
    if (inserted) {
      if (constant_names.size() >= (1u << 21)) throw DataError("too many constants");
      constant_names.push_back(name);
    }
    return it->second;
  }

  Id intern_predicate(const std::string& name, std::size_t arity) {
    auto [it, inserted] = predicate_ids.emplace(name, static_cast<Id>(predicate_names.size()));
    if (inserted) {
      predicate_names.push_back(name);
      predicate_arity.push_back(arity);
      by_predicate.emplace_back();
    }
    return it->second;
  }

  static std::uint64_t key(Id pred, Id a0, Id a1) {
    return (static_cast<std::uint64_t>(pred) << 42) | (static_cast<std::uint64_t>(a0) << 21) | a1;
  }

  // Returns true if the fact was new.
  bool add_fact(Id pred, std::array<Id, 2> args, Id rule, std::vector<Id> premises) {
    const auto id = static_cast<Id>(facts.size());
    if (!lookup.emplace(key(pred, args[0], args[1]), id).second) return false;
    facts.push_back({pred, args, rule, std::move(premises)});
    by_predicate[pred].push_back(id);
    return true;
  }

  CompiledAtom compile(const Atom& a, std::map<std::string, Id>& vars) {
    CompiledAtom c;
    c.predicate = intern_predicate(a.predicate, a.arity());
    c.arity = a.arity();
    for (std::size_t i = 0; i < a.arity(); ++i) {
      const Term& t = a.args[i];
      if (t.is_variable()) {
        auto [it, inserted] = vars.emplace(t.name, static_cast<Id>(vars.size()));
        c.args[i] = {true, it->second};
      } else {
        c.args[i] = {false, intern_constant(t.name)};
      }
    }
    return c;
  }

  void saturate();
  void join(std::size_t rule_index, std::size_t delta_pos, std::size_t old_end,
            std::size_t delta_end);
};

void Reasoner::State::join(std::size_t rule_index, std::size_t delta_pos, std::size_t old_end,
                           std::size_t delta_end) {
  const CompiledRule& rule = rules[rule_index];
  std::vector<Id> binding(rule.variable_count, 0);
  std::vector<bool> bound(rule.variable_count, false);
  std::vector<Id> matched(rule.body.size(), 0);

  // Body atom j draws from [0, old_end) before the delta position, from the
  // delta [old_end, delta_end) at it, and from [0, delta_end) after it.
  auto recurse = [&](auto&& self, std::size_t j) -> void {
    if (j == rule.body.size()) {
      std::array<Id, 2> args{};
      for (std::size_t i = 0; i < rule.head.arity; ++i) {
        const Slot& s = rule.head.args[i];
        args[i] = s.is_variable ? binding[s.value] : s.value;
      }
      add_fact(rule.head.predicate, args, static_cast<Id>(rule_index), matched);
      return;
    }
    const CompiledAtom& atom = rule.body[j];
    const std::size_t lo = j == delta_pos ? old_end : 0;
    const std::size_t hi = j < delta_pos ? old_end : delta_end;
    const auto& ids = by_predicate[atom.predicate];
    auto first = std::lower_bound(ids.begin(), ids.end(), static_cast<Id>(lo));
    const auto count = static_cast<std::size_t>(
        std::lower_bound(ids.begin(), ids.end(), static_cast<Id>(hi)) - ids.begin());
    // Indexing (not iterators): recursion may append to this vector.
    for (auto pos = static_cast<std::size_t>(first - ids.begin()); pos < count; ++pos) {
      const Id fid = by_predicate[atom.predicate][pos];
      const FactRecord& fact = facts[fid];
      std::array<bool, 2> newly_bound{false, false};
      bool ok = true;
      for (std::size_t i = 0; i < atom.arity && ok; ++i) {
        const Slot& s = atom.args[i];
        const Id value = fact.args[i];
        if (!s.is_variable) {
          ok = s.value == value;
        } else if (bound[s.value]) {
          ok = binding[s.value] == value;
        } else {
          binding[s.value] = value;
          bound[s.value] = true;
          newly_bound[i] = true;
        }
      }
      if (ok) {
        matched[j] = fid;
        self(self, j + 1);
      }
      for (std::size_t i = 0; i < atom.arity; ++i)
        if (newly_bound[i]) bound[atom.args[i].value] = false;
    }
  };
  recurse(recurse, 0);
}

void Reasoner::State::saturate() {
  std::size_t old_end = 0;
  while (true) {
    const std::size_t delta_end = facts.size();
    if (delta_end == old_end) break;
    ++rounds;
    for (std::size_t r = 0; r < rules.size(); ++r)
      for (std::size_t pos = 0; pos < rules[r].body.size(); ++pos) join(r, pos, old_end, delta_end);
    old_end = delta_end;
  }
}

Reasoner::Reasoner(const KnowledgeBase& kb) : state_(std::make_unique<State>()) {
  State& s = *state_;
  s.kb = kb;
  for (const Rule& rule : kb.rules()) {
    std::map<std::string, Id> vars;
    CompiledRule c;
    // Compile the body first so head variables resolve to body slots.
    for (const Atom& a : rule.body) c.body.push_back(s.compile(a, vars));
    c.head = s.compile(rule.head, vars);
    c.variable_count = vars.size();
    s.rules.push_back(std::move(c));
  }
  for (const Atom& f : kb.facts()) {
    const Id pred = s.intern_predicate(f.predicate, f.arity());
    std::array<Id, 2> args{};
    for (std::size_t i = 0; i < f.arity(); ++i) args[i] = s.intern_constant(f.args[i].name);
    s.add_fact(pred, args, kNoRule, {});
  }
  s.saturate();
}

Reasoner::~Reasoner() = default;
Reasoner::Reasoner(Reasoner&&) noexcept = default;
Reasoner& Reasoner::operator=(Reasoner&&) noexcept = default;

const KnowledgeBase& Reasoner::knowledge_base() const { return state_->kb; }

std::size_t Reasoner::rounds() const { return state_->rounds; }

std::vector<Atom> Reasoner::derived_facts() const {
  const State& s = *state_;
  std::vector<Atom> out;
  out.reserve(s.facts.size());
  for (const FactRecord& f : s.facts) {
    Atom a{s.predicate_names[f.predicate], {}};
    for (std::size_t i = 0; i < s.predicate_arity[f.predicate]; ++i)
      a.args.push_back(Term::constant(s.constant_names[f.args[i]]));
    out.push_back(std::move(a));
  }
  return out;
}

EntailmentResult Reasoner::entails(const Atom& goal) const {
  const State& s = *state_;
  if (goal.args.empty() || goal.args.size() > 2)
    throw UsageError("goal " + to_string(goal) + " must have one or two arguments");
  if (!goal.ground()) throw UsageError("goal " + to_string(goal) + " is not ground");
  if (auto arity = s.kb.arity(goal.predicate); arity && *arity != goal.arity())
    throw UsageError("goal " + to_string(goal) + " uses predicate '" + goal.predicate +
                     "' with arity " + std::to_string(goal.arity()) + ", knowledge base uses " +
                     std::to_string(*arity));

  auto pred = s.predicate_ids.find(goal.predicate);
  if (pred == s.predicate_ids.end()) return {};
  std::array<Id, 2> args{};
  for (std::size_t i = 0; i < goal.arity(); ++i) {
    auto c = s.constant_ids.find(goal.args[i].name);
    if (c == s.constant_ids.end()) return {};
    args[i] = c->second;
  }
  auto hit = s.lookup.find(State::key(pred->second, args[0], args[1]));
  if (hit == s.lookup.end()) return {};

  // Walk provenance back from the goal.
  std::set<Id> needed_facts;
  std::set<Id> needed_rules;
  std::vector<Id> stack{hit->second};
  while (!stack.empty()) {
    const Id fid = stack.back();
    stack.pop_back();
    if (!needed_facts.insert(fid).second) continue;
    const FactRecord& f = s.facts[fid];
    if (f.rule == kNoRule) continue;
    needed_rules.insert(f.rule);
    for (Id p : f.premises) stack.push_back(p);
  }

  Proof proof;
  proof.goal = goal;
  std::map<Id, std::size_t> rule_step;
  std::map<Id, std::size_t> fact_step;
  for (Id r : needed_rules) {
    rule_step[r] = proof.steps.size();
    proof.steps.push_back({ProofStep::Kind::axiom, std::nullopt, r, {}});
  }
  for (Id fid : needed_facts) {
    const FactRecord& f = s.facts[fid];
    Atom atom{s.predicate_names[f.predicate], {}};
    for (std::size_t i = 0; i < s.predicate_arity[f.predicate]; ++i)
      atom.args.push_back(Term::constant(s.constant_names[f.args[i]]));
    ProofStep step;
    step.atom = std::move(atom);
    if (f.rule == kNoRule) {
      step.kind = ProofStep::Kind::asserted;
    } else {
      step.kind = ProofStep::Kind::derived;
      step.rule = f.rule;
      step.premises.push_back(rule_step.at(f.rule));
      for (Id p : f.premises) step.premises.push_back(fact_step.at(p));
    }
    fact_step[fid] = proof.steps.size();
    proof.steps.push_back(std::move(step));
  }
  return {true, std::move(proof)};
}

EntailmentResult entails(const KnowledgeBase& kb, const Atom& goal) {
  return Reasoner(kb).entails(goal);
}

ReasonerScore reasoner_channel_score(const Reasoner& reasoner, const Atom& goal) {
  EntailmentResult r = reasoner.entails(goal);
  return {r.entailed ? 1.0 : 0.0, std::move(r.proof)};
}

ReasonerScore reasoner_channel_score(const KnowledgeBase& kb, const Atom& goal) {
  return reasoner_channel_score(Reasoner(kb), goal);
}

}  // namespace xeval

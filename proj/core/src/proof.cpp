#include <fstream>
#include <map>
#include <set>

#include "xeval/error.hpp"
#include "xeval/reasoner.hpp"
#include "xeval/text_util.hpp"

namespace xeval {

namespace {

// Extends `sigma` so that pattern matches the ground atom; false on clash.
bool match(const Atom& pattern, const Atom& ground, std::map<std::string, std::string>& sigma) {
  if (pattern.predicate != ground.predicate || pattern.arity() != ground.arity()) return false;
  for (std::size_t i = 0; i < pattern.arity(); ++i) {
    const Term& p = pattern.args[i];
    const Term& g = ground.args[i];
    if (g.is_variable()) return false;
    if (!p.is_variable()) {
      if (p.name != g.name) return false;
      continue;
    }
    auto [it, inserted] = sigma.emplace(p.name, g.name);
    if (!inserted && it->second != g.name) return false;
  }
  return true;
}

std::optional<Atom> instantiate(const Atom& pattern, const std::map<std::string, std::string>& sigma) {
  Atom out{pattern.predicate, {}};
  for (const Term& t : pattern.args) {
    if (!t.is_variable()) {
      out.args.push_back(t);
      continue;
    }
    auto it = sigma.find(t.name);
    if (it == sigma.end()) return std::nullopt;
    out.args.push_back(Term::constant(it->second));
  }
  return out;
}

}  // namespace

std::optional<std::string> check_proof(const KnowledgeBase& kb, const Proof& proof) {
  if (proof.steps.empty()) return "proof has no steps";
  const std::set<Atom> abox(kb.facts().begin(), kb.facts().end());
  for (std::size_t i = 0; i < proof.steps.size(); ++i) {
    const ProofStep& step = proof.steps[i];
    const std::string where = "step " + std::to_string(i) + ": ";
    switch (step.kind) {
      case ProofStep::Kind::axiom:
        if (!step.rule || *step.rule >= kb.rules().size()) return where + "unknown rule";
        if (step.atom || !step.premises.empty()) return where + "axiom step carries an atom or premises";
        break;
      case ProofStep::Kind::asserted:
        if (!step.atom) return where + "missing atom";
        if (!step.premises.empty()) return where + "asserted step has premises";
        if (!abox.contains(*step.atom)) return where + to_string(*step.atom) + " is not an ABox fact";
        break;
      case ProofStep::Kind::derived: {
        if (!step.atom || !step.atom->ground()) return where + "missing or non-ground atom";
        if (!step.rule || *step.rule >= kb.rules().size()) return where + "unknown rule";
        const Rule& rule = kb.rules()[*step.rule];
        if (step.premises.size() != rule.body.size() + 1)
          return where + "premise count does not match the rule body";
        for (std::size_t p : step.premises)
          if (p >= i) return where + "premise does not precede the step";
        const ProofStep& axiom = proof.steps[step.premises[0]];
        if (axiom.kind != ProofStep::Kind::axiom || axiom.rule != step.rule)
          return where + "first premise is not the rule's axiom step";
        std::map<std::string, std::string> sigma;
        for (std::size_t j = 0; j < rule.body.size(); ++j) {
          const ProofStep& premise = proof.steps[step.premises[j + 1]];
          if (!premise.atom || !match(rule.body[j], *premise.atom, sigma))
            return where + "premise does not match body atom " + to_string(rule.body[j]);
        }
        auto head = instantiate(rule.head, sigma);
        if (!head || *head != *step.atom)
          return where + "rule head does not instantiate to " + to_string(*step.atom);
        break;
      }
    }
  }
  const ProofStep& last = proof.steps.back();
  if (!last.atom || *last.atom != proof.goal) return "final step does not prove the goal";
  return std::nullopt;
}

Lexicon read_lexicon(std::istream& in) {
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected key<TAB>template", line_no);
    const auto key = trim(std::string_view(line).substr(0, tab));
    const auto value = trim(std::string_view(line).substr(tab + 1));
    if (key.empty() || value.empty()) throw ParseError("empty key or template", line_no);
    lex.templates[std::string(key)] = std::string(value);
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open lexicon " + path.string());
  try {
    return read_lexicon(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

std::string strip_period(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
  return s;
}

std::optional<std::string> subclass_key(const Rule& r) {
  if (r.body.size() != 1 || r.head.arity() != 1 || r.body[0].arity() != 1) return std::nullopt;
  const Term& h = r.head.args[0];
  const Term& b = r.body[0].args[0];
  if (!h.is_variable() || h != b) return std::nullopt;
  return r.body[0].predicate + " subClassOf " + r.head.predicate;
}

}  // namespace

std::string render_atom(const Atom& atom, const Lexicon& lexicon) {
  std::string out;
  if (auto it = lexicon.templates.find(atom.predicate); it != lexicon.templates.end())
    out = it->second;
  else
    out = atom.arity() == 1 ? "<arg> is a <pred>." : "<pred>(<arg1>, <arg2>) holds.";
  if (atom.arity() >= 1) {
    replace_all(out, "<arg>", atom.args[0].name);
    replace_all(out, "<arg1>", atom.args[0].name);
  }
  if (atom.arity() >= 2) replace_all(out, "<arg2>", atom.args[1].name);
  replace_all(out, "<pred>", atom.predicate);
  return out;
}

std::string render_rule(const Rule& rule, const Lexicon& lexicon) {
  if (auto it = lexicon.templates.find(to_string(rule)); it != lexicon.templates.end())
    return it->second;
  if (auto key = subclass_key(rule)) {
    if (auto it = lexicon.templates.find(*key); it != lexicon.templates.end()) return it->second;
  }
  std::string out = "If ";
  for (std::size_t i = 0; i < rule.body.size(); ++i) {
    if (i) out += " and ";
    out += strip_period(render_atom(rule.body[i], lexicon));
  }
  return out + ", then " + strip_period(render_atom(rule.head, lexicon)) + ".";
}

std::string proof_to_text(const Proof& proof, const KnowledgeBase& kb, const Lexicon& lexicon) {
  std::string out;
  for (const ProofStep& step : proof.steps) {
    std::string sentence;
    if (step.kind == ProofStep::Kind::axiom) {
      if (!step.rule || *step.rule >= kb.rules().size())
        throw UsageError("proof refers to a rule missing from the knowledge base");
      sentence = render_rule(kb.rules()[*step.rule], lexicon);
    } else if (step.atom) {
      sentence = render_atom(*step.atom, lexicon);
    }
    if (sentence.empty()) continue;
    if (sentence[0] >= 'a' && sentence[0] <= 'z') sentence[0] = static_cast<char>(sentence[0] - 'a' + 'A');
    if (!out.empty()) out += ' ';
    out += sentence;
  }
  return out;
}

}  // namespace xeval

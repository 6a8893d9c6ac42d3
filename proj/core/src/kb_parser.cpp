#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>

#include "xeval/error.hpp"
#include "xeval/reasoner.hpp"

namespace xeval {

bool Atom::ground() const {
  for (const Term& t : args)
    if (t.is_variable()) return false;
  return true;
}

std::string to_string(const Term& t) { return t.name; }

std::string to_string(const Atom& a) {
  std::string out = a.predicate + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ", ";
    out += a.args[i].name;
  }
  return out + ")";
}

std::string to_string(const Rule& r) {
  std::string out = to_string(r.head) + " :- ";
  for (std::size_t i = 0; i < r.body.size(); ++i) {
    if (i) out += ", ";
    out += to_string(r.body[i]);
  }
  return out;
}

namespace {

void record_arity(std::map<std::string, std::size_t>& arities, const Atom& a) {
  auto [it, inserted] = arities.emplace(a.predicate, a.arity());
  if (!inserted && it->second != a.arity())
    throw DataError("predicate '" + a.predicate + "' used with arity " +
                    std::to_string(a.arity()) + " and " + std::to_string(it->second));
}

std::optional<std::string> unsafe_variable(const Rule& r) {
  std::set<std::string> bound;
  for (const Atom& a : r.body)
    for (const Term& t : a.args)
      if (t.is_variable()) bound.insert(t.name);
  for (const Term& t : r.head.args)
    if (t.is_variable() && !bound.contains(t.name)) return t.name;
  return std::nullopt;
}

void check_atom_shape(const Atom& a) {
  if (a.predicate.empty()) throw DataError("atom with an empty predicate");
  if (a.args.empty() || a.args.size() > 2)
    throw DataError("atom " + to_string(a) + " must have one or two arguments");
}

}  // namespace

KnowledgeBase KnowledgeBase::build(std::vector<Rule> rules, std::vector<Atom> facts) {
  KnowledgeBase kb;
  for (const Rule& r : rules) {
    if (r.body.empty()) throw DataError("rule for " + to_string(r.head) + " has an empty body");
    check_atom_shape(r.head);
    for (const Atom& a : r.body) check_atom_shape(a);
    if (auto var = unsafe_variable(r))
      throw DataError("unsafe rule " + to_string(r) + ": head variable " + *var +
                      " does not occur in the body");
    record_arity(kb.arities_, r.head);
    for (const Atom& a : r.body) record_arity(kb.arities_, a);
  }
  for (const Atom& f : facts) {
    check_atom_shape(f);
    if (!f.ground()) throw DataError("fact " + to_string(f) + " is not ground");
    record_arity(kb.arities_, f);
  }
  kb.rules_ = std::move(rules);
  kb.facts_ = std::move(facts);
  return kb;
}

std::optional<std::size_t> KnowledgeBase::arity(std::string_view predicate) const {
  auto it = arities_.find(std::string(predicate));
  if (it == arities_.end()) return std::nullopt;
  return it->second;
}

KnowledgeBase KnowledgeBase::with_facts(std::vector<Atom> extra) const {
  std::vector<Atom> facts = facts_;
  facts.insert(facts.end(), std::make_move_iterator(extra.begin()),
               std::make_move_iterator(extra.end()));
  return build(rules_, std::move(facts));
}

namespace {

enum class Tok { ident, lparen, rparen, comma, dot, implies, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space_and_comments();
    Token t;
    t.line = line_;
    t.column = column_;
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    if (is_ident_char(c)) {
      t.kind = Tok::ident;
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) t.text.push_back(advance());
      return t;
    }
    t.text = std::string(1, c);
    switch (c) {
      case '(': t.kind = Tok::lparen; break;
      case ')': t.kind = Tok::rparen; break;
      case ',': t.kind = Tok::comma; break;
      case '.': t.kind = Tok::dot; break;
      case ':':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
          advance();
          advance();
          t.kind = Tok::implies;
          t.text = ":-";
          return t;
        }
        throw ParseError("expected ':-'", t.line, t.column);
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.column);
    }
    advance();
    return t;
  }

 private:
  static bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { shift(); }

  KnowledgeBase parse_all() {
    std::vector<Rule> rules;
    std::vector<Atom> facts;
    std::map<std::string, std::size_t> arities;
    while (cur_.kind != Tok::end) {
      const Token start = cur_;
      auto stmt = statement();
      auto check = [&](const Atom& a) {
        try {
          record_arity(arities, a);
        } catch (const DataError& e) {
          throw ParseError(e.what(), start.line, start.column);
        }
      };
      if (auto* rule = std::get_if<Rule>(&stmt)) {
        if (auto var = unsafe_variable(*rule))
          throw ParseError("unsafe rule: head variable " + *var + " does not occur in the body",
                           start.line, start.column);
        check(rule->head);
        for (const Atom& a : rule->body) check(a);
        rules.push_back(std::move(*rule));
      } else {
        Atom& fact = std::get<Atom>(stmt);
        if (!fact.ground())
          throw ParseError("fact " + to_string(fact) + " contains a variable", start.line,
                           start.column);
        check(fact);
        facts.push_back(std::move(fact));
      }
    }
    return KnowledgeBase::build(std::move(rules), std::move(facts));
  }

  Atom single_atom() {
    Atom a = atom();
    if (cur_.kind == Tok::dot) shift();
    if (cur_.kind != Tok::end) fail("unexpected trailing input");
    return a;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + (cur_.kind == Tok::end ? " at end of input" : " near '" + cur_.text + "'"),
                     cur_.line, cur_.column);
  }

  void shift() { cur_ = lexer_.next(); }

  Token expect(Tok kind, const char* what) {
    if (cur_.kind != kind) fail(std::string("expected ") + what);
    Token t = cur_;
    shift();
    return t;
  }

  static bool is_variable_name(const std::string& s) {
    return std::isupper(static_cast<unsigned char>(s[0])) || s[0] == '_';
  }

  std::string predicate_name() {
    if (cur_.kind != Tok::ident || !std::isalpha(static_cast<unsigned char>(cur_.text[0])))
      fail("expected a predicate name");
    std::string name = cur_.text;
    shift();
    return name;
  }

  Atom atom() { return atom_arguments(predicate_name()); }

  // Parses "(t1, t2)" after an already-consumed predicate name.
  Atom atom_arguments(std::string predicate) {
    Atom a;
    a.predicate = std::move(predicate);
    const Token open = expect(Tok::lparen, "'('");
    while (true) {
      const Token t = expect(Tok::ident, "a term");
      a.args.push_back(is_variable_name(t.text) ? Term::variable(t.text) : Term::constant(t.text));
      if (cur_.kind == Tok::comma) {
        shift();
        continue;
      }
      expect(Tok::rparen, "',' or ')'");
      break;
    }
    if (a.args.size() > 2)
      throw ParseError("atom " + to_string(a) + " has more than two arguments", open.line,
                       open.column);
    return a;
  }

  std::variant<Rule, Atom> statement() {
    if (cur_.kind != Tok::ident) fail("expected a statement");
    // Sugar: "C subClassOf D."
    std::string name = predicate_name();
    if (cur_.kind == Tok::ident && cur_.text == "subClassOf") {
      shift();
      std::string super = predicate_name();
      expect(Tok::dot, "'.'");
      const Term x = Term::variable("X");
      return Rule{Atom{super, {x}}, {Atom{name, {x}}}};
    }
    Atom head = atom_arguments(std::move(name));
    if (cur_.kind == Tok::dot) {
      shift();
      return head;
    }
    expect(Tok::implies, "'.' or ':-'");
    Rule rule{std::move(head), {}};
    rule.body.push_back(atom());
    while (cur_.kind == Tok::comma) {
      shift();
      rule.body.push_back(atom());
    }
    expect(Tok::dot, "'.'");
    return rule;
  }

  Lexer lexer_;
  Token cur_;
};

}  // namespace

KnowledgeBase parse_kb(std::string_view source) { return Parser(source).parse_all(); }

Atom parse_atom(std::string_view text) { return Parser(text).single_atom(); }

KnowledgeBase load_kb(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open knowledge base " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_kb(buf.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace xeval

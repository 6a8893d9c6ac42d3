#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <variant>
#include <vector>

#include "xeval/error.hpp"
#include "xeval/text_util.hpp"

namespace xeval::cli {

namespace {

// size_t and uint64_t may be one type, so seeds get their own tag.
struct Seed {
  std::uint64_t* value;
};

template <class... F>
struct Overloaded : F... {
  using F::operator()...;
};

using Target = std::variant<fs::path*, std::size_t*, Seed, double*, bool*>;

struct Field {
  std::string_view section;
  std::string_view key;
  Target target;
};

std::vector<Field> fields(RunConfig& c) {
  return {
      {"files", "nodes", &c.files.nodes},
      {"files", "edges", &c.files.edges},
      {"files", "corpus", &c.files.corpus},
      {"files", "kb", &c.files.kb},
      {"files", "lexicon", &c.files.lexicon},
      {"files", "checkpoint", &c.files.checkpoint},
      {"files", "output", &c.files.output},
      {"graph", "allow_self_loops", &c.allow_self_loops},
      {"model", "layers", &c.model.layers},
      {"model", "hidden", &c.model.hidden},
      {"model", "learning_rate", &c.model.learning_rate},
      {"model", "epochs", &c.model.epochs},
      {"model", "seed", Seed{&c.model.seed}},
      {"explainer", "sparsity", &c.mask.sparsity},
      {"explainer", "epochs", &c.mask.epochs},
      {"explainer", "learning_rate", &c.mask.learning_rate},
      {"explainer", "hidden", &c.mask.hidden},
      {"explainer", "seed", Seed{&c.mask.seed}},
      {"explainer", "initial_bias", &c.mask.initial_bias},
      {"explainer", "top_k", &c.extract.top_k},
      {"explainer", "connectivity", &c.extract.enforce_connectivity},
      {"cluster", "k", &c.cluster_k},
      {"cluster", "seed", Seed{&c.cluster_seed}},
      {"cluster", "top_m", &c.top_m},
      {"paths", "max_len", &c.paths.max_len},
      {"paths", "limit", &c.paths.limit},
      {"paths", "exclude_direct", &c.paths.exclude_direct},
      {"text", "top_n", &c.text_top_n},
      {"reasoner", "graph_facts", &c.graph_facts},
      {"weights", "cluster_overlap", &c.weights.cluster_overlap},
      {"weights", "path", &c.weights.path},
      {"weights", "text", &c.weights.text},
      {"weights", "reasoner", &c.weights.reasoner},
      {"verdict", "strong", &c.thresholds.strong},
      {"verdict", "weak", &c.thresholds.weak},
  };
}

[[noreturn]] void config_error(std::size_t line, const std::string& msg) {
  throw UsageError("config line " + std::to_string(line) + ": " + msg);
}

std::string unquote(std::string_view v, std::size_t line) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') config_error(line, "expected a quoted string");
  std::string out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    char ch = v[i];
    if (ch == '\\') {
      if (i + 2 >= v.size()) config_error(line, "dangling escape");
      ch = v[++i];
      if (ch == 'n') ch = '\n';
      else if (ch == 't') ch = '\t';
      else if (ch != '\\' && ch != '"') config_error(line, "unknown escape");
    } else if (ch == '"') {
      config_error(line, "unescaped quote in string");
    }
    out.push_back(ch);
  }
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    if (ch == '\n') { out += "\\n"; continue; }
    if (ch == '\t') { out += "\\t"; continue; }
    out.push_back(ch);
  }
  return out + "\"";
}

template <class T>
T parse_number(std::string_view v, std::size_t line) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    config_error(line, "invalid number '" + std::string(v) + "'");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) config_error(line, "number must be finite");
  return out;
}

// Drops a '#' comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && in_string) ++i;
    else if (s[i] == '"') in_string = !in_string;
    else if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

}  // namespace

fs::path RunConfig::checkpoint_path() const {
  if (!files.checkpoint.empty()) return files.checkpoint;
  if (files.output.empty()) throw UsageError("no checkpoint path and no output directory configured");
  return files.output / "model.ckpt";
}

EvaluatorConfig RunConfig::evaluator_config() const {
  EvaluatorConfig e;
  e.weights = weights;
  e.thresholds = thresholds;
  e.mask = mask;
  e.extract = extract;
  e.cluster_k = cluster_k;
  e.cluster_seed = cluster_seed;
  e.top_m = top_m;
  e.paths = paths;
  e.text_top_n = text_top_n;
  e.kb_include_graph_edges = graph_facts;
  return e;
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
  RunConfig config;
  auto table = fields(config);
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const Field& f : table) known = known || f.section == section;
      if (!known) config_error(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) config_error(line_no, "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section.empty()) config_error(line_no, "key '" + std::string(key) + "' outside a section");
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const Field& f) { return f.section == section && f.key == key; });
    if (it == table.end())
      config_error(line_no, "unknown key '" + std::string(key) + "' in [" + section + "]");
    std::visit(Overloaded{
                   [&](fs::path* p) {
                     const std::string text = unquote(value, line_no);
                     *p = text.empty() ? fs::path() : (base_dir / text).lexically_normal();
                   },
                   [&](bool* b) {
                     if (value == "true") *b = true;
                     else if (value == "false") *b = false;
                     else config_error(line_no, "expected true or false");
                   },
                   [&](std::size_t* n) { *n = parse_number<std::size_t>(value, line_no); },
                   [&](Seed seed) { *seed.value = parse_number<std::uint64_t>(value, line_no); },
                   [&](double* x) { *x = parse_number<double>(value, line_no); },
               },
               it->target);
  }
  return config;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_run_config(buf.str(), fs::absolute(path).parent_path());
  } catch (const UsageError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

std::string to_toml(const RunConfig& config) {
  RunConfig copy = config;
  std::string out;
  std::string_view section;
  for (const Field& f : fields(copy)) {
    if (f.section != section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + std::string(section) + "]\n";
    }
    out += std::string(f.key) + " = ";
    std::visit(Overloaded{
                   [&](const fs::path* p) { out += quote(p->generic_string()); },
                   [&](const bool* b) { out += *b ? "true" : "false"; },
                   [&](const std::size_t* n) { out += std::to_string(*n); },
                   [&](Seed seed) { out += std::to_string(*seed.value); },
                   [&](const double* x) { out += format_double(*x); },
               },
               f.target);
    out += "\n";
  }
  return out;
}

void resolve_paths(RunConfig& config, const fs::path& base) {
  for (fs::path* p : {&config.files.nodes, &config.files.edges, &config.files.corpus,
                      &config.files.kb, &config.files.lexicon, &config.files.checkpoint,
                      &config.files.output})
    if (!p->empty() && p->is_relative()) *p = (base / *p).lexically_normal();
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw UsageError(msg);
  };
  require(c.model.hidden >= 1, "model.hidden must be at least 1");
  require(c.model.learning_rate > 0.0, "model.learning_rate must be positive");
  require(c.mask.learning_rate > 0.0, "explainer.learning_rate must be positive");
  require(c.mask.sparsity >= 0.0, "explainer.sparsity must be non-negative");
  require(c.mask.hidden >= 1, "explainer.hidden must be at least 1");
  require(c.extract.top_k >= 1, "explainer.top_k must be at least 1");
  require(c.top_m >= 1, "cluster.top_m must be at least 1");
  require(c.paths.max_len >= 2, "paths.max_len must be at least 2");
  require(c.paths.limit >= 1, "paths.limit must be at least 1");
  require(c.text_top_n >= 1, "text.top_n must be at least 1");
  for (Channel ch : kAllChannels)
    require(c.weights[ch] >= 0.0, "channel weights must be non-negative");
  require(c.thresholds.weak <= c.thresholds.strong, "verdict.weak must not exceed verdict.strong");
}

}  // namespace xeval::cli

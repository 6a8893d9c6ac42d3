#include "commands.hpp"

#include <CLI11.hpp>

#include <deque>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "run_config.hpp"
#include "xeval/cluster.hpp"
#include "xeval/diagnostics.hpp"
#include "xeval/error.hpp"
#include "xeval/evaluator.hpp"
#include "xeval/explainer.hpp"
#include "xeval/gnn.hpp"
#include "xeval/graph.hpp"
#include "xeval/json_io.hpp"
#include "xeval/paths.hpp"
#include "xeval/reasoner.hpp"
#include "xeval/text.hpp"
#include "xeval/text_util.hpp"

namespace xeval::cli {

namespace {

using Setter = std::function<void(RunConfig&)>;

struct Command {
  CLI::App* app = nullptr;
  std::string config_file;
  std::vector<Setter> overrides;

  template <class T, class F>
  CLI::Option* option(const std::string& name, const std::string& desc, F set) {
    auto slot = std::make_shared<std::optional<T>>();
    overrides.push_back([slot, set](RunConfig& c) {
      if (*slot) set(c, **slot);
    });
    return app->add_option(name, *slot, desc);
  }

  RunConfig config() const {
    RunConfig c = config_file.empty() ? RunConfig{} : load_run_config(config_file);
    for (const Setter& s : overrides) s(c);
    resolve_paths(c, fs::current_path());
    validate(c);
    return c;
  }
};

void config_flag(Command& cmd) {
  cmd.app->add_option("-c,--config", cmd.config_file, "Run configuration file (TOML-style sections)")
      ->check(CLI::ExistingFile);
}

void output_flag(Command& cmd, const std::string& what) {
  cmd.option<std::string>("-o,--output", "Output directory for " + what,
                          [](RunConfig& c, const std::string& v) { c.files.output = v; });
}

void graph_flags(Command& cmd) {
  cmd.option<std::string>("--nodes", "Nodes TSV (id, label, comma-separated features)",
                          [](RunConfig& c, const std::string& v) { c.files.nodes = v; });
  cmd.option<std::string>("--edges", "Edges TSV (src_id, relation, dst_id)",
                          [](RunConfig& c, const std::string& v) { c.files.edges = v; });
  cmd.option<bool>("--allow-self-loops", "Accept edges whose endpoints coincide (true/false)",
                   [](RunConfig& c, bool v) { c.allow_self_loops = v; });
}

void checkpoint_flag(Command& cmd) {
  cmd.option<std::string>("--checkpoint", "Model checkpoint (default <output>/model.ckpt)",
                          [](RunConfig& c, const std::string& v) { c.files.checkpoint = v; });
}

void model_flags(Command& cmd) {
  cmd.option<std::size_t>("--layers", "Message-passing layers; 0 = graph diameter capped at 4",
                          [](RunConfig& c, std::size_t v) { c.model.layers = v; });
  cmd.option<std::size_t>("--hidden", "Hidden and embedding width",
                          [](RunConfig& c, std::size_t v) { c.model.hidden = v; });
  cmd.option<double>("--lr", "Training learning rate",
                     [](RunConfig& c, double v) { c.model.learning_rate = v; });
  cmd.option<std::size_t>("--epochs", "Training epochs",
                          [](RunConfig& c, std::size_t v) { c.model.epochs = v; });
  cmd.option<std::uint64_t>("--seed", "Seed for initialisation and negative sampling",
                            [](RunConfig& c, std::uint64_t v) { c.model.seed = v; });
}

void explainer_flags(Command& cmd) {
  cmd.option<double>("--sparsity", "Mask sparsity coefficient (lambda)",
                     [](RunConfig& c, double v) { c.mask.sparsity = v; });
  cmd.option<std::size_t>("--mask-epochs", "Mask training epochs",
                          [](RunConfig& c, std::size_t v) { c.mask.epochs = v; });
  cmd.option<double>("--mask-lr", "Mask learning rate",
                     [](RunConfig& c, double v) { c.mask.learning_rate = v; });
  cmd.option<std::size_t>("--mask-hidden", "Mask MLP hidden width",
                          [](RunConfig& c, std::size_t v) { c.mask.hidden = v; });
  cmd.option<std::uint64_t>("--mask-seed", "Mask MLP initialisation seed",
                            [](RunConfig& c, std::uint64_t v) { c.mask.seed = v; });
  cmd.option<double>("--initial-bias", "Initial mask output bias",
                     [](RunConfig& c, double v) { c.mask.initial_bias = v; });
  cmd.option<std::size_t>("--top-k", "Edges kept in the explanation",
                          [](RunConfig& c, std::size_t v) { c.extract.top_k = v; });
  cmd.option<bool>("--connectivity", "Complete the explanation until src and dst connect (true/false)",
                   [](RunConfig& c, bool v) { c.extract.enforce_connectivity = v; });
}

void cluster_flags(Command& cmd) {
  cmd.option<std::size_t>("--k", "Cluster count; 0 = ceil(sqrt(nodes))",
                          [](RunConfig& c, std::size_t v) { c.cluster_k = v; });
  cmd.option<std::uint64_t>("--cluster-seed", "Seed for the first cluster centre",
                            [](RunConfig& c, std::uint64_t v) { c.cluster_seed = v; });
}

void path_flags(Command& cmd) {
  cmd.option<std::size_t>("--max-len", "Longest path in hops (at least 2)",
                          [](RunConfig& c, std::size_t v) { c.paths.max_len = v; });
  cmd.option<std::size_t>("--path-limit", "Paths reported per target",
                          [](RunConfig& c, std::size_t v) { c.paths.limit = v; });
  cmd.option<bool>("--exclude-direct", "Skip the one-hop src-dst path (true/false)",
                   [](RunConfig& c, bool v) { c.paths.exclude_direct = v; });
}

void evidence_flags(Command& cmd) {
  cmd.option<std::size_t>("--top-m", "Features compared by the cluster overlap",
                          [](RunConfig& c, std::size_t v) { c.top_m = v; });
  cmd.option<std::string>("--corpus", "JSONL corpus for the text channel",
                          [](RunConfig& c, const std::string& v) { c.files.corpus = v; });
  cmd.option<std::size_t>("--text-top-n", "Sentences reported per target",
                          [](RunConfig& c, std::size_t v) { c.text_top_n = v; });
  cmd.option<std::string>("--kb", "Knowledge base for the reasoner channel",
                          [](RunConfig& c, const std::string& v) { c.files.kb = v; });
  cmd.option<std::string>("--lexicon", "Sentence templates for proof rendering",
                          [](RunConfig& c, const std::string& v) { c.files.lexicon = v; });
  cmd.option<bool>("--graph-facts", "Add graph edges to the knowledge base as facts (true/false)",
                   [](RunConfig& c, bool v) { c.graph_facts = v; });
  cmd.option<double>("--w-cluster", "Weight of the cluster overlap channel (0 disables)",
                     [](RunConfig& c, double v) { c.weights.cluster_overlap = v; });
  cmd.option<double>("--w-path", "Weight of the path channel (0 disables)",
                     [](RunConfig& c, double v) { c.weights.path = v; });
  cmd.option<double>("--w-text", "Weight of the text channel (0 disables)",
                     [](RunConfig& c, double v) { c.weights.text = v; });
  cmd.option<double>("--w-reasoner", "Weight of the reasoner channel (0 disables)",
                     [](RunConfig& c, double v) { c.weights.reasoner = v; });
  cmd.option<double>("--strong", "Aggregate at or above which the verdict is strong",
                     [](RunConfig& c, double v) { c.thresholds.strong = v; });
  cmd.option<double>("--weak", "Aggregate below which the verdict is weak",
                     [](RunConfig& c, double v) { c.thresholds.weak = v; });
}

// ---------------------------------------------------------------------------

fs::path require_path(const fs::path& p, const char* key) {
  if (p.empty()) throw UsageError(std::string("no ") + key + " configured");
  return p;
}

fs::path output_dir(const RunConfig& c) {
  const fs::path dir = require_path(c.files.output, "output directory");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

PropertyGraph load_configured_graph(const RunConfig& c) {
  return load_graph(require_path(c.files.nodes, "nodes file"), require_path(c.files.edges, "edges file"),
                    GraphOptions{c.allow_self_loops});
}

GnnModel load_configured_model(const RunConfig& c, const PropertyGraph& g) {
  GnnModel m = load_checkpoint(c.checkpoint_path());
  if (m.input_dim() != g.feature_dim())
    throw DataError("checkpoint expects " + std::to_string(m.input_dim()) +
                    " input features, graph has " + std::to_string(g.feature_dim()));
  return m;
}

std::string numbered(const char* stem, std::size_t i, const char* ext) {
  std::string n = std::to_string(i + 1);
  if (n.size() < 3) n.insert(0, 3 - n.size(), '0');
  return std::string(stem) + "_" + n + ext;
}

void echo_config(const RunConfig& c, const fs::path& dir) { write_text(dir / "config.toml", to_toml(c)); }

int cmd_train(const RunConfig& c) {
  const fs::path dir = output_dir(c);
  const PropertyGraph g = load_configured_graph(c);
  TrainOptions opt;
  opt.shape.layers = c.model.layers;
  if (opt.shape.layers == 0) opt.shape.layers = std::clamp<std::size_t>(graph_diameter(g), 1, 4);
  opt.shape.hidden_dim = c.model.hidden;
  opt.learning_rate = c.model.learning_rate;
  opt.epochs = c.model.epochs;
  opt.seed = c.model.seed;

  const std::vector<NodePair> positives = edge_pairs(g);
  const std::vector<NodePair> negatives = sample_negatives(g, positives, c.model.seed);
  const TrainResult result = train(g, positives, negatives, opt);

  const fs::path ckpt = c.checkpoint_path();
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  save_checkpoint(result.model, ckpt);
  std::string csv = "epoch,loss\n";
  for (std::size_t i = 0; i < result.loss_trace.size(); ++i)
    csv += std::to_string(i + 1) + "," + format_double(result.loss_trace[i]) + "\n";
  write_text(dir / "loss.csv", csv);
  echo_config(c, dir);

  std::cout << "trained " << opt.shape.layers << "-layer model on " << g.node_count() << " nodes, "
            << positives.size() << " positive / " << negatives.size() << " negative pairs\n";
  if (!result.loss_trace.empty())
    std::cout << "loss " << format_fixed(result.loss_trace.front(), 6) << " -> "
              << format_fixed(result.loss_trace.back(), 6) << "\n";
  std::cout << "checkpoint: " << ckpt.string() << "\n";
  return 0;
}

std::vector<TargetSpec> collect_targets(const std::string& file, const std::vector<std::string>& one) {
  std::vector<TargetSpec> targets;
  if (!file.empty()) targets = load_targets(file);
  if (!one.empty()) targets.push_back({one[0], one[1], one[2]});
  if (targets.empty()) throw UsageError("no targets given (use --targets or --target)");
  return targets;
}

int cmd_explain(const RunConfig& c, const std::vector<TargetSpec>& targets) {
  const PropertyGraph g = load_configured_graph(c);
  const GnnModel m = load_configured_model(c, g);
  std::vector<Json> docs;
  for (const TargetSpec& t : targets) {
    const LinkTarget lt{g.index_of(t.src), g.index_of(t.dst), t.relation};
    docs.push_back(explanation_to_json(g, explain_link(g, m, lt, c.mask, c.extract)));
  }
  if (c.files.output.empty()) {
    for (const Json& d : docs) std::cout << d.dump(2) << "\n";
    return 0;
  }
  const fs::path dir = output_dir(c);
  for (std::size_t i = 0; i < docs.size(); ++i) write_json(dir / numbered("explanation", i, ".json"), docs[i]);
  echo_config(c, dir);
  std::cout << "wrote " << docs.size() << " explanation(s) to " << dir.string() << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& c, const std::vector<TargetSpec>& targets, std::size_t jobs) {
  const fs::path dir = output_dir(c);
  const PropertyGraph g = load_configured_graph(c);
  const GnnModel m = load_configured_model(c, g);
  std::optional<CorpusIndex> corpus;
  if (!c.files.corpus.empty()) corpus = build_index(c.files.corpus);
  std::optional<KnowledgeBase> kb;
  if (!c.files.kb.empty()) kb = load_kb(c.files.kb);
  Lexicon lexicon;
  if (!c.files.lexicon.empty()) lexicon = load_lexicon(c.files.lexicon);

  const Evaluator evaluator(g, m, c.evaluator_config(), std::move(corpus), std::move(kb),
                            std::move(lexicon));
  const BatchResult batch = evaluator.evaluate_batch(targets, jobs);
  for (std::size_t i = 0; i < batch.reports.size(); ++i) {
    if (!batch.reports[i]) continue;
    write_json(dir / numbered("report", i, ".json"),
               report_to_json(g, *batch.reports[i], evaluator.knowledge_base()));
    write_text(dir / numbered("report", i, ".txt"), render_report_text(g, *batch.reports[i]));
  }
  write_json(dir / "summary.json", summary_to_json(batch.summary, batch.errors));
  echo_config(c, dir);

  for (const TargetError& e : batch.errors)
    warn("target " + std::to_string(e.index + 1) + " (" + e.target.src + " " + e.target.relation +
         " " + e.target.dst + "): " + e.message);
  std::cout << "evaluated " << batch.summary.reports << " of " << batch.summary.targets
            << " target(s); reports in " << dir.string() << "\n";
  for (const auto& [v, n] : batch.summary.verdicts) std::cout << "  " << verdict_name(v) << ": " << n << "\n";
  return 0;
}

int cmd_reason(const RunConfig& c, const std::vector<std::string>& queries) {
  const KnowledgeBase kb = load_kb(require_path(c.files.kb, "knowledge base"));
  Lexicon lexicon;
  if (!c.files.lexicon.empty()) lexicon = load_lexicon(c.files.lexicon);
  const Reasoner reasoner(kb);
  Json results = Json::array();
  for (const std::string& q : queries) {
    Atom goal;
    try {
      goal = parse_atom(q);
    } catch (const ParseError& e) {
      throw UsageError("query '" + q + "': " + e.what());
    }
    const EntailmentResult r = reasoner.entails(goal);
    std::cout << (r.entailed ? "Entailed: " : "NotEntailed: ") << to_string(goal) << "\n";
    Json item{{"goal", to_string(goal)}, {"entailed", r.entailed}};
    if (r.proof) {
      const std::string text = proof_to_text(*r.proof, kb, lexicon);
      std::cout << "  " << text << "\n";
      item["proof"] = proof_to_json(*r.proof, kb)["steps"];
      item["proof_text"] = text;
    }
    results.push_back(item);
  }
  if (!c.files.output.empty()) {
    const fs::path dir = output_dir(c);
    write_json(dir / "entailment.json",
               Json{{"schema_version", kSchemaVersion}, {"kind", "entailment"}, {"results", results}});
    echo_config(c, dir);
  }
  return 0;
}

int cmd_paths(const RunConfig& c, const std::string& src, const std::string& dst) {
  const PropertyGraph g = load_configured_graph(c);
  const auto paths = find_paths(g, g.index_of(src), g.index_of(dst), c.paths);
  for (const EvidencePath& p : paths) std::cout << render_path(g, p) << "\n";
  std::cout << "channel score: " << format_fixed(path_channel_score(paths), 4) << "\n";
  if (!c.files.output.empty()) {
    const fs::path dir = output_dir(c);
    write_json(dir / "paths.json", Json{{"schema_version", kSchemaVersion},
                                        {"kind", "paths"},
                                        {"src", src},
                                        {"dst", dst},
                                        {"score", round_to(path_channel_score(paths), 6)},
                                        {"paths", paths_to_json(g, paths)}});
    echo_config(c, dir);
  }
  return 0;
}

int cmd_cluster(const RunConfig& c) {
  const PropertyGraph g = load_configured_graph(c);
  const GnnModel m = load_configured_model(c, g);
  ClusterOptions opt;
  opt.k = c.cluster_k;
  opt.seed = c.cluster_seed;
  const Clustering clustering = cluster_embeddings(gnn_forward(g, m), opt);
  const Json doc = clustering_to_json(g, clustering);
  if (c.files.output.empty()) {
    std::cout << doc.dump(2) << "\n";
    return 0;
  }
  const fs::path dir = output_dir(c);
  write_json(dir / "clustering.json", doc);
  echo_config(c, dir);
  std::cout << "k=" << clustering.k << " inertia=" << format_fixed(clustering.inertia, 6) << " ("
            << clustering.iterations << " iterations)\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Explain GNN link predictions and substantiate them with independent evidence"};
  app.name("xeval");
  app.require_subcommand(1);

  std::deque<Command> commands;
  auto add = [&](const char* name, const char* desc) -> Command& {
    Command& cmd = commands.emplace_back();
    cmd.app = app.add_subcommand(name, desc);
    config_flag(cmd);
    return cmd;
  };

  Command& train_cmd = add("train", "Train the link-prediction GNN and write a checkpoint and loss trace");
  graph_flags(train_cmd);
  model_flags(train_cmd);
  checkpoint_flag(train_cmd);
  output_flag(train_cmd, "loss.csv and the config echo");

  std::string targets_file;
  std::vector<std::string> one_target;
  Command& explain_cmd = add("explain", "Learn edge masks and write subgraph explanations");
  graph_flags(explain_cmd);
  checkpoint_flag(explain_cmd);
  explainer_flags(explain_cmd);
  output_flag(explain_cmd, "explanation_NNN.json (stdout when unset)");
  explain_cmd.app->add_option("--targets", targets_file, "TSV of src_id, relation, dst_id");
  explain_cmd.app->add_option("--target", one_target, "One target as SRC RELATION DST")->expected(3);

  std::size_t jobs = 1;
  Command& eval_cmd = add("evaluate", "Run every evidence channel and write per-target reports");
  graph_flags(eval_cmd);
  checkpoint_flag(eval_cmd);
  explainer_flags(eval_cmd);
  cluster_flags(eval_cmd);
  path_flags(eval_cmd);
  evidence_flags(eval_cmd);
  output_flag(eval_cmd, "reports, summary.json and the config echo");
  eval_cmd.app->add_option("--targets", targets_file, "TSV of src_id, relation, dst_id")->required();
  eval_cmd.app->add_option("-j,--jobs", jobs, "Worker threads (default 1)")->check(CLI::PositiveNumber);

  std::vector<std::string> queries;
  Command& reason_cmd = add("reason", "Answer entailment queries against a knowledge base");
  reason_cmd.option<std::string>("--kb", "Knowledge base file",
                                 [](RunConfig& c, const std::string& v) { c.files.kb = v; });
  reason_cmd.option<std::string>("--lexicon", "Sentence templates for proof rendering",
                                 [](RunConfig& c, const std::string& v) { c.files.lexicon = v; });
  output_flag(reason_cmd, "entailment.json (optional)");
  reason_cmd.app->add_option("-q,--query", queries, "Ground atom such as Mortal(socrates)")->required();

  std::string src, dst;
  Command& paths_cmd = add("paths", "List alternative paths between two nodes");
  graph_flags(paths_cmd);
  path_flags(paths_cmd);
  output_flag(paths_cmd, "paths.json (optional)");
  paths_cmd.app->add_option("--src", src, "Source node id")->required();
  paths_cmd.app->add_option("--dst", dst, "Destination node id")->required();

  Command& cluster_cmd = add("cluster", "Cluster node embeddings from a trained model");
  graph_flags(cluster_cmd);
  checkpoint_flag(cluster_cmd);
  cluster_flags(cluster_cmd);
  output_flag(cluster_cmd, "clustering.json (stdout when unset)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  std::size_t warnings = 0;
  WarningHandler previous = set_warning_handler([&](std::string_view msg) {
    ++warnings;
    std::cerr << "warning: " << msg << "\n";
  });

  int code = 0;
  try {
    if (train_cmd.app->parsed()) code = cmd_train(train_cmd.config());
    else if (explain_cmd.app->parsed())
      code = cmd_explain(explain_cmd.config(), collect_targets(targets_file, one_target));
    else if (eval_cmd.app->parsed())
      code = cmd_evaluate(eval_cmd.config(), collect_targets(targets_file, {}), jobs);
    else if (reason_cmd.app->parsed()) code = cmd_reason(reason_cmd.config(), queries);
    else if (paths_cmd.app->parsed()) code = cmd_paths(paths_cmd.config(), src, dst);
    else if (cluster_cmd.app->parsed()) code = cmd_cluster(cluster_cmd.config());
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = 1;
  }
  set_warning_handler(std::move(previous));
  if (code == 0 && warnings) std::cerr << "completed with " << warnings << " warning(s)\n";
  return code;
}

}  // namespace xeval::cli

#include "xeval/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include "xeval/error.hpp"
#include "xeval/text_util.hpp"

namespace xeval {

std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::cluster_overlap: return "cluster_overlap";
    case Channel::path: return "path";
    case Channel::text: return "text";
    case Channel::reasoner: return "reasoner";
  }
  return "unknown";
}

double ChannelWeights::operator[](Channel c) const {
  switch (c) {
    case Channel::cluster_overlap: return cluster_overlap;
    case Channel::path: return path;
    case Channel::text: return text;
    case Channel::reasoner: return reasoner;
  }
  return 0.0;
}

double& ChannelWeights::operator[](Channel c) {
  switch (c) {
    case Channel::cluster_overlap: return cluster_overlap;
    case Channel::path: return path;
    case Channel::text: return text;
    case Channel::reasoner: break;
  }
  return reasoner;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::strong: return "strong";
    case Verdict::moderate: return "moderate";
    case Verdict::weak: return "weak";
  }
  return "unknown";
}

Verdict classify(double aggregate, const VerdictThresholds& t) {
  if (aggregate >= t.strong) return Verdict::strong;
  if (aggregate < t.weak) return Verdict::weak;
  return Verdict::moderate;
}

double fuse(const std::map<Channel, double>& scores, const ChannelWeights& weights) {
  for (Channel c : kAllChannels) {
    const double w = weights[c];
    if (w < 0.0 || !std::isfinite(w))
      throw UsageError("channel weight for " + std::string(channel_name(c)) +
                       " must be finite and non-negative");
  }
  double num = 0.0;
  double den = 0.0;
  for (const auto& [channel, score] : scores) {
    const double w = weights[channel];
    num += w * score;
    den += w;
  }
  if (!(den > 0.0)) throw UsageError("all evidence channels are disabled");
  return std::clamp(num / den, 0.0, 1.0);
}

namespace {

std::string predicate_for_relation(std::string_view relation) {
  std::string out;
  for (char c : relation) {
    const auto u = static_cast<unsigned char>(c);
    out.push_back(u < 0x80 && (std::isalnum(u) || c == '_') ? c : '_');
  }
  if (out.empty() || !std::isalpha(static_cast<unsigned char>(out[0]))) out = "r_" + out;
  return out;
}

Atom relation_atom(std::string_view relation, std::string_view src, std::string_view dst) {
  return Atom{predicate_for_relation(relation),
              {Term::constant(normalize_constant(src)), Term::constant(normalize_constant(dst))}};
}

}  // namespace

Atom goal_for(const TargetSpec& target) {
  return relation_atom(target.relation, target.src, target.dst);
}

std::vector<TargetSpec> read_targets(std::istream& in) {
  std::vector<TargetSpec> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 3)
      throw ParseError("expected src_id<TAB>relation<TAB>dst_id", line_no);
    TargetSpec t{std::string(trim(cols[0])), std::string(trim(cols[1])),
                 std::string(trim(cols[2]))};
    if (out.empty() && line_no == 1 && t.src == "src_id" && t.relation == "relation" &&
        t.dst == "dst_id")
      continue;
    if (t.src.empty() || t.relation.empty() || t.dst.empty())
      throw ParseError("empty target field", line_no);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TargetSpec> load_targets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open targets file " + path.string());
  try {
    return read_targets(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

struct Evaluator::Impl {
  PropertyGraph graph;
  GnnModel model;
  EvaluatorConfig config;
  std::optional<CorpusIndex> corpus;
  std::optional<KnowledgeBase> kb;  // including graph facts when configured
  Lexicon lexicon;

  EmbeddingMatrix embeddings;
  Clustering clustering;
  std::vector<FeatureImportance> cluster_importance;
  std::optional<Reasoner> reasoner;
  std::vector<Atom> graph_facts;

  bool active(Channel c) const {
    if (!(config.weights[c] > 0.0)) return false;
    if (c == Channel::text) return corpus.has_value();
    if (c == Channel::reasoner) return kb.has_value();
    return true;
  }
};

Evaluator::Evaluator(const PropertyGraph& graph, const GnnModel& model, EvaluatorConfig config,
                     std::optional<CorpusIndex> corpus, std::optional<KnowledgeBase> kb,
                     Lexicon lexicon)
    : impl_(std::make_unique<Impl>()) {
  Impl& s = *impl_;
  for (Channel c : kAllChannels)
    if (config.weights[c] < 0.0 || !std::isfinite(config.weights[c]))
      throw UsageError("channel weight for " + std::string(channel_name(c)) +
                       " must be finite and non-negative");
  if (config.thresholds.weak > config.thresholds.strong)
    throw UsageError("weak threshold exceeds strong threshold");

  s.graph = graph;
  s.model = model;
  s.config = std::move(config);
  s.corpus = std::move(corpus);
  s.lexicon = std::move(lexicon);
  s.embeddings = gnn_forward(s.graph, s.model);

  if (s.active(Channel::cluster_overlap)) {
    ClusterOptions copt;
    copt.k = s.config.cluster_k;
    copt.seed = s.config.cluster_seed;
    s.clustering = cluster_embeddings(s.embeddings, copt);
    for (std::size_t c = 0; c < s.clustering.k; ++c) {
      if (s.clustering.members(c).empty())
        s.cluster_importance.push_back({std::vector<double>(s.graph.feature_dim(), 0.0), "occlusion"});
      else
        s.cluster_importance.push_back(cluster_feature_importance(s.graph, s.model, s.clustering, c));
    }
  }

  if (kb) {
    if (s.config.kb_include_graph_edges) {
      for (const EdgeRecord& e : s.graph.edges())
        s.graph_facts.push_back(
            relation_atom(e.relation, s.graph.node(e.src).id, s.graph.node(e.dst).id));
      s.kb = kb->with_facts(s.graph_facts);
    } else {
      s.kb = std::move(kb);
    }
    if (s.config.weights.reasoner > 0.0) s.reasoner.emplace(*s.kb);
  }

  if (std::none_of(kAllChannels.begin(), kAllChannels.end(),
                   [&](Channel c) { return s.active(c); }))
    throw UsageError("all evidence channels are disabled");
}

Evaluator::~Evaluator() = default;

const EvaluatorConfig& Evaluator::config() const { return impl_->config; }
const Clustering& Evaluator::clustering() const { return impl_->clustering; }
const EmbeddingMatrix& Evaluator::embeddings() const { return impl_->embeddings; }
const PropertyGraph& Evaluator::graph() const { return impl_->graph; }
const KnowledgeBase* Evaluator::knowledge_base() const {
  return impl_->kb ? &*impl_->kb : nullptr;
}

std::vector<Channel> Evaluator::active_channels() const {
  std::vector<Channel> out;
  for (Channel c : kAllChannels)
    if (impl_->active(c)) out.push_back(c);
  return out;
}

EvidenceReport Evaluator::evaluate_prediction(const TargetSpec& target) const {
  const Impl& s = *impl_;
  const NodeIndex u = s.graph.index_of(target.src);
  const NodeIndex v = s.graph.index_of(target.dst);
  if (u == v) throw UsageError("target endpoints must differ");

  EvidenceReport r;
  r.target = target;
  r.prediction_score = score_link(s.embeddings, s.model, u, v);

  if (s.active(Channel::cluster_overlap)) {
    SubgraphExplanation expl =
        explain_link(s.graph, s.model, {u, v, target.relation}, s.config.mask, s.config.extract);
    std::set<std::size_t> clusters{s.clustering.assignment[u], s.clustering.assignment[v]};
    double total = 0.0;
    for (std::size_t c : clusters)
      total += overlap_score(expl, s.cluster_importance[c], s.config.top_m);
    r.channels[Channel::cluster_overlap] = total / static_cast<double>(clusters.size());
    r.endpoint_clusters.assign(clusters.begin(), clusters.end());
    r.explanation = std::move(expl);
  }

  if (s.active(Channel::path)) {
    auto paths = find_paths(s.graph, u, v, s.config.paths);
    r.channels[Channel::path] = path_channel_score(paths);
    r.paths = std::move(paths);
  }

  if (s.active(Channel::text)) {
    auto evidence = retrieve_evidence(*s.corpus, target.src, target.dst, s.config.text_top_n);
    r.channels[Channel::text] = text_channel_score(evidence);
    r.text = std::move(evidence);
  }

  if (s.active(Channel::reasoner)) {
    const Atom goal = goal_for(target);
    // The target's own triple may not support itself.
    const bool self_support = s.config.kb_include_graph_edges &&
                              std::find(s.graph_facts.begin(), s.graph_facts.end(), goal) !=
                                  s.graph_facts.end();
    ReasonerScore rs;
    if (self_support) {
      std::vector<Atom> facts;
      for (const Atom& f : s.kb->facts())
        if (f != goal) facts.push_back(f);
      const KnowledgeBase reduced = KnowledgeBase::build(s.kb->rules(), std::move(facts));
      rs = reasoner_channel_score(reduced, goal);
      if (rs.proof) r.proof_text = proof_to_text(*rs.proof, reduced, s.lexicon);
    } else {
      rs = reasoner_channel_score(*s.reasoner, goal);
      if (rs.proof) r.proof_text = proof_to_text(*rs.proof, *s.kb, s.lexicon);
    }
    r.channels[Channel::reasoner] = rs.score;
    r.goal = goal;
    r.proof = std::move(rs.proof);
  }

  r.aggregate = fuse(r.channels, s.config.weights);
  r.verdict = classify(r.aggregate, s.config.thresholds);
  return r;
}

BatchSummary summarize(const std::vector<std::optional<EvidenceReport>>& reports,
                       std::size_t error_count) {
  BatchSummary sum;
  sum.targets = reports.size();
  sum.errors = error_count;
  for (Verdict v : {Verdict::strong, Verdict::moderate, Verdict::weak}) sum.verdicts[v] = 0;
  double aggregate_total = 0.0;
  for (const auto& r : reports) {
    if (!r) continue;
    ++sum.reports;
    aggregate_total += r->aggregate;
    ++sum.verdicts[r->verdict];
    for (const auto& [c, score] : r->channels) {
      sum.channel_means[c] += score;
      ++sum.channel_counts[c];
    }
  }
  for (auto& [c, total] : sum.channel_means) total /= static_cast<double>(sum.channel_counts[c]);
  sum.aggregate_mean = sum.reports ? aggregate_total / static_cast<double>(sum.reports) : 0.0;
  return sum;
}

BatchResult Evaluator::evaluate_batch(const std::vector<TargetSpec>& targets,
                                      std::size_t jobs) const {
  if (targets.empty()) throw UsageError("no targets to evaluate");
  BatchResult out;
  out.reports.resize(targets.size());
  std::vector<std::optional<std::string>> failures(targets.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < targets.size(); i = next++) {
      try {
        out.reports[i] = evaluate_prediction(targets[i]);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, targets.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < targets.size(); ++i)
    if (failures[i]) out.errors.push_back({i, targets[i], *failures[i]});
  out.summary = summarize(out.reports, out.errors.size());
  return out;
}

}  // namespace xeval

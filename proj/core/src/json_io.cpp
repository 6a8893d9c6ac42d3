#include "xeval/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "xeval/error.hpp"
#include "xeval/text_util.hpp"

namespace xeval {

double round_to(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double r = std::round(x * scale) / scale;
  return r == 0.0 ? 0.0 : r;  // no "-0"
}

namespace {

Json importance_json(const FeatureImportance& fi) {
  Json scores = Json::array();
  for (double s : fi.scores) scores.push_back(round_to(s, 6));
  Json top = Json::array();
  for (std::size_t f : fi.top(fi.scores.size())) top.push_back(f);
  return Json{{"method", fi.method}, {"scores", scores}, {"ranked", top}};
}

}  // namespace

Json explanation_to_json(const PropertyGraph& g, const SubgraphExplanation& e) {
  Json edges = Json::array();
  for (std::size_t rank = 0; rank < e.edges.size(); ++rank) {
    const EdgeRecord& rec = g.edges().at(e.edges[rank].edge);
    edges.push_back(Json{{"rank", rank + 1},
                         {"edge", e.edges[rank].edge},
                         {"src", g.node(rec.src).id},
                         {"relation", rec.relation},
                         {"dst", g.node(rec.dst).id},
                         {"weight", round_to(e.edges[rank].weight, 6)}});
  }
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "explanation"},
              {"target",
               {{"src", g.node(e.target.src).id},
                {"relation", e.target.relation},
                {"dst", g.node(e.target.dst).id}}},
              {"edges", edges},
              {"feature_importance", importance_json(e.important_features)},
              {"connected", e.connected}};
}

Json clustering_to_json(const PropertyGraph& g, const Clustering& c) {
  Json assignments = Json::object();
  for (NodeIndex v = 0; v < c.assignment.size(); ++v)
    assignments[g.node(v).id] = c.assignment[v];
  Json centroids = Json::array();
  for (std::size_t k = 0; k < c.centroids.rows(); ++k) {
    Json row = Json::array();
    for (double x : c.centroids.row(k)) row.push_back(round_to(x, 6));
    centroids.push_back(row);
  }
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "clustering"},
              {"k", c.k},
              {"iterations", c.iterations},
              {"inertia", round_to(c.inertia, 6)},
              {"assignments", assignments},
              {"centroids", centroids}};
}

Json paths_to_json(const PropertyGraph& g, const std::vector<EvidencePath>& paths) {
  Json out = Json::array();
  for (const EvidencePath& p : paths) {
    Json nodes = Json::array();
    for (NodeIndex v : p.nodes) nodes.push_back(g.node(v).id);
    out.push_back(Json{{"nodes", nodes},
                       {"relations", p.relations(g)},
                       {"length", p.length()},
                       {"score", round_to(p.score, 6)},
                       {"text", render_path(g, p)}});
  }
  return out;
}

Json proof_to_json(const Proof& proof, const KnowledgeBase& kb) {
  static constexpr const char* kinds[] = {"axiom", "asserted", "derived"};
  Json steps = Json::array();
  for (std::size_t i = 0; i < proof.steps.size(); ++i) {
    const ProofStep& s = proof.steps[i];
    Json step{{"index", i}, {"kind", kinds[static_cast<int>(s.kind)]}};
    if (s.atom) step["atom"] = to_string(*s.atom);
    if (s.rule) step["rule"] = to_string(kb.rules().at(*s.rule));
    step["premises"] = s.premises;
    steps.push_back(step);
  }
  return Json{{"goal", to_string(proof.goal)}, {"steps", steps}};
}

Json report_to_json(const PropertyGraph& g, const EvidenceReport& r, const KnowledgeBase* kb) {
  Json channels = Json::object();
  for (const auto& [c, score] : r.channels) channels[std::string(channel_name(c))] = round_to(score, 6);

  Json doc{{"schema_version", kSchemaVersion},
           {"kind", "evidence_report"},
           {"target", {{"src", r.target.src}, {"relation", r.target.relation}, {"dst", r.target.dst}}},
           {"prediction_score", round_to(r.prediction_score, 6)},
           {"channels", channels},
           {"aggregate", round_to(r.aggregate, 6)},
           {"verdict", verdict_name(r.verdict)}};

  Json payloads = Json::object();
  if (r.explanation) {
    Json e = explanation_to_json(g, *r.explanation);
    e.erase("schema_version");
    e.erase("kind");
    e["endpoint_clusters"] = r.endpoint_clusters;
    payloads["explanation"] = e;
  }
  if (r.paths) payloads["paths"] = paths_to_json(g, *r.paths);
  if (r.text) {
    Json items = Json::array();
    for (const TextEvidence& t : *r.text)
      items.push_back(Json{{"doc", t.doc_id},
                           {"sentence_index", t.sentence_index},
                           {"sentence", t.sentence},
                           {"score", round_to(t.score, 6)},
                           {"matched", t.matched}});
    payloads["text"] = items;
  }
  if (r.goal) {
    Json reasoner{{"goal", to_string(*r.goal)}, {"entailed", r.proof.has_value()}};
    if (r.proof && kb) reasoner["proof"] = proof_to_json(*r.proof, *kb)["steps"];
    if (r.proof) reasoner["proof_text"] = r.proof_text;
    payloads["reasoner"] = reasoner;
  }
  doc["evidence"] = payloads;
  return doc;
}

Json summary_to_json(const BatchSummary& s, const std::vector<TargetError>& errors) {
  Json means = Json::object();
  for (const auto& [c, m] : s.channel_means) means[std::string(channel_name(c))] = round_to(m, 6);
  Json counts = Json::object();
  for (const auto& [c, n] : s.channel_counts) counts[std::string(channel_name(c))] = n;
  Json verdicts = Json::object();
  for (const auto& [v, n] : s.verdicts) verdicts[std::string(verdict_name(v))] = n;
  Json errs = Json::array();
  for (const TargetError& e : errors)
    errs.push_back(Json{{"index", e.index},
                        {"target", {{"src", e.target.src}, {"relation", e.target.relation}, {"dst", e.target.dst}}},
                        {"message", e.message}});
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "batch_summary"},
              {"targets", s.targets},
              {"reports", s.reports},
              {"errors", s.errors},
              {"channel_means", means},
              {"channel_counts", counts},
              {"aggregate_mean", round_to(s.aggregate_mean, 6)},
              {"verdicts", verdicts},
              {"error_records", errs}};
}

std::string render_report_text(const PropertyGraph& g, const EvidenceReport& r) {
  std::ostringstream out;
  out << "Prediction: " << r.target.src << " -[" << r.target.relation << "]- " << r.target.dst
      << "\n";
  out << "Model score: " << format_fixed(r.prediction_score, 4) << "\n";
  out << "Verdict: " << verdict_name(r.verdict) << " (aggregate " << format_fixed(r.aggregate, 4)
      << ")\n\nChannels:\n";
  for (const auto& [c, score] : r.channels)
    out << "  " << channel_name(c) << ": " << format_fixed(score, 4) << "\n";

  if (r.explanation) {
    out << "\nExplanation edges" << (r.explanation->connected ? "" : " (disconnected)") << ":\n";
    for (const WeightedEdge& w : r.explanation->edges) {
      const EdgeRecord& e = g.edges().at(w.edge);
      out << "  " << g.node(e.src).id << " -[" << e.relation << "]-> " << g.node(e.dst).id
          << "  " << format_fixed(w.weight, 6) << "\n";
    }
    const auto top = r.explanation->important_features.top(5);
    out << "Important features:";
    if (top.empty()) out << " none";
    for (std::size_t f : top) out << " " << f;
    out << "\n";
  }
  if (r.paths) {
    out << "\nAlternative paths:\n";
    if (r.paths->empty()) out << "  none\n";
    for (const EvidencePath& p : *r.paths) out << "  " << render_path(g, p) << "\n";
  }
  if (r.text) {
    out << "\nText evidence:\n";
    if (r.text->empty()) out << "  none\n";
    for (const TextEvidence& t : *r.text)
      out << "  [" << t.doc_id << "#" << t.sentence_index << "] " << t.sentence << "\n";
  }
  if (r.goal) {
    out << "\nReasoner goal: " << to_string(*r.goal) << "\n";
    if (r.proof)
      out << "Proof: " << r.proof_text << "\n";
    else
      out << "Not entailed.\n";
  }
  return out.str();
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out) throw UsageError("failed writing " + path.string());
}

}  // namespace xeval

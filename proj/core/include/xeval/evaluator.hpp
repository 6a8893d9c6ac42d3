#pragma once

#include <array>
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

#include "xeval/cluster.hpp"
#include "xeval/explainer.hpp"
#include "xeval/gnn.hpp"
#include "xeval/graph.hpp"
#include "xeval/paths.hpp"
#include "xeval/reasoner.hpp"
#include "xeval/text.hpp"

namespace xeval {

enum class Channel : std::uint8_t { cluster_overlap, path, text, reasoner };

inline constexpr std::array<Channel, 4> kAllChannels{Channel::cluster_overlap, Channel::path,
                                                     Channel::text, Channel::reasoner};

std::string_view channel_name(Channel c);

struct ChannelWeights {
  double cluster_overlap = 1.0;
  double path = 1.0;
  double text = 1.0;
  double reasoner = 2.0;

  double operator[](Channel c) const;
  double& operator[](Channel c);
};

struct VerdictThresholds {
  double strong = 0.66;  // aggregate >= strong
  double weak = 0.33;    // aggregate < weak
};

enum class Verdict : std::uint8_t { strong, moderate, weak };

std::string_view verdict_name(Verdict v);
Verdict classify(double aggregate, const VerdictThresholds& thresholds);

// Weighted arithmetic mean over the channels present in `scores`. Throws
// UsageError on a negative weight or when no present channel has positive
// weight.
double fuse(const std::map<Channel, double>& scores, const ChannelWeights& weights);

struct EvaluatorConfig {
  ChannelWeights weights;
  VerdictThresholds thresholds;
  MaskOptions mask;
  ExtractOptions extract;
  std::size_t cluster_k = 0;  // 0 = ceil(sqrt(node count))
  std::uint64_t cluster_seed = 42;
  std::size_t top_m = 5;
  PathOptions paths;
  std::size_t text_top_n = 5;
  // Adds every graph edge except the target itself to the ABox as
  // relation(src, dst).
  bool kb_include_graph_edges = true;
};

struct TargetSpec {
  std::string src;
  std::string relation;
  std::string dst;

  friend bool operator==(const TargetSpec&, const TargetSpec&) = default;
};

// Tab-separated src_id, relation, dst_id; header line optional when it reads
// "src_id\trelation\tdst_id".
std::vector<TargetSpec> read_targets(std::istream& in);
std::vector<TargetSpec> load_targets(const std::filesystem::path& path);

// `relation(src, dst)` with ids lowercased and non-alphanumerics mapped to '_'.
Atom goal_for(const TargetSpec& target);

struct EvidenceReport {
  TargetSpec target;
  double prediction_score = 0.0;
  std::map<Channel, double> channels;  // only channels that were computed

  std::optional<SubgraphExplanation> explanation;  // with cluster_overlap
  std::vector<std::size_t> endpoint_clusters;      // with cluster_overlap
  std::optional<std::vector<EvidencePath>> paths;  // with path
  std::optional<std::vector<TextEvidence>> text;   // with text
  std::optional<Atom> goal;                        // with reasoner
  std::optional<Proof> proof;                      // with reasoner, when entailed
  std::string proof_text;

  double aggregate = 0.0;
  Verdict verdict = Verdict::weak;
};

struct TargetError {
  std::size_t index = 0;
  TargetSpec target;
  std::string message;
};

struct BatchSummary {
  std::size_t targets = 0;
  std::size_t reports = 0;
  std::size_t errors = 0;
  std::map<Channel, double> channel_means;
  std::map<Channel, std::size_t> channel_counts;
  double aggregate_mean = 0.0;
  std::map<Verdict, std::size_t> verdicts;
};

struct BatchResult {
  std::vector<std::optional<EvidenceReport>> reports;  // input order; empty on error
  std::vector<TargetError> errors;
  BatchSummary summary;
};

BatchSummary summarize(const std::vector<std::optional<EvidenceReport>>& reports,
                       std::size_t error_count);

// Holds the immutable inputs of every evidence channel and the data shared
// across targets (embeddings, clustering, per-cluster importance, saturated
// knowledge base). All evaluation methods are const and thread-safe.
class Evaluator {
 public:
  Evaluator(const PropertyGraph& graph, const GnnModel& model, EvaluatorConfig config,
            std::optional<CorpusIndex> corpus = std::nullopt,
            std::optional<KnowledgeBase> kb = std::nullopt, Lexicon lexicon = {});
  ~Evaluator();
  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  const EvaluatorConfig& config() const;
  const Clustering& clustering() const;
  const EmbeddingMatrix& embeddings() const;
  const PropertyGraph& graph() const;
  // The knowledge base the reasoner channel queries, or null without one.
  const KnowledgeBase* knowledge_base() const;

  // Channels that have inputs and positive weight.
  std::vector<Channel> active_channels() const;

  EvidenceReport evaluate_prediction(const TargetSpec& target) const;

  // Per-target failures become TargetError records; `jobs` caps the worker
  // threads. Reports come back in input order whatever the completion order.
  BatchResult evaluate_batch(const std::vector<TargetSpec>& targets, std::size_t jobs = 1) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace xeval

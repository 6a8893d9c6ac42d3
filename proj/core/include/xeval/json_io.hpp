#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xeval/cluster.hpp"
#include "xeval/evaluator.hpp"
#include "xeval/explainer.hpp"
#include "xeval/graph.hpp"
#include "xeval/paths.hpp"
#include "xeval/reasoner.hpp"

namespace xeval {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Rounds to a fixed number of decimals for stable output.
double round_to(double x, int decimals);

Json explanation_to_json(const PropertyGraph& g, const SubgraphExplanation& explanation);
Json clustering_to_json(const PropertyGraph& g, const Clustering& clustering);
Json paths_to_json(const PropertyGraph& g, const std::vector<EvidencePath>& paths);
Json proof_to_json(const Proof& proof, const KnowledgeBase& kb);
Json report_to_json(const PropertyGraph& g, const EvidenceReport& report,
                    const KnowledgeBase* kb = nullptr);
Json summary_to_json(const BatchSummary& summary, const std::vector<TargetError>& errors);

std::string render_report_text(const PropertyGraph& g, const EvidenceReport& report);

// Two-space indented document with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace xeval

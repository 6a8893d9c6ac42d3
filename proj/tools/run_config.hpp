#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "xeval/evaluator.hpp"
#include "xeval/explainer.hpp"
#include "xeval/gnn.hpp"
#include "xeval/paths.hpp"

namespace xeval::cli {

namespace fs = std::filesystem;

struct FileConfig {
  fs::path nodes;
  fs::path edges;
  fs::path corpus;     // optional
  fs::path kb;         // optional
  fs::path lexicon;    // optional
  fs::path checkpoint; // defaults to <output>/model.ckpt
  fs::path output;
};

struct ModelConfig {
  std::size_t layers = 0;  // 0 = graph diameter capped at 4
  std::size_t hidden = 16;
  double learning_rate = 0.05;
  std::size_t epochs = 200;
  std::uint64_t seed = 42;
};

struct RunConfig {
  FileConfig files;
  bool allow_self_loops = false;
  ModelConfig model;
  MaskOptions mask;
  ExtractOptions extract;
  std::size_t cluster_k = 0;
  std::uint64_t cluster_seed = 42;
  std::size_t top_m = 5;
  PathOptions paths;
  std::size_t text_top_n = 5;
  bool graph_facts = true;
  ChannelWeights weights;
  VerdictThresholds thresholds;

  fs::path checkpoint_path() const;
  EvaluatorConfig evaluator_config() const;
};

// Sections of `key = value` lines. Values are double-quoted strings,
// true/false, or numbers; '#' starts a comment. Relative paths resolve
// against base_dir. Errors are UsageError with the line number.
RunConfig parse_run_config(std::string_view text, const fs::path& base_dir);
RunConfig load_run_config(const fs::path& path);

// Every key, in parse order, with paths made absolute. Parsing the result
// yields an equal configuration.
std::string to_toml(const RunConfig& config);

// Makes every non-empty path absolute against `base`.
void resolve_paths(RunConfig& config, const fs::path& base);

// Checks ranges that individual keys cannot; throws UsageError.
void validate(const RunConfig& config);

}  // namespace xeval::cli

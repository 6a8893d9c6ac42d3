#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "xeval/graph.hpp"

namespace xeval {

// Simple path between two nodes. hops[i] is the edge joining nodes[i] and
// nodes[i + 1] (the lowest-index edge when several connect the pair).
struct EvidencePath {
  std::vector<NodeIndex> nodes;
  std::vector<EdgeIndex> hops;
  double score = 0.0;  // 1 / length

  std::size_t length() const noexcept { return hops.size(); }
  std::vector<std::string> relations(const PropertyGraph& g) const;

  friend bool operator==(const EvidencePath&, const EvidencePath&) = default;
};

struct PathOptions {
  std::size_t max_len = 4;
  bool exclude_direct = true;
  std::size_t limit = 10;
};

// All simple undirected src..dst paths of length <= max_len, ranked by
// length then lexicographic node sequence, truncated to `limit`.
std::vector<EvidencePath> find_paths(const PropertyGraph& g, NodeIndex src, NodeIndex dst,
                                     const PathOptions& options);

// "id1 -[rel→]- id2 -[←rel]- id3": the arrow follows the stored edge direction.
std::string render_path(const PropertyGraph& g, const EvidencePath& path);

// Channel score: 2 / length of the best path (1.0 for a two-hop path), 0 if none.
double path_channel_score(const std::vector<EvidencePath>& paths);

}  // namespace xeval

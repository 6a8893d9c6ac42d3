#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xeval {

using NodeIndex = std::size_t;
using EdgeIndex = std::size_t;

struct NodeRecord {
  std::string id;
  std::string label;
  std::vector<double> features;

  friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

struct EdgeRecord {
  NodeIndex src = 0;
  std::string relation;
  NodeIndex dst = 0;

  friend bool operator==(const EdgeRecord&, const EdgeRecord&) = default;
};

// One undirected view of an edge as seen from a node.
struct Incidence {
  NodeIndex neighbor = 0;
  EdgeIndex edge = 0;

  friend bool operator==(const Incidence&, const Incidence&) = default;
};

struct GraphOptions {
  bool allow_self_loops = false;
};

// Attributed, directed multi-relational graph. Immutable once built; every
// constructor path validates the invariants (dense indices, consistent
// feature dimension, finite features, no duplicate triples).
class PropertyGraph {
 public:
  PropertyGraph() = default;

  // Throws DataError on any violated invariant.
  static PropertyGraph build(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges,
                             GraphOptions options = {});

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  bool allows_self_loops() const noexcept { return options_.allow_self_loops; }

  const std::vector<NodeRecord>& nodes() const noexcept { return nodes_; }
  const std::vector<EdgeRecord>& edges() const noexcept { return edges_; }
  const NodeRecord& node(NodeIndex v) const { return nodes_.at(v); }
  const EdgeRecord& edge(EdgeIndex e) const { return edges_.at(e); }

  std::optional<NodeIndex> find(std::string_view id) const;
  // Throws UsageError naming the id when it is unknown.
  NodeIndex index_of(std::string_view id) const;

  // Incident edges of v in both directions, ordered by (neighbor, edge).
  // A self-loop appears once.
  std::span<const Incidence> incident(NodeIndex v) const;

  // Lowest-index edge joining u and v in either direction.
  std::optional<EdgeIndex> edge_between(NodeIndex u, NodeIndex v) const;

  // Copy of this graph with one node's feature vector replaced.
  PropertyGraph with_node_features(NodeIndex v, std::vector<double> features) const;

  friend bool operator==(const PropertyGraph& a, const PropertyGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_ && a.adjacency_ == b.adjacency_;
  }

 private:
  void index();

  std::vector<NodeRecord> nodes_;
  std::vector<EdgeRecord> edges_;
  std::vector<std::vector<Incidence>> adjacency_;
  std::unordered_map<std::string, NodeIndex> ids_;
  std::size_t feature_dim_ = 0;
  GraphOptions options_;
};

// Rebuilds the undirected incidence lists from an edge list; used to check
// the stored adjacency against the edges.
std::vector<std::vector<Incidence>> build_adjacency(std::size_t node_count,
                                                    std::span<const EdgeRecord> edges);

// TSV ingestion. Both inputs require a header line; errors carry the
// 1-based line number of the offending record.
PropertyGraph read_graph(std::istream& nodes, std::istream& edges, GraphOptions options = {});
PropertyGraph load_graph(const std::filesystem::path& nodes_path,
                         const std::filesystem::path& edges_path, GraphOptions options = {});

void write_graph(const PropertyGraph& g, std::ostream& nodes, std::ostream& edges);
void save_graph(const PropertyGraph& g, const std::filesystem::path& nodes_path,
                const std::filesystem::path& edges_path);

// Nodes reachable from v in at most `hops` undirected steps, v included,
// in ascending index order.
std::vector<NodeIndex> neighbors(const PropertyGraph& g, NodeIndex v, std::size_t hops);

// Undirected hop distances from v; unreachable nodes hold SIZE_MAX.
std::vector<std::size_t> hop_distances(const PropertyGraph& g, NodeIndex v);

// Largest finite eccentricity over all nodes (0 for edgeless graphs).
std::size_t graph_diameter(const PropertyGraph& g);

}  // namespace xeval

#include "xeval/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <set>
#include <tuple>

#include "xeval/error.hpp"
#include "xeval/text_util.hpp"

namespace xeval {

PropertyGraph PropertyGraph::build(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges,
                                   GraphOptions options) {
  PropertyGraph g;
  g.options_ = options;
  if (!nodes.empty()) g.feature_dim_ = nodes.front().features.size();

  for (NodeIndex v = 0; v < nodes.size(); ++v) {
    const NodeRecord& n = nodes[v];
    if (n.id.empty()) throw DataError("node " + std::to_string(v) + " has an empty id");
    if (n.features.empty())
      throw DataError("node '" + n.id + "' has no features (dimension must be >= 1)");
    if (n.features.size() != g.feature_dim_)
      throw DataError("node '" + n.id + "' has feature dimension " +
                      std::to_string(n.features.size()) + ", expected " +
                      std::to_string(g.feature_dim_));
    for (double x : n.features)
      if (!std::isfinite(x)) throw DataError("node '" + n.id + "' has a non-finite feature");
    if (!g.ids_.emplace(n.id, v).second) throw DataError("duplicate node id '" + n.id + "'");
  }

  std::set<std::tuple<NodeIndex, std::string_view, NodeIndex>> seen;
  for (const EdgeRecord& e : edges) {
    if (e.src >= nodes.size() || e.dst >= nodes.size())
      throw DataError("edge endpoint out of range");
    if (e.src == e.dst && !options.allow_self_loops)
      throw DataError("self-loop on '" + nodes[e.src].id + "' (self-loops are disabled)");
    if (!seen.emplace(e.src, e.relation, e.dst).second)
      throw DataError("duplicate edge " + nodes[e.src].id + " " + e.relation + " " +
                      nodes[e.dst].id);
  }

  g.nodes_ = std::move(nodes);
  g.edges_ = std::move(edges);
  g.index();
  return g;
}

void PropertyGraph::index() { adjacency_ = build_adjacency(nodes_.size(), edges_); }

std::vector<std::vector<Incidence>> build_adjacency(std::size_t node_count,
                                                    std::span<const EdgeRecord> edges) {
  std::vector<std::vector<Incidence>> adjacency(node_count);
  for (EdgeIndex e = 0; e < edges.size(); ++e) {
    const auto& edge = edges[e];
    adjacency[edge.src].push_back({edge.dst, e});
    if (edge.src != edge.dst) adjacency[edge.dst].push_back({edge.src, e});
  }
  for (auto& list : adjacency)
    std::sort(list.begin(), list.end(), [](const Incidence& a, const Incidence& b) {
      return std::tie(a.neighbor, a.edge) < std::tie(b.neighbor, b.edge);
    });
  return adjacency;
}

std::optional<NodeIndex> PropertyGraph::find(std::string_view id) const {
  auto it = ids_.find(std::string(id));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

NodeIndex PropertyGraph::index_of(std::string_view id) const {
  if (auto v = find(id)) return *v;
  throw UsageError("unknown node id '" + std::string(id) + "'");
}

std::span<const Incidence> PropertyGraph::incident(NodeIndex v) const { return adjacency_.at(v); }

std::optional<EdgeIndex> PropertyGraph::edge_between(NodeIndex u, NodeIndex v) const {
  std::optional<EdgeIndex> best;
  for (const Incidence& inc : incident(u))
    if (inc.neighbor == v && (!best || inc.edge < *best)) best = inc.edge;
  return best;
}

PropertyGraph PropertyGraph::with_node_features(NodeIndex v, std::vector<double> features) const {
  std::vector<NodeRecord> nodes = nodes_;
  nodes.at(v).features = std::move(features);
  return build(std::move(nodes), edges_, options_);
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

// Reads the next non-blank line, stripping a trailing CR. Returns false at EOF.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) return true;
  }
  return false;
}

std::vector<double> parse_features(std::string_view text, std::size_t line_no) {
  std::vector<double> out;
  for (std::string_view field : split(text, ',')) {
    field = trim(field);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
      throw ParseError("invalid feature value '" + std::string(field) + "'", line_no);
    if (!std::isfinite(value)) throw ParseError("non-finite feature value", line_no);
    out.push_back(value);
  }
  return out;
}

std::vector<NodeRecord> read_nodes(std::istream& in) {
  std::vector<NodeRecord> nodes;
  std::unordered_map<std::string, NodeIndex> ids;
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw ParseError("missing header line", 1);
  while (next_line(in, line, line_no)) {
    auto cols = split_tabs(line);
    if (cols.size() != 3)
      throw ParseError("expected 3 tab-separated columns (id, label, features), got " +
                           std::to_string(cols.size()),
                       line_no);
    NodeRecord rec{std::string(trim(cols[0])), std::string(trim(cols[1])),
                   parse_features(cols[2], line_no)};
    if (rec.id.empty()) throw ParseError("empty node id", line_no);
    if (!nodes.empty() && rec.features.size() != nodes.front().features.size())
      throw ParseError("inconsistent feature dimension: expected " +
                           std::to_string(nodes.front().features.size()) + ", got " +
                           std::to_string(rec.features.size()),
                       line_no);
    if (!ids.emplace(rec.id, nodes.size()).second)
      throw ParseError("duplicate node id '" + rec.id + "'", line_no);
    nodes.push_back(std::move(rec));
  }
  return nodes;
}

std::vector<EdgeRecord> read_edges(std::istream& in, const std::vector<NodeRecord>& nodes,
                                   GraphOptions options) {
  std::unordered_map<std::string_view, NodeIndex> ids;
  for (NodeIndex v = 0; v < nodes.size(); ++v) ids.emplace(nodes[v].id, v);

  std::vector<EdgeRecord> edges;
  std::set<std::tuple<NodeIndex, std::string, NodeIndex>> seen;
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw ParseError("missing header line", 1);
  while (next_line(in, line, line_no)) {
    auto cols = split_tabs(line);
    if (cols.size() != 3)
      throw ParseError("expected 3 tab-separated columns (src_id, relation, dst_id), got " +
                           std::to_string(cols.size()),
                       line_no);
    auto endpoint = [&](std::string_view id) {
      auto it = ids.find(trim(id));
      if (it == ids.end())
        throw ParseError("dangling edge endpoint '" + std::string(trim(id)) + "'", line_no);
      return it->second;
    };
    EdgeRecord e{endpoint(cols[0]), std::string(trim(cols[1])), endpoint(cols[2])};
    if (e.relation.empty()) throw ParseError("empty relation", line_no);
    if (e.src == e.dst && !options.allow_self_loops)
      throw ParseError("self-loop on '" + nodes[e.src].id + "' (self-loops are disabled)",
                       line_no);
    if (!seen.emplace(e.src, e.relation, e.dst).second)
      throw ParseError("duplicate edge triple", line_no);
    edges.push_back(std::move(e));
  }
  return edges;
}

}  // namespace

PropertyGraph read_graph(std::istream& nodes_in, std::istream& edges_in, GraphOptions options) {
  auto nodes = read_nodes(nodes_in);
  auto edges = read_edges(edges_in, nodes, options);
  return PropertyGraph::build(std::move(nodes), std::move(edges), options);
}

PropertyGraph load_graph(const std::filesystem::path& nodes_path,
                         const std::filesystem::path& edges_path, GraphOptions options) {
  std::ifstream nodes_in(nodes_path);
  if (!nodes_in) throw UsageError("cannot open nodes file " + nodes_path.string());
  std::ifstream edges_in(edges_path);
  if (!edges_in) throw UsageError("cannot open edges file " + edges_path.string());

  std::vector<NodeRecord> nodes;
  std::vector<EdgeRecord> edges;
  try {
    nodes = read_nodes(nodes_in);
  } catch (const ParseError& e) {
    throw DataError(nodes_path.string() + ": " + e.what());
  }
  try {
    edges = read_edges(edges_in, nodes, options);
  } catch (const ParseError& e) {
    throw DataError(edges_path.string() + ": " + e.what());
  }
  return PropertyGraph::build(std::move(nodes), std::move(edges), options);
}

void write_graph(const PropertyGraph& g, std::ostream& nodes, std::ostream& edges) {
  nodes << "id\tlabel\tfeatures\n";
  for (const NodeRecord& n : g.nodes()) {
    nodes << n.id << '\t' << n.label << '\t';
    for (std::size_t i = 0; i < n.features.size(); ++i) {
      if (i) nodes << ',';
      nodes << format_double(n.features[i]);
    }
    nodes << '\n';
  }
  edges << "src_id\trelation\tdst_id\n";
  for (const EdgeRecord& e : g.edges())
    edges << g.node(e.src).id << '\t' << e.relation << '\t' << g.node(e.dst).id << '\n';
}

void save_graph(const PropertyGraph& g, const std::filesystem::path& nodes_path,
                const std::filesystem::path& edges_path) {
  std::ofstream nodes(nodes_path);
  std::ofstream edges(edges_path);
  if (!nodes || !edges) throw UsageError("cannot write graph files");
  write_graph(g, nodes, edges);
}

std::vector<std::size_t> hop_distances(const PropertyGraph& g, NodeIndex v) {
  constexpr auto unreached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(g.node_count(), unreached);
  std::deque<NodeIndex> queue{v};
  dist.at(v) = 0;
  while (!queue.empty()) {
    NodeIndex x = queue.front();
    queue.pop_front();
    for (const Incidence& inc : g.incident(x)) {
      if (dist[inc.neighbor] != unreached) continue;
      dist[inc.neighbor] = dist[x] + 1;
      queue.push_back(inc.neighbor);
    }
  }
  return dist;
}

std::vector<NodeIndex> neighbors(const PropertyGraph& g, NodeIndex v, std::size_t hops) {
  if (v >= g.node_count()) throw UsageError("node index " + std::to_string(v) + " out of range");
  std::vector<NodeIndex> out;
  const auto dist = hop_distances(g, v);
  for (NodeIndex x = 0; x < dist.size(); ++x)
    if (dist[x] <= hops) out.push_back(x);
  return out;
}

std::size_t graph_diameter(const PropertyGraph& g) {
  std::size_t best = 0;
  for (NodeIndex v = 0; v < g.node_count(); ++v)
    for (std::size_t d : hop_distances(g, v))
      if (d != std::numeric_limits<std::size_t>::max()) best = std::max(best, d);
  return best;
}

}  // namespace xeval

#include "xeval/paths.hpp"

#include <algorithm>

#include "xeval/error.hpp"

namespace xeval {

std::vector<std::string> EvidencePath::relations(const PropertyGraph& g) const {
  std::vector<std::string> out;
  out.reserve(hops.size());
  for (EdgeIndex e : hops) out.push_back(g.edge(e).relation);
  return out;
}

namespace {

struct Search {
  const PropertyGraph& g;
  NodeIndex dst;
  std::size_t max_len;
  bool exclude_direct;
  std::vector<NodeIndex> nodes;
  std::vector<EdgeIndex> hops;
  std::vector<bool> on_path;
  std::vector<EvidencePath> found;

  void visit(NodeIndex x) {
    if (x == dst) {
      if (!(exclude_direct && hops.size() == 1))
        found.push_back({nodes, hops, 1.0 / static_cast<double>(hops.size())});
      return;
    }
    if (hops.size() == max_len) return;
    NodeIndex last = static_cast<NodeIndex>(-1);
    // Incidences are sorted by neighbour, so the first hit per neighbour is
    // its lowest-index edge.
    for (const Incidence& inc : g.incident(x)) {
      if (inc.neighbor == last) continue;
      last = inc.neighbor;
      if (on_path[inc.neighbor]) continue;
      on_path[inc.neighbor] = true;
      nodes.push_back(inc.neighbor);
      hops.push_back(inc.edge);
      visit(inc.neighbor);
      hops.pop_back();
      nodes.pop_back();
      on_path[inc.neighbor] = false;
    }
  }
};

}  // namespace

std::vector<EvidencePath> find_paths(const PropertyGraph& g, NodeIndex src, NodeIndex dst,
                                     const PathOptions& options) {
  if (src >= g.node_count() || dst >= g.node_count())
    throw UsageError("path endpoint out of range");
  if (src == dst) throw UsageError("path endpoints must differ");
  if (options.max_len < 2) throw UsageError("max_len must be at least 2");
  if (options.limit < 1) throw UsageError("limit must be at least 1");

  Search s{g, dst, options.max_len, options.exclude_direct, {src}, {}, std::vector<bool>(g.node_count()), {}};
  s.on_path[src] = true;
  s.visit(src);

  std::sort(s.found.begin(), s.found.end(), [](const EvidencePath& a, const EvidencePath& b) {
    if (a.length() != b.length()) return a.length() < b.length();
    return a.nodes < b.nodes;
  });
  if (s.found.size() > options.limit) s.found.resize(options.limit);
  return s.found;
}

std::string render_path(const PropertyGraph& g, const EvidencePath& path) {
  std::string out;
  if (path.nodes.empty()) return out;
  out += g.node(path.nodes.front()).id;
  for (std::size_t i = 0; i < path.hops.size(); ++i) {
    const EdgeRecord& e = g.edge(path.hops[i]);
    const bool forward = e.src == path.nodes[i];
    out += forward ? " -[" + e.relation + "→]- " : " -[←" + e.relation + "]- ";
    out += g.node(path.nodes[i + 1]).id;
  }
  return out;
}

double path_channel_score(const std::vector<EvidencePath>& paths) {
  if (paths.empty()) return 0.0;
  std::size_t best = paths.front().length();
  for (const EvidencePath& p : paths) best = std::min(best, p.length());
  return std::min(1.0, 2.0 / static_cast<double>(best));
}

}  // namespace xeval

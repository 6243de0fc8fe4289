#pragma once

// The blown-up Cayley graph used to find splittings of an extension over
// finite subgroups.
//
// Given an extension Abar of a free product A = A_1 * ... * A_n * B by the
// finite group H, the graph Theta has vertex set
//     Abar  ⊔  Abar × {0, ..., n},
// written g (a "plain" vertex) and g_i.  Edges carry labels 0..n:
//   - a 0-labelled spoke g -- g_i for every i in {0..n};
//   - an i-labelled edge g_i -- (g·a)_i for every generator a of A_i (i >= 1);
//   - a 0-labelled edge g_0 -- (g·x)_0 for x a generator of B or a nontrivial
//     element of H (as the lift (1, h)).
// Abar acts on the left, freely and preserving labels.  Cutting finitely many
// 0-labelled edges can separate the factor trees from each other, which is
// the route to a splitting of Abar over a finite subgroup.
//
// theta_ball builds the metric ball of a chosen radius around the vertex
// (1, plain) with deterministic vertex and edge numbering; an edge of Theta
// is kept whenever both of its endpoints lie in the ball.

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ggsplit/errors.hpp"
#include "ggsplit/extension.hpp"

namespace ggsplit {

constexpr int theta_tag_plain = -1;

struct ThetaEdge {
  int a = -1, b = -1;  // vertex ids, a < b
  int label = 0;
};

struct ThetaBall {
  ExtensionData E;
  int radius = 0;

  std::vector<ExtElement> elts;  // group part per vertex
  std::vector<int> tags;         // theta_tag_plain or 0..n
  std::vector<int> dist;         // distance from the basepoint
  std::map<std::string, int> index;

  std::vector<ThetaEdge> edges;
  std::vector<std::vector<std::pair<int, int>>> adj;  // (neighbour, edge id)
  std::vector<int> zero_edges;                        // ids of 0-labelled edges

  static std::string key(const ExtensionData& E, const ExtElement& g,
                         int tag) {
    return std::to_string(tag + 1) + "|" + ext_to_string(E, g);
  }

  int find(const ExtElement& g, int tag) const {
    auto it = index.find(key(E, g, tag));
    return it == index.end() ? -1 : it->second;
  }

  // Left action of g on a ball vertex; empty when the image leaves the ball.
  std::optional<int> act(const ExtElement& g, int v) const {
    int w = find(ext_mul(E, g, elts.at(v)), tags.at(v));
    if (w < 0) return std::nullopt;
    return w;
  }

  // Left action on an edge: both endpoints must map into the ball and the
  // image pair must be an edge (it always is when both endpoints map).
  std::optional<int> act_edge(const ExtElement& g, int e) const {
    auto ia = act(g, edges.at(e).a), ib = act(g, edges.at(e).b);
    if (!ia || !ib) return std::nullopt;
    int x = std::min(*ia, *ib), y = std::max(*ia, *ib);
    for (auto [nbr, eid] : adj.at(x))
      if (nbr == y && edges[eid].label == edges[e].label) return eid;
    return std::nullopt;
  }

  // Cached names and their lexicographic ranks, filled once after
  // construction: cut keys scan the whole side for the least vertex name,
  // which would otherwise rebuild every name string per scan.
  std::vector<std::string> vnames;
  std::vector<int> vname_rank;

  std::string vertex_name(int v) const {
    if (v < (int)vnames.size()) return vnames[v];
    std::string s = ext_to_string(E, elts.at(v));
    if (tags.at(v) != theta_tag_plain)
      s += "_" + std::to_string(tags.at(v));
    return s;
  }

  void finalise_names() {
    vnames.clear();
    vnames.reserve(elts.size());
    for (int v = 0; v < (int)elts.size(); ++v) {
      std::string s = ext_to_string(E, elts[v]);
      if (tags[v] != theta_tag_plain) s += "_" + std::to_string(tags[v]);
      vnames.push_back(std::move(s));
    }
    std::vector<int> order(vnames.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = (int)i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return vnames[a] < vnames[b]; });
    vname_rank.assign(vnames.size(), 0);
    for (size_t r = 0; r < order.size(); ++r) vname_rank[order[r]] = (int)r;
  }

  std::string edge_key(int e) const {
    return vertex_name(edges.at(e).a) + " -- " + vertex_name(edges.at(e).b) +
           " [" + std::to_string(edges.at(e).label) + "]";
  }

  int num_factors() const { return E.A.num_factors(); }
};

namespace detail {

// Deterministic list of right multipliers available from a vertex of the
// given tag, with the label of the edge they trace.
inline std::vector<std::pair<ExtElement, int>> theta_moves(
    const ExtensionData& E, int tag) {
  std::vector<std::pair<ExtElement, int>> out;
  if (tag == theta_tag_plain) return out;  // spokes handled separately
  if (tag >= 1) {
    int rank = E.A.part_rank(tag);
    for (int j = 1; j <= rank; ++j)
      for (int e : {1, -1})
        out.push_back({ExtElement{generator(E.A, tag, j, e), E.H.id}, tag});
    return out;
  }
  // tag == 0: free-part generators, then nontrivial lifts of H.
  for (int j = 1; j <= E.A.free_rank; ++j)
    for (int e : {1, -1})
      out.push_back({ExtElement{generator(E.A, 0, j, e), E.H.id}, 0});
  for (int h = 0; h < E.H.order(); ++h)
    if (h != E.H.id) out.push_back({ExtElement{{}, h}, 0});
  return out;
}

}  // namespace detail

inline ThetaBall theta_ball(const ExtensionData& E, int radius,
                            int max_vertices = 200000) {
  if (radius < 0) throw InvalidInput("theta_ball: negative radius");
  if (max_vertices <= 0) throw InvalidInput("theta_ball: empty vertex budget");

  ThetaBall T;
  T.E = E;
  T.radius = radius;

  int n = E.A.num_factors();
  auto add_vertex = [&](const ExtElement& g, int tag, int d) -> int {
    std::string k = ThetaBall::key(T.E, g, tag);
    auto it = T.index.find(k);
    if (it != T.index.end()) return it->second;
    if ((int)T.elts.size() >= max_vertices)
      throw BudgetExceeded("theta_ball: vertex budget " +
                           std::to_string(max_vertices) + " exceeded");
    int id = (int)T.elts.size();
    T.elts.push_back(g);
    T.tags.push_back(tag);
    T.dist.push_back(d);
    T.index.emplace(k, id);
    return id;
  };

  // Deterministic neighbour enumeration for BFS and for the edge pass.
  auto neighbours = [&](int v) {
    std::vector<std::pair<ExtElement, std::pair<int, int>>> out;  // (elt,(tag,label))
    const ExtElement& g = T.elts[v];
    int tag = T.tags[v];
    if (tag == theta_tag_plain) {
      for (int i = 0; i <= n; ++i) out.push_back({g, {i, 0}});
    } else {
      out.push_back({g, {theta_tag_plain, 0}});  // spoke back to the plain vertex
      for (auto& [m, lbl] : detail::theta_moves(T.E, tag))
        out.push_back({ext_mul(T.E, g, m), {tag, lbl}});
    }
    return out;
  };

  add_vertex(ext_id(E), theta_tag_plain, 0);
  for (int head = 0; head < (int)T.elts.size(); ++head) {
    if (T.dist[head] >= radius) continue;
    for (auto& [g, tl] : neighbours(head)) add_vertex(g, tl.first, T.dist[head] + 1);
  }

  // Edge pass: an edge is kept whenever both endpoints lie in the ball.
  T.adj.assign(T.elts.size(), {});
  std::map<std::tuple<int, int, int>, bool> seen;
  for (int v = 0; v < (int)T.elts.size(); ++v) {
    for (auto& [g, tl] : neighbours(v)) {
      int w = T.find(g, tl.first);
      if (w < 0) continue;
      int a = std::min(v, w), b = std::max(v, w);
      if (seen.count({a, b, tl.second})) continue;
      seen[{a, b, tl.second}] = true;
      int eid = (int)T.edges.size();
      T.edges.push_back({a, b, tl.second});
      T.adj[a].push_back({b, eid});
      T.adj[b].push_back({a, eid});
      if (tl.second == 0) T.zero_edges.push_back(eid);
    }
  }
  T.finalise_names();
  return T;
}

inline std::string theta_to_dot(const ThetaBall& T) {
  std::ostringstream os;
  os << "graph theta {\n";
  for (int v = 0; v < (int)T.elts.size(); ++v) {
    os << "  v" << v << " [label=\"" << T.vertex_name(v) << "\"";
    if (T.tags[v] == theta_tag_plain) os << " shape=box";
    os << "];\n";
  }
  for (const auto& e : T.edges) {
    os << "  v" << e.a << " -- v" << e.b << " [label=\"" << e.label << "\"";
    if (e.label == 0) os << " style=dashed";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace ggsplit

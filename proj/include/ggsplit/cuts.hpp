#pragma once

// Cuts of the blown-up Cayley graph.
//
// A finite set E of edges is a set of cutting edges when removing it leaves
// at least two infinite components.  A cut is the vertex set of one infinite
// component; its boundary is the set of edges with exactly one endpoint in
// it.  We only ever remove 0-labelled edges, so each factor tree survives
// whole — this keeps every A_i inside a single component.
//
// All computations happen inside a finite ball, so "infinite" needs a
// certificate rather than inspection:
//   - factor-coset: the component contains a vertex tagged i >= 1.  Edges
//     labelled i are never removed, so the whole (infinite) coset tree of
//     A_i through that vertex stays connected to the component.
//   - closed interior: no vertex of the component sits on the horizon
//     sphere, so the component is complete and genuinely finite.
//   - periodic ray: an element g of infinite order together with a path p
//     from x to g.x inside the component, such that no forward translate
//     g^k.p (k >= 1) meets the removed edges.  The translate equations are
//     solved exactly: the action is free, so g^k.u = f has at most one
//     solution k, found by bounded iteration of powers.
// Components whose status cannot be certified count as unknown and never
// certify a cut.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ggsplit/errors.hpp"
#include "ggsplit/theta.hpp"

namespace ggsplit {

struct Cut {
  std::vector<int> boundary;  // sorted ids of 0-labelled ball edges
  std::vector<char> side;     // per ball vertex: 1 = on this cut's side
  int horizon = 0;
  long long m = -1;     // non-nested translates, set by optimally_nested_cut
  std::string cert;     // how the side was certified infinite
  std::string key;      // canonical identity of (boundary, side)

  long long side_size() const {
    long long s = 0;
    for (char c : side) s += c;
    return s;
  }
};

inline std::vector<int> ball_components(const ThetaBall& T,
                                        const std::vector<char>& removed) {
  for (int e = 0; e < (int)T.edges.size(); ++e)
    if (removed[e] && T.edges[e].label != 0)
      throw InvalidInput(
          "ball_components: only 0-labelled edges may be removed");
  std::vector<int> comp(T.elts.size(), -1);
  std::vector<int> stack;
  int cid = 0;
  for (int s = 0; s < (int)T.elts.size(); ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = cid;
    stack.push_back(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (auto [w, e] : T.adj[v])
        if (!removed[e] && comp[w] < 0) {
          comp[w] = cid;
          stack.push_back(w);
        }
    }
    ++cid;
  }
  return comp;
}

enum class CompStatus { Infinite, Finite, Unknown };

struct CompCertificate {
  CompStatus status = CompStatus::Unknown;
  std::string detail;
};

namespace detail {

// Smallest k >= 1 with g^k == z, if any.  The action of <g> on itself is
// free, so there is at most one such k; total letter length of powers of an
// infinite-order element grows without bound, which bounds the search.
inline std::optional<i64> solve_positive_power(const ExtensionData& E,
                                               const ExtElement& g,
                                               const ExtElement& z) {
  int o = 1;
  for (int h = g.h; h != E.H.id; h = E.H.mul[h][g.h]) ++o;
  ExtElement go = ext_pow(E, g, o);
  if (ext_is_identity(E, go)) return std::nullopt;  // finite order
  i64 cap = (i64)o * (word_length(z.a) + (i64)(o + 2) * word_length(g.a) +
                      word_length(go.a) + 6);
  ExtElement pw = g;
  for (i64 k = 1; k <= cap; ++k) {
    if (pw == z) return k;
    pw = ext_mul(E, pw, g);
  }
  return std::nullopt;
}

// Does some forward translate g^k (k >= 1) of the path edge (u1,u2) land on
// the removed edge (f1,f2)?  Labels and tags are preserved by the action, so
// mismatches rule a pair out immediately.
inline bool ray_hits_edge(const ThetaBall& T, const ExtElement& g, int u1,
                          int u2, int f1, int f2) {
  auto endpoint_hit = [&](int u, int f) -> std::optional<i64> {
    if (T.tags[u] != T.tags[f]) return std::nullopt;
    ExtElement z = ext_mul(T.E, T.elts[f], ext_inv(T.E, T.elts[u]));
    return solve_positive_power(T.E, g, z);
  };
  for (auto [fa, fb] : {std::pair{f1, f2}, std::pair{f2, f1}}) {
    auto k = endpoint_hit(u1, fa);
    if (k && T.tags[u2] == T.tags[fb] &&
        ext_mul(T.E, ext_pow(T.E, g, *k), T.elts[u2]) == T.elts[fb])
      return true;
  }
  return false;
}

// BFS tree from one vertex, avoiding removed edges.
struct BfsTree {
  std::vector<int> prev, via_edge;
};

inline BfsTree component_bfs(const ThetaBall& T,
                             const std::vector<char>& removed, int from) {
  BfsTree t{std::vector<int>(T.elts.size(), -1),
            std::vector<int>(T.elts.size(), -1)};
  std::vector<int> queue{from};
  t.prev[from] = from;
  for (size_t qi = 0; qi < queue.size(); ++qi) {
    int v = queue[qi];
    for (auto [w, e] : T.adj[v])
      if (!removed[e] && t.prev[w] < 0) {
        t.prev[w] = v;
        t.via_edge[w] = e;
        queue.push_back(w);
      }
  }
  return t;
}

inline std::vector<int> tree_path(const BfsTree& t, int from, int to) {
  std::vector<int> path;
  if (t.prev[to] < 0) return path;
  for (int v = to; v != from; v = t.prev[v]) path.push_back(t.via_edge[v]);
  return path;
}

}  // namespace detail

// Certify one component of the ball minus a set of removed 0-labelled edges.
inline CompCertificate certify_component(const ThetaBall& T,
                                         const std::vector<char>& removed,
                                         const std::vector<int>& comp,
                                         int cid) {
  std::vector<int> members;
  bool touches_sphere = false;
  for (int v = 0; v < (int)T.elts.size(); ++v) {
    if (comp[v] != cid) continue;
    members.push_back(v);
    if (T.tags[v] >= 1)
      return {CompStatus::Infinite,
              "factor-coset tree through " + T.vertex_name(v)};
    if (T.dist[v] == T.radius) touches_sphere = true;
  }
  if (!touches_sphere)
    return {CompStatus::Finite,
            "closed interior component of size " +
                std::to_string(members.size())};

  // Periodic-ray certificates for components living on the 0-sheet.
  std::vector<std::pair<int, int>> fedges;
  for (int e = 0; e < (int)T.edges.size(); ++e)
    if (removed[e]) fedges.push_back({T.edges[e].a, T.edges[e].b});

  int seeds_tried = 0;
  for (size_t si = 0; si < members.size() && seeds_tried < 6; ++si) {
    int x = members[si];
    ++seeds_tried;
    detail::BfsTree tree = detail::component_bfs(T, removed, x);
    int targets_tried = 0;
    for (size_t ti = 0; ti < members.size() && targets_tried < 48; ++ti) {
      int y = members[ti];
      if (y == x || T.tags[y] != T.tags[x]) continue;
      ++targets_tried;
      ExtElement g = ext_mul(T.E, T.elts[y], ext_inv(T.E, T.elts[x]));
      int o = 1;
      for (int h = g.h; h != T.E.H.id; h = T.E.H.mul[h][g.h]) ++o;
      if (ext_is_identity(T.E, ext_pow(T.E, g, o))) continue;  // finite order
      std::vector<int> path = detail::tree_path(tree, x, y);
      if (path.empty()) continue;
      bool clean = true;
      for (int e : path) {
        for (auto [fa, fb] : fedges)
          if (detail::ray_hits_edge(T, g, T.edges[e].a, T.edges[e].b, fa,
                                    fb)) {
            clean = false;
            break;
          }
        if (!clean) break;
      }
      if (clean)
        return {CompStatus::Infinite,
                "periodic ray from " + T.vertex_name(x) + " by " +
                    ext_to_string(T.E, g)};
    }
  }
  return {CompStatus::Unknown, "touches the horizon sphere, no certificate"};
}

// At least two components certified infinite?
inline bool is_cutting_set(const ThetaBall& T,
                           const std::vector<char>& removed) {
  std::vector<int> comp = ball_components(T, removed);
  int ncomp = 0;
  for (int c : comp) ncomp = std::max(ncomp, c + 1);
  int infinite = 0;
  for (int c = 0; c < ncomp && infinite < 2; ++c)
    if (certify_component(T, removed, comp, c).status == CompStatus::Infinite)
      ++infinite;
  return infinite >= 2;
}

struct CutSearch {
  ThetaBall T;
  std::vector<int> cutting;  // edge ids, inclusion-minimal cutting set
  int zone_radius = 0;
};

// Iterative deepening: remove all 0-labelled edges in a zone around the
// basepoint, check for two certified infinite components, then shrink the
// set by successive removal.
inline CutSearch find_cutting_edges(const ExtensionData& E, int max_radius = 8,
                                    int max_vertices = 200000, int margin = 3,
                                    int min_radius = -1) {
  if (max_radius <= margin)
    throw InvalidInput("find_cutting_edges: max_radius must exceed margin");
  for (int R = std::max(margin + 1, min_radius); R <= max_radius; ++R) {
    ThetaBall T = theta_ball(E, R, max_vertices);
    int zone = R - margin;
    std::vector<int> zone_edges;
    for (int e : T.zero_edges)
      if (T.dist[T.edges[e].a] <= zone && T.dist[T.edges[e].b] <= zone)
        zone_edges.push_back(e);
    if (zone_edges.empty()) continue;

    std::vector<char> removed(T.edges.size(), 0);
    for (int e : zone_edges) removed[e] = 1;
    if (!is_cutting_set(T, removed)) continue;

    for (int e : zone_edges) {  // successive removal, ascending edge id
      removed[e] = 0;
      if (!is_cutting_set(T, removed)) removed[e] = 1;
    }
    CutSearch out{std::move(T), {}, zone};
    for (int e = 0; e < (int)removed.size(); ++e)
      if (removed[e]) out.cutting.push_back(e);
    return out;
  }
  throw HorizonExhausted(
      "no certified cutting set of 0-labelled edges within radius " +
      std::to_string(max_radius));
}

inline std::string cut_canonical_key(const ThetaBall& T,
                                     const std::vector<int>& boundary,
                                     const std::vector<char>& side) {
  std::vector<std::string> bk;
  for (int e : boundary) bk.push_back(T.edge_key(e));
  std::sort(bk.begin(), bk.end());
  std::string k = "B{";
  for (auto& s : bk) k += s + ";";
  k += "}S{";
  std::string smin;
  if (T.vname_rank.size() == side.size()) {
    int arg = -1;
    for (int v = 0; v < (int)side.size(); ++v)
      if (side[v] && (arg < 0 || T.vname_rank[v] < T.vname_rank[arg])) arg = v;
    if (arg >= 0) smin = T.vnames[arg];
  } else {
    for (int v = 0; v < (int)side.size(); ++v)
      if (side[v]) {
        std::string name = T.vertex_name(v);
        if (smin.empty() || name < smin) smin = name;
      }
  }
  k += smin + "}";
  return k;
}

inline Cut make_cut(const ThetaBall& T, const std::vector<int>& boundary,
                    std::vector<char> side, const std::string& cert) {
  Cut c;
  c.boundary = boundary;
  std::sort(c.boundary.begin(), c.boundary.end());
  c.side = std::move(side);
  c.horizon = T.radius;
  c.cert = cert;
  c.key = cut_canonical_key(T, c.boundary, c.side);
  return c;
}

inline Cut complement_cut(const ThetaBall& T, const Cut& c) {
  std::vector<char> flip(c.side.size());
  for (size_t i = 0; i < flip.size(); ++i) flip[i] = c.side[i] ? 0 : 1;
  return make_cut(T, c.boundary, std::move(flip),
                  "complement of: " + c.cert);
}

namespace detail {

// 0-labelled edges with both endpoints inside the mining zone.  Boundaries
// are mined well inside the ball so that the detour paths witnessing a
// failed separation are still inside the ball.
inline std::vector<int> cut_pool(const ThetaBall& T, int pool_zone) {
  int zone = pool_zone > 0 ? pool_zone : std::max(1, T.radius - 3);
  std::vector<int> pool;
  for (int e : T.zero_edges)
    if (T.dist[T.edges[e].a] <= zone && T.dist[T.edges[e].b] <= zone)
      pool.push_back(e);
  return pool;
}

// Exhaustively enumerate the size-s subsets of the pool and harvest every
// certified infinite component whose boundary is exactly the subset (so the
// boundary is inclusion-minimal for its side).  `tried` accumulates across
// calls so a caller can spread one budget over several sizes.  Results are
// sorted by canonical key.
inline std::vector<Cut> certified_cuts_of_size(const ThetaBall& T,
                                               const std::vector<int>& pool,
                                               int s, long long& tried,
                                               long long subset_budget) {
  std::vector<char> removed(T.edges.size(), 0);
  std::vector<Cut> found;

  auto harvest = [&]() {
    std::vector<int> comp = ball_components(T, removed);
    int ncomp = 0;
    for (int c : comp) ncomp = std::max(ncomp, c + 1);
    std::vector<CompCertificate> certs(ncomp);
    int infinite = 0;
    for (int c = 0; c < ncomp; ++c) {
      certs[c] = certify_component(T, removed, comp, c);
      if (certs[c].status == CompStatus::Infinite) ++infinite;
    }
    if (infinite < 2) return;
    for (int c = 0; c < ncomp; ++c) {
      if (certs[c].status != CompStatus::Infinite) continue;
      std::vector<int> delta;
      for (int e = 0; e < (int)T.edges.size(); ++e)
        if ((comp[T.edges[e].a] == c) != (comp[T.edges[e].b] == c))
          delta.push_back(e);
      if ((int)delta.size() != s) continue;
      std::vector<char> side(T.elts.size(), 0);
      for (int v = 0; v < (int)T.elts.size(); ++v) side[v] = comp[v] == c;
      found.push_back(make_cut(T, delta, std::move(side), certs[c].detail));
    }
  };

  std::vector<int> pick(s);
  auto run = [&](auto&& self, int start, int depth) -> void {
    if (depth == s) {
      if (++tried > subset_budget)
        throw BudgetExceeded("narrow_cuts: subset budget exceeded");
      std::fill(removed.begin(), removed.end(), 0);
      for (int i = 0; i < s; ++i) removed[pick[i]] = 1;
      harvest();
      return;
    }
    for (int i = start; i < (int)pool.size(); ++i) {
      pick[depth] = pool[i];
      self(self, i + 1, depth + 1);
    }
  };
  run(run, 0, 0);
  std::sort(found.begin(), found.end(),
            [](const Cut& a, const Cut& b) { return a.key < b.key; });
  found.erase(std::unique(found.begin(), found.end(),
                          [](const Cut& a, const Cut& b) {
                            return a.key == b.key;
                          }),
              found.end());
  return found;
}

// The certified cutting set bounds the narrow size in the full graph, but an
// in-horizon cutting set can be artificially small; a floor keeps the search
// from being capped by a horizon artifact.
inline int narrow_size_cap(const std::vector<int>& cutting) {
  return std::max((int)cutting.size(), 3);
}

// Every cut of the first size with finds, sorted by canonical key.
inline std::vector<Cut> minimal_certified_cuts(const ThetaBall& T,
                                               const std::vector<int>& cutting,
                                               int pool_zone = -1,
                                               long long subset_budget =
                                                   2000000) {
  if (cutting.empty()) throw InvalidInput("narrow_cuts: empty cutting set");
  std::vector<int> pool = cut_pool(T, pool_zone);
  long long tried = 0;
  for (int s = 1; s <= narrow_size_cap(cutting); ++s) {
    std::vector<Cut> found =
        certified_cuts_of_size(T, pool, s, tried, subset_budget);
    if (!found.empty()) return found;
  }
  throw HorizonExhausted("no certified narrow cut within the horizon");
}

}  // namespace detail

// Narrow cuts: all minimal certified cuts whose boundary meets a fixed
// reference edge — the lexicographically least boundary edge over the whole
// minimal family.  Finitely many narrow cuts contain a given edge, and the
// filter keeps the answer deterministic while retaining both orientations of
// each surviving cut.
inline std::vector<Cut> narrow_cuts(const ThetaBall& T,
                                    const std::vector<int>& cutting,
                                    int pool_zone = -1,
                                    long long subset_budget = 2000000) {
  std::vector<Cut> found =
      detail::minimal_certified_cuts(T, cutting, pool_zone, subset_budget);
  int e_ref = -1;
  for (const Cut& c : found)
    for (int e : c.boundary)
      if (e_ref < 0 || T.edge_key(e) < T.edge_key(e_ref)) e_ref = e;
  std::vector<Cut> through;
  for (Cut& c : found)
    if (std::find(c.boundary.begin(), c.boundary.end(), e_ref) !=
        c.boundary.end())
      through.push_back(std::move(c));
  return through;
}

// Translate a cut by a group element: boundary edges map through the action;
// the side is recomputed as the component containing the image of a side
// vertex.  Empty when anything leaves the ball.
inline std::optional<Cut> translate_cut(const ThetaBall& T, const Cut& c,
                                        const ExtElement& g) {
  std::set<int> gf;
  for (int e : c.boundary) {
    auto img = T.act_edge(g, e);
    if (!img) return std::nullopt;
    gf.insert(*img);
  }
  int seed_img = -1;
  for (int v = 0; v < (int)T.elts.size() && seed_img < 0; ++v) {
    if (!c.side[v]) continue;
    auto img = T.act(g, v);
    if (img) seed_img = *img;
  }
  if (seed_img < 0) return std::nullopt;
  std::vector<char> removed(T.edges.size(), 0);
  for (int e : gf) removed[e] = 1;
  std::vector<int> comp = ball_components(T, removed);
  std::vector<char> side(T.elts.size(), 0);
  for (int v = 0; v < (int)T.elts.size(); ++v)
    side[v] = comp[v] == comp[seed_img];
  return make_cut(T, std::vector<int>(gf.begin(), gf.end()), std::move(side),
                  "translate");
}

inline std::array<long long, 4> corner_sizes(const Cut& C, const Cut& D) {
  std::array<long long, 4> out{0, 0, 0, 0};  // CD, CD*, C*D, C*D*
  for (size_t v = 0; v < C.side.size(); ++v) {
    int idx = (C.side[v] ? 0 : 2) + (D.side[v] ? 0 : 1);
    ++out[idx];
  }
  return out;
}

// Nested within the horizon: some corner region is empty.
inline bool nested_cuts(const Cut& C, const Cut& D) {
  auto s = corner_sizes(C, D);
  return s[0] == 0 || s[1] == 0 || s[2] == 0 || s[3] == 0;
}

inline std::vector<ExtElement> ball_elements(const ThetaBall& T) {
  std::vector<ExtElement> out;
  std::set<std::string> seen;
  for (int v = 0; v < (int)T.elts.size(); ++v) {
    std::string k = ext_to_string(T.E, T.elts[v]);
    if (seen.insert(k).second) out.push_back(T.elts[v]);
  }
  return out;
}

// Generating set of the extension as used by the graph itself.
inline std::vector<ExtElement> theta_generators(const ExtensionData& E) {
  std::vector<ExtElement> gens;
  for (int i = 1; i <= E.A.num_factors(); ++i)
    for (auto& [m, lbl] : detail::theta_moves(E, i)) gens.push_back(m);
  for (auto& [m, lbl] : detail::theta_moves(E, 0)) gens.push_back(m);
  return gens;
}

// Every in-ball translate of every candidate, deduplicated.  When
// max_translate_length >= 0 only translators whose plain vertex lies within
// that distance of the basepoint are used: two cuts can only cross when
// their boundary regions overlap, so a window of twice the boundary depth
// already sees every crossing between honest half-space cuts, while far
// translates are nested and add nothing but cost.
inline std::vector<Cut> translate_family(const ThetaBall& T,
                                         const std::vector<Cut>& cands,
                                         int max_translate_length = -1) {
  std::vector<Cut> fam;
  std::set<std::string> seen_elem;
  std::set<std::string> seen;
  for (int v = 0; v < (int)T.elts.size(); ++v) {
    if (!seen_elem.insert(ext_to_string(T.E, T.elts[v])).second) continue;
    if (max_translate_length >= 0 && T.dist[v] > max_translate_length)
      continue;
    const ExtElement& g = T.elts[v];
    for (const Cut& D : cands) {
      auto t = translate_cut(T, D, g);
      if (t && seen.insert(t->key).second) fam.push_back(std::move(*t));
    }
  }
  return fam;
}

// Pick the candidate not nested with the fewest family members; ties broken
// by boundary size, then canonical key.  The winner must be nested with all
// of its in-horizon generator translates.
inline Cut optimally_nested_cut(const ThetaBall& T,
                                const std::vector<Cut>& cands) {
  if (cands.empty()) throw InvalidInput("optimally_nested_cut: no candidates");
  std::vector<Cut> fam = translate_family(T, cands);
  const Cut* best = nullptr;
  long long best_m = -1;
  for (const Cut& c : cands) {
    long long m = 0;
    for (const Cut& d : fam)
      if (!nested_cuts(c, d)) ++m;
    bool better =
        !best || m < best_m ||
        (m == best_m && (c.boundary.size() < best->boundary.size() ||
                         (c.boundary.size() == best->boundary.size() &&
                          c.key < best->key)));
    if (better) {
      best = &c;
      best_m = m;
    }
  }
  Cut out = *best;
  out.m = best_m;
  for (const ExtElement& g : theta_generators(T.E)) {
    auto t = translate_cut(T, out, g);
    if (t && !nested_cuts(out, *t))
      throw NestingUndecidable(
          "selected cut is not nested with its translate by " +
          ext_to_string(T.E, g));
  }
  return out;
}

inline nlohmann::ordered_json cut_to_json(const ThetaBall& T, const Cut& c) {
  nlohmann::ordered_json j;
  j["horizon"] = c.horizon;
  j["m"] = c.m;
  j["boundary"] = nlohmann::ordered_json::array();
  for (int e : c.boundary) {
    nlohmann::ordered_json je;
    je["u"] = T.vertex_name(T.edges[e].a);
    je["v"] = T.vertex_name(T.edges[e].b);
    je["label"] = T.edges[e].label;
    j["boundary"].push_back(je);
  }
  j["side_size"] = c.side_size();
  j["certificate"] = c.cert;
  return j;
}

}  // namespace ggsplit

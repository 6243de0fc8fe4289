#pragma once
// Finite graphs of groups with finite edge groups: vertex labels are finite
// multiplication tables, factor extensions (an ExtensionData over one
// factor), or free-product presentations. Provides verified edge injections,
// exact Euler characteristics, deterministic fundamental presentations, and
// budgeted Bass-Serre tree balls with the partial action of the base vertex
// group.

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ggsplit/errors.hpp"
#include "ggsplit/extension.hpp"
#include "ggsplit/rational.hpp"
#include "ggsplit/words.hpp"

namespace ggsplit {

// An element of a vertex group: index into a finite table, an element of a
// factor extension, or an element of a free product.
using VertexElt = std::variant<int, ExtElement, GroupElement>;

struct GogVertex {
  enum class Kind { Finite, FactorExtension, FreeProductGroup };
  Kind kind = Kind::Finite;
  HTable table;                  // Finite
  ExtensionData subext;          // FactorExtension
  FreeProductPresentation pres;  // FreeProductGroup
  bool distinguished = false;
  std::string name;

  static GogVertex finite(HTable t, std::string nm = "") {
    GogVertex v;
    v.kind = Kind::Finite;
    v.table = std::move(t);
    v.name = std::move(nm);
    return v;
  }
  static GogVertex trivial(std::string nm = "") {
    return finite(HTable::cyclic(1), std::move(nm));
  }
  static GogVertex free_product(FreeProductPresentation p,
                                std::string nm = "") {
    GogVertex v;
    v.kind = Kind::FreeProductGroup;
    v.pres = std::move(p);
    v.name = std::move(nm);
    return v;
  }
  static GogVertex factor_extension(ExtensionData e, std::string nm = "") {
    GogVertex v;
    v.kind = Kind::FactorExtension;
    v.subext = std::move(e);
    v.name = std::move(nm);
    return v;
  }

  std::string describe() const;
};

struct GogEdge {
  int u = 0, v = 0;
  HTable group;  // finite edge group
  std::vector<VertexElt> img_u, img_v;  // image of each edge-group element
};

// ---------------------------------------------------------------------------
// Arithmetic within one vertex group.
class VertexGroupOps {
 public:
  explicit VertexGroupOps(const GogVertex& v) : v_(&v) {}

  VertexElt id() const {
    switch (v_->kind) {
      case GogVertex::Kind::Finite:
        return VertexElt{v_->table.id};
      case GogVertex::Kind::FactorExtension:
        return VertexElt{ext_id(v_->subext)};
      default:
        return VertexElt{GroupElement{}};
    }
  }

  VertexElt mul(const VertexElt& a, const VertexElt& b) const {
    switch (v_->kind) {
      case GogVertex::Kind::Finite:
        return VertexElt{v_->table.mul[std::get<int>(a)][std::get<int>(b)]};
      case GogVertex::Kind::FactorExtension:
        return VertexElt{ext_mul(v_->subext, std::get<ExtElement>(a),
                                 std::get<ExtElement>(b))};
      default:
        return VertexElt{ggsplit::mul(v_->pres, std::get<GroupElement>(a),
                                      std::get<GroupElement>(b))};
    }
  }

  VertexElt inv(const VertexElt& a) const {
    switch (v_->kind) {
      case GogVertex::Kind::Finite:
        return VertexElt{v_->table.inverse[std::get<int>(a)]};
      case GogVertex::Kind::FactorExtension:
        return VertexElt{ext_inv(v_->subext, std::get<ExtElement>(a))};
      default:
        return VertexElt{ggsplit::inv(v_->pres, std::get<GroupElement>(a))};
    }
  }

  bool eq(const VertexElt& a, const VertexElt& b) const { return a == b; }
  bool is_id(const VertexElt& a) const { return eq(a, id()); }

  // whether the element is of the right kind (and range) for this vertex
  bool compatible(const VertexElt& a) const {
    switch (v_->kind) {
      case GogVertex::Kind::Finite:
        return std::holds_alternative<int>(a) && std::get<int>(a) >= 0 &&
               std::get<int>(a) < v_->table.order();
      case GogVertex::Kind::FactorExtension:
        return std::holds_alternative<ExtElement>(a) &&
               std::get<ExtElement>(a).h >= 0 &&
               std::get<ExtElement>(a).h < v_->subext.H.order();
      default:
        return std::holds_alternative<GroupElement>(a);
    }
  }

  std::string key(const VertexElt& a) const {
    switch (v_->kind) {
      case GogVertex::Kind::Finite:
        return std::to_string(std::get<int>(a));
      case GogVertex::Kind::FactorExtension:
        return ext_to_string(v_->subext, std::get<ExtElement>(a));
      default:
        return to_string(v_->pres, std::get<GroupElement>(a));
    }
  }

  // Deterministic element enumeration: identity first, then breadth-first
  // products of the vertex group's generators. Returns at most max_count
  // elements; sets *complete when the whole group was listed.
  std::vector<VertexElt> enumerate(int max_count, bool* complete) const {
    std::vector<VertexElt> gens;
    switch (v_->kind) {
      case GogVertex::Kind::Finite: {
        std::vector<VertexElt> out;
        for (int i = 0; i < v_->table.order() && (int)out.size() < max_count;
             ++i)
          out.push_back(VertexElt{i == 0 ? v_->table.id
                                         : (i == v_->table.id ? 0 : i)});
        if (complete) *complete = (int)out.size() == v_->table.order();
        return out;
      }
      case GogVertex::Kind::FactorExtension: {
        const auto& E = v_->subext;
        for (int p = 0; p <= E.A.num_factors(); ++p)
          for (int j = 1; j <= E.A.part_rank(p); ++j) {
            gens.push_back(VertexElt{ExtElement{generator(E.A, p, j), E.H.id}});
            gens.push_back(
                VertexElt{ExtElement{generator(E.A, p, j, -1), E.H.id}});
          }
        for (int h = 0; h < E.H.order(); ++h)
          if (h != E.H.id) gens.push_back(VertexElt{ExtElement{{}, h}});
        break;
      }
      default: {
        const auto& P = v_->pres;
        for (int p = 0; p <= P.num_factors(); ++p)
          for (int j = 1; j <= P.part_rank(p); ++j) {
            gens.push_back(VertexElt{generator(P, p, j)});
            gens.push_back(VertexElt{generator(P, p, j, -1)});
          }
        break;
      }
    }
    std::vector<VertexElt> out{id()};
    std::set<std::string> seen{key(out[0])};
    size_t head = 0;
    bool full = gens.empty();
    while (head < out.size() && (int)out.size() < max_count) {
      VertexElt cur = out[head++];
      bool grew = false;
      for (const auto& g : gens) {
        VertexElt nxt = mul(cur, g);
        if (seen.insert(key(nxt)).second) {
          out.push_back(nxt);
          grew = true;
          if ((int)out.size() >= max_count) break;
        }
      }
      (void)grew;
    }
    if (complete) *complete = (head >= out.size());
    return out;
  }

 private:
  const GogVertex* v_;
};

struct GraphOfGroups {
  std::vector<GogVertex> vertices;
  std::vector<GogEdge> edges;
  int base = 0;

  // edge over the trivial group, images resolved per endpoint kind
  void add_trivial_edge(int u, int v) {
    GogEdge e;
    e.u = u;
    e.v = v;
    e.group = HTable::cyclic(1);
    e.img_u = {VertexGroupOps(vertices.at(u)).id()};
    e.img_v = {VertexGroupOps(vertices.at(v)).id()};
    edges.push_back(std::move(e));
  }

  void validate() const {
    if (vertices.empty()) throw InvalidInput("graph of groups has no vertex");
    if (base < 0 || base >= (int)vertices.size())
      throw InvalidInput("base vertex out of range");
    // connectivity
    std::vector<char> seen(vertices.size(), 0);
    std::deque<int> q{base};
    seen[base] = 1;
    while (!q.empty()) {
      int x = q.front();
      q.pop_front();
      for (const auto& e : edges) {
        int o = e.u == x ? e.v : (e.v == x ? e.u : -1);
        if (o >= 0 && !seen[o]) {
          seen[o] = 1;
          q.push_back(o);
        }
      }
    }
    for (char s : seen)
      if (!s) throw InvalidInput("graph of groups is not connected");
    // edges: finite groups, verified injections
    for (const auto& e : edges) {
      if (e.u < 0 || e.u >= (int)vertices.size() || e.v < 0 ||
          e.v >= (int)vertices.size())
        throw InvalidInput("edge endpoint out of range");
      int m = e.group.order();
      if (m <= 0) throw InvalidInput("edge group is empty");
      if ((int)e.img_u.size() != m || (int)e.img_v.size() != m)
        throw InvalidInput("edge injection size mismatch");
      for (int side = 0; side < 2; ++side) {
        const auto& img = side == 0 ? e.img_u : e.img_v;
        const GogVertex& tv = vertices[side == 0 ? e.u : e.v];
        VertexGroupOps ops(tv);
        if (tv.kind == GogVertex::Kind::FreeProductGroup && m > 1)
          throw InvalidInput(
              "nontrivial finite group cannot inject into a torsion-free "
              "vertex group");
        for (const auto& x : img)
          if (!ops.compatible(x))
            throw InvalidInput(
                "edge image has the wrong element kind for its endpoint");
        for (int x = 0; x < m; ++x)
          for (int y = 0; y < m; ++y)
            if (!ops.eq(img[e.group.mul[x][y]], ops.mul(img[x], img[y])))
              throw InvalidInput("edge injection is not a homomorphism");
        for (int x = 0; x < m; ++x)
          for (int y = x + 1; y < m; ++y)
            if (ops.eq(img[x], img[y]))
              throw InvalidInput("edge injection is not injective");
        if (!ops.is_id(img[e.group.id]))
          throw InvalidInput("edge injection moves the identity");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Euler characteristics.

inline Rational chi_of_spec(const FactorSpec& s) {
  if (s.kind == FactorKind::Free) return Rational(1 - (i64)s.rank);
  return Rational(0);
}

inline Rational chi_of_presentation(const FreeProductPresentation& P) {
  int pieces = P.num_factors() + (P.free_rank > 0 ? 1 : 0);
  if (pieces == 0) return Rational(1);  // the trivial group
  Rational chi(0);
  for (const auto& f : P.factors) chi = chi + chi_of_spec(f);
  if (P.free_rank > 0) chi = chi + Rational(1 - (i64)P.free_rank);
  chi = chi + Rational(1 - (i64)pieces);
  return chi;
}

inline Rational chi_of_vertex(const GogVertex& v) {
  switch (v.kind) {
    case GogVertex::Kind::Finite:
      if (v.table.order() <= 0) throw UndefinedChi("empty finite table");
      return Rational(1, v.table.order());
    case GogVertex::Kind::FactorExtension:
      if (v.subext.H.order() <= 0) throw UndefinedChi("empty extension");
      return chi_of_presentation(v.subext.A) / Rational(v.subext.H.order());
    default:
      return chi_of_presentation(v.pres);
  }
}

inline Rational euler_characteristic(const GraphOfGroups& G) {
  Rational chi(0);
  for (const auto& v : G.vertices) chi = chi + chi_of_vertex(v);
  for (const auto& e : G.edges) {
    if (e.group.order() <= 0) throw UndefinedChi("empty edge group");
    chi = chi - Rational(1, e.group.order());
  }
  return chi;
}

// ---------------------------------------------------------------------------
// Fundamental presentation.

struct Presentation {
  std::vector<std::string> gens;
  std::vector<std::vector<std::pair<int, i64>>> rels;

  std::string str() const {
    std::string s = "< ";
    for (size_t i = 0; i < gens.size(); ++i) s += (i ? ", " : "") + gens[i];
    s += " |";
    for (size_t r = 0; r < rels.size(); ++r) {
      s += r ? ", " : " ";
      if (rels[r].empty()) s += "1";
      for (size_t k = 0; k < rels[r].size(); ++k) {
        if (k) s += " ";
        s += gens[rels[r][k].first];
        if (rels[r][k].second != 1)
          s += "^" + std::to_string(rels[r][k].second);
      }
    }
    s += " >";
    return s;
  }
};

namespace detail {

// generator indices of one vertex inside the fundamental presentation
struct VertexGens {
  // FreeProductGroup / FactorExtension: per (part, j) generator index
  std::map<std::pair<int, int>, int> part_gen;
  // FactorExtension: per h != id the lift generator index
  std::map<int, int> lift_gen;
  // Finite: per non-identity element the generator index
  std::map<int, int> elt_gen;
};

inline void append_word(std::vector<std::pair<int, i64>>& rel,
                        const VertexGens& vg, const GroupElement& w,
                        const FreeProductPresentation& P, bool invert) {
  std::vector<std::pair<int, i64>> toks;
  for (const auto& s : w) {
    if (P.part_kind(s.part) == FactorKind::FreeAbelian) {
      for (size_t j = 0; j < s.data.size(); ++j)
        if (s.data[j] != 0)
          toks.emplace_back(vg.part_gen.at({s.part, (int)j + 1}), s.data[j]);
    } else {
      for (i64 letter : s.data) {
        int j = (int)(letter < 0 ? -letter : letter);
        i64 e = letter < 0 ? -1 : 1;
        if (!toks.empty() &&
            toks.back().first == vg.part_gen.at({s.part, j}))
          toks.back().second += e;
        else
          toks.emplace_back(vg.part_gen.at({s.part, j}), e);
        if (!toks.empty() && toks.back().second == 0) toks.pop_back();
      }
    }
  }
  if (invert) {
    std::reverse(toks.begin(), toks.end());
    for (auto& t : toks) t.second = -t.second;
  }
  for (auto& t : toks) rel.push_back(t);
}

// the image of a vertex element as a relator fragment
inline void append_elt(std::vector<std::pair<int, i64>>& rel,
                       const GogVertex& v, const VertexGens& vg,
                       const VertexElt& x, bool invert) {
  switch (v.kind) {
    case GogVertex::Kind::Finite: {
      int e = std::get<int>(x);
      if (e == v.table.id) return;
      rel.emplace_back(vg.elt_gen.at(e), invert ? -1 : 1);
      return;
    }
    case GogVertex::Kind::FactorExtension: {
      const ExtElement& e = std::get<ExtElement>(x);
      if (!invert) {
        append_word(rel, vg, e.a, v.subext.A, false);
        if (e.h != v.subext.H.id) rel.emplace_back(vg.lift_gen.at(e.h), 1);
      } else {
        if (e.h != v.subext.H.id) rel.emplace_back(vg.lift_gen.at(e.h), -1);
        append_word(rel, vg, e.a, v.subext.A, true);
      }
      return;
    }
    default: {
      append_word(rel, vg, std::get<GroupElement>(x), v.pres, invert);
      return;
    }
  }
}

}  // namespace detail

inline Presentation fundamental_presentation(const GraphOfGroups& G) {
  G.validate();
  Presentation out;
  std::map<std::string, int> name_count;
  auto fresh = [&](std::string base_name, int vidx) {
    if (base_name.empty()) base_name = "g";
    std::string nm = base_name;
    if (name_count.count(nm)) nm += "_v" + std::to_string(vidx);
    while (name_count.count(nm)) nm += "'";
    name_count[nm] = 1;
    out.gens.push_back(nm);
    return (int)out.gens.size() - 1;
  };

  // vertex generators
  std::vector<detail::VertexGens> vg(G.vertices.size());
  for (size_t vi = 0; vi < G.vertices.size(); ++vi) {
    const GogVertex& v = G.vertices[vi];
    switch (v.kind) {
      case GogVertex::Kind::Finite:
        for (int e = 0; e < v.table.order(); ++e)
          if (e != v.table.id)
            vg[vi].elt_gen[e] = fresh(v.table.names.empty()
                                          ? "g" + std::to_string(e)
                                          : v.table.names[e],
                                      (int)vi);
        break;
      case GogVertex::Kind::FactorExtension: {
        const auto& P = v.subext.A;
        for (int p = 0; p <= P.num_factors(); ++p)
          for (int j = 1; j <= P.part_rank(p); ++j)
            vg[vi].part_gen[{p, j}] = fresh(P.gen_name(p, j), (int)vi);
        for (int h = 0; h < v.subext.H.order(); ++h)
          if (h != v.subext.H.id)
            vg[vi].lift_gen[h] = fresh(v.subext.H.names[h], (int)vi);
        break;
      }
      default:
        for (int p = 0; p <= v.pres.num_factors(); ++p)
          for (int j = 1; j <= v.pres.part_rank(p); ++j)
            vg[vi].part_gen[{p, j}] = fresh(v.pres.gen_name(p, j), (int)vi);
        break;
    }
  }

  // spanning tree by BFS from the base (edge scan in index order)
  std::vector<int> tree_edge(G.edges.size(), 0);
  {
    std::vector<char> seen(G.vertices.size(), 0);
    std::deque<int> q{G.base};
    seen[G.base] = 1;
    while (!q.empty()) {
      int x = q.front();
      q.pop_front();
      for (size_t ei = 0; ei < G.edges.size(); ++ei) {
        const auto& e = G.edges[ei];
        int o = e.u == x ? e.v : (e.v == x ? e.u : -1);
        if (o >= 0 && !seen[o]) {
          seen[o] = 1;
          tree_edge[ei] = 1;
          q.push_back(o);
        }
      }
    }
  }
  // stable letters for non-tree edges
  std::vector<int> stable(G.edges.size(), -1);
  for (size_t ei = 0; ei < G.edges.size(); ++ei)
    if (!tree_edge[ei]) stable[ei] = fresh("t" + std::to_string(ei), -1);

  // vertex relators
  for (size_t vi = 0; vi < G.vertices.size(); ++vi) {
    const GogVertex& v = G.vertices[vi];
    switch (v.kind) {
      case GogVertex::Kind::Finite: {
        int n = v.table.order();
        for (int x = 0; x < n; ++x)
          for (int y = 0; y < n; ++y) {
            if (x == v.table.id || y == v.table.id) continue;
            std::vector<std::pair<int, i64>> rel;
            rel.emplace_back(vg[vi].elt_gen.at(x), 1);
            rel.emplace_back(vg[vi].elt_gen.at(y), 1);
            int z = v.table.mul[x][y];
            if (z != v.table.id) rel.emplace_back(vg[vi].elt_gen.at(z), -1);
            out.rels.push_back(rel);
          }
        break;
      }
      case GogVertex::Kind::FactorExtension: {
        const auto& E = v.subext;
        const auto& P = E.A;
        // abelian factor commutators
        for (int p = 0; p <= P.num_factors(); ++p)
          if (P.part_kind(p) == FactorKind::FreeAbelian)
            for (int j = 1; j <= P.part_rank(p); ++j)
              for (int k = j + 1; k <= P.part_rank(p); ++k) {
                std::vector<std::pair<int, i64>> rel{
                    {vg[vi].part_gen.at({p, j}), 1},
                    {vg[vi].part_gen.at({p, k}), 1},
                    {vg[vi].part_gen.at({p, j}), -1},
                    {vg[vi].part_gen.at({p, k}), -1}};
                out.rels.push_back(rel);
              }
        // conjugation action of the lifts
        for (int h = 0; h < E.H.order(); ++h) {
          if (h == E.H.id) continue;
          for (int p = 0; p <= P.num_factors(); ++p)
            for (int j = 1; j <= P.part_rank(p); ++j) {
              std::vector<std::pair<int, i64>> rel;
              rel.emplace_back(vg[vi].lift_gen.at(h), 1);
              rel.emplace_back(vg[vi].part_gen.at({p, j}), 1);
              rel.emplace_back(vg[vi].lift_gen.at(h), -1);
              detail::append_word(rel, vg[vi],
                                  apply(P, E.phi_of(h), generator(P, p, j)), P,
                                  true);
              out.rels.push_back(rel);
            }
        }
        // lift products and cocycles
        for (int h1 = 0; h1 < E.H.order(); ++h1)
          for (int h2 = 0; h2 < E.H.order(); ++h2) {
            if (h1 == E.H.id || h2 == E.H.id) continue;
            std::vector<std::pair<int, i64>> rel;
            rel.emplace_back(vg[vi].lift_gen.at(h1), 1);
            rel.emplace_back(vg[vi].lift_gen.at(h2), 1);
            int h12 = E.H.mul[h1][h2];
            if (h12 != E.H.id) rel.emplace_back(vg[vi].lift_gen.at(h12), -1);
            detail::append_word(rel, vg[vi], E.c(h1, h2), P, true);
            out.rels.push_back(rel);
          }
        break;
      }
      default: {
        const auto& P = v.pres;
        for (int p = 0; p <= P.num_factors(); ++p)
          if (P.part_kind(p) == FactorKind::FreeAbelian)
            for (int j = 1; j <= P.part_rank(p); ++j)
              for (int k = j + 1; k <= P.part_rank(p); ++k) {
                std::vector<std::pair<int, i64>> rel{
                    {vg[vi].part_gen.at({p, j}), 1},
                    {vg[vi].part_gen.at({p, k}), 1},
                    {vg[vi].part_gen.at({p, j}), -1},
                    {vg[vi].part_gen.at({p, k}), -1}};
                out.rels.push_back(rel);
              }
        break;
      }
    }
  }

  // edge relators
  for (size_t ei = 0; ei < G.edges.size(); ++ei) {
    const auto& e = G.edges[ei];
    for (int x = 0; x < e.group.order(); ++x) {
      if (x == e.group.id) continue;
      std::vector<std::pair<int, i64>> rel;
      if (tree_edge[ei]) {
        // alpha_u(x) = alpha_v(x)
        detail::append_elt(rel, G.vertices[e.u], vg[e.u], e.img_u[x], false);
        detail::append_elt(rel, G.vertices[e.v], vg[e.v], e.img_v[x], true);
      } else {
        // alpha_u(x) = t alpha_v(x) t^-1
        rel.emplace_back(stable[ei], 1);
        detail::append_elt(rel, G.vertices[e.v], vg[e.v], e.img_v[x], false);
        rel.emplace_back(stable[ei], -1);
        detail::append_elt(rel, G.vertices[e.u], vg[e.u], e.img_u[x], true);
      }
      if (!rel.empty()) out.rels.push_back(rel);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bass-Serre tree balls.
//
// A tree vertex at graph vertex v has, across each directed edge d = (e,
// v->w), one child per coset r * alpha_v(G_e) in P_v, except that the coset
// of the identity along the arrival direction is the parent. Child vertices
// store their representative r and the canonical key of their coset, so the
// partial action can be computed by key lookup.

struct FiniteTreePortion {
  struct TV {
    int graph_vertex = 0;
    int depth = 0;
    int parent = -1;
    int parent_edge = -1;          // graph edge index used to reach this
    bool parent_reversed = false;  // travelled v -> u instead of u -> v
    VertexElt rep;                 // coset representative at the parent
    std::string coset_key;         // canonical key of rep * alpha(G_e)
  };
  struct TE {
    int a = 0, b = 0;
    int graph_edge = 0;
  };
  std::vector<TV> vertices;  // index 0 is the base lift
  std::vector<TE> edges;
  bool complete = true;
};

namespace detail {

inline std::string coset_key(const VertexGroupOps& ops, const VertexElt& r,
                             const std::vector<VertexElt>& img) {
  std::vector<std::string> ck;
  ck.reserve(img.size());
  for (const auto& x : img) ck.push_back(ops.key(ops.mul(r, x)));
  std::sort(ck.begin(), ck.end());
  std::string kk;
  for (const auto& s : ck) kk += s + "|";
  return kk;
}

}  // namespace detail

// Ball of the Bass-Serre tree around the base lift. coset_budget bounds the
// number of tree edges created; when the budget or a partial vertex-group
// enumeration truncates the ball, complete is set to false (and, when
// allow_truncation is false, EnumerationBudgetExceeded is thrown instead).
inline FiniteTreePortion bass_serre_ball(const GraphOfGroups& G, int radius,
                                         int coset_budget = 10000,
                                         bool allow_truncation = true) {
  if (radius < 0) throw EnumerationBudgetExceeded("negative radius");
  if (coset_budget < 0) throw EnumerationBudgetExceeded("negative budget");
  G.validate();

  FiniteTreePortion T;
  T.vertices.push_back(
      {G.base, 0, -1, -1, false, VertexElt{0}, std::string()});

  // enumerate elements of each vertex group once; a partial enumeration can
  // only under-produce cosets, which truncates the ball
  std::vector<std::vector<VertexElt>> elems(G.vertices.size());
  std::vector<char> elems_complete(G.vertices.size(), 1);
  for (size_t vi = 0; vi < G.vertices.size(); ++vi) {
    bool comp = true;
    elems[vi] =
        VertexGroupOps(G.vertices[vi]).enumerate(4 * coset_budget + 16, &comp);
    elems_complete[vi] = comp ? 1 : 0;
  }

  struct Dir {
    int edge;
    bool reversed;
  };
  auto dirs_at = [&](int v) {
    std::vector<Dir> out;
    for (size_t ei = 0; ei < G.edges.size(); ++ei) {
      if (G.edges[ei].u == v) out.push_back({(int)ei, false});
      if (G.edges[ei].v == v) out.push_back({(int)ei, true});
    }
    return out;
  };

  std::deque<int> q{0};
  while (!q.empty()) {
    int tid = q.front();
    q.pop_front();
    if (T.vertices[tid].depth >= radius) continue;
    int v = T.vertices[tid].graph_vertex;
    VertexGroupOps ops(G.vertices[v]);
    for (const Dir& d : dirs_at(v)) {
      if (!elems_complete[v]) T.complete = false;
      const GogEdge& e = G.edges[d.edge];
      const auto& img_here = d.reversed ? e.img_v : e.img_u;
      int other = d.reversed ? e.u : e.v;
      std::set<std::string> seen_cosets;
      for (const auto& r : elems[v]) {
        std::string kk = detail::coset_key(ops, r, img_here);
        if (!seen_cosets.insert(kk).second) continue;
        // the identity coset along the arrival direction is the parent
        bool is_parent = T.vertices[tid].parent >= 0 &&
                         T.vertices[tid].parent_edge == d.edge &&
                         T.vertices[tid].parent_reversed != d.reversed &&
                         ops.is_id(r);
        if (is_parent) continue;
        if ((int)T.edges.size() >= coset_budget) {
          T.complete = false;
          break;
        }
        int nid = (int)T.vertices.size();
        T.vertices.push_back(
            {other, T.vertices[tid].depth + 1, tid, d.edge, d.reversed, r,
             kk});
        T.edges.push_back({tid, nid, d.edge});
        q.push_back(nid);
      }
    }
  }
  if (!T.complete && !allow_truncation)
    throw EnumerationBudgetExceeded("ball truncated at " +
                                    std::to_string(T.edges.size()) +
                                    " tree edges");
  return T;
}

// Partial action of an element of the base vertex group on a ball: returns
// the image tree vertex, or nullopt when the image leaves the enumerated
// portion. The base lift is fixed, so depths are preserved and the image of
// a root-descending path descends from the root; crossing a tree edge
// transports the residual edge-group element through the two injections.
inline std::optional<int> tree_act(const GraphOfGroups& G,
                                   const FiniteTreePortion& T,
                                   const VertexElt& g, int tid) {
  std::vector<int> path;
  for (int x = tid; x != -1; x = T.vertices[x].parent) path.push_back(x);
  std::reverse(path.begin(), path.end());
  if (path.empty() || path[0] != 0) return std::nullopt;

  int cur = 0;
  VertexElt carry = g;
  for (size_t step = 1; step < path.size(); ++step) {
    const auto& tv = T.vertices[path[step]];
    const GogEdge& e = G.edges[tv.parent_edge];
    const auto& img_from = tv.parent_reversed ? e.img_v : e.img_u;
    const auto& img_to = tv.parent_reversed ? e.img_u : e.img_v;
    VertexGroupOps fops(G.vertices[tv.parent_reversed ? e.v : e.u]);
    VertexElt moved = fops.mul(carry, tv.rep);
    std::string kk = detail::coset_key(fops, moved, img_from);
    std::optional<int> child;
    for (size_t t = 0; t < T.vertices.size() && !child; ++t) {
      const auto& cand = T.vertices[t];
      if (cand.parent == cur && cand.parent_edge == tv.parent_edge &&
          cand.parent_reversed == tv.parent_reversed && cand.coset_key == kk)
        child = (int)t;
    }
    if (!child) return std::nullopt;
    // residual: carry * rep = rep(child) * alpha(x) for a unique x in G_e
    bool done = false;
    for (int x = 0; x < e.group.order() && !done; ++x)
      if (fops.eq(moved, fops.mul(T.vertices[*child].rep, img_from[x]))) {
        carry = img_to[x];
        done = true;
      }
    if (!done) return std::nullopt;
    cur = *child;
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Serialisation.

inline std::string GogVertex::describe() const {
  auto pres_desc = [](const FreeProductPresentation& P) {
    std::vector<std::string> parts;
    for (const auto& f : P.factors) {
      if (f.kind == FactorKind::Free)
        parts.push_back(f.rank == 1 ? "Z" : "F" + std::to_string(f.rank));
      else
        parts.push_back(f.rank == 1 ? "Z" : "Z^" + std::to_string(f.rank));
    }
    if (P.free_rank == 1)
      parts.push_back("Z");
    else if (P.free_rank > 1)
      parts.push_back("F" + std::to_string(P.free_rank));
    if (parts.empty()) return std::string("1");
    std::string s = parts[0];
    for (size_t i = 1; i < parts.size(); ++i) s += " * " + parts[i];
    return s;
  };
  switch (kind) {
    case Kind::Finite:
      if (table.order() == 1) return "1";
      return "finite(" + std::to_string(table.order()) + ")";
    case Kind::FactorExtension:
      return pres_desc(subext.A) + "-by-" + std::to_string(subext.H.order());
    default:
      return pres_desc(pres);
  }
}

inline nlohmann::ordered_json gog_to_json(const GraphOfGroups& G) {
  nlohmann::ordered_json j;
  j["vertices"] = nlohmann::ordered_json::array();
  for (const auto& v : G.vertices) {
    nlohmann::ordered_json jv;
    switch (v.kind) {
      case GogVertex::Kind::Finite:
        jv["kind"] = "finite";
        jv["order"] = v.table.order();
        jv["table"] = v.table.mul;
        if (!v.table.names.empty()) jv["names"] = v.table.names;
        break;
      case GogVertex::Kind::FactorExtension: {
        jv["kind"] = "factor_extension";
        nlohmann::ordered_json jf = nlohmann::ordered_json::array();
        for (const auto& f : v.subext.A.factors)
          jf.push_back({{"kind", f.kind == FactorKind::Free ? "free"
                                                            : "free_abelian"},
                        {"rank", f.rank}});
        jv["factors"] = jf;
        jv["free_rank"] = v.subext.A.free_rank;
        jv["h_order"] = v.subext.H.order();
        break;
      }
      default: {
        jv["kind"] = "free_product";
        nlohmann::ordered_json jf = nlohmann::ordered_json::array();
        for (const auto& f : v.pres.factors)
          jf.push_back({{"kind", f.kind == FactorKind::Free ? "free"
                                                            : "free_abelian"},
                        {"rank", f.rank}});
        jv["factors"] = jf;
        jv["free_rank"] = v.pres.free_rank;
        break;
      }
    }
    jv["describe"] = v.describe();
    jv["distinguished"] = v.distinguished;
    if (!v.name.empty()) jv["name"] = v.name;
    j["vertices"].push_back(jv);
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : G.edges) {
    nlohmann::ordered_json je;
    je["u"] = e.u;
    je["v"] = e.v;
    je["group_order"] = e.group.order();
    nlohmann::ordered_json iu = nlohmann::ordered_json::array(),
                           iv = nlohmann::ordered_json::array();
    VertexGroupOps opu(G.vertices[e.u]), opv(G.vertices[e.v]);
    for (int x = 0; x < e.group.order(); ++x) {
      iu.push_back(opu.key(e.img_u[x]));
      iv.push_back(opv.key(e.img_v[x]));
    }
    je["img_u"] = iu;
    je["img_v"] = iv;
    j["edges"].push_back(je);
  }
  j["base"] = G.base;
  nlohmann::ordered_json jd = nlohmann::ordered_json::array();
  for (size_t vi = 0; vi < G.vertices.size(); ++vi)
    if (G.vertices[vi].distinguished) jd.push_back(vi);
  j["distinguished"] = jd;
  return j;
}

inline std::string gog_to_dot(const GraphOfGroups& G) {
  std::string s = "graph gog {\n";
  for (size_t vi = 0; vi < G.vertices.size(); ++vi) {
    const auto& v = G.vertices[vi];
    s += "  v" + std::to_string(vi) + " [label=\"" +
         (v.name.empty() ? v.describe() : v.name + ": " + v.describe()) +
         "\"";
    if (v.distinguished) s += ", peripheries=2";
    if ((int)vi == G.base) s += ", shape=box";
    s += "];\n";
  }
  for (const auto& e : G.edges)
    s += "  v" + std::to_string(e.u) + " -- v" + std::to_string(e.v) +
         " [label=\"" + std::to_string(e.group.order()) + "\"];\n";
  s += "}\n";
  return s;
}

}  // namespace ggsplit

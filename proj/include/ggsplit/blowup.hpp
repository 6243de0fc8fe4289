#pragma once
// Tree actions at desk scale. The acting group is an extension; vertex and
// edge orbits of the tree are cosets of concrete finitely generated
// subgroups with solvable membership, so the quotient graph of groups is
// assembled directly and finite portions of the tree itself are enumerated
// on demand with the action of arbitrary group elements. Blowing up a vertex
// orbit by a compatible action on another tree replaces its cosets by
// shifted copies of the child tree; incident edges re-attach at a certified
// fixed coset of their finite stabiliser, and collapsing the copies recovers
// the original tree.

#include <algorithm>
#include <array>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ggsplit/errors.hpp"
#include "ggsplit/extension.hpp"
#include "ggsplit/gog.hpp"
#include "ggsplit/splitting.hpp"
#include "ggsplit/subext.hpp"

namespace ggsplit {

// ---------------------------------------------------------------------------
// Tree actions.
//
// A vertex of the tree is a coset rep * P_orb of a vertex orbit stabiliser;
// an edge of orbit e joins g * ushift * P_u to g * vshift * P_v and is
// stabilised by g * stab * g^-1. All shifts and stabilisers live in the
// coordinates of the ambient extension E.

struct TreeAction {
  ExtensionData E;  // acting group
  std::vector<SubgroupData> vstab;             // vertex orbit stabilisers
  std::vector<std::vector<ExtElement>> vgens;  // generators backing vstab
  struct EdgeOrbit {
    SubgroupData stab;             // finite edge stabiliser
    std::vector<ExtElement> gens;  // generators backing stab
    int u = 0, v = 0;              // endpoint orbit indices
    ExtElement ushift, vshift;     // endpoint cosets ushift*P_u, vshift*P_v
  };
  std::vector<EdgeOrbit> eorb;
  int base = 0;
  std::vector<std::string> log;

  // Invariants: every edge stabiliser is finite and fixes both endpoint
  // cosets, i.e. conjugating by a shift inverse lands inside the stabiliser
  // of the endpoint orbit.
  void check() const {
    if (vstab.empty()) throw InvalidInput("tree action has no vertex orbit");
    if (base < 0 || base >= (int)vstab.size())
      throw InvalidInput("tree action base orbit out of range");
    for (const auto& e : eorb) {
      if (e.u < 0 || e.u >= (int)vstab.size() || e.v < 0 ||
          e.v >= (int)vstab.size())
        throw InvalidInput("edge orbit endpoint out of range");
      if (!e.stab.finite)
        throw PostconditionFailed("edge orbit stabiliser is not finite");
      for (const auto& x : e.stab.elements) {
        ExtElement xu = ext_conj(E, ext_inv(E, e.ushift), x);
        ExtElement xv = ext_conj(E, ext_inv(E, e.vshift), x);
        if (!subgroup_contains(E, vstab[e.u], xu) ||
            !subgroup_contains(E, vstab[e.v], xv))
          throw PostconditionFailed(
              "edge stabiliser does not fix both endpoint cosets");
      }
    }
  }
};

namespace detail {

// Elements of a vertex orbit stabiliser in ambient coordinates, identity
// first, breadth-first over the generating set. Finite stabilisers list
// completely; infinite ones stop at the cap.
inline std::vector<ExtElement> stab_elements(const ExtensionData& E,
                                             const SubgroupData& V,
                                             const std::vector<ExtElement>& gens,
                                             int cap, bool* complete) {
  if (V.finite) {
    if (complete) *complete = true;
    return V.elements;
  }
  std::vector<ExtElement> moves = gens;
  for (const auto& g : gens) moves.push_back(ext_inv(E, g));
  std::vector<ExtElement> out{ext_id(E)};
  std::set<ExtElement> seen{out[0]};
  size_t head = 0;
  while (head < out.size() && (int)out.size() < cap) {
    ExtElement cur = out[head++];
    for (const auto& m : moves) {
      ExtElement nxt = ext_mul(E, cur, m);
      if (seen.insert(nxt).second) {
        out.push_back(nxt);
        if ((int)out.size() >= cap) break;
      }
    }
  }
  if (complete) *complete = head >= out.size();
  return out;
}

}  // namespace detail

// The one-point tree: a single orbit carrying the whole group.
inline TreeAction point_action(const ExtensionData& E) {
  TreeAction T;
  T.E = E;
  std::vector<ExtElement> gens;
  for (int p = 0; p <= E.A.num_factors(); ++p)
    for (int j = 1; j <= E.A.part_rank(p); ++j)
      gens.push_back(ExtElement{generator(E.A, p, j), E.H.id});
  for (int h = 0; h < E.H.order(); ++h)
    if (h != E.H.id) gens.push_back(ExtElement{{}, h});
  T.vstab.push_back(classify_subgroup(E, gens, "point"));
  T.vgens.push_back(std::move(gens));
  T.base = 0;
  return T;
}

// The Bass-Serre tree of a one-edge splitting. Vertex orbits are the
// splitting's vertex groups; the edge orbit joins the identity coset of
// vertex 0 to the identity coset of vertex 1 (amalgam shapes) or to the
// stable-letter-shifted coset of vertex 0 (HNN shape).
inline TreeAction tree_action_of(const Splitting& S, const ExtensionData& E) {
  TreeAction T;
  T.E = E;
  T.vstab = S.vertex_data;
  T.vgens = S.vertex_gens;
  TreeAction::EdgeOrbit e;
  e.stab = S.edge_data;
  e.gens = e.stab.gens;
  e.ushift = ext_id(E);
  if (S.shape == Splitting::Shape::HnnLoop) {
    if (!S.special) throw InvalidInput("HNN splitting without stable letter");
    e.u = 0;
    e.v = 0;
    e.vshift = ext_inv(E, *S.special);
  } else {
    e.u = 0;
    e.v = 1;
    e.vshift = ext_id(E);
  }
  T.eorb.push_back(std::move(e));
  T.base = 0;
  T.log = S.log;
  T.check();
  return T;
}

// Quotient graph of groups: one gog vertex per orbit with its classified
// stabiliser, one edge per edge orbit with the stabiliser embedded into each
// endpoint group through the shift conjugations.
inline GraphOfGroups quotient(const TreeAction& T) {
  T.check();
  GraphOfGroups G;
  for (const auto& s : T.vstab) G.vertices.push_back(s.vertex);
  G.base = T.base;
  for (const auto& e : T.eorb) {
    GogEdge ge;
    ge.u = e.u;
    ge.v = e.v;
    ge.group = e.stab.table;
    for (const auto& x : e.stab.elements) {
      ge.img_u.push_back(vertex_element(
          T.E, T.vstab[e.u], ext_conj(T.E, ext_inv(T.E, e.ushift), x)));
      ge.img_v.push_back(vertex_element(
          T.E, T.vstab[e.v], ext_conj(T.E, ext_inv(T.E, e.vshift), x)));
    }
    G.edges.push_back(std::move(ge));
  }
  G.validate();
  return G;
}

// ---------------------------------------------------------------------------
// Finite portions of the tree, with the action of arbitrary group elements.

struct TreeBall {
  struct TV {
    int orb = 0;
    ExtElement rep;  // the vertex is rep * P_orb
    int depth = 0;
  };
  struct TE {
    int a = 0, b = 0;
    int orb = 0;
  };
  std::vector<TV> verts;  // index 0 is the base coset
  std::vector<TE> edges;
  bool complete = true;  // false when a valence or vertex cap truncated
  bool acyclic = true;
};

// Index of the coset rep * P_orb in the ball, or -1.
inline int ball_find(const TreeAction& T, const TreeBall& B, int orb,
                     const ExtElement& rep) {
  for (size_t i = 0; i < B.verts.size(); ++i) {
    if (B.verts[i].orb != orb) continue;
    ExtElement d = ext_mul(T.E, ext_inv(T.E, B.verts[i].rep), rep);
    if (subgroup_contains(T.E, T.vstab[orb], d)) return (int)i;
  }
  return -1;
}

// Breadth-first portion of the tree around the base coset. max_cosets caps
// the enumerated valence per (vertex, edge orbit, side); elem_cap caps the
// stabiliser element enumeration feeding the coset search.
inline TreeBall tree_ball(const TreeAction& T, int radius, int max_cosets = 8,
                          int max_vertices = 4000, int elem_cap = 4000) {
  T.check();
  TreeBall B;
  B.verts.push_back({T.base, ext_id(T.E), 0});
  std::set<std::string> edge_keys;
  std::deque<int> q{0};
  while (!q.empty()) {
    int vid = q.front();
    q.pop_front();
    if (B.verts[vid].depth >= radius) continue;
    int i = B.verts[vid].orb;
    ExtElement w = B.verts[vid].rep;
    bool elems_complete = true;
    auto elems =
        detail::stab_elements(T.E, T.vstab[i], T.vgens[i], elem_cap,
                              &elems_complete);
    if (!elems_complete) B.complete = false;
    for (size_t ei = 0; ei < T.eorb.size(); ++ei) {
      const auto& e = T.eorb[ei];
      for (int side = 0; side < 2; ++side) {
        int here = side == 0 ? e.u : e.v;
        if (here != i) continue;
        const ExtElement& shift_here = side == 0 ? e.ushift : e.vshift;
        const ExtElement& shift_there = side == 0 ? e.vshift : e.ushift;
        int there = side == 0 ? e.v : e.u;
        // cosets q * K in P_i, K = shift_here * stab * shift_here^-1
        std::vector<ExtElement> K;
        for (const auto& x : e.stab.elements)
          K.push_back(ext_conj(T.E, shift_here, x));
        std::set<std::string> seen_cosets;
        int made = 0;
        for (const auto& p : elems) {
          if (made >= max_cosets) {
            B.complete = false;
            break;
          }
          std::string ck;
          for (const auto& k : K) {
            std::string s = ext_to_string(T.E, ext_mul(T.E, p, k));
            if (ck.empty() || s < ck) ck = s;
          }
          if (!seen_cosets.insert(ck).second) continue;
          ++made;
          // the edge g * e with g = w * p * shift_here^-1
          ExtElement g =
              ext_mul(T.E, ext_mul(T.E, w, p), ext_inv(T.E, shift_here));
          std::string ek;
          for (const auto& x : e.stab.elements) {
            std::string s = ext_to_string(T.E, ext_mul(T.E, g, x));
            if (ek.empty() || s < ek) ek = s;
          }
          ek = std::to_string(ei) + "#" + ek;
          if (!edge_keys.insert(ek).second) continue;  // seen from the far side
          ExtElement nrep = ext_mul(T.E, g, shift_there);
          int nid = ball_find(T, B, there, nrep);
          if (nid < 0) {
            if ((int)B.verts.size() >= max_vertices) {
              B.complete = false;
              continue;
            }
            nid = (int)B.verts.size();
            B.verts.push_back({there, nrep, B.verts[vid].depth + 1});
            q.push_back(nid);
          } else {
            B.acyclic = false;  // a fresh edge between two known vertices
          }
          B.edges.push_back({vid, nid, (int)ei});
        }
      }
    }
  }
  return B;
}

// Image of a ball vertex under a group element, when it stays in the ball.
inline std::optional<int> act_on_ball(const TreeAction& T, const TreeBall& B,
                                      const ExtElement& z, int vid) {
  const auto& tv = B.verts.at((size_t)vid);
  int img = ball_find(T, B, tv.orb, ext_mul(T.E, z, tv.rep));
  if (img < 0) return std::nullopt;
  return img;
}

// ---------------------------------------------------------------------------
// Blow-up.

namespace detail {

// Generator-level equality of extension data (presentation, table, action,
// cocycles). Used to reject blow-ups whose child action does not match the
// vertex group it replaces.
inline bool same_extension(const ExtensionData& X, const ExtensionData& Y) {
  if (!(X.A == Y.A)) return false;
  if (X.H.mul != Y.H.mul || X.H.id != Y.H.id) return false;
  for (int h = 0; h < X.H.order(); ++h)
    for (int p = 0; p <= X.A.num_factors(); ++p)
      for (int j = 1; j <= X.A.part_rank(p); ++j)
        if (apply(X.A, X.phi_of(h), generator(X.A, p, j)) !=
            apply(Y.A, Y.phi_of(h), generator(Y.A, p, j)))
          return false;
  for (int a = 0; a < X.H.order(); ++a)
    for (int b = 0; b < X.H.order(); ++b)
      if (!(X.c(a, b) == Y.c(a, b))) return false;
  return true;
}

}  // namespace detail

// A coset c * P_k of the tree action X fixed by the finite set K of group
// elements (in X's coordinates): c^-1 K c lies in the k-th stabiliser.
// Conjugators are searched in breadth-first element order, so the choice is
// canonical; the trivial group attaches to the identity coset of the base.
inline std::pair<int, ExtElement> fixed_coset(const TreeAction& X,
                                              const std::vector<ExtElement>& K,
                                              int enum_cap = 20000) {
  bool all_trivial = true;
  for (const auto& x : K)
    if (!(is_identity(x.a) && x.h == X.E.H.id)) all_trivial = false;
  if (all_trivial) return {X.base, ext_id(X.E)};
  bool complete = false;
  auto elems =
      VertexGroupOps(GogVertex::factor_extension(X.E)).enumerate(enum_cap,
                                                                 &complete);
  for (const auto& ce : elems) {
    ExtElement c = std::get<ExtElement>(ce);
    ExtElement ci = ext_inv(X.E, c);
    for (size_t k = 0; k < X.vstab.size(); ++k) {
      bool ok = true;
      for (const auto& x : K)
        if (!subgroup_contains(X.E, X.vstab[k], ext_conj(X.E, ci, x))) {
          ok = false;
          break;
        }
      if (ok) return {(int)k, c};
    }
  }
  if (complete)
    throw NoFixedPoint("finite stabiliser fixes no vertex coset of the tree");
  throw EnumerationBudgetExceeded(
      "fixed coset not found within the conjugator horizon");
}

struct BlowUpResult {
  TreeAction act;
  // where each parent edge at the replaced orbit re-attached, recorded in
  // child coordinates so an independent child-level surgery can reproduce it
  struct Attach {
    int edge = 0;         // parent edge orbit index
    int side = 0;         // 0 = u endpoint, 1 = v endpoint
    int child_orbit = 0;  // child vertex orbit chosen
    ExtElement conj;      // child-coordinate conjugator to the fixed coset
  };
  std::vector<Attach> attach;
  int replaced = 0;
  std::vector<int> orbit_map;        // old orbit -> new index (replaced -> -1)
  std::vector<int> child_orbit_map;  // child orbit -> new index
};

// Replace the vertex orbit v of T by the tree of X, where X is an action of
// exactly the group that stabilises v. Child orbits and edges are lifted
// through the sub-extension coordinates of the vertex group; parent edges at
// v re-attach at a fixed coset of their stabiliser inside the child tree.
// Collapsing every lifted copy of the child tree recovers T.
inline BlowUpResult blow_up(const TreeAction& T, int v, const TreeAction& X,
                            int enum_cap = 20000) {
  T.check();
  X.check();
  if (v < 0 || v >= (int)T.vstab.size())
    throw InvalidInput("blow-up vertex orbit out of range");
  const SubgroupData& V = T.vstab[v];

  BlowUpResult R;
  R.replaced = v;
  R.act.E = T.E;
  R.act.log = T.log;

  // -- compatibility of the child action with the vertex group
  if (V.finite) {
    // only the one-point child is meaningful for a finite vertex group, and
    // blowing up by it is the identity surgery
    if (X.vstab.size() != 1 || !X.eorb.empty() || !X.vstab[0].finite ||
        X.vstab[0].table.mul != V.table.mul)
      throw IncompatibleActions(
          "finite vertex groups can only be blown up by their one-point "
          "action");
    R.act = T;
    R.orbit_map.assign(T.vstab.size(), -1);
    for (int i = 0; i < (int)T.vstab.size(); ++i)
      if (i != v) R.orbit_map[i] = i;
    R.child_orbit_map = {v};
    for (size_t ei = 0; ei < T.eorb.size(); ++ei)
      for (int side = 0; side < 2; ++side) {
        int end = side == 0 ? T.eorb[ei].u : T.eorb[ei].v;
        if (end == v) R.attach.push_back({(int)ei, side, 0, ext_id(X.E)});
      }
    return R;
  }
  if (!detail::same_extension(X.E, V.sub))
    throw IncompatibleActions(
        "child action group does not match the vertex sub-extension");
  Rational chi_child = euler_characteristic(quotient(X));
  Rational chi_vertex = chi_of_vertex(V.vertex);
  if (!(chi_child == chi_vertex))
    throw IncompatibleActions("child quotient has Euler characteristic " +
                              chi_child.str() + ", vertex group has " +
                              chi_vertex.str());

  auto lift_elt = [&](const ExtElement& x) {
    return sub_to_parent(T.E, V, x);
  };

  // -- orbit layout: orbits before v, the lifted child orbits, orbits after
  R.orbit_map.assign(T.vstab.size(), -1);
  for (int i = 0; i < v; ++i) {
    R.orbit_map[i] = (int)R.act.vstab.size();
    R.act.vstab.push_back(T.vstab[i]);
    R.act.vgens.push_back(T.vgens[i]);
  }
  for (size_t k = 0; k < X.vstab.size(); ++k) {
    R.child_orbit_map.push_back((int)R.act.vstab.size());
    std::vector<ExtElement> lifted;
    for (const auto& g : X.vgens[k]) lifted.push_back(lift_elt(g));
    SubgroupData W =
        classify_subgroup(T.E, lifted, X.vstab[k].vertex.name);
    W.vertex.distinguished = X.vstab[k].vertex.distinguished;
    W.vertex.name = X.vstab[k].vertex.name;
    R.act.vstab.push_back(std::move(W));
    R.act.vgens.push_back(std::move(lifted));
  }
  for (int i = v + 1; i < (int)T.vstab.size(); ++i) {
    R.orbit_map[i] = (int)R.act.vstab.size();
    R.act.vstab.push_back(T.vstab[i]);
    R.act.vgens.push_back(T.vgens[i]);
  }

  // -- parent edges, re-attaching the endpoints that meet v
  for (size_t ei = 0; ei < T.eorb.size(); ++ei) {
    TreeAction::EdgeOrbit e = T.eorb[ei];
    for (int side = 0; side < 2; ++side) {
      int& end = side == 0 ? e.u : e.v;
      ExtElement& shift = side == 0 ? e.ushift : e.vshift;
      if (end != v) {
        end = R.orbit_map[end];
        continue;
      }
      // the stabiliser in the coordinates of the vertex coset, then of the
      // child group
      std::vector<ExtElement> K;
      for (const auto& x : e.stab.elements) {
        ExtElement y = ext_conj(T.E, ext_inv(T.E, shift), x);
        K.push_back(parent_to_sub(T.E, V, y));
      }
      auto [korb, c] = fixed_coset(X, K, enum_cap);
      R.attach.push_back({(int)ei, side, korb, c});
      end = R.child_orbit_map[korb];
      shift = ext_mul(T.E, shift, lift_elt(c));
    }
    R.act.eorb.push_back(std::move(e));
  }

  // -- child edges, lifted
  for (const auto& xe : X.eorb) {
    TreeAction::EdgeOrbit e;
    std::vector<ExtElement> lifted;
    for (const auto& g : xe.stab.elements) lifted.push_back(lift_elt(g));
    e.stab = classify_subgroup(T.E, lifted, "edge");
    if (!e.stab.finite)
      throw PostconditionFailed("lifted edge stabiliser is not finite");
    e.gens = lifted;
    e.u = R.child_orbit_map[xe.u];
    e.v = R.child_orbit_map[xe.v];
    e.ushift = lift_elt(xe.ushift);
    e.vshift = lift_elt(xe.vshift);
    R.act.eorb.push_back(std::move(e));
  }

  R.act.base = T.base == v ? R.child_orbit_map[X.base] : R.orbit_map[T.base];
  R.act.check();
  return R;
}

// The collapse of a blown-up ball vertex: child-copy cosets fall back onto
// the coset of the replaced orbit they refine; untouched orbits map across.
inline std::pair<int, ExtElement> collapse_vertex(const BlowUpResult& R,
                                                  int orb,
                                                  const ExtElement& rep) {
  for (size_t i = 0; i < R.orbit_map.size(); ++i)
    if (R.orbit_map[i] == orb) return {(int)i, rep};
  return {R.replaced, rep};
}

// Child-level surgery on the quotient graph: replace vertex v of G by the
// quotient of X, re-attaching each recorded edge endpoint at its chosen
// child vertex with the conjugated embedding, computed entirely in child
// coordinates.
inline GraphOfGroups surgery_quotient(const GraphOfGroups& G, int v,
                                      const TreeAction& X,
                                      const std::vector<BlowUpResult::Attach>&
                                          attach) {
  GraphOfGroups Gx = quotient(X);
  GraphOfGroups out;
  std::vector<int> vmap(G.vertices.size(), -1);
  std::vector<int> cmap(Gx.vertices.size(), -1);
  for (int i = 0; i < v; ++i) {
    vmap[i] = (int)out.vertices.size();
    out.vertices.push_back(G.vertices[i]);
  }
  for (size_t k = 0; k < Gx.vertices.size(); ++k) {
    cmap[k] = (int)out.vertices.size();
    out.vertices.push_back(Gx.vertices[k]);
  }
  for (int i = v + 1; i < (int)G.vertices.size(); ++i) {
    vmap[i] = (int)out.vertices.size();
    out.vertices.push_back(G.vertices[i]);
  }

  const GogVertex& old = G.vertices.at(v);
  for (size_t ei = 0; ei < G.edges.size(); ++ei) {
    GogEdge e = G.edges[ei];
    for (int side = 0; side < 2; ++side) {
      int& end = side == 0 ? e.u : e.v;
      std::vector<VertexElt>& img = side == 0 ? e.img_u : e.img_v;
      if (end != v) {
        end = vmap[end];
        continue;
      }
      const BlowUpResult::Attach* at = nullptr;
      for (const auto& a : attach)
        if (a.edge == (int)ei && a.side == side) at = &a;
      if (!at)
        throw IncompatibleActions("no attachment recorded for an edge at the "
                                  "replaced vertex");
      std::vector<VertexElt> nimg;
      for (const auto& y : img) {
        if (old.kind == GogVertex::Kind::Finite) {
          // the finite one-point child keeps the table embedding
          nimg.push_back(y);
          continue;
        }
        // the recorded image is already in the vertex's sub-extension
        // coordinates: an ExtElement, or a kernel word when the quotient
        // projection is trivial
        ExtElement yc = old.kind == GogVertex::Kind::FreeProductGroup
                            ? ExtElement{std::get<GroupElement>(y), X.E.H.id}
                            : std::get<ExtElement>(y);
        ExtElement moved = ext_conj(X.E, ext_inv(X.E, at->conj), yc);
        nimg.push_back(
            vertex_element(X.E, X.vstab[at->child_orbit], moved));
      }
      img = std::move(nimg);
      end = cmap[at->child_orbit];
    }
    out.edges.push_back(std::move(e));
  }
  for (const auto& xe : Gx.edges) {
    GogEdge e = xe;
    e.u = cmap[e.u];
    e.v = cmap[e.v];
    out.edges.push_back(std::move(e));
  }
  out.base = G.base == v ? cmap[Gx.base] : vmap[G.base];
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Finite simplicial actions and attach points.

struct SimplicialAction {
  int nv = 0;
  struct Edge {
    int a = 0, b = 0;
  };
  std::vector<Edge> edges;
  HTable group;
  std::vector<std::vector<int>> vperm;  // [element][vertex]
  std::vector<std::vector<int>> eperm;  // [element][edge]

  void check() const {
    int m = group.order();
    if ((int)vperm.size() != m || (int)eperm.size() != m)
      throw InvalidInput("action table count differs from the group order");
    for (int k = 0; k < m; ++k) {
      if ((int)vperm[k].size() != nv ||
          (int)eperm[k].size() != edges.size())
        throw InvalidInput("action table size mismatch");
      std::vector<char> hitv(nv, 0), hite(edges.size(), 0);
      for (int x : vperm[k]) {
        if (x < 0 || x >= nv || hitv[x])
          throw InvalidInput("vertex table is not a permutation");
        hitv[x] = 1;
      }
      for (int x : eperm[k]) {
        if (x < 0 || x >= (int)edges.size() || hite[x])
          throw InvalidInput("edge table is not a permutation");
        hite[x] = 1;
      }
      for (size_t e = 0; e < edges.size(); ++e) {
        const Edge& im = edges[eperm[k][e]];
        int a = vperm[k][edges[e].a], b = vperm[k][edges[e].b];
        if (!((im.a == a && im.b == b) || (im.a == b && im.b == a)))
          throw InvalidInput("edge image does not match vertex images");
      }
    }
    for (int x = 0; x < m; ++x)
      for (int y = 0; y < m; ++y)
        for (int vtx = 0; vtx < nv; ++vtx)
          if (vperm[group.mul[x][y]][vtx] != vperm[x][vperm[y][vtx]])
            throw InvalidInput("vertex tables are not an action");
  }
};

struct AttachPoint {
  int vertex = -1;  // fixed vertex, when one exists
  int edge = -1;    // otherwise an invariant edge; the midpoint is fixed
};

// A point of the graph fixed by the whole action: the first fixed vertex,
// else the midpoint of the first invariant edge. On a tree one of the two
// always exists for a finite action; elsewhere the action may be fixed-point
// free, which is reported honestly.
inline AttachPoint attach_point(const SimplicialAction& A) {
  A.check();
  int m = A.group.order();
  for (int vtx = 0; vtx < A.nv; ++vtx) {
    bool fixed = true;
    for (int k = 0; k < m && fixed; ++k) fixed = A.vperm[k][vtx] == vtx;
    if (fixed) return {vtx, -1};
  }
  for (size_t e = 0; e < A.edges.size(); ++e) {
    bool inv = true;
    for (int k = 0; k < m && inv; ++k) inv = A.eperm[k][e] == (int)e;
    if (inv) return {-1, (int)e};
  }
  throw NoFixedPoint("the action fixes no vertex and preserves no edge");
}

// Attach point of each edge-orbit stabiliser, given as element subsets of
// the acting group; choices are canonical per orbit, hence orbit-coherent.
inline std::vector<AttachPoint> attach_points(
    const SimplicialAction& A, const std::vector<std::vector<int>>& stabs) {
  std::vector<AttachPoint> out;
  for (const auto& S : stabs) {
    std::vector<int> closed = A.group.subgroup_closure(S);
    SimplicialAction sub;
    sub.nv = A.nv;
    sub.edges = A.edges;
    HTable H;
    int ms = (int)closed.size();
    std::vector<int> pos(A.group.order(), -1);
    for (int k = 0; k < ms; ++k) pos[closed[k]] = k;
    H.mul.assign(ms, std::vector<int>(ms));
    for (int a = 0; a < ms; ++a)
      for (int b = 0; b < ms; ++b)
        H.mul[a][b] = pos[A.group.mul[closed[a]][closed[b]]];
    for (int k = 0; k < ms; ++k) H.names.push_back(A.group.names[closed[k]]);
    H.finalise();
    sub.group = std::move(H);
    for (int k = 0; k < ms; ++k) {
      sub.vperm.push_back(A.vperm[closed[k]]);
      sub.eperm.push_back(A.eperm[closed[k]]);
    }
    out.push_back(attach_point(sub));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical comparison of graphs of groups.

namespace detail {

inline std::string vertex_payload(const GogVertex& v) {
  std::string s;
  switch (v.kind) {
    case GogVertex::Kind::Finite:
      s = "finite/" + std::to_string(v.table.order());
      break;
    case GogVertex::Kind::FactorExtension:
      s = "ext/" + v.describe();
      break;
    default:
      s = "free/" + v.describe();
      break;
  }
  if (v.distinguished) s += "/*";
  return s;
}

// order of a vertex-group element, with 0 for "not finite within the probe"
inline int elt_order(const GogVertex& v, const VertexElt& x, int probe = 64) {
  VertexGroupOps ops(v);
  VertexElt cur = x;
  for (int n = 1; n <= probe; ++n) {
    if (ops.is_id(cur)) return n;
    cur = ops.mul(cur, x);
  }
  return 0;
}

inline std::string edge_payload(const GraphOfGroups& G, const GogEdge& e,
                                bool flip) {
  const auto& img_a = flip ? e.img_v : e.img_u;
  const auto& img_b = flip ? e.img_u : e.img_v;
  const GogVertex& va = G.vertices[flip ? e.v : e.u];
  const GogVertex& vb = G.vertices[flip ? e.u : e.v];
  std::vector<int> oa, ob;
  for (const auto& x : img_a) oa.push_back(elt_order(va, x));
  for (const auto& x : img_b) ob.push_back(elt_order(vb, x));
  std::sort(oa.begin(), oa.end());
  std::sort(ob.begin(), ob.end());
  std::string s = "o" + std::to_string(e.group.order()) + "[";
  for (int x : oa) s += std::to_string(x) + ",";
  s += "][";
  for (int x : ob) s += std::to_string(x) + ",";
  s += "]";
  return s;
}

}  // namespace detail

// Canonical signature under vertex relabeling: the lexicographic minimum
// over all vertex orders of the serialised vertex payloads and sorted edge
// descriptors. Exponential in the vertex count, intended for the small
// quotient graphs this library produces.
inline std::string gog_signature(const GraphOfGroups& G) {
  size_t n = G.vertices.size();
  if (n > 9) throw BudgetExceeded("signature requested for a large graph");
  std::vector<std::string> vpay;
  for (const auto& v : G.vertices) vpay.push_back(detail::vertex_payload(v));
  std::vector<std::array<std::string, 2>> epay;
  for (const auto& e : G.edges)
    epay.push_back(
        {detail::edge_payload(G, e, false), detail::edge_payload(G, e, true)});
  std::vector<int> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = (int)i;
  std::string best;
  do {
    std::string s = "V:";
    std::vector<int> where(n);
    for (size_t i = 0; i < n; ++i) where[perm[i]] = (int)i;
    for (size_t i = 0; i < n; ++i) s += vpay[perm[i]] + ";";
    std::vector<std::string> es;
    for (size_t ei = 0; ei < G.edges.size(); ++ei) {
      int a = where[G.edges[ei].u], b = where[G.edges[ei].v];
      const std::string& body =
          a < b ? epay[ei][0]
                : (a > b ? epay[ei][1] : std::min(epay[ei][0], epay[ei][1]));
      es.push_back(std::to_string(std::min(a, b)) + "-" +
                   std::to_string(std::max(a, b)) + ":" + body);
    }
    std::sort(es.begin(), es.end());
    s += "|E:";
    for (const auto& t : es) s += t + ";";
    if (best.empty() || s < best) best = s;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline bool gog_isomorphic(const GraphOfGroups& A, const GraphOfGroups& B) {
  return gog_signature(A) == gog_signature(B);
}

}  // namespace ggsplit

#pragma once
// Classification of finitely generated subgroups V of the extension group
// Abar.  The kernel A is torsion-free, so V is finite exactly when V meets A
// trivially; in that case V is carried by its image in H and tabulated.
// Otherwise V is itself an extension
//
//     1 -> V cap A -> V -> H_V -> 1,   H_V = image of V in H (finite),
//
// and V cap A is a finitely generated subgroup of the free product A, so it
// has a Kurosh decomposition (conjugated factor subgroups * free part).  The
// classification rebuilds V as its own ExtensionData over that decomposition:
// the transversal of V cap A in V supplies the lifts, conjugation by the
// lifts supplies the automorphisms, and the transversal defects supply the
// cocycle.  Every assembled extension is verified on the spot: lift
// relations, cocycle identity, and a generator-level homomorphism check of
// the coordinate map back into the parent.
//
// The data kept here is deliberately rich: graph-of-groups construction
// needs the GogVertex, the decomposition machinery needs membership tests
// and coordinate translation, and the recursive decomposition needs the
// sub-extension together with its complexity (number of Grushko parts of
// V cap A), which strictly drops along proper splittings.

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ggsplit/errors.hpp"
#include "ggsplit/extension.hpp"
#include "ggsplit/gog.hpp"
#include "ggsplit/kurosh.hpp"

namespace ggsplit {

struct SubgroupData {
  // deduplicated, identity-free input generators
  std::vector<ExtElement> gens;

  // image in H: sub index k <-> parent index hv_parent[k] (ascending)
  HTable Hv;
  std::vector<int> hv_parent;
  std::vector<int> hv_index;  // parent h -> sub index, or -1
  // transversal[k] in V with projection hv_parent[k]; identity at Hv.id
  std::vector<ExtElement> transversal;

  bool finite = false;

  // finite branch: all elements of V (index-aligned with `table`)
  std::vector<ExtElement> elements;
  HTable table;

  // infinite branch: V cap A over the parent presentation
  std::vector<GroupElement> schreier;  // generators of V cap A
  KuroshDecomposition dec;
  std::shared_ptr<const KuroshGraph> graph;  // membership + witnesses
  FreeProductPresentation subP;      // abstract shape of V cap A
  int complexity = 0;                // grushko parts of subP
  // concrete parent word of each subP generator: concrete[part][j-1]
  std::vector<std::vector<GroupElement>> concrete;
  // witness-address translation: decomposition part -> subP part (0 = free)
  std::vector<int> part_of_dec;
  std::vector<int> gen_off_of_dec;  // factor-0 parts: offset into free gens
  int free_off = 0;                 // free-basis offset within subP part 0

  ExtensionData sub;  // V as an extension of subP by Hv (infinite branch)
  GogVertex vertex;   // ready-to-use graph-of-groups vertex

  bool is_trivial() const { return finite && elements.size() == 1; }
  i64 order() const { return finite ? (i64)elements.size() : -1; }
};

namespace detail {

// witness tokens -> word in the subgroup presentation
inline GroupElement sub_word_of_tokens(const SubgroupData& V,
                                       const std::vector<WitnessToken>& toks) {
  GroupElement w;
  for (const auto& t : toks) {
    int part, j;
    if (t.kind == 0) {
      part = V.part_of_dec.at(t.idx);
      j = (part >= 1 ? 0 : V.gen_off_of_dec.at(t.idx)) + t.sub + 1;
    } else {
      part = 0;
      j = V.free_off + t.idx + 1;
    }
    w = mul(V.subP, w, generator(V.subP, part, j, t.exp));
  }
  return w;
}

}  // namespace detail

// Word of V cap A (parent coordinates) -> word in subP coordinates.
inline GroupElement sub_word(const SubgroupData& V, const GroupElement& w) {
  if (!V.graph) throw PostconditionFailed("subgroup has no kernel structure");
  auto toks = V.graph->witness(w);
  if (!toks)
    throw PostconditionFailed("element is not in the subgroup kernel");
  return detail::sub_word_of_tokens(V, *toks);
}

// Word in subP coordinates -> word of V cap A in parent coordinates.
inline GroupElement parent_word(const FreeProductPresentation& P,
                                const SubgroupData& V, const GroupElement& w) {
  GroupElement out;
  for (const auto& s : w) {
    if (V.subP.part_kind(s.part) == FactorKind::FreeAbelian) {
      for (size_t j = 0; j < s.data.size(); ++j)
        if (s.data[j] != 0)
          out = mul(P, out,
                    pow(P, V.concrete.at(s.part).at(j), s.data[j]));
    } else {
      for (i64 letter : s.data) {
        int j = (int)(letter < 0 ? -letter : letter);
        const GroupElement& c = V.concrete.at(s.part).at(j - 1);
        out = mul(P, out, letter < 0 ? inv(P, c) : c);
      }
    }
  }
  return out;
}

// V-element in sub-extension coordinates -> parent extension element.
inline ExtElement sub_to_parent(const ExtensionData& E, const SubgroupData& V,
                                const ExtElement& x) {
  ExtElement out{parent_word(E.A, V, x.a), E.H.id};
  return ext_mul(E, out, V.transversal.at(x.h));
}

// Membership of a parent element in V.
inline bool subgroup_contains(const ExtensionData& E, const SubgroupData& V,
                              const ExtElement& g) {
  int k = V.hv_index.at(g.h);
  if (k < 0) return false;
  ExtElement u = ext_mul(E, g, ext_inv(E, V.transversal[k]));
  if (u.h != E.H.id) throw PostconditionFailed("transversal projection broke");
  if (V.finite) return is_identity(u.a);
  return V.graph->contains(u.a);
}

// Parent element of V -> sub-extension coordinates (infinite branch).
inline ExtElement parent_to_sub(const ExtensionData& E, const SubgroupData& V,
                                const ExtElement& g) {
  int k = V.hv_index.at(g.h);
  if (k < 0) throw PostconditionFailed("element projects outside H_V");
  ExtElement u = ext_mul(E, g, ext_inv(E, V.transversal[k]));
  return ExtElement{sub_word(V, u.a), k};
}

// The graph-of-groups element of g inside V's vertex.
inline VertexElt vertex_element(const ExtensionData& E, const SubgroupData& V,
                                const ExtElement& g) {
  if (V.finite) {
    for (size_t i = 0; i < V.elements.size(); ++i)
      if (V.elements[i] == g) return VertexElt{(int)i};
    throw PostconditionFailed("element not in the finite subgroup");
  }
  ExtElement x = parent_to_sub(E, V, g);
  if (V.vertex.kind == GogVertex::Kind::FreeProductGroup) {
    if (x.h != V.Hv.id)
      throw PostconditionFailed("element not in the kernel of a free vertex");
    return VertexElt{x.a};
  }
  return VertexElt{x};
}

namespace detail {

// Image of V in H together with a transversal of V cap A in V, found by a
// BFS over H-values with the generators (then inverses) applied in order.
inline void subgroup_h_image(const ExtensionData& E, SubgroupData& V) {
  int n = E.H.order();
  std::vector<ExtElement> rep((size_t)n);
  std::vector<char> seen((size_t)n, 0);
  rep[E.H.id] = ext_id(E);
  seen[E.H.id] = 1;
  std::vector<int> queue{E.H.id};
  std::vector<ExtElement> moves = V.gens;
  for (const auto& g : V.gens) moves.push_back(ext_inv(E, g));
  for (size_t qi = 0; qi < queue.size(); ++qi) {
    int h = queue[qi];
    for (const auto& m : moves) {
      ExtElement y = ext_mul(E, rep[h], m);
      if (seen[y.h]) continue;
      seen[y.h] = 1;
      rep[y.h] = y;
      queue.push_back(y.h);
    }
  }
  V.hv_index.assign((size_t)n, -1);
  for (int h = 0; h < n; ++h)
    if (seen[h]) {
      V.hv_index[h] = (int)V.hv_parent.size();
      V.hv_parent.push_back(h);
    }
  int m = (int)V.hv_parent.size();
  V.Hv.mul.assign((size_t)m, std::vector<int>((size_t)m));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      int prod = E.H.mul[V.hv_parent[a]][V.hv_parent[b]];
      if (V.hv_index[prod] < 0)
        throw PostconditionFailed("subgroup image in H is not closed");
      V.Hv.mul[a][b] = V.hv_index[prod];
    }
  for (int k = 0; k < m; ++k) V.Hv.names.push_back(E.H.names[V.hv_parent[k]]);
  V.Hv.finalise();
  for (int k = 0; k < m; ++k) V.transversal.push_back(rep[V.hv_parent[k]]);
}

// Schreier generators of V cap A for the transversal above.
inline void schreier_generators(const ExtensionData& E, SubgroupData& V) {
  std::unordered_set<GroupElement, ElemHash> seen;
  for (int k = 0; k < (int)V.transversal.size(); ++k)
    for (const auto& g : V.gens) {
      ExtElement w = ext_mul(E, V.transversal[k], g);
      int t = V.hv_index.at(w.h);
      if (t < 0) throw PostconditionFailed("schreier step leaves the image");
      ExtElement u = ext_mul(E, w, ext_inv(E, V.transversal[t]));
      if (u.h != E.H.id)
        throw PostconditionFailed("schreier element leaves the kernel");
      if (is_identity(u.a) || !seen.insert(u.a).second) continue;
      V.schreier.push_back(u.a);
    }
}

// Assemble and verify V's own ExtensionData over subP and Hv.
inline void assemble_sub_extension(const ExtensionData& E, SubgroupData& V) {
  ExtensionData S;
  S.A = V.subP;
  S.H = V.Hv;
  int parts = V.subP.num_factors() + (V.subP.free_rank > 0 ? 1 : 0);
  S.degenerate = parts < 2;
  int m = V.Hv.order();
  S.bfs_gen.assign((size_t)m, -1);
  S.bfs_parent.assign((size_t)m, -1);

  S.phi.assign((size_t)m, Automorphism{});
  for (int k = 0; k < m; ++k) {
    Automorphism& phi = S.phi[k];
    phi.images.resize((size_t)V.subP.num_factors() + 1);
    for (int p = 0; p <= V.subP.num_factors(); ++p)
      for (int j = 1; j <= V.subP.part_rank(p); ++j) {
        ExtElement img = ext_conj(
            E, V.transversal[k],
            ExtElement{V.concrete.at(p).at(j - 1), E.H.id});
        if (img.h != E.H.id)
          throw PostconditionFailed("lift conjugation leaves the kernel");
        phi.images[p].push_back(sub_word(V, img.a));
      }
  }

  S.cocycle.assign((size_t)m, std::vector<GroupElement>((size_t)m));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      ExtElement z = ext_mul(E, V.transversal[a], V.transversal[b]);
      z = ext_mul(E, z, ext_inv(E, V.transversal[V.Hv.mul[a][b]]));
      if (z.h != E.H.id)
        throw PostconditionFailed("transversal defect leaves the kernel");
      S.cocycle[a][b] = sub_word(V, z.a);
    }

  // lift relations: phi_a . phi_b = ad(c(a,b)) . phi_{ab}
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Automorphism lhs = compose(V.subP, S.phi[a], S.phi[b]);
      Automorphism rhs = compose(V.subP, ad(V.subP, S.c(a, b)),
                                 S.phi[V.Hv.mul[a][b]]);
      if (!(lhs == rhs))
        throw PostconditionFailed("sub-extension lift relations fail");
    }
  check_cocycle_identity(S);
  V.sub = std::move(S);

  // the coordinate map is a homomorphism on generators and lifts
  std::vector<ExtElement> probe;
  for (int p = 0; p <= V.subP.num_factors(); ++p)
    for (int j = 1; j <= V.subP.part_rank(p); ++j)
      probe.push_back(ExtElement{generator(V.subP, p, j), V.Hv.id});
  for (int k = 0; k < m; ++k)
    if (k != V.Hv.id) probe.push_back(ExtElement{{}, k});
  for (const auto& x : probe)
    for (const auto& y : probe) {
      ExtElement lhs = sub_to_parent(E, V, ext_mul(V.sub, x, y));
      ExtElement rhs = ext_mul(E, sub_to_parent(E, V, x),
                               sub_to_parent(E, V, y));
      if (!(lhs == rhs))
        throw PostconditionFailed("sub-extension coordinates do not match "
                                  "the parent multiplication");
    }
}

}  // namespace detail

// Full classification of the subgroup generated by `gens`.
inline SubgroupData classify_subgroup(const ExtensionData& E,
                                      const std::vector<ExtElement>& gens,
                                      const std::string& name = "") {
  SubgroupData V;
  {
    std::unordered_set<ExtElement, ExtElemHash> seen;
    for (const auto& g : gens)
      if (!ext_is_identity(E, g) && seen.insert(g).second) V.gens.push_back(g);
  }
  detail::subgroup_h_image(E, V);
  detail::schreier_generators(E, V);

  if (V.schreier.empty()) {
    // V cap A = 1: V is a copy of its image in H, carried by the transversal
    V.finite = true;
    V.elements = V.transversal;
    V.table = V.Hv;
    V.table.names.clear();
    for (const auto& x : V.elements)
      V.table.names.push_back(ext_to_string(E, x));
    for (int a = 0; a < (int)V.elements.size(); ++a)
      for (int b = 0; b < (int)V.elements.size(); ++b)
        if (ext_mul(E, V.elements[a], V.elements[b]) !=
            V.elements[V.table.mul[a][b]])
          throw PostconditionFailed("finite subgroup table does not close");
    V.vertex = GogVertex::finite(V.table, name);
    return V;
  }

  V.graph = std::make_shared<const KuroshGraph>(E.A, V.schreier);
  V.dec = V.graph->decomposition();

  // abstract shape of V cap A and the concrete words of its generators
  V.concrete.assign(1, {});
  std::vector<GroupElement> free_concrete;
  V.part_of_dec.assign(V.dec.parts.size(), 0);
  V.gen_off_of_dec.assign(V.dec.parts.size(), 0);
  for (size_t pi = 0; pi < V.dec.parts.size(); ++pi) {
    const KuroshPart& part = V.dec.parts[pi];
    if (part.factor >= 1) {
      V.subP.factors.push_back(FactorSpec{E.A.part_kind(part.factor),
                                          (int)part.gens.size()});
      V.part_of_dec[pi] = (int)V.subP.factors.size();
      V.concrete.push_back(part.gens);
    } else {
      V.gen_off_of_dec[pi] = (int)free_concrete.size();
      for (const auto& g : part.gens) free_concrete.push_back(g);
    }
  }
  V.free_off = (int)free_concrete.size();
  for (const auto& g : V.dec.free_basis) free_concrete.push_back(g);
  V.subP.free_rank = (int)free_concrete.size();
  V.concrete[0] = std::move(free_concrete);
  V.subP.validate();
  V.complexity = V.subP.grushko_parts();

  detail::assemble_sub_extension(E, V);

  V.vertex = V.Hv.order() == 1 ? GogVertex::free_product(V.subP, name)
                               : GogVertex::factor_extension(V.sub, name);
  return V;
}

}  // namespace ggsplit

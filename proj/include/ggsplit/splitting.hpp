#pragma once
// Extraction of a one-edge splitting of the extension group over a finite
// subgroup, from an optimally nested narrow cut in a horizon ball.
//
// The chosen cut C and its translates form a nested family of half-spaces;
// the dual tree has a vertex for each "head" class (half-spaces pointing at
// the same tree vertex) and an edge for each pair {D, D*}.  Two half-spaces
// D and E share a head exactly when D = E or E* is properly contained in D
// with no family member strictly between.  All containments are decided by
// certified-empty corners inside the horizon ball; everything mined here is
// re-verified by algebraic postconditions (exact Euler characteristic,
// finite edge group, ellipticity of every factor, and generation of the
// whole group), so an undersized horizon can only cause a retry at a deeper
// one, never an unsound answer.
//
// Output shapes.  With an edge inversion (some s fixing the boundary with
// s.C = C*) the edge of the dual tree is subdivided: the result is an
// amalgam of the head-vertex stabiliser and the finite boundary-flipping
// group over the oriented stabiliser.  Without an inversion, if some g
// carries the head of C* to the head of C the quotient is a loop (an HNN
// extension of the head stabiliser with stable letter g); otherwise it is
// the amalgam of the two head stabilisers.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ggsplit/cuts.hpp"
#include "ggsplit/errors.hpp"
#include "ggsplit/gog.hpp"
#include "ggsplit/subext.hpp"
#include "ggsplit/theta.hpp"

namespace ggsplit {

struct SplitOptions {
  int max_zone = 6;        // deepest mining zone attempted
  int guard = 6;           // ball radius = zone + guard
  int max_candidates = 24; // nested cuts tried per zone, in optimality order
  i64 max_ball_vertices = 200000;
  i64 subset_budget = 2000000;
};

struct Splitting {
  enum class Shape { Amalgam, SubdividedAmalgam, HnnLoop };

  GraphOfGroups gog;
  Shape shape = Shape::Amalgam;
  std::vector<SubgroupData> vertex_data;  // aligned with gog.vertices
  std::vector<std::vector<ExtElement>> vertex_gens;  // mined generating sets
  SubgroupData edge_data;                 // finite edge group structure
  std::optional<ExtElement> special;      // inversion / stable letter
  Cut cut;
  int radius = 0;
  int zone = 0;
  std::vector<std::string> log;

  std::string shape_name() const {
    switch (shape) {
      case Shape::Amalgam: return "amalgam";
      case Shape::SubdividedAmalgam: return "subdivided-amalgam";
      default: return "hnn-loop";
    }
  }
};

// Setwise stabiliser of the cut's boundary edge set.  The left action is
// free on vertices, so every stabilising element is a transporter of a fixed
// boundary endpoint to a same-tag boundary endpoint; there are at most
// 2 |boundary| of those, and each candidate is verified edge by edge.
inline std::vector<ExtElement> cut_stabiliser(const ThetaBall& T,
                                              const Cut& c) {
  if (c.boundary.empty()) throw InvalidInput("cut has no boundary");
  int u0 = T.edges.at(c.boundary[0]).a;
  std::set<ExtElement> found;
  for (int f : c.boundary)
    for (int w : {T.edges.at(f).a, T.edges.at(f).b}) {
      if (T.tags[w] != T.tags[u0]) continue;
      ExtElement g = ext_mul(T.E, T.elts[w], ext_inv(T.E, T.elts[u0]));
      if (found.count(g)) continue;
      std::set<int> image;
      bool ok = true;
      for (int e : c.boundary) {
        auto ie = T.act_edge(g, e);
        if (!ie || !std::binary_search(c.boundary.begin(), c.boundary.end(),
                                       *ie)) {
          ok = false;
          break;
        }
        image.insert(*ie);
      }
      if (ok && image.size() == c.boundary.size()) found.insert(g);
    }
  std::vector<ExtElement> out(found.begin(), found.end());
  for (const auto& a : out)
    for (const auto& b : out)
      if (!found.count(ext_mul(T.E, a, b)))
        throw PostconditionFailed("boundary stabiliser is not closed");
  return out;
}

namespace detail {

// Half-space family with bit-packed sides for fast corner tests.
struct HalfSpaceFamily {
  int words = 0;
  std::vector<Cut> cuts;
  std::map<std::string, int> index;  // canonical key -> position
  std::vector<std::vector<std::uint64_t>> bits;
  std::vector<int> comp;  // position of the complementary half-space

  explicit HalfSpaceFamily(size_t nvert) : words((int)(nvert + 63) / 64) {}

  int add(Cut c) {
    auto it = index.find(c.key);
    if (it != index.end()) return it->second;
    std::vector<std::uint64_t> b((size_t)words, 0);
    for (size_t v = 0; v < c.side.size(); ++v)
      if (c.side[v]) b[v >> 6] |= (std::uint64_t)1 << (v & 63);
    int id = (int)cuts.size();
    index.emplace(c.key, id);
    cuts.push_back(std::move(c));
    bits.push_back(std::move(b));
    comp.push_back(-1);
    return id;
  }

  // side_i contained in side_j within the ball
  bool subset(int i, int j) const {
    const auto& a = bits[(size_t)i];
    const auto& b = bits[(size_t)j];
    for (int w = 0; w < words; ++w)
      if (a[(size_t)w] & ~b[(size_t)w]) return false;
    return true;
  }
  bool strict(int i, int j) const { return i != j && subset(i, j); }
  bool disjoint(int i, int j) const {
    const auto& a = bits[(size_t)i];
    const auto& b = bits[(size_t)j];
    for (int w = 0; w < words; ++w)
      if (a[(size_t)w] & b[(size_t)w]) return false;
    return true;
  }

  // flags over the family: shares a head with cuts[j]
  std::vector<char> same_head_flags(int j) const {
    std::vector<char> ok(cuts.size(), 0);
    ok[(size_t)j] = 1;
    int k = comp[(size_t)j];
    if (k < 0) throw PostconditionFailed("half-space has no complement");
    std::vector<int> outer;  // D with comp(j) properly inside D
    for (int i = 0; i < (int)cuts.size(); ++i)
      if (strict(k, i)) outer.push_back(i);
    for (int i : outer) {
      bool interposed = false;
      for (int t : outer)
        if (t != i && strict(t, i)) {
          interposed = true;
          break;
        }
      if (!interposed) ok[(size_t)i] = 1;
    }
    return ok;
  }
};

}  // namespace detail

// Extract the one-edge graph of groups determined by the cut.  Throws
// PostconditionFailed when any certificate cannot be established at this
// horizon; the driver then deepens and retries.
inline Splitting extract_splitting(const ThetaBall& T, const Cut& C0,
                                   const ExtensionData& E) {
  Splitting S;
  S.cut = C0;
  S.radius = T.radius;

  Cut Cc = complement_cut(T, C0);
  std::vector<ExtElement> elems = ball_elements(T);

  // in-ball translates gC and their complements, complement-paired
  detail::HalfSpaceFamily F(T.elts.size());
  std::vector<int> tC(elems.size(), -1);   // family position of g.C
  std::vector<int> tCc(elems.size(), -1);  // family position of (g.C)*
  for (size_t q = 0; q < elems.size(); ++q) {
    auto t = translate_cut(T, C0, elems[q]);
    if (!t) continue;
    Cut tcomp = complement_cut(T, *t);
    int a = F.add(std::move(*t));
    int b = F.add(std::move(tcomp));
    F.comp[(size_t)a] = b;
    F.comp[(size_t)b] = a;
    tC[q] = a;
    tCc[q] = b;
  }
  auto itC = F.index.find(C0.key);
  auto itCc = F.index.find(Cc.key);
  if (itC == F.index.end() || itCc == F.index.end())
    throw PostconditionFailed("identity translate does not reproduce the cut");
  int iC = itC->second, iCc = itCc->second;
  S.log.push_back("half-space family: " + std::to_string(F.cuts.size()) +
                  " members over " + std::to_string(elems.size()) +
                  " ball elements");

  std::vector<char> headC = F.same_head_flags(iC);
  std::vector<char> headCc = F.same_head_flags(iCc);
  if (headC[(size_t)iCc] || headCc[(size_t)iC])
    throw PostconditionFailed("cut heads collapse at this horizon");

  // the paper's nontriviality certificate: some translate properly inside
  bool proper = false;
  for (size_t q = 0; q < elems.size() && !proper; ++q)
    if (tC[q] >= 0 && (F.strict(tC[q], iC) || F.strict(tC[q], iCc)))
      proper = true;
  if (!proper)
    throw PostconditionFailed("no proper translate inside either side");

  // boundary stabiliser, oriented stabiliser, inversions
  std::vector<ExtElement> stabF = cut_stabiliser(T, C0);
  std::vector<ExtElement> or_stab, midpoint;
  std::optional<ExtElement> inversion;
  for (const auto& g : stabF) {
    auto t = translate_cut(T, C0, g);
    if (!t) continue;
    int ti = F.add(*t);  // existing key lookup in the common case
    if (t->key == C0.key) {
      or_stab.push_back(g);
      midpoint.push_back(g);
    } else if (F.disjoint(ti, iC)) {
      midpoint.push_back(g);
      if (!inversion) inversion = g;
    }
  }
  S.log.push_back("boundary stabiliser order " + std::to_string(stabF.size()) +
                  ", oriented " + std::to_string(or_stab.size()) +
                  (inversion ? ", with inversion" : ", no inversion"));

  // head-vertex stabiliser generating sets
  std::vector<ExtElement> gens0, gens1;
  for (size_t q = 0; q < elems.size(); ++q) {
    if (tC[q] >= 0 && headC[(size_t)tC[q]]) gens0.push_back(elems[q]);
    if (tCc[q] >= 0 && headCc[(size_t)tCc[q]]) gens1.push_back(elems[q]);
  }

  // shape
  std::optional<ExtElement> stable;
  if (!inversion) {
    for (size_t q = 0; q < elems.size(); ++q)
      if (tCc[q] >= 0 && headC[(size_t)tCc[q]]) {
        stable = elems[q];
        break;
      }
  }

  std::vector<std::vector<ExtElement>> vgens;
  if (inversion) {
    S.shape = Splitting::Shape::SubdividedAmalgam;
    S.special = inversion;
    vgens = {gens0, midpoint};
  } else if (stable) {
    S.shape = Splitting::Shape::HnnLoop;
    S.special = stable;
    vgens = {gens0};
  } else {
    S.shape = Splitting::Shape::Amalgam;
    vgens = {gens0, gens1};
  }

  for (size_t k = 0; k < vgens.size(); ++k)
    S.vertex_data.push_back(
        classify_subgroup(E, vgens[k], "v" + std::to_string(k)));
  S.vertex_gens = std::move(vgens);
  S.edge_data = classify_subgroup(E, or_stab, "edge");
  if (!S.edge_data.finite)
    throw PostconditionFailed("edge group is not finite");
  if (E.H.order() % S.edge_data.table.order() != 0)
    throw PostconditionFailed("edge group order does not divide |H|");

  // assemble the graph of groups
  GraphOfGroups G;
  for (const auto& vd : S.vertex_data) G.vertices.push_back(vd.vertex);
  G.base = 0;
  GogEdge ed;
  ed.group = S.edge_data.table;
  if (S.shape == Splitting::Shape::HnnLoop) {
    ed.u = 0;
    ed.v = 0;
    for (const auto& x : S.edge_data.elements) {
      ed.img_v.push_back(vertex_element(E, S.vertex_data[0], x));
      ed.img_u.push_back(
          vertex_element(E, S.vertex_data[0], ext_conj(E, *S.special, x)));
    }
  } else {
    ed.u = 0;
    ed.v = 1;
    for (const auto& x : S.edge_data.elements) {
      ed.img_u.push_back(vertex_element(E, S.vertex_data[0], x));
      ed.img_v.push_back(vertex_element(E, S.vertex_data[1], x));
    }
  }
  G.edges.push_back(std::move(ed));
  G.validate();
  S.gog = std::move(G);

  // postcondition: exact multiplicative Euler characteristic
  Rational want = chi_of_presentation(E.A) / Rational(E.H.order());
  Rational got = euler_characteristic(S.gog);
  if (!(got == want))
    throw PostconditionFailed("Euler characteristic " + got.str() +
                              " differs from chi(A)/|H| = " + want.str());
  S.log.push_back("chi " + got.str() + " = chi(A)/|H|");

  // postcondition: every factor conjugates into a vertex group
  for (int i = 1; i <= E.A.num_factors(); ++i) {
    bool elliptic = false;
    for (size_t q = 0; q < elems.size() && !elliptic; ++q)
      for (size_t k = 0; k < S.vertex_data.size() && !elliptic; ++k) {
        bool all = true;
        for (int j = 1; j <= E.A.part_rank(i) && all; ++j)
          all = subgroup_contains(
              E, S.vertex_data[k],
              ext_conj(E, elems[q],
                       ExtElement{generator(E.A, i, j), E.H.id}));
        if (all) elliptic = true;
      }
    if (!elliptic)
      throw PostconditionFailed("factor " + std::to_string(i) +
                                " is not elliptic in the splitting");
  }

  // postcondition: the pieces generate the whole extension group
  std::vector<ExtElement> all;
  for (const auto& gs : S.vertex_gens)
    all.insert(all.end(), gs.begin(), gs.end());
  if (S.special) all.push_back(*S.special);
  SubgroupData whole = classify_subgroup(E, all, "whole");
  bool full_h = whole.Hv.order() == E.H.order();
  bool full_a = true;
  if (whole.finite) {
    full_a = E.A.grushko_parts() == 0;
  } else {
    for (int p = 0; p <= E.A.num_factors() && full_a; ++p)
      for (int j = 1; j <= E.A.part_rank(p) && full_a; ++j)
        full_a = whole.graph->contains(generator(E.A, p, j));
  }
  if (!full_h || !full_a)
    throw PostconditionFailed(
        "vertex groups and stable letter do not generate the extension");
  S.log.push_back("vertex groups generate; shape " + S.shape_name());
  return S;
}

namespace detail {

// Every candidate ordered by (m, boundary size, key) — the rule by which
// optimally_nested_cut picks its winner — keeping only candidates that are
// nested with each of their in-horizon generator translates.
// max_translate_length bounds the translate window used for the crossing
// counts (see translate_family).
inline std::vector<Cut> ranked_nested_cuts(const ThetaBall& T,
                                           const std::vector<Cut>& cands,
                                           int max_translate_length = -1) {
  std::vector<Cut> fam = translate_family(T, cands, max_translate_length);
  std::vector<Cut> ranked;
  ranked.reserve(cands.size());
  for (const Cut& c : cands) {
    long long m = 0;
    for (const Cut& d : fam)
      if (!nested_cuts(c, d)) ++m;
    Cut e = c;
    e.m = m;
    ranked.push_back(std::move(e));
  }
  std::sort(ranked.begin(), ranked.end(), [](const Cut& x, const Cut& y) {
    if (x.m != y.m) return x.m < y.m;
    if (x.boundary.size() != y.boundary.size())
      return x.boundary.size() < y.boundary.size();
    return x.key < y.key;
  });
  std::vector<Cut> out;
  for (Cut& c : ranked) {
    bool ok = true;
    for (const ExtElement& g : theta_generators(T.E)) {
      auto t = translate_cut(T, c, g);
      if (t && !nested_cuts(c, *t)) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(std::move(c));
  }
  if (out.empty())
    throw NestingUndecidable(
        "no candidate is nested with all of its generator translates");
  return out;
}

}  // namespace detail

// Driver: iterative deepening over mining zones with a fixed ball guard.
// Horizon artifacts (in-ball-certified sides that reconnect outside) die
// once the guard closes their detours; any survivor is rejected by the
// extraction postconditions.  Within a zone the nested candidates are tried
// in optimality order, so a rejected artifact that happens to outrank an
// honest cut of the same size does not hide it.
inline Splitting relative_stallings_split(const ExtensionData& E,
                                          const SplitOptions& opts = {}) {
  if (E.A.grushko_parts() == 0)
    throw InvalidInput("the trivial group admits no splitting");
  std::vector<std::string> attempts;
  for (int zone = 1; zone <= opts.max_zone; ++zone) {
    int radius = zone + opts.guard;
    CutSearch s;
    try {
      s = find_cutting_edges(E, radius, opts.max_ball_vertices, radius - zone,
                             radius);
    } catch (const HorizonExhausted& e) {
      attempts.push_back("zone " + std::to_string(zone) + ": " + e.what());
      continue;
    } catch (const BudgetExceeded& e) {
      attempts.push_back("zone " + std::to_string(zone) + ": " + e.what());
      continue;
    }
    // Boundary sizes are walked upward even past the first size with finds:
    // a phantom cut (in-ball separation whose reconnection detour exceeds
    // the ball) can be strictly smaller than every honest cut, and it is the
    // extraction postconditions, not minimality, that vouch for a result.
    // Within a size, the whole minimal family is ranked, not only the cuts
    // through one reference edge, since a phantom of the same size can own
    // the reference edge at every zone.
    std::vector<int> pool = detail::cut_pool(s.T, zone);
    long long subsets_tried = 0;
    int tried = 0;
    bool zone_capped = false;
    for (int size = 1;
         size <= detail::narrow_size_cap(s.cutting) && !zone_capped; ++size) {
      std::vector<Cut> cands;
      std::vector<Cut> ranked;
      try {
        cands = detail::certified_cuts_of_size(s.T, pool, size, subsets_tried,
                                               opts.subset_budget);
        if (cands.empty()) continue;
        ranked = detail::ranked_nested_cuts(s.T, cands, 2 * zone + 1);
      } catch (const NestingUndecidable& e) {
        attempts.push_back("zone " + std::to_string(zone) + " size " +
                           std::to_string(size) + ": " + e.what());
        continue;
      } catch (const BudgetExceeded& e) {
        attempts.push_back("zone " + std::to_string(zone) + " size " +
                           std::to_string(size) + ": " + e.what());
        break;
      }
      for (const Cut& cand : ranked) {
        if (tried >= opts.max_candidates) {
          attempts.push_back("zone " + std::to_string(zone) +
                             ": gave up after " + std::to_string(tried) +
                             " candidates");
          zone_capped = true;
          break;
        }
        ++tried;
        try {
          Splitting out = extract_splitting(s.T, cand, E);
          out.zone = zone;
          out.log.insert(out.log.begin(),
                         "zone " + std::to_string(zone) + ", radius " +
                             std::to_string(radius) + ", candidate " +
                             std::to_string(tried) + ", narrow boundary " +
                             std::to_string(cand.boundary.size()) + ", m = " +
                             std::to_string(cand.m));
          for (auto& a : attempts) out.log.push_back("earlier: " + a);
          return out;
        } catch (const PostconditionFailed& e) {
          attempts.push_back("zone " + std::to_string(zone) + " candidate " +
                             std::to_string(tried) + ": " + e.what());
        } catch (const BudgetExceeded& e) {
          attempts.push_back("zone " + std::to_string(zone) + " candidate " +
                             std::to_string(tried) + ": " + e.what());
        }
      }
    }
  }
  std::string trail;
  for (const auto& a : attempts) trail += "\n  " + a;
  throw HorizonExhausted("no certified splitting up to zone " +
                         std::to_string(opts.max_zone) + trail);
}

}  // namespace ggsplit

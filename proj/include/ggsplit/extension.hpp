#pragma once
// Finite groups H by multiplication table, and extensions
//   1 -> A -> Abar -> H -> 1
// presented by canonical lifts: phi_h is a concrete automorphism of A per h,
// built by BFS over a generating set of H, and the cocycle measures the
// failure of h -> phi_h to be a homomorphism:
//   phi_{h1} . phi_{h2} = ad(c(h1,h2)) . phi_{h1 h2}.
// Elements of Abar are pairs (a, h) with
//   (a1,h1)(a2,h2) = (a1 . phi_{h1}(a2) . c(h1,h2), h1 h2).

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "ggsplit/automorphism.hpp"
#include "ggsplit/errors.hpp"
#include "ggsplit/words.hpp"

namespace ggsplit {

struct HTable {
  std::vector<std::vector<int>> mul;  // mul[x][y] = x*y
  std::vector<std::string> names;     // optional; defaults h0, h1, ...
  int id = 0;
  std::vector<int> inverse;

  int order() const { return (int)mul.size(); }

  void finalise() {
    int n = order();
    id = -1;
    for (int e = 0; e < n; ++e) {
      bool ok = true;
      for (int x = 0; x < n && ok; ++x)
        ok = (mul[e][x] == x && mul[x][e] == x);
      if (ok) { id = e; break; }
    }
    if (id < 0) throw InvalidInput("H has no identity");
    inverse.assign(n, -1);
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y)
        if (mul[x][y] == id && mul[y][x] == id) { inverse[x] = y; break; }
      if (inverse[x] < 0) throw InvalidInput("H element has no inverse");
    }
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        if (mul[x][y] < 0 || mul[x][y] >= n)
          throw InvalidInput("H table entry out of range");
        for (int z = 0; z < n; ++z)
          if (mul[mul[x][y]][z] != mul[x][mul[y][z]])
            throw InvalidInput("H table not associative");
      }
    if (names.empty())
      for (int i = 0; i < n; ++i) names.push_back("h" + std::to_string(i));
    if ((int)names.size() != n) throw InvalidInput("H name count mismatch");
  }

  static HTable cyclic(int k) {
    HTable H;
    H.mul.assign(k, std::vector<int>(k));
    for (int x = 0; x < k; ++x)
      for (int y = 0; y < k; ++y) H.mul[x][y] = (x + y) % k;
    H.finalise();
    return H;
  }

  // Closure of permutation generators acting on {0..d-1}; elements in BFS
  // order from the identity, generators applied in the given order.
  static HTable from_permutations(const std::vector<std::vector<int>>& gens,
                                  std::vector<int>* gen_index = nullptr) {
    if (gens.empty()) throw InvalidInput("no permutation generators");
    size_t d = gens[0].size();
    std::vector<int> idp(d);
    for (size_t i = 0; i < d; ++i) idp[i] = (int)i;
    std::vector<std::vector<int>> elems{idp};
    auto find = [&elems](const std::vector<int>& p) -> int {
      for (size_t i = 0; i < elems.size(); ++i)
        if (elems[i] == p) return (int)i;
      return -1;
    };
    std::deque<int> queue{0};
    while (!queue.empty()) {
      int x = queue.front();
      queue.pop_front();
      for (const auto& g : gens) {
        if (g.size() != d) throw InvalidInput("permutation size mismatch");
        std::vector<int> y(d);
        for (size_t i = 0; i < d; ++i) y[i] = g[elems[x][i]];  // g after x
        if (find(y) < 0) {
          elems.push_back(y);
          queue.push_back((int)elems.size() - 1);
        }
      }
    }
    HTable H;
    int n = (int)elems.size();
    H.mul.assign(n, std::vector<int>(n));
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        std::vector<int> p(d);
        for (size_t i = 0; i < d; ++i) p[i] = elems[x][elems[y][i]];
        int z = find(p);
        if (z < 0) throw InvalidInput("permutations do not close");
        H.mul[x][y] = z;
      }
    H.finalise();
    if (gen_index) {
      gen_index->clear();
      for (const auto& g : gens) gen_index->push_back(find(g));
    }
    return H;
  }

  std::vector<int> subgroup_closure(std::vector<int> gens) const {
    std::vector<char> in(order(), 0);
    in[id] = 1;
    std::deque<int> q{id};
    for (int g : gens)
      if (!in[g]) { in[g] = 1; q.push_back(g); }
    while (!q.empty()) {
      int x = q.front();
      q.pop_front();
      for (int g : gens) {
        int y = mul[x][g];
        if (!in[y]) { in[y] = 1; q.push_back(y); }
        y = mul[g][x];
        if (!in[y]) { in[y] = 1; q.push_back(y); }
      }
    }
    std::vector<int> out;
    for (int x = 0; x < order(); ++x)
      if (in[x]) out.push_back(x);
    return out;
  }
};

struct ExtensionData {
  FreeProductPresentation A;
  HTable H;
  bool degenerate = false;  // fewer than two nontrivial parts
  std::vector<Automorphism> phi;                   // per h
  std::vector<std::vector<GroupElement>> cocycle;  // [h1][h2]
  // Provenance of the canonical lifts: bfs_gen[h] = index into the input
  // generator list used at first discovery, bfs_parent[h] = previous h.
  std::vector<int> bfs_gen, bfs_parent;

  const Automorphism& phi_of(int h) const { return phi.at(h); }
  const GroupElement& c(int h1, int h2) const { return cocycle.at(h1).at(h2); }
};

struct ExtElement {
  GroupElement a;
  int h = 0;
  auto operator<=>(const ExtElement&) const = default;
};

struct ExtElemHash {
  size_t operator()(const ExtElement& x) const {
    return ElemHash{}(x.a) * 1000003u + (size_t)x.h;
  }
};

inline ExtElement ext_id(const ExtensionData& E) {
  return ExtElement{{}, E.H.id};
}

inline bool ext_is_identity(const ExtensionData& E, const ExtElement& x) {
  return x.h == E.H.id && x.a.empty();
}

inline ExtElement ext_mul(const ExtensionData& E, const ExtElement& x,
                          const ExtElement& y) {
  GroupElement a = mul(E.A, x.a, apply(E.A, E.phi_of(x.h), y.a));
  a = mul(E.A, a, E.c(x.h, y.h));
  return ExtElement{a, E.H.mul[x.h][y.h]};
}

inline ExtElement ext_inv(const ExtensionData& E, const ExtElement& x) {
  int hi = E.H.inverse[x.h];
  // (b, hi)(a, h) = (b . phi_hi(a) . c(hi,h), 1) so b = (phi_hi(a) c(hi,h))^-1
  GroupElement b = inv(E.A, mul(E.A, apply(E.A, E.phi_of(hi), x.a),
                                E.c(hi, x.h)));
  return ExtElement{b, hi};
}

inline ExtElement ext_conj(const ExtensionData& E, const ExtElement& x,
                           const ExtElement& g) {
  return ext_mul(E, ext_mul(E, x, g), ext_inv(E, x));
}

inline ExtElement ext_pow(const ExtensionData& E, const ExtElement& x, i64 e) {
  ExtElement base = e < 0 ? ext_inv(E, x) : x;
  i64 k = e < 0 ? -e : e;
  ExtElement r = ext_id(E);
  for (i64 i = 0; i < k; ++i) r = ext_mul(E, r, base);
  return r;
}

// phi_h^{-1}(g) = phi_{h^{-1}}(c^{-1} g c) with c = cocycle(h, h^{-1}).
inline GroupElement apply_phi_inv(const ExtensionData& E, int h,
                                  const GroupElement& g) {
  int hi = E.H.inverse[h];
  const GroupElement& c = E.c(h, hi);
  return apply(E.A, E.phi_of(hi), conj(E.A, inv(E.A, c), g));
}

inline std::string ext_to_string(const ExtensionData& E, const ExtElement& x) {
  return "(" + to_string(E.A, x.a) + ", " + E.H.names[x.h] + ")";
}

// Whether A is abelian as a whole (cocycles must then be supplied by an
// honest action; inner conjugation cannot determine them).
inline bool ambient_abelian(const FreeProductPresentation& P) {
  return centre_nontrivial(P);
}

// Build canonical lifts and cocycles from an outer action given on a
// generating set of H. Lift order: BFS over H from the identity, applying
// the given generators in order; phi_{g x} := phi_g . phi_x at first
// discovery.
inline ExtensionData build_extension(
    const FreeProductPresentation& P, const HTable& H,
    const std::vector<std::pair<int, Automorphism>>& action_gens,
    bool degenerate = false) {
  P.validate();
  int nontrivial_parts = P.num_factors() + (P.free_rank > 0 ? 1 : 0);
  if (!degenerate && nontrivial_parts < 2)
    throw InvalidInput(
        "decomposition must have at least two nontrivial parts "
        "(set the degenerate flag for the classical mode)");
  if (degenerate && nontrivial_parts >= 2)
    throw InvalidInput("degenerate flag set on a proper free product");

  ExtensionData E;
  E.A = P;
  E.H = H;
  E.degenerate = degenerate;

  int n = H.order();
  E.phi.assign(n, Automorphism{});
  E.bfs_gen.assign(n, -1);
  E.bfs_parent.assign(n, -1);
  std::vector<char> seen(n, 0);
  E.phi[H.id] = Automorphism::identity(P);
  seen[H.id] = 1;
  std::deque<int> queue{H.id};
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    for (size_t gi = 0; gi < action_gens.size(); ++gi) {
      int g = action_gens[gi].first;
      int y = H.mul[g][x];
      if (seen[y]) continue;
      seen[y] = 1;
      E.phi[y] = compose(P, action_gens[gi].second, E.phi[x]);
      E.bfs_gen[y] = (int)gi;
      E.bfs_parent[y] = x;
      queue.push_back(y);
    }
  }
  for (int x = 0; x < n; ++x)
    if (!seen[x])
      throw InvalidInput("action generators do not generate H");

  // Abelian factors: generator images must commute for phi to be defined.
  for (int h = 0; h < n; ++h)
    for (int p = 1; p <= P.num_factors(); ++p) {
      if (P.part_kind(p) != FactorKind::FreeAbelian) continue;
      const auto& ims = E.phi[h].images[p];
      for (size_t i = 0; i < ims.size(); ++i)
        for (size_t j = i + 1; j < ims.size(); ++j)
          if (mul(P, ims[i], ims[j]) != mul(P, ims[j], ims[i]))
            throw NotAnAutomorphism(
                "images of an abelian factor do not commute (h=" +
                H.names[h] + ")");
    }

  E.cocycle.assign(n, std::vector<GroupElement>(n));
  bool abelian = ambient_abelian(P);
  for (int h1 = 0; h1 < n; ++h1)
    for (int h2 = 0; h2 < n; ++h2) {
      Automorphism comp = compose(P, E.phi[h1], E.phi[h2]);
      const Automorphism& target = E.phi[H.mul[h1][h2]];
      if (comp == target) continue;  // cocycle value 1
      if (abelian)
        throw Unsupported(
            "degenerate abelian mode requires an honest action (split "
            "extension); lift relations fail at (" + H.names[h1] + "," +
            H.names[h2] + ")");
      std::vector<std::pair<GroupElement, GroupElement>> pairs;
      for (int p = 0; p <= P.num_factors(); ++p)
        for (int j = 1; j <= P.part_rank(p); ++j)
          pairs.emplace_back(target.image(p, j), comp.image(p, j));
      auto c = solve_conjugacy(P, pairs);
      if (!c)
        throw NotAnAutomorphism(
            "lift relations fail to close up to inner automorphisms at (" +
            H.names[h1] + "," + H.names[h2] + ")");
      E.cocycle[h1][h2] = *c;
    }
  return E;
}

// Evaluates the cocycle identity on all triples:
//   c(h1,h2) c(h1 h2, h3) = phi_{h1}(c(h2,h3)) c(h1, h2 h3).
inline void check_cocycle_identity(const ExtensionData& E) {
  int n = E.H.order();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        GroupElement lhs = mul(E.A, E.c(a, b), E.c(E.H.mul[a][b], c));
        GroupElement rhs = mul(E.A, apply(E.A, E.phi_of(a), E.c(b, c)),
                               E.c(a, E.H.mul[b][c]));
        if (lhs != rhs)
          throw PostconditionFailed("cocycle identity fails at (" +
                                    E.H.names[a] + "," + E.H.names[b] + "," +
                                    E.H.names[c] + ")");
      }
}

}  // namespace ggsplit

#pragma once
// Validation of an outer action on the free-product structure: every lift
// must carry each factor A_i onto a conjugate w A_j w^{-1} of a factor. The
// report records the induced permutations, their orbits, a canonical factor
// reindexing, and for each orbit the stabiliser sub-extension with its
// ambient lifts.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "ggsplit/errors.hpp"
#include "ggsplit/extension.hpp"
#include "ggsplit/kurosh.hpp"

namespace ggsplit {

struct FactorImage {
  int target = 0;           // j with phi_h(A_i) = w A_j w^{-1}
  GroupElement conjugator;  // the w above
};

struct SubExtensionInfo {
  int rep_factor = 0;           // orbit representative (minimal original index)
  std::vector<int> orbit;       // original factor indices, ascending
  std::vector<int> stab;        // ambient H-indices fixing the representative
  FreeProductPresentation Psub; // the representative factor on its own
  ExtensionData ext;            // extension of Psub by the stabiliser
  std::vector<ExtElement> lifts;  // per stab element: its lift in the ambient
                                  // extension, normalising (A_rep, 1)
};

struct ValidationReport {
  std::vector<std::vector<FactorImage>> image;  // [h][i-1]
  std::vector<std::vector<int>> orbits;         // canonical order
  std::vector<int> orbit_of;                    // [i-1] -> orbit index
  std::vector<int> new_to_old, old_to_new;      // [new-1] -> old, [old-1] -> new
  std::vector<SubExtensionInfo> subext;         // one per orbit

  int sigma(int h, int i) const { return image.at(h).at(i - 1).target; }
  const GroupElement& conjugator(int h, int i) const {
    return image.at(h).at(i - 1).conjugator;
  }
};

namespace detail {

// The exponent vector of an element of the factor `part`, which must be a
// single syllable there (or the identity). Free parts report letter sums per
// generator; abelian parts their coordinates.
inline std::vector<i64> factor_vector(const FreeProductPresentation& P,
                                      int part, const GroupElement& g) {
  std::vector<i64> v(P.part_rank(part), 0);
  if (is_identity(g)) return v;
  if (g.size() != 1 || g[0].part != part)
    throw PostconditionFailed("element does not lie in the expected factor");
  if (P.part_kind(part) == FactorKind::FreeAbelian) return g[0].data;
  for (i64 letter : g[0].data) {
    int j = (int)(letter < 0 ? -letter : letter);
    v[j - 1] += letter < 0 ? -1 : 1;
  }
  return v;
}

// Re-express an element of the subgroup A_rep <= A inside the standalone
// presentation of that factor (part index 1 there).
inline GroupElement into_sub(const FreeProductPresentation& P, int rep,
                             const GroupElement& g) {
  if (is_identity(g)) return {};
  if (g.size() != 1 || g[0].part != rep)
    throw PostconditionFailed("element does not lie in the expected factor");
  GroupElement out;
  out.push_back(Syllable{1, g[0].data});
  return out;
}

inline GroupElement from_sub(const FreeProductPresentation& P, int rep,
                             const GroupElement& g) {
  if (is_identity(g)) return {};
  GroupElement out;
  out.push_back(Syllable{rep, g.at(0).data});
  return out;
}

}  // namespace detail

inline ValidationReport validate_action(const ExtensionData& E) {
  const FreeProductPresentation& P = E.A;
  int n = P.num_factors();
  int m = E.H.order();
  ValidationReport R;
  R.image.assign(m, std::vector<FactorImage>((size_t)n));

  for (int h = 0; h < m; ++h) {
    for (int i = 1; i <= n; ++i) {
      if (h == E.H.id) {
        R.image[h][i - 1] = {i, {}};
        continue;
      }
      std::vector<GroupElement> S;
      for (int j = 1; j <= P.part_rank(i); ++j)
        S.push_back(apply(P, E.phi_of(h), generator(P, i, j)));
      KuroshDecomposition dec = kurosh_decompose(S, P);
      if (dec.parts.size() != 1 || !dec.free_basis.empty() ||
          !dec.parts[0].whole)
        throw NotPreserved("lift of " + E.H.names[h] +
                           " does not carry factor " + std::to_string(i) +
                           " onto a conjugate of a factor");
      R.image[h][i - 1] = {dec.parts[0].factor, dec.parts[0].conjugator};
    }
    std::vector<char> hit((size_t)n + 1, 0);
    for (int i = 1; i <= n; ++i) {
      int j = R.image[h][i - 1].target;
      if (hit[j])
        throw NotPreserved("lift of " + E.H.names[h] +
                           " folds two factors together");
      hit[j] = 1;
    }
  }

  // orbits of the induced permutations
  std::vector<int> root((size_t)n + 1);
  std::iota(root.begin(), root.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  for (int h = 0; h < m; ++h)
    for (int i = 1; i <= n; ++i) {
      int a = find(i), b = find(R.image[h][i - 1].target);
      if (a != b) root[std::max(a, b)] = std::min(a, b);
    }
  std::map<int, std::vector<int>> by_root;
  for (int i = 1; i <= n; ++i) by_root[find(i)].push_back(i);
  std::vector<std::vector<int>> orbits;
  for (auto& [r, members] : by_root) orbits.push_back(members);
  std::sort(orbits.begin(), orbits.end(),
            [&](const std::vector<int>& a, const std::vector<int>& b) {
              auto ka = std::make_tuple(P.part_spec(a[0]), a[0]);
              auto kb = std::make_tuple(P.part_spec(b[0]), b[0]);
              return ka < kb;
            });
  R.orbits = orbits;
  R.orbit_of.assign((size_t)n, -1);
  for (size_t oi = 0; oi < orbits.size(); ++oi)
    for (int i : orbits[oi]) R.orbit_of[i - 1] = (int)oi;
  for (const auto& orb : orbits)
    for (int i : orb) R.new_to_old.push_back(i);
  R.old_to_new.assign((size_t)n, 0);
  for (size_t k = 0; k < R.new_to_old.size(); ++k)
    R.old_to_new[R.new_to_old[k] - 1] = (int)k + 1;

  // stabiliser sub-extension per orbit
  for (const auto& orb : orbits) {
    SubExtensionInfo sub;
    sub.rep_factor = orb[0];
    sub.orbit = orb;
    int rep = sub.rep_factor;
    for (int h = 0; h < m; ++h)
      if (R.image[h][rep - 1].target == rep) sub.stab.push_back(h);

    HTable HS;
    int ms = (int)sub.stab.size();
    std::vector<int> pos_of(m, -1);
    for (int k = 0; k < ms; ++k) pos_of[sub.stab[k]] = k;
    HS.mul.assign(ms, std::vector<int>(ms));
    for (int a = 0; a < ms; ++a)
      for (int b = 0; b < ms; ++b) {
        int prod = E.H.mul[sub.stab[a]][sub.stab[b]];
        if (pos_of[prod] < 0)
          throw PostconditionFailed("stabiliser is not closed");
        HS.mul[a][b] = pos_of[prod];
      }
    for (int k = 0; k < ms; ++k) HS.names.push_back(E.H.names[sub.stab[k]]);
    HS.finalise();

    FreeProductPresentation Psub;
    Psub.factors = {P.part_spec(rep)};
    Psub.free_rank = 0;
    std::vector<std::string> names;
    for (int j = 1; j <= P.part_rank(rep); ++j)
      names.push_back(P.gen_name(rep, j));
    Psub.factor_names = {names};
    Psub.validate();

    // ambient lifts and their pairwise cocycles
    sub.lifts.assign((size_t)ms, ExtElement{});
    for (int k = 0; k < ms; ++k)
      sub.lifts[k] =
          ExtElement{inv(P, R.image[sub.stab[k]][rep - 1].conjugator),
                     sub.stab[k]};
    auto amb_cocycle = [&](int a, int b) {
      ExtElement z = ext_mul(E, sub.lifts[a], sub.lifts[b]);
      z = ext_mul(E, z, ext_inv(E, sub.lifts[HS.mul[a][b]]));
      if (z.h != E.H.id)
        throw PostconditionFailed("lift cocycle leaves the kernel");
      return z.a;
    };

    bool central_factor = P.part_kind(rep) == FactorKind::FreeAbelian ||
                          P.part_rank(rep) == 1;
    if (central_factor) {
      // Conjugation by A_rep is invisible inside A_rep, so the ambient lift
      // cocycle must vanish outright. Adjust the lifts by kernel elements
      // v_k, solving  v_a + M_a v_b - v_{ab} = -c(a, b)  over the integers,
      // where M_a is the matrix of conjugation by the lift of a on A_rep.
      bool clean = true;
      for (int a = 0; a < ms && clean; ++a)
        for (int b = 0; b < ms && clean; ++b)
          if (!is_identity(amb_cocycle(a, b))) clean = false;
      if (!clean) {
        int r = P.part_rank(rep);
        std::vector<std::vector<std::vector<i64>>> M(
            (size_t)ms, std::vector<std::vector<i64>>(
                            (size_t)r, std::vector<i64>((size_t)r, 0)));
        for (int a = 0; a < ms; ++a)
          for (int j = 1; j <= r; ++j) {
            GroupElement img =
                ext_conj(E, sub.lifts[a],
                         ExtElement{generator(P, rep, j), E.H.id})
                    .a;
            auto col = detail::factor_vector(P, rep, img);
            for (int t = 0; t < r; ++t) M[a][t][j - 1] = col[t];
          }
        auto unknown = [&](int k, int j) {
          return (k > HS.id ? k - 1 : k) * r + j;  // skip v_id
        };
        int nu = (ms - 1) * r;
        int ne = ms * ms * r;
        std::vector<std::vector<i64>> colsys((size_t)nu,
                                             std::vector<i64>((size_t)ne, 0));
        std::vector<i64> rhs((size_t)ne, 0);
        for (int a = 0; a < ms; ++a)
          for (int b = 0; b < ms; ++b) {
            int slot = (a * ms + b) * r;
            auto cv = detail::factor_vector(P, rep, amb_cocycle(a, b));
            for (int t = 0; t < r; ++t) rhs[slot + t] = -cv[t];
            for (int t = 0; t < r; ++t) {
              if (a != HS.id) colsys[unknown(a, t)][slot + t] += 1;
              if (b != HS.id)
                for (int j = 0; j < r; ++j)
                  colsys[unknown(b, j)][slot + t] += M[a][t][j];
              int ab = HS.mul[a][b];
              if (ab != HS.id) colsys[unknown(ab, t)][slot + t] -= 1;
            }
          }
        auto sol = solve_integer(colsys, rhs);
        if (!sol)
          throw Unsupported(
              "factor extension does not split over its stabiliser");
        for (int k = 0; k < ms; ++k) {
          if (k == HS.id) continue;
          std::vector<i64> v((size_t)r);
          for (int j = 0; j < r; ++j) v[j] = (*sol)[unknown(k, j)];
          GroupElement u;
          if (P.part_kind(rep) == FactorKind::FreeAbelian) {
            push_abelian(u, rep, v);
          } else {
            for (i64 e = 0; e < (v[0] < 0 ? -v[0] : v[0]); ++e)
              push_letter(u, rep, v[0] < 0 ? -1 : 1);
          }
          sub.lifts[k].a = mul(P, u, sub.lifts[k].a);
        }
        for (int a = 0; a < ms; ++a)
          for (int b = 0; b < ms; ++b)
            if (!is_identity(amb_cocycle(a, b)))
              throw PostconditionFailed("lift cocycle survived adjustment");
      }
    }

    // restricted action in the standalone presentation
    std::vector<std::pair<int, Automorphism>> gens;
    for (int k = 0; k < ms; ++k) {
      if (k == HS.id) continue;
      Automorphism psi;
      psi.images.assign(2, {});
      for (int j = 1; j <= P.part_rank(rep); ++j) {
        GroupElement img = ext_conj(E, sub.lifts[k],
                                    ExtElement{generator(P, rep, j), E.H.id})
                               .a;
        psi.images[1].push_back(detail::into_sub(P, rep, img));
      }
      gens.emplace_back(k, psi);
    }
    sub.Psub = Psub;
    sub.ext = build_extension(Psub, HS, gens, /*degenerate=*/true);
    R.subext.push_back(std::move(sub));
  }
  return R;
}

}  // namespace ggsplit

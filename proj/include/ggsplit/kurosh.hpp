#pragma once
// Kurosh decompositions of finitely generated subgroups U = <S> of a free
// product A = A_1 * ... * A_n * B, by folding the quotient of the Bass-Serre
// tree of A.
//
// The graph has central vertices (U-orbits of elements of A) and factor
// vertices (U-orbits of cosets gA_i). Free-part letters run between central
// vertices; a spoke (c, f, a) records that central c sits at position a of
// factor vertex f's frame (label a is defined up to the left coset U_f a).
// Folding identifies vertices until the graph is deterministic; the readout
// is a genuine Kurosh decomposition with membership witnesses.

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ggsplit/errors.hpp"
#include "ggsplit/subgroups.hpp"
#include "ggsplit/words.hpp"

namespace ggsplit {

namespace detail {

// syllable-content arithmetic within one part
inline std::vector<i64> part_mul(const FreeProductPresentation& P, int part,
                                 const std::vector<i64>& u,
                                 const std::vector<i64>& v) {
  if (P.part_kind(part) == FactorKind::FreeAbelian) {
    std::vector<i64> r(u.size());
    for (size_t i = 0; i < u.size(); ++i) r[i] = u[i] + v[i];
    return r;
  }
  std::vector<i64> r = u;
  for (i64 x : v) {
    if (!r.empty() && r.back() == -x)
      r.pop_back();
    else
      r.push_back(x);
  }
  return r;
}

inline std::vector<i64> part_inv(const FreeProductPresentation& P, int part,
                                 const std::vector<i64>& u) {
  std::vector<i64> r = u;
  if (P.part_kind(part) == FactorKind::FreeAbelian) {
    for (auto& x : r) x = -x;
  } else {
    std::reverse(r.begin(), r.end());
    for (auto& x : r) x = -x;
  }
  return r;
}

inline bool part_trivial(const std::vector<i64>& u) {
  for (i64 x : u)
    if (x != 0) return false;
  return u.empty() || true;
}

inline GroupElement part_elem(const FreeProductPresentation& P, int part,
                              const std::vector<i64>& u) {
  GroupElement g;
  if (P.part_kind(part) == FactorKind::FreeAbelian)
    push_abelian(g, part, u);
  else
    for (i64 x : u) push_letter(g, part, x);
  return g;
}

}  // namespace detail

// A subgroup of a single part, rebuilt from generators on change.
struct FactorSubgroup {
  FactorKind kind = FactorKind::Free;
  int rank = 0;
  std::vector<std::vector<i64>> gens;
  FreeSubgroup fs;
  AbelianSubgroup ab;

  static FactorSubgroup empty(const FreeProductPresentation& P, int part) {
    FactorSubgroup U;
    U.kind = P.part_kind(part);
    U.rank = P.part_rank(part);
    U.rebuild();
    return U;
  }

  void rebuild() {
    if (kind == FactorKind::Free)
      fs = FreeSubgroup::from_generators(rank, gens);
    else
      ab = AbelianSubgroup::from_generators(rank, gens);
  }

  void add(const std::vector<i64>& w) {
    if (detail::part_trivial(w)) return;
    if (contains(w)) return;
    gens.push_back(w);
    rebuild();
  }

  bool contains(const std::vector<i64>& w) const {
    return kind == FactorKind::Free ? fs.contains(w) : ab.contains(w);
  }
  bool same_coset(const FreeProductPresentation& P, int part,
                  const std::vector<i64>& a, const std::vector<i64>& b) const {
    return contains(detail::part_mul(P, part, a, detail::part_inv(P, part, b)));
  }
  bool is_trivial() const {
    return kind == FactorKind::Free ? fs.is_trivial() : ab.is_trivial();
  }
  bool is_whole() const {
    return kind == FactorKind::Free ? fs.is_whole() : ab.is_whole();
  }
  std::vector<std::vector<i64>> basis() const {
    return kind == FactorKind::Free ? fs.basis() : ab.rows;
  }
  // (basis index, exponent) tokens multiplying to w, in order
  std::optional<std::vector<std::pair<int, i64>>> express(
      const std::vector<i64>& w) const {
    if (kind == FactorKind::Free) {
      auto e = fs.express(w);
      if (!e) return std::nullopt;
      std::vector<std::pair<int, i64>> out;
      for (auto [i, s] : *e) out.emplace_back(i, (i64)s);
      return out;
    }
    auto e = ab.express(w);
    if (!e) return std::nullopt;
    std::vector<std::pair<int, i64>> out;
    for (size_t i = 0; i < e->size(); ++i)
      if ((*e)[i] != 0) out.emplace_back((int)i, (*e)[i]);
    return out;
  }
};

struct KuroshPart {
  int factor = 0;            // part index i >= 1, or 0 for a B-part subgroup
  GroupElement conjugator;   // x with the subgroup inside x A_i x^{-1}
  std::vector<GroupElement> gens;  // conjugated basis x u x^{-1}
  bool whole = false;        // U_f = A_i before conjugation
};

struct KuroshDecomposition {
  std::vector<KuroshPart> parts;
  std::vector<GroupElement> free_basis;
};

// One token of a membership witness. kind 0: parts[idx].gens[sub]^exp;
// kind 1: free_basis[idx]^exp.
struct WitnessToken {
  int kind = 0;
  int idx = 0;
  int sub = 0;
  i64 exp = 0;
};

class KuroshGraph {
 public:
  KuroshGraph(const FreeProductPresentation& P,
              const std::vector<GroupElement>& S)
      : P_(P) {
    base_ = new_central();
    for (const auto& s : S) trace_loop(s);
    fold();
    readout();
  }

  const KuroshDecomposition& decomposition() const { return dec_; }

  bool contains(const GroupElement& w) const {
    return trace_witness(w).has_value();
  }

  std::optional<std::vector<WitnessToken>> witness(
      const GroupElement& w) const {
    auto r = trace_witness(w);
    if (!r) return std::nullopt;
    // soundness: multiply the witness out and compare
    GroupElement prod;
    for (const auto& t : *r) {
      const GroupElement& g =
          t.kind == 0 ? dec_.parts[t.idx].gens[t.sub] : dec_.free_basis[t.idx];
      prod = mul(P_, prod, pow(P_, g, t.exp));
    }
    if (prod != w)
      throw PostconditionFailed("kurosh witness does not multiply out");
    return r;
  }

 private:
  struct Spoke {
    int central = 0;
    int factor = 0;
    std::vector<i64> label;
    bool alive = true;
  };
  struct BEdge {
    int from = 0, to = 0;
    int letter = 1;  // positive letter index in B
    bool alive = true;
  };
  struct Factor {
    int part = 1;
    FactorSubgroup U;
    bool alive = true;
  };

  const FreeProductPresentation P_;
  int base_ = 0;
  int n_central_ = 0;
  std::vector<char> central_alive_;
  std::vector<Factor> factors_;
  std::vector<Spoke> spokes_;
  std::vector<BEdge> bedges_;
  KuroshDecomposition dec_;

  // readout data
  std::vector<GroupElement> r_central_;   // element rep per central
  std::vector<GroupElement> frame_;       // frame per factor vertex
  std::vector<int> part_of_factor_;       // dec_ part index per factor (-1)
  struct NonTree {
    bool is_spoke = false;
    int id = 0;  // index into spokes_ / bedges_
    int basis_index = 0;
  };
  std::vector<NonTree> nontree_;
  std::vector<char> spoke_tree_, bedge_tree_;
  std::vector<int> spoke_basis_, bedge_basis_;

  int new_central() {
    central_alive_.push_back(1);
    return n_central_++;
  }
  int new_factor(int part) {
    factors_.push_back({part, FactorSubgroup::empty(P_, part), true});
    return (int)factors_.size() - 1;
  }

  void trace_loop(const GroupElement& w) {
    if (is_identity(w)) return;
    int cur = base_;
    for (size_t si = 0; si < w.size(); ++si) {
      const Syllable& s = w[si];
      bool last = (si + 1 == w.size());
      if (s.part == 0 && P_.part_kind(0) == FactorKind::Free) {
        for (size_t li = 0; li < s.data.size(); ++li) {
          bool lastl = last && (li + 1 == s.data.size());
          int nxt = lastl ? base_ : new_central();
          i64 letter = s.data[li];
          if (letter > 0)
            bedges_.push_back({cur, nxt, (int)letter, true});
          else
            bedges_.push_back({nxt, cur, (int)-letter, true});
          cur = nxt;
        }
      } else {
        int f = new_factor(s.part);
        spokes_.push_back({cur, f, std::vector<i64>(trivial_label(s.part)),
                           true});
        int nxt = last ? base_ : new_central();
        spokes_.push_back({nxt, f, s.data, true});
        cur = nxt;
      }
    }
  }

  std::vector<i64> trivial_label(int part) const {
    if (P_.part_kind(part) == FactorKind::FreeAbelian)
      return std::vector<i64>(P_.part_rank(part), 0);
    return {};
  }

  void merge_central(int a, int b) {
    if (a == b) return;
    int keep = std::min(a, b), kill = std::max(a, b);
    if (kill == base_) std::swap(keep, kill);  // keep the base id stable
    for (auto& e : bedges_) {
      if (e.from == kill) e.from = keep;
      if (e.to == kill) e.to = keep;
    }
    for (auto& s : spokes_)
      if (s.central == kill) s.central = keep;
    central_alive_[kill] = 0;
  }

  // returns true if some fold applied
  bool fold_step() {
    // F1: determinise free-part edges
    for (size_t i = 0; i < bedges_.size(); ++i) {
      if (!bedges_[i].alive) continue;
      for (size_t j = i + 1; j < bedges_.size(); ++j) {
        if (!bedges_[j].alive) continue;
        if (bedges_[i].letter != bedges_[j].letter) continue;
        if (bedges_[i].from == bedges_[j].from &&
            bedges_[i].to == bedges_[j].to) {
          bedges_[j].alive = false;
          return true;
        }
        if (bedges_[i].from == bedges_[j].from) {
          merge_central(bedges_[i].to, bedges_[j].to);
          return true;
        }
        if (bedges_[i].to == bedges_[j].to) {
          merge_central(bedges_[i].from, bedges_[j].from);
          return true;
        }
      }
    }
    // F2: one factor vertex per (central, part); F2': one spoke per coset
    for (size_t i = 0; i < spokes_.size(); ++i) {
      if (!spokes_[i].alive) continue;
      for (size_t j = i + 1; j < spokes_.size(); ++j) {
        if (!spokes_[j].alive) continue;
        if (spokes_[i].central != spokes_[j].central) continue;
        int fi = spokes_[i].factor, fj = spokes_[j].factor;
        if (factors_[fi].part != factors_[fj].part) continue;
        int part = factors_[fi].part;
        if (fi != fj) {
          // merge factor fj into fi with frame offset d = a_i * a_j^{-1}
          auto d = detail::part_mul(P_, part, spokes_[i].label,
                                    detail::part_inv(P_, part,
                                                     spokes_[j].label));
          for (auto& s : spokes_)
            if (s.alive && s.factor == fj) {
              s.factor = fi;
              s.label = detail::part_mul(P_, part, d, s.label);
            }
          for (const auto& g : factors_[fj].U.gens) {
            auto cg = detail::part_mul(
                P_, part, d,
                detail::part_mul(P_, part, g, detail::part_inv(P_, part, d)));
            factors_[fi].U.add(cg);
          }
          factors_[fj].alive = false;
          return true;
        }
        // same factor vertex: double spoke at one central
        if (!factors_[fi].U.same_coset(P_, part, spokes_[i].label,
                                       spokes_[j].label)) {
          auto rel = detail::part_mul(
              P_, part, spokes_[j].label,
              detail::part_inv(P_, part, spokes_[i].label));
          factors_[fi].U.add(rel);
        }
        spokes_[j].alive = false;
        return true;
      }
    }
    // F3: identify centrals at the same coset position of a factor vertex
    for (size_t i = 0; i < spokes_.size(); ++i) {
      if (!spokes_[i].alive) continue;
      for (size_t j = i + 1; j < spokes_.size(); ++j) {
        if (!spokes_[j].alive) continue;
        if (spokes_[i].factor != spokes_[j].factor) continue;
        if (spokes_[i].central == spokes_[j].central) continue;
        int part = factors_[spokes_[i].factor].part;
        if (factors_[spokes_[i].factor].U.same_coset(
                P_, part, spokes_[i].label, spokes_[j].label)) {
          merge_central(spokes_[i].central, spokes_[j].central);
          return true;
        }
      }
    }
    return false;
  }

  void fold() {
    while (fold_step()) {
    }
  }

  void readout() {
    r_central_.assign(n_central_, GroupElement{});
    frame_.assign(factors_.size(), GroupElement{});
    spoke_tree_.assign(spokes_.size(), 0);
    bedge_tree_.assign(bedges_.size(), 0);
    std::vector<char> cseen(n_central_, 0), fseen(factors_.size(), 0);
    cseen[base_] = 1;
    std::deque<std::pair<int, int>> q;  // (0 central | 1 factor, id)
    q.emplace_back(0, base_);
    while (!q.empty()) {
      auto [ty, id] = q.front();
      q.pop_front();
      if (ty == 0) {
        for (size_t ei = 0; ei < bedges_.size(); ++ei) {
          auto& e = bedges_[ei];
          if (!e.alive) continue;
          if (e.from == id && !cseen[e.to]) {
            cseen[e.to] = 1;
            bedge_tree_[ei] = 1;
            r_central_[e.to] = mul(P_, r_central_[id], generator(P_, 0, e.letter));
            q.emplace_back(0, e.to);
          } else if (e.to == id && !cseen[e.from]) {
            cseen[e.from] = 1;
            bedge_tree_[ei] = 1;
            r_central_[e.from] =
                mul(P_, r_central_[id], generator(P_, 0, e.letter, -1));
            q.emplace_back(0, e.from);
          }
        }
        for (size_t si = 0; si < spokes_.size(); ++si) {
          auto& s = spokes_[si];
          if (!s.alive || s.central != id) continue;
          if (!fseen[s.factor]) {
            fseen[s.factor] = 1;
            spoke_tree_[si] = 1;
            int part = factors_[s.factor].part;
            frame_[s.factor] =
                mul(P_, r_central_[id],
                    detail::part_elem(P_, part,
                                      detail::part_inv(P_, part, s.label)));
            q.emplace_back(1, s.factor);
          }
        }
      } else {
        for (size_t si = 0; si < spokes_.size(); ++si) {
          auto& s = spokes_[si];
          if (!s.alive || s.factor != id) continue;
          if (!cseen[s.central]) {
            cseen[s.central] = 1;
            spoke_tree_[si] = 1;
            int part = factors_[id].part;
            r_central_[s.central] =
                mul(P_, frame_[id], detail::part_elem(P_, part, s.label));
            q.emplace_back(0, s.central);
          }
        }
      }
    }

    // parts of the decomposition
    part_of_factor_.assign(factors_.size(), -1);
    for (size_t f = 0; f < factors_.size(); ++f) {
      if (!factors_[f].alive || factors_[f].U.is_trivial()) continue;
      KuroshPart part;
      part.factor = factors_[f].part;
      part.conjugator = frame_[f];
      part.whole = factors_[f].U.is_whole();
      for (const auto& b : factors_[f].U.basis())
        part.gens.push_back(
            conj(P_, frame_[f], detail::part_elem(P_, factors_[f].part, b)));
      part_of_factor_[f] = (int)dec_.parts.size();
      dec_.parts.push_back(std::move(part));
    }
    // free part: non-tree edges
    spoke_basis_.assign(spokes_.size(), -1);
    bedge_basis_.assign(bedges_.size(), -1);
    for (size_t ei = 0; ei < bedges_.size(); ++ei) {
      auto& e = bedges_[ei];
      if (!e.alive || bedge_tree_[ei]) continue;
      GroupElement t = mul(P_, r_central_[e.from], generator(P_, 0, e.letter));
      t = mul(P_, t, inv(P_, r_central_[e.to]));
      if (is_identity(t))
        throw PostconditionFailed("trivial stable letter in kurosh readout");
      bedge_basis_[ei] = (int)dec_.free_basis.size();
      dec_.free_basis.push_back(t);
    }
    for (size_t si = 0; si < spokes_.size(); ++si) {
      auto& s = spokes_[si];
      if (!s.alive || spoke_tree_[si]) continue;
      int part = factors_[s.factor].part;
      GroupElement t =
          mul(P_, r_central_[s.central],
              detail::part_elem(P_, part, detail::part_inv(P_, part, s.label)));
      t = mul(P_, t, inv(P_, frame_[s.factor]));
      if (is_identity(t))
        throw PostconditionFailed("trivial stable letter in kurosh readout");
      spoke_basis_[si] = (int)dec_.free_basis.size();
      dec_.free_basis.push_back(t);
    }
  }

  // find the unique live spoke at (central, part), if any
  int spoke_at(int central, int part) const {
    for (size_t si = 0; si < spokes_.size(); ++si)
      if (spokes_[si].alive && spokes_[si].central == central &&
          factors_[spokes_[si].factor].part == part)
        return (int)si;
    return -1;
  }

  std::optional<std::vector<WitnessToken>> trace_witness(
      const GroupElement& w) const {
    std::vector<WitnessToken> W;
    int cur = base_;
    auto emit_free = [&W](int idx, i64 e) {
      if (!W.empty() && W.back().kind == 1 && W.back().idx == idx) {
        W.back().exp += e;
        if (W.back().exp == 0) W.pop_back();
        return;
      }
      W.push_back({1, idx, 0, e});
    };
    for (const auto& s : w) {
      if (s.part == 0 && P_.part_kind(0) == FactorKind::Free) {
        for (i64 letter : s.data) {
          int li = (int)(letter < 0 ? -letter : letter);
          bool fwd = letter > 0;
          int found = -1;
          for (size_t ei = 0; ei < bedges_.size(); ++ei) {
            auto& e = bedges_[ei];
            if (!e.alive || e.letter != li) continue;
            if (fwd && e.from == cur) { found = (int)ei; break; }
            if (!fwd && e.to == cur) { found = (int)ei; break; }
          }
          if (found < 0) return std::nullopt;
          auto& e = bedges_[found];
          if (bedge_basis_[found] >= 0) emit_free(bedge_basis_[found], fwd ? 1 : -1);
          cur = fwd ? e.to : e.from;
        }
      } else {
        int entry = spoke_at(cur, s.part);
        if (entry < 0) return std::nullopt;
        const auto& es = spokes_[entry];
        int f = es.factor;
        int part = s.part;
        // entry stable letter
        if (spoke_basis_[entry] >= 0) emit_free(spoke_basis_[entry], 1);
        // position after multiplying the syllable
        auto pos = detail::part_mul(P_, part, es.label, s.data);
        int exit = -1;
        for (size_t si = 0; si < spokes_.size(); ++si)
          if (spokes_[si].alive && spokes_[si].factor == f &&
              factors_[f].U.same_coset(P_, part, spokes_[si].label, pos)) {
            exit = (int)si;
            break;
          }
        if (exit < 0) return std::nullopt;
        const auto& xs = spokes_[exit];
        auto uf = detail::part_mul(P_, part, pos,
                                   detail::part_inv(P_, part, xs.label));
        auto toks = factors_[f].U.express(uf);
        if (!toks) return std::nullopt;  // cannot happen: same coset
        int pidx = part_of_factor_[f];
        for (auto [bi, e] : *toks) {
          if (e == 0) continue;
          W.push_back({0, pidx, bi, e});
        }
        if (spoke_basis_[exit] >= 0) emit_free(spoke_basis_[exit], -1);
        cur = xs.central;
      }
    }
    if (cur != base_) return std::nullopt;
    return W;
  }
};

inline KuroshDecomposition kurosh_decompose(
    const std::vector<GroupElement>& S, const FreeProductPresentation& P) {
  return KuroshGraph(P, S).decomposition();
}

// <S> = A, tested by membership of every generator.
inline bool generates_whole(const FreeProductPresentation& P,
                            const std::vector<GroupElement>& S) {
  KuroshGraph G(P, S);
  for (int p = 0; p <= P.num_factors(); ++p)
    for (int j = 1; j <= P.part_rank(p); ++j)
      if (!G.contains(generator(P, p, j))) return false;
  return true;
}

}  // namespace ggsplit

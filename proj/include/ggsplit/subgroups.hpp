#pragma once
// Finitely generated subgroups of the two kinds of parts:
//   - FreeSubgroup: Stallings automaton over a free group of rank r;
//   - AbelianSubgroup: integer lattice in Z^r by row-style Hermite form.
// Both support membership, is_whole, a basis, and expressing members in
// terms of the basis.

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "ggsplit/errors.hpp"
#include "ggsplit/words.hpp"

namespace ggsplit {

// ---------------------------------------------------------------------------
struct FreeSubgroup {
  int rank = 0;  // ambient free rank
  // folded automaton: trans[state][dir(letter)] = state or -1; base = 0
  std::vector<std::vector<int>> trans;

  static int dir(int rank, i64 letter) {
    int j = (int)(letter < 0 ? -letter : letter) - 1;
    return 2 * j + (letter < 0 ? 1 : 0);
  }
  static i64 undir(int d) { return (d % 2 == 0 ? 1 : -1) * (i64)(d / 2 + 1); }

  static FreeSubgroup from_generators(int rank,
                                      const std::vector<std::vector<i64>>& ws) {
    FreeSubgroup S;
    S.rank = rank;
    S.trans.assign(1, std::vector<int>(2 * rank, -1));
    for (const auto& w : ws) S.add_loop(w);
    S.fold();
    return S;
  }

  void add_loop(const std::vector<i64>& w) {
    if (w.empty()) return;
    int cur = 0;
    for (size_t i = 0; i < w.size(); ++i) {
      int nxt;
      if (i + 1 == w.size()) {
        nxt = 0;
      } else {
        nxt = (int)trans.size();
        trans.emplace_back(2 * rank, -1);
      }
      trans[cur][dir(rank, w[i])] = nxt;
      trans[nxt][dir(rank, -w[i])] = cur;
      cur = nxt;
    }
  }

  void fold() {
    // union-find over states; merge targets of duplicate-labelled edges
    std::vector<int> parent(trans.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t s = 0; s < trans.size(); ++s) {
        if (find((int)s) != (int)s) continue;
        for (int d = 0; d < 2 * rank; ++d) {
          // collect all targets under label d among edges of the class of s
          int tgt = -1;
          for (size_t s2 = 0; s2 < trans.size(); ++s2) {
            if (find((int)s2) != (int)s) continue;
            int t = trans[s2][d];
            if (t < 0) continue;
            t = find(t);
            if (tgt < 0) {
              tgt = t;
            } else if (tgt != t) {
              parent[std::max(tgt, t)] = std::min(tgt, t);
              changed = true;
              tgt = std::min(tgt, t);
            }
          }
        }
      }
    }
    // rebuild on representatives, base class first
    std::vector<int> remap(trans.size(), -1);
    int base_rep = find(0);
    remap[base_rep] = 0;
    int next = 1;
    for (size_t s = 0; s < trans.size(); ++s)
      if (find((int)s) == (int)s && remap[s] < 0) remap[s] = next++;
    std::vector<std::vector<int>> nt(next, std::vector<int>(2 * rank, -1));
    for (size_t s = 0; s < trans.size(); ++s)
      for (int d = 0; d < 2 * rank; ++d)
        if (trans[s][d] >= 0)
          nt[remap[find((int)s)]][d] = remap[find(trans[s][d])];
    trans = nt;
  }

  bool contains(const std::vector<i64>& w) const {
    int cur = 0;
    for (i64 letter : w) {
      cur = trans[cur][dir(rank, letter)];
      if (cur < 0) return false;
    }
    return cur == 0;
  }

  bool is_trivial() const {
    for (int d = 0; d < 2 * rank; ++d)
      if (trans[0][d] >= 0) return false;
    return true;
  }

  bool is_whole() const {
    for (int j = 1; j <= rank; ++j)
      if (!contains({(i64)j})) return false;
    return rank > 0 || true;
  }

  // BFS spanning tree: parent state, incoming direction; deterministic.
  void spanning_tree(std::vector<int>& par, std::vector<int>& pdir) const {
    par.assign(trans.size(), -1);
    pdir.assign(trans.size(), -1);
    par[0] = 0;
    std::deque<int> q{0};
    while (!q.empty()) {
      int s = q.front();
      q.pop_front();
      for (int d = 0; d < 2 * rank; ++d) {
        int t = trans[s][d];
        if (t >= 0 && par[t] < 0) {
          par[t] = s;
          pdir[t] = d;
          q.push_back(t);
        }
      }
    }
  }

  std::vector<i64> tree_word(int s, const std::vector<int>& par,
                             const std::vector<int>& pdir) const {
    std::vector<i64> w;
    while (s != 0) {
      w.push_back(undir(pdir[s]));
      s = par[s];
    }
    std::reverse(w.begin(), w.end());
    return w;
  }

  // free basis: one word per non-tree edge (positive direction only once)
  std::vector<std::vector<i64>> basis() const {
    std::vector<int> par, pdir;
    spanning_tree(par, pdir);
    std::vector<std::vector<i64>> out;
    for (size_t s = 0; s < trans.size(); ++s)
      for (int d = 0; d < 2 * rank; ++d) {
        int t = trans[s][d];
        if (t < 0) continue;
        // skip tree edges (either orientation)
        if ((par[t] == (int)s && pdir[t] == d) ||
            (par[s] == t && pdir[s] >= 0 && undir(pdir[s]) == -undir(d)))
          continue;
        if (d % 2 == 1) continue;  // count positive direction only
        std::vector<i64> w = tree_word((int)s, par, pdir);
        w.push_back(undir(d));
        auto back = tree_word(t, par, pdir);
        for (auto it = back.rbegin(); it != back.rend(); ++it)
          w.push_back(-*it);
        // reduce
        std::vector<i64> red;
        for (i64 v : w) {
          if (!red.empty() && red.back() == -v)
            red.pop_back();
          else
            red.push_back(v);
        }
        out.push_back(red);
      }
    return out;
  }

  // Express a member as a product of basis elements: returns a list of
  // (basis index, +1/-1) or nullopt if not a member.
  std::optional<std::vector<std::pair<int, int>>> express(
      const std::vector<i64>& w) const {
    std::vector<int> par, pdir;
    spanning_tree(par, pdir);
    // index non-tree edges (positive direction) in basis() order
    std::vector<std::vector<int>> edge_index(trans.size(),
                                             std::vector<int>(2 * rank, -1));
    int bi = 0;
    for (size_t s = 0; s < trans.size(); ++s)
      for (int d = 0; d < 2 * rank; ++d) {
        int t = trans[s][d];
        if (t < 0) continue;
        if ((par[t] == (int)s && pdir[t] == d) ||
            (par[s] == t && pdir[s] >= 0 && undir(pdir[s]) == -undir(d)))
          continue;
        if (d % 2 == 1) continue;
        edge_index[s][d] = bi++;
      }
    std::vector<std::pair<int, int>> out;
    int cur = 0;
    for (i64 letter : w) {
      int d = dir(rank, letter);
      int t = trans[cur][d];
      if (t < 0) return std::nullopt;
      if (edge_index[cur][d] >= 0)
        out.emplace_back(edge_index[cur][d], +1);
      else {
        // reverse direction of a positive non-tree edge?
        int dd = dir(rank, -letter);
        if (trans[t][dd] == cur && edge_index[t][dd] >= 0)
          out.emplace_back(edge_index[t][dd], -1);
        // else: tree edge, contributes nothing
      }
      cur = t;
    }
    if (cur != 0) return std::nullopt;
    return out;
  }

  int index_or_minus1() const {
    // finite index iff automaton is complete; then index = #states
    for (const auto& row : trans)
      for (int d = 0; d < 2 * rank; ++d)
        if (row[d] < 0) return -1;
    return (int)trans.size();
  }
};

// ---------------------------------------------------------------------------
struct AbelianSubgroup {
  int rank = 0;
  std::vector<std::vector<i64>> rows;  // Hermite-reduced, pivot-sorted

  static AbelianSubgroup from_generators(
      int rank, const std::vector<std::vector<i64>>& gens) {
    AbelianSubgroup S;
    S.rank = rank;
    for (const auto& g : gens) S.add(g);
    return S;
  }

  void add(std::vector<i64> v) {
    if ((int)v.size() != rank) throw InvalidInput("abelian vector size");
    for (size_t r = 0; r < rows.size(); ++r) {
      int p = pivot(rows[r]);
      if (p < 0) continue;
      if (pivot(v) > p || pivot(v) < 0) continue;
      if (pivot(v) < p) {
        rows.insert(rows.begin() + r, v);
        normalise();
        return;
      }
      // same pivot: gcd combine
      i64 a = rows[r][p], b = v[p];
      i64 g = std::gcd(a < 0 ? -a : a, b < 0 ? -b : b);
      // extended gcd
      auto egcd = [](i64 a, i64 b, i64& x, i64& y) {
        if (b == 0) { x = (a >= 0 ? 1 : -1); y = 0; return; }
        i64 x1 = 1, y1 = 0, x2 = 0, y2 = 1;
        while (b != 0) {
          i64 q = a / b, t = a - q * b;
          a = b; b = t;
          t = x1 - q * x2; x1 = x2; x2 = t;
          t = y1 - q * y2; y1 = y2; y2 = t;
        }
        x = x1; y = y1;
      };
      i64 x, y;
      egcd(a, b, x, y);
      std::vector<i64> comb(rank), red(rank);
      for (int c = 0; c < rank; ++c) {
        comb[c] = x * rows[r][c] + y * v[c];
        red[c] = (a / g) * v[c] - (b / g) * rows[r][c];
      }
      rows[r] = comb;
      v = red;
    }
    if (pivot(v) >= 0) rows.push_back(v);
    normalise();
  }

  static int pivot(const std::vector<i64>& v) {
    for (size_t i = 0; i < v.size(); ++i)
      if (v[i] != 0) return (int)i;
    return -1;
  }

  void normalise() {
    std::sort(rows.begin(), rows.end(),
              [](const std::vector<i64>& a, const std::vector<i64>& b) {
                return pivot(a) < pivot(b);
              });
    rows.erase(std::remove_if(rows.begin(), rows.end(),
                              [](const std::vector<i64>& v) {
                                return pivot(v) < 0;
                              }),
               rows.end());
    // make pivots positive, reduce above
    for (size_t r = 0; r < rows.size(); ++r) {
      int p = pivot(rows[r]);
      if (rows[r][p] < 0)
        for (auto& x : rows[r]) x = -x;
      for (size_t r2 = 0; r2 < r; ++r2) {
        i64 q = floordiv(rows[r2][p], rows[r][p]);
        if (q != 0)
          for (int c = 0; c < rank; ++c) rows[r2][c] -= q * rows[r][c];
      }
    }
  }

  static i64 floordiv(i64 a, i64 b) {
    i64 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
  }

  bool contains(std::vector<i64> v) const {
    for (const auto& row : rows) {
      int p = pivot(row);
      i64 q = v[p] / row[p];  // truncation noticed by the final pivot check
      for (int c = 0; c < rank; ++c) v[c] -= q * row[c];
    }
    return pivot(v) < 0;
  }

  // coefficients c with sum c_i * rows_i = v
  std::optional<std::vector<i64>> express(std::vector<i64> v) const {
    std::vector<i64> coeff(rows.size(), 0);
    for (size_t r = 0; r < rows.size(); ++r) {
      int p = pivot(rows[r]);
      if (v[p] % rows[r][p] != 0) return std::nullopt;
      i64 q = v[p] / rows[r][p];
      coeff[r] = q;
      for (int c = 0; c < rank; ++c) v[c] -= q * rows[r][c];
    }
    if (pivot(v) >= 0) return std::nullopt;
    return coeff;
  }

  bool is_trivial() const { return rows.empty(); }

  bool is_whole() const {
    if ((int)rows.size() != rank) return false;
    for (int r = 0; r < rank; ++r)
      for (int c = 0; c < rank; ++c)
        if (rows[r][c] != (r == c ? 1 : 0)) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Integral solution x of  sum_j x_j * cols[j] = b,  if one exists. Echelon
// reduction of the column lattice with coefficient tracking, then exact
// back-substitution; the returned solution is re-verified.
inline std::optional<std::vector<i64>> solve_integer(
    const std::vector<std::vector<i64>>& cols, const std::vector<i64>& b) {
  const size_t m = b.size();
  const size_t nc = cols.size();
  for (const auto& c : cols)
    if (c.size() != m) throw InvalidInput("solve_integer: ragged input");

  struct Row {
    std::vector<i64> v, c;
  };
  auto pivot = [](const std::vector<i64>& v) {
    for (size_t i = 0; i < v.size(); ++i)
      if (v[i] != 0) return (int)i;
    return -1;
  };
  auto egcd = [](i64 a, i64 bb, i64& x, i64& y) {
    i64 x1 = 1, y1 = 0, x2 = 0, y2 = 1;
    while (bb != 0) {
      i64 q = a / bb, t = a - q * bb;
      a = bb;
      bb = t;
      t = x1 - q * x2;
      x1 = x2;
      x2 = t;
      t = y1 - q * y2;
      y1 = y2;
      y2 = t;
    }
    if (a < 0) { a = -a; x1 = -x1; y1 = -y1; }
    x = x1;
    y = y1;
  };

  std::vector<Row> rows;  // echelon: pivot columns strictly increasing
  for (size_t j = 0; j < nc; ++j) {
    Row cur{cols[j], std::vector<i64>(nc, 0)};
    cur.c[j] = 1;
    while (true) {
      int p = pivot(cur.v);
      if (p < 0) break;
      size_t at = 0;
      while (at < rows.size() && pivot(rows[at].v) < p) ++at;
      if (at == rows.size() || pivot(rows[at].v) > p) {
        if (cur.v[p] < 0) {
          for (auto& t : cur.v) t = -t;
          for (auto& t : cur.c) t = -t;
        }
        rows.insert(rows.begin() + at, cur);
        break;
      }
      i64 a = rows[at].v[p], bb = cur.v[p], x, y;
      egcd(a, bb, x, y);
      i64 g = x * a + y * bb;
      Row comb, red;
      comb.v.resize(m);
      comb.c.resize(nc);
      red.v.resize(m);
      red.c.resize(nc);
      for (size_t t = 0; t < m; ++t) {
        comb.v[t] = x * rows[at].v[t] + y * cur.v[t];
        red.v[t] = (a / g) * cur.v[t] - (bb / g) * rows[at].v[t];
      }
      for (size_t t = 0; t < nc; ++t) {
        comb.c[t] = x * rows[at].c[t] + y * cur.c[t];
        red.c[t] = (a / g) * cur.c[t] - (bb / g) * rows[at].c[t];
      }
      rows[at] = comb;
      cur = red;
    }
  }

  std::vector<i64> residual = b, x(nc, 0);
  for (const auto& row : rows) {
    int p = pivot(row.v);
    if (residual[p] % row.v[p] != 0) return std::nullopt;
    i64 q = residual[p] / row.v[p];
    if (q == 0) continue;
    for (size_t t = 0; t < m; ++t) residual[t] -= q * row.v[t];
    for (size_t t = 0; t < nc; ++t) x[t] += q * row.c[t];
  }
  for (i64 t : residual)
    if (t != 0) return std::nullopt;
  std::vector<i64> check(m, 0);
  for (size_t j = 0; j < nc; ++j)
    for (size_t t = 0; t < m; ++t) check[t] += x[j] * cols[j][t];
  if (check != b) throw PostconditionFailed("solve_integer verification");
  return x;
}

}  // namespace ggsplit

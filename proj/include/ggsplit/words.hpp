#pragma once
// Normal forms for elements of a free product
//   A = A_1 * ... * A_n * B
// where each A_i is free or free-abelian of finite rank and B is free.
//
// An element is a sequence of syllables in alternating parts. Part 0 is the
// free part B; parts 1..n are the factors. A syllable of a free part stores a
// reduced signed-letter word (letter j > 0 is the j-th generator, -j its
// inverse); a syllable of a free-abelian part stores an exponent vector.
// The empty sequence is the identity. Multiplication reduces at the seam, so
// every GroupElement in circulation is in normal form.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "ggsplit/errors.hpp"

namespace ggsplit {

using i64 = std::int64_t;

enum class FactorKind { Free, FreeAbelian };

struct FactorSpec {
  FactorKind kind = FactorKind::Free;
  int rank = 1;
  auto operator<=>(const FactorSpec&) const = default;
};

struct FreeProductPresentation {
  std::vector<FactorSpec> factors;  // A_1..A_n, addressed by part 1..n
  int free_rank = 0;                // rank of B, addressed by part 0
  // Optional custom generator names (empty => defaults a1, a2_1, b, ...).
  std::vector<std::vector<std::string>> factor_names;
  std::vector<std::string> free_names;

  bool operator==(const FreeProductPresentation&) const = default;

  int num_factors() const { return (int)factors.size(); }
  // Number of nontrivial parts in the maximal (Grushko) decomposition.
  int grushko_parts() const { return num_factors() + free_rank; }

  FactorSpec part_spec(int part) const {
    if (part == 0) return FactorSpec{FactorKind::Free, free_rank};
    return factors.at(part - 1);
  }
  FactorKind part_kind(int part) const { return part_spec(part).kind; }
  int part_rank(int part) const { return part_spec(part).rank; }

  std::string gen_name(int part, int j) const {  // j is 1-based
    if (part == 0) {
      if (!free_names.empty()) return free_names.at(j - 1);
      return free_rank == 1 ? "b" : "b" + std::to_string(j);
    }
    if (!factor_names.empty() && !factor_names.at(part - 1).empty())
      return factor_names.at(part - 1).at(j - 1);
    std::string base = "a" + std::to_string(part);
    return factors.at(part - 1).rank == 1 ? base
                                          : base + "_" + std::to_string(j);
  }

  // name -> (part, 1-based generator index)
  std::map<std::string, std::pair<int, int>> name_table() const {
    std::map<std::string, std::pair<int, int>> t;
    for (int p = 0; p <= num_factors(); ++p)
      for (int j = 1; j <= part_rank(p); ++j) {
        auto [it, fresh] = t.emplace(gen_name(p, j), std::make_pair(p, j));
        if (!fresh) throw InvalidInput("duplicate generator name " + it->first);
      }
    return t;
  }

  void validate() const {
    for (const auto& f : factors)
      if (f.rank < 1) throw InvalidInput("factor rank must be >= 1");
    if (free_rank < 0) throw InvalidInput("free rank must be >= 0");
    if (!factor_names.empty() && factor_names.size() != factors.size())
      throw InvalidInput("factor_names size mismatch");
    for (size_t i = 0; i < factor_names.size(); ++i)
      if (!factor_names[i].empty() &&
          (int)factor_names[i].size() != factors[i].rank)
        throw InvalidInput("factor_names rank mismatch");
    if (!free_names.empty() && (int)free_names.size() != free_rank)
      throw InvalidInput("free_names size mismatch");
    auto t = name_table();  // throws on duplicates
    for (const auto& [name, loc] : t) {
      (void)loc;
      if (name.empty() || name == "1" ||
          name.find_first_of(" \t^") != std::string::npos)
        throw InvalidInput("bad generator name '" + name + "'");
    }
  }
};

struct Syllable {
  int part = 0;
  std::vector<i64> data;  // free: reduced signed letters; abelian: exponents
  auto operator<=>(const Syllable&) const = default;
};

using GroupElement = std::vector<Syllable>;

inline bool is_identity(const GroupElement& g) { return g.empty(); }

struct ElemHash {
  size_t operator()(const GroupElement& g) const {
    size_t h = 1469598103934665603ull;
    auto mix = [&h](i64 v) {
      h ^= (size_t)v + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    };
    for (const auto& s : g) {
      mix(s.part);
      mix((i64)s.data.size());
      for (i64 v : s.data) mix(v);
    }
    return h;
  }
};

// --- seam-reducing construction -------------------------------------------

inline void push_letter(GroupElement& g, int part, i64 letter) {
  if (letter == 0) throw InvalidInput("zero letter");
  if (!g.empty() && g.back().part == part) {
    auto& w = g.back().data;
    if (!w.empty() && w.back() == -letter) {
      w.pop_back();
      if (w.empty()) g.pop_back();
      return;
    }
    w.push_back(letter);
    return;
  }
  g.push_back(Syllable{part, {letter}});
}

inline void push_abelian(GroupElement& g, int part, const std::vector<i64>& e) {
  if (!g.empty() && g.back().part == part) {
    auto& v = g.back().data;
    for (size_t i = 0; i < v.size(); ++i) v[i] += e[i];
    if (std::all_of(v.begin(), v.end(), [](i64 x) { return x == 0; }))
      g.pop_back();
    return;
  }
  if (std::all_of(e.begin(), e.end(), [](i64 x) { return x == 0; })) return;
  g.push_back(Syllable{part, e});
}

inline void push_syllable(const FreeProductPresentation& P, GroupElement& g,
                          const Syllable& s) {
  if (P.part_kind(s.part) == FactorKind::FreeAbelian) {
    push_abelian(g, s.part, s.data);
  } else {
    for (i64 letter : s.data) push_letter(g, s.part, letter);
  }
}

inline GroupElement mul(const FreeProductPresentation& P, const GroupElement& a,
                        const GroupElement& b) {
  GroupElement r = a;
  for (const auto& s : b) push_syllable(P, r, s);
  return r;
}

inline Syllable syllable_inv(const FreeProductPresentation& P,
                             const Syllable& s) {
  Syllable t{s.part, s.data};
  if (P.part_kind(s.part) == FactorKind::FreeAbelian) {
    for (auto& v : t.data) v = -v;
  } else {
    std::reverse(t.data.begin(), t.data.end());
    for (auto& v : t.data) v = -v;
  }
  return t;
}

inline GroupElement inv(const FreeProductPresentation& P,
                        const GroupElement& g) {
  GroupElement r;
  r.reserve(g.size());
  for (auto it = g.rbegin(); it != g.rend(); ++it)
    r.push_back(syllable_inv(P, *it));
  return r;
}

// x g x^{-1}
inline GroupElement conj(const FreeProductPresentation& P,
                         const GroupElement& x, const GroupElement& g) {
  return mul(P, mul(P, x, g), inv(P, x));
}

inline GroupElement pow(const FreeProductPresentation& P, const GroupElement& g,
                        i64 e) {
  GroupElement base = e < 0 ? inv(P, g) : g;
  i64 k = e < 0 ? -e : e;
  GroupElement r;
  for (i64 i = 0; i < k; ++i) r = mul(P, r, base);
  return r;
}

inline GroupElement generator(const FreeProductPresentation& P, int part, int j,
                              i64 e = 1) {
  GroupElement g;
  if (P.part_kind(part) == FactorKind::FreeAbelian) {
    std::vector<i64> v(P.part_rank(part), 0);
    v[j - 1] = e;
    push_abelian(g, part, v);
  } else {
    for (i64 i = 0; i < (e < 0 ? -e : e); ++i)
      push_letter(g, part, e < 0 ? -(i64)j : (i64)j);
  }
  return g;
}

inline int syllable_length(const GroupElement& g) { return (int)g.size(); }

inline i64 word_length(const GroupElement& g) {
  i64 n = 0;
  for (const auto& s : g) {
    for (i64 v : s.data) n += v < 0 ? -v : v;  // abelian: L1 norm
    if (s.data.empty()) n += 1;
  }
  return n;
}

// --- parsing and printing ---------------------------------------------------

// Whitespace-separated tokens "name" or "name^int"; "1" is the identity.
inline GroupElement parse_word(const FreeProductPresentation& P,
                               const std::string& text) {
  auto table = P.name_table();
  GroupElement g;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace((unsigned char)text[i])) ++i;
    if (i >= text.size()) break;
    size_t j = i;
    while (j < text.size() && !std::isspace((unsigned char)text[j])) ++j;
    std::string tok = text.substr(i, j - i);
    i = j;
    if (tok == "1") continue;
    std::string name = tok;
    i64 e = 1;
    if (auto caret = tok.find('^'); caret != std::string::npos) {
      name = tok.substr(0, caret);
      std::string es = tok.substr(caret + 1);
      try {
        size_t used = 0;
        e = std::stoll(es, &used);
        if (used != es.size()) throw std::invalid_argument(es);
      } catch (const std::exception&) {
        throw InvalidInput("bad exponent in token '" + tok + "'");
      }
    }
    auto it = table.find(name);
    if (it == table.end()) throw UnknownGenerator(name);
    auto [part, idx] = it->second;
    GroupElement gen = generator(P, part, idx, e);
    g = mul(P, g, gen);
  }
  return g;
}

inline std::string to_string(const FreeProductPresentation& P,
                             const GroupElement& g) {
  if (g.empty()) return "1";
  std::string out;
  auto emit = [&out](const std::string& name, i64 e) {
    if (!out.empty()) out += ' ';
    out += name;
    if (e != 1) out += "^" + std::to_string(e);
  };
  for (const auto& s : g) {
    if (P.part_kind(s.part) == FactorKind::FreeAbelian) {
      for (size_t j = 0; j < s.data.size(); ++j)
        if (s.data[j] != 0) emit(P.gen_name(s.part, (int)j + 1), s.data[j]);
    } else {
      size_t k = 0;
      while (k < s.data.size()) {
        size_t r = k;
        while (r < s.data.size() && s.data[r] == s.data[k]) ++r;
        i64 letter = s.data[k];
        i64 count = (i64)(r - k);
        emit(P.gen_name(s.part, (int)(letter < 0 ? -letter : letter)),
             letter < 0 ? -count : count);
        k = r;
      }
    }
  }
  return out;
}

// --- cyclic reduction and roots ---------------------------------------------

// g == t * core * t^{-1}; core has minimal syllable length in the
// conjugacy class (first/last syllables in different parts, or length <= 1).
inline std::pair<GroupElement, GroupElement> cyc_reduce(
    const FreeProductPresentation& P, const GroupElement& g) {
  GroupElement core = g, t;
  while (core.size() >= 2 && core.front().part == core.back().part) {
    GroupElement s{core.front()};
    core = mul(P, mul(P, inv(P, s), core), s);
    t = mul(P, t, s);
  }
  return {core, t};
}

// Reduced signed-letter word utilities (within one free part).
inline std::vector<i64> letters_cyc_core(const std::vector<i64>& w,
                                         std::vector<i64>* prefix = nullptr) {
  size_t lo = 0, hi = w.size();
  while (hi - lo >= 2 && w[lo] == -w[hi - 1]) { ++lo; --hi; }
  if (prefix) prefix->assign(w.begin(), w.begin() + lo);
  return std::vector<i64>(w.begin() + lo, w.begin() + hi);
}

// Smallest period of a cyclically reduced letter word (w = u^{n/d} exactly).
inline size_t letters_period(const std::vector<i64>& w) {
  size_t n = w.size();
  for (size_t d = 1; d <= n; ++d) {
    if (n % d != 0) continue;
    bool ok = true;
    for (size_t i = d; i < n && ok; ++i) ok = (w[i] == w[i % d]);
    if (ok) return d;
  }
  return n;
}

// Primitive root: r with g == r^m, m >= 1 maximal. Requires g != 1.
inline std::pair<GroupElement, i64> primitive_root(
    const FreeProductPresentation& P, const GroupElement& g) {
  if (is_identity(g)) throw InvalidInput("primitive_root of identity");
  auto [core, t] = cyc_reduce(P, g);
  GroupElement root;
  i64 m = 1;
  if (core.size() == 1) {
    const Syllable& s = core[0];
    if (P.part_kind(s.part) == FactorKind::FreeAbelian) {
      i64 gg = 0;
      for (i64 v : s.data) gg = std::gcd(gg, v < 0 ? -v : v);
      std::vector<i64> r(s.data);
      for (auto& v : r) v /= gg;
      GroupElement rt;
      push_abelian(rt, s.part, r);
      root = rt;
      m = gg;
    } else {
      std::vector<i64> pre;
      auto cc = letters_cyc_core(s.data, &pre);
      size_t d = letters_period(cc);
      m = (i64)(cc.size() / d);
      GroupElement rt;
      for (i64 v : pre) push_letter(rt, s.part, v);
      for (size_t i = 0; i < d; ++i) push_letter(rt, s.part, cc[i]);
      for (auto it = pre.rbegin(); it != pre.rend(); ++it)
        push_letter(rt, s.part, -*it);
      root = rt;
    }
  } else {
    size_t n = core.size(), d = n;
    for (size_t cand = 1; cand <= n; ++cand) {
      if (n % cand != 0) continue;
      bool ok = true;
      for (size_t i = cand; i < n && ok; ++i) ok = (core[i] == core[i % cand]);
      if (ok) { d = cand; break; }
    }
    m = (i64)(n / d);
    root.assign(core.begin(), core.begin() + d);
  }
  return {mul(P, mul(P, t, root), inv(P, t)), m};
}

}  // namespace ggsplit

#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <set>

#include "ggsplit/cuts.hpp"
#include "oracles.hpp"

using namespace ggsplit;
using namespace ggtest;

namespace {

ExtensionData ext_trivial_ZZ() {
  auto P = pres_ZZ();
  return build_extension(P, HTable::cyclic(1), {});
}

std::vector<char> flags_of(const ThetaBall& T, const std::vector<int>& edges) {
  std::vector<char> f(T.edges.size(), 0);
  for (int e : edges) f[e] = 1;
  return f;
}

// ---------------------------------------------------------------------------
// Independent brute-force oracle.  Same deep-zone pool rule as the library,
// but its own component labelling (union-find), its own certificate logic,
// and exhaustive subset enumeration.  Group arithmetic is shared — the oracle
// checks the cut search, not the multiplication table.
// ---------------------------------------------------------------------------
struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void join(int a, int b) { p[find(a)] = find(b); }
};

bool brute_comp_infinite(const ThetaBall& T, const std::vector<int>& root,
                         int r, const std::vector<int>& removed_edges) {
  // factor coset certificate
  for (int v = 0; v < (int)T.elts.size(); ++v)
    if (root[v] == r && T.tags[v] >= 1) return true;
  // periodic translate certificate, pure A-part elements only
  std::vector<int> members;
  for (int v = 0; v < (int)T.elts.size(); ++v)
    if (root[v] == r) members.push_back(v);
  for (int x : members) {
    for (int y : members) {
      if (x == y || T.tags[x] != T.tags[y] || T.elts[x].h != T.elts[y].h)
        continue;
      ExtElement g = ext_mul(T.E, T.elts[y], ext_inv(T.E, T.elts[x]));
      if (is_identity(g.a)) continue;
      // path x -> y within the component (plain BFS)
      std::vector<int> prev(T.elts.size(), -1);
      prev[x] = x;
      std::vector<int> q{x};
      std::vector<char> rem(T.edges.size(), 0);
      for (int e : removed_edges) rem[e] = 1;
      for (size_t i = 0; i < q.size(); ++i)
        for (auto [w, e] : T.adj[q[i]])
          if (!rem[e] && prev[w] < 0) {
            prev[w] = q[i];
            q.push_back(w);
          }
      if (prev[y] < 0) continue;
      std::vector<std::pair<int, int>> path;  // vertex pairs along edges
      for (int v = y; v != x; v = prev[v]) path.push_back({prev[v], v});
      bool clean = true;
      for (auto [u1, u2] : path) {
        ExtElement p1 = T.elts[u1], p2 = T.elts[u2];
        for (int k = 1; k <= 4 * T.radius + 8 && clean; ++k) {
          p1 = ext_mul(T.E, g, p1);
          p2 = ext_mul(T.E, g, p2);
          for (int e : removed_edges) {
            const ThetaEdge& f = T.edges[e];
            auto same = [&](const ExtElement& p, int tu, int fv) {
              return tu == T.tags[fv] && p == T.elts[fv];
            };
            if ((same(p1, T.tags[u1], f.a) && same(p2, T.tags[u2], f.b)) ||
                (same(p1, T.tags[u1], f.b) && same(p2, T.tags[u2], f.a)))
              clean = false;
          }
        }
        if (!clean) break;
      }
      if (clean) return true;
    }
  }
  return false;
}

// Minimum size of a certified cutting subset of deep-zone 0-edges, or -1.
int brute_min_certified_cut(const ThetaBall& T, int max_size, int zone) {
  std::vector<int> pool;
  for (int e : T.zero_edges)
    if (T.dist[T.edges[e].a] <= zone && T.dist[T.edges[e].b] <= zone)
      pool.push_back(e);

  std::vector<int> subset;
  auto cuts_with = [&](const std::vector<int>& F) {
    Dsu dsu((int)T.elts.size());
    std::vector<char> rem(T.edges.size(), 0);
    for (int e : F) rem[e] = 1;
    for (int e = 0; e < (int)T.edges.size(); ++e)
      if (!rem[e]) dsu.join(T.edges[e].a, T.edges[e].b);
    std::vector<int> root(T.elts.size());
    for (int v = 0; v < (int)T.elts.size(); ++v) root[v] = dsu.find(v);
    std::set<int> certified;
    for (int v = 0; v < (int)T.elts.size(); ++v) {
      int r = root[v];
      if (v != r || certified.count(r)) continue;
      if (brute_comp_infinite(T, root, r, F)) certified.insert(r);
      if (certified.size() >= 2) return true;
    }
    return false;
  };
  for (int s = 1; s <= max_size; ++s) {
    subset.assign(s, 0);
    bool found = false;
    auto rec = [&](auto&& self, int start, int depth) -> void {
      if (found) return;
      if (depth == s) {
        if (cuts_with(subset)) found = true;
        return;
      }
      for (int i = start; i < (int)pool.size() && !found; ++i) {
        subset[depth] = pool[i];
        self(self, i + 1, depth + 1);
      }
    };
    rec(rec, 0, 0);
    if (found) return s;
  }
  return -1;
}

}  // namespace

TEST_CASE("radius zero ball is a single plain vertex") {
  ThetaBall T = theta_ball(ext_E1(), 0);
  REQUIRE(T.elts.size() == 1);
  REQUIRE(T.tags[0] == theta_tag_plain);
  REQUIRE(T.edges.empty());
  REQUIRE(ext_is_identity(T.E, T.elts[0]));
}

TEST_CASE("radius one ball of the swap extension has the three spokes") {
  ThetaBall T = theta_ball(ext_E1(), 1);
  REQUIRE(T.elts.size() == 4);  // plain + tags 0, 1, 2
  REQUIRE(T.edges.size() == 3);
  for (const ThetaEdge& e : T.edges) {
    REQUIRE(e.label == 0);
    bool plain_end = T.tags[e.a] == theta_tag_plain ||
                     T.tags[e.b] == theta_tag_plain;
    REQUIRE(plain_end);
  }
}

TEST_CASE("ball construction is deterministic") {
  ThetaBall T1 = theta_ball(ext_E1(), 4);
  ThetaBall T2 = theta_ball(ext_E1(), 4);
  REQUIRE(T1.elts.size() == T2.elts.size());
  REQUIRE(T1.edges.size() == T2.edges.size());
  for (int v = 0; v < (int)T1.elts.size(); ++v)
    REQUIRE(T1.vertex_name(v) == T2.vertex_name(v));
  for (int e = 0; e < (int)T1.edges.size(); ++e)
    REQUIRE(T1.edge_key(e) == T2.edge_key(e));
  // distances are nondecreasing along the vertex order (BFS)
  for (int v = 1; v < (int)T1.elts.size(); ++v)
    REQUIRE(T1.dist[v] >= T1.dist[v - 1]);
}

TEST_CASE("left action preserves edges and labels") {
  ThetaBall T = theta_ball(ext_E1(), 4);
  std::vector<ExtElement> shortg;
  for (int v = 0; v < (int)T.elts.size(); ++v)
    if (T.tags[v] == theta_tag_plain && T.dist[v] <= 3)
      shortg.push_back(T.elts[v]);
  for (const ExtElement& g : shortg)
    for (int e = 0; e < (int)T.edges.size(); ++e) {
      auto ia = T.act(g, T.edges[e].a), ib = T.act(g, T.edges[e].b);
      if (!ia || !ib) continue;
      auto img = T.act_edge(g, e);
      REQUIRE(img.has_value());
      REQUIRE(T.edges[*img].label == T.edges[e].label);
    }
}

TEST_CASE("ladder adjacency in the classical mode") {
  ThetaBall T = theta_ball(ext_Dinf(), 3);
  int v0 = T.find(ExtElement{{}, 0}, 0);
  REQUIRE(v0 >= 0);
  REQUIRE(T.adj[v0].size() == 4);  // spoke, two rails, one rung
  std::multiset<std::string> nbrs;
  for (auto [w, e] : T.adj[v0]) nbrs.insert(T.vertex_name(w));
  REQUIRE(nbrs.count("(1, 1)") == 1);      // spoke to the plain vertex
  REQUIRE(nbrs.count("(b, 1)_0") == 1);    // rail right
  REQUIRE(nbrs.count("(b^-1, 1)_0") == 1);  // rail left
  REQUIRE(nbrs.count("(1, t)_0") == 1);    // rung to the other sheet
}

TEST_CASE("positive power solving is exact") {
  ExtensionData E = ext_Dinf();
  ExtElement b{parse_word(E.A, "b"), 0};
  ExtElement b3{parse_word(E.A, "b^3"), 0};
  ExtElement binv{parse_word(E.A, "b^-1"), 0};
  auto k = detail::solve_positive_power(E, b, b3);
  REQUIRE(k.has_value());
  REQUIRE(*k == 3);
  REQUIRE_FALSE(detail::solve_positive_power(E, b, binv).has_value());
  // (b, t) squares to the identity: finite order, no certificate
  ExtElement sigma{parse_word(E.A, "b"), 1};
  REQUIRE(ext_is_identity(E, ext_pow(E, sigma, 2)));
  REQUIRE_FALSE(detail::solve_positive_power(E, sigma, b3).has_value());
}

TEST_CASE("removing non-0-labelled edges is rejected") {
  ThetaBall T = theta_ball(ext_E1(), 3);
  int bad = -1;
  for (int e = 0; e < (int)T.edges.size(); ++e)
    if (T.edges[e].label != 0) bad = e;
  REQUIRE(bad >= 0);
  std::vector<char> removed(T.edges.size(), 0);
  removed[bad] = 1;
  REQUIRE_THROWS_AS(ball_components(T, removed), InvalidInput);
}

TEST_CASE("whole ball is one component certified infinite") {
  ThetaBall T = theta_ball(ext_E1(), 4);
  std::vector<char> removed(T.edges.size(), 0);
  std::vector<int> comp = ball_components(T, removed);
  for (int c : comp) REQUIRE(c == 0);
  REQUIRE(certify_component(T, removed, comp, 0).status ==
          CompStatus::Infinite);
}

TEST_CASE("cutting edges found for the swap action are minimal and 0-labelled") {
  CutSearch s = find_cutting_edges(ext_E1(), 7, 200000, 3, 7);
  REQUIRE_FALSE(s.cutting.empty());
  for (int e : s.cutting) REQUIRE(s.T.edges[e].label == 0);
  auto flags = flags_of(s.T, s.cutting);
  REQUIRE(is_cutting_set(s.T, flags));
  // inclusion-minimal: dropping any single edge breaks the certificate
  for (int e : s.cutting) {
    flags[e] = 0;
    REQUIRE_FALSE(is_cutting_set(s.T, flags));
    flags[e] = 1;
  }
}

TEST_CASE("horizon exhaustion is reported honestly") {
  REQUIRE_THROWS_AS(find_cutting_edges(ext_Dinf(), 4), HorizonExhausted);
}

TEST_CASE("narrow cuts of the swap action: two spokes through plain vertices") {
  CutSearch s = find_cutting_edges(ext_E1(), 10, 200000, 3, 10);
  std::vector<Cut> cuts = narrow_cuts(s.T, s.cutting, 4);
  REQUIRE_FALSE(cuts.empty());
  for (const Cut& c : cuts) {
    REQUIRE(c.boundary.size() == 2);
    // both boundary edges are spokes: one endpoint plain, one tagged
    for (int e : c.boundary) {
      int ta = s.T.tags[s.T.edges[e].a], tb = s.T.tags[s.T.edges[e].b];
      REQUIRE((ta == theta_tag_plain) != (tb == theta_tag_plain));
    }
    // the two spokes sit at elements with different H-parts and touch the
    // two different factor trees
    std::set<int> hparts, tags;
    for (int e : c.boundary)
      for (int v : {s.T.edges[e].a, s.T.edges[e].b}) {
        hparts.insert(s.T.elts[v].h);
        if (s.T.tags[v] >= 1) tags.insert(s.T.tags[v]);
      }
    REQUIRE(hparts.size() == 2);
    REQUIRE(tags == std::set<int>{1, 2});
    // complement is also a cut
    REQUIRE(is_cutting_set(s.T, flags_of(s.T, c.boundary)));
    REQUIRE(c.side_size() >= 1);
    REQUIRE(complement_cut(s.T, c).side_size() >= 1);
  }
  // both orientations of one narrow cut family are returned
  REQUIRE(cuts.size() == 2);
  REQUIRE(cuts[0].boundary == cuts[1].boundary);
  for (size_t v = 0; v < cuts[0].side.size(); ++v)
    REQUIRE_FALSE((cuts[0].side[v] && cuts[1].side[v]));
}

TEST_CASE("narrow cut of the ladder: two aligned rails, one per sheet") {
  CutSearch s = find_cutting_edges(ext_Dinf(), 6, 200000, 3, 6);
  std::vector<Cut> cuts = narrow_cuts(s.T, s.cutting);
  REQUIRE_FALSE(cuts.empty());
  for (const Cut& c : cuts) {
    REQUIRE(c.boundary.size() == 2);
    std::set<int> sheet_h;
    for (int e : c.boundary) {
      // rails join two 0-tagged vertices on the same sheet
      REQUIRE(s.T.tags[s.T.edges[e].a] == 0);
      REQUIRE(s.T.tags[s.T.edges[e].b] == 0);
      REQUIRE(s.T.elts[s.T.edges[e].a].h == s.T.elts[s.T.edges[e].b].h);
      sheet_h.insert(s.T.elts[s.T.edges[e].a].h);
    }
    REQUIRE(sheet_h.size() == 2);  // one rail per sheet
  }
}

TEST_CASE("trivial action: a single spoke separates a factor tree") {
  CutSearch s = find_cutting_edges(ext_trivial_ZZ(), 4, 200000, 3, 4);
  std::vector<Cut> cuts = narrow_cuts(s.T, s.cutting);
  REQUIRE(cuts.size() == 2);  // one family, both orientations
  for (const Cut& c : cuts) REQUIRE(c.boundary.size() == 1);
}

TEST_CASE("degenerate free mode: a single tree edge is a narrow cut") {
  CutSearch s = find_cutting_edges(ext_Fk_trivial(2), 5, 200000, 3, 5);
  std::vector<Cut> cuts = narrow_cuts(s.T, s.cutting);
  REQUIRE_FALSE(cuts.empty());
  for (const Cut& c : cuts) {
    REQUIRE(c.boundary.size() == 1);
    int e = c.boundary[0];
    REQUIRE(s.T.tags[s.T.edges[e].a] == 0);  // rail, not spoke
    REQUIRE(s.T.tags[s.T.edges[e].b] == 0);
  }
}

TEST_CASE("narrow sizes match the independent brute-force minimum") {
  struct Case {
    ExtensionData E;
    int radius;
    int zone;
    int expect;
  };
  std::vector<Case> cases = {{ext_E1(), 10, 4, 2},
                             {ext_Dinf(), 6, 3, 2},
                             {ext_trivial_ZZ(), 4, 1, 1},
                             {ext_Fk_trivial(2), 5, 2, 1}};
  for (auto& cs : cases) {
    CutSearch s =
        find_cutting_edges(cs.E, cs.radius, 200000, 3, cs.radius);
    REQUIRE(s.T.edges.size() <= 5000);
    std::vector<Cut> cuts = narrow_cuts(s.T, s.cutting, cs.zone);
    int narrow = (int)cuts.front().boundary.size();
    REQUIRE(narrow == cs.expect);
    int brute = brute_min_certified_cut(s.T, narrow, cs.zone);
    REQUIRE(brute == narrow);
  }
}

TEST_CASE("nesting is reflexive against self and complement, and symmetric") {
  CutSearch s = find_cutting_edges(ext_E1(), 10, 200000, 3, 10);
  std::vector<Cut> cuts = narrow_cuts(s.T, s.cutting, 4);
  const Cut& C = cuts[0];
  REQUIRE(nested_cuts(C, C));
  REQUIRE(nested_cuts(C, complement_cut(s.T, C)));
  std::vector<Cut> fam = translate_family(s.T, cuts);
  REQUIRE_FALSE(fam.empty());
  for (const Cut& D : fam) REQUIRE(nested_cuts(C, D) == nested_cuts(D, C));
}

TEST_CASE("translating by the identity returns the same cut") {
  CutSearch s = find_cutting_edges(ext_Fk_trivial(2), 5, 200000, 3, 5);
  std::vector<Cut> cuts = narrow_cuts(s.T, s.cutting);
  auto t = translate_cut(s.T, cuts[0], ExtElement{{}, s.T.E.H.id});
  REQUIRE(t.has_value());
  REQUIRE(t->key == cuts[0].key);
}

TEST_CASE("optimally nested cut minimises the recounted crossing number") {
  struct Case {
    ExtensionData E;
    int radius;
    int zone;
  };
  for (auto& [E, R, zone] : std::vector<Case>{
           {ext_E1(), 10, 4}, {ext_Dinf(), 6, 3}, {ext_Fk_trivial(2), 5, 2}}) {
    CutSearch s = find_cutting_edges(E, R, 200000, 3, R);
    std::vector<Cut> cuts = narrow_cuts(s.T, s.cutting, zone);
    Cut best = optimally_nested_cut(s.T, cuts);
    REQUIRE(best.m >= 0);
    // independent recount of m over the same mined family
    std::vector<Cut> fam = translate_family(s.T, cuts);
    auto recount = [&](const Cut& c) {
      long long m = 0;
      for (const Cut& d : fam) {
        auto corners = corner_sizes(c, d);
        bool nested =
            corners[0] == 0 || corners[1] == 0 || corners[2] == 0 ||
            corners[3] == 0;
        if (!nested) ++m;
      }
      return m;
    };
    REQUIRE(recount(best) == best.m);
    for (const Cut& c : cuts) REQUIRE(recount(c) >= best.m);
  }
}

TEST_CASE("half-line cuts on the ladder are totally nested") {
  CutSearch s = find_cutting_edges(ext_Dinf(), 6, 200000, 3, 6);
  std::vector<Cut> cuts = narrow_cuts(s.T, s.cutting);
  Cut best = optimally_nested_cut(s.T, cuts);
  REQUIRE(best.m == 0);
}

TEST_CASE("narrow cut subset budget is enforced") {
  CutSearch s = find_cutting_edges(ext_E1(), 7, 200000, 3, 7);
  REQUIRE_THROWS_AS(narrow_cuts(s.T, s.cutting, 4, 1), BudgetExceeded);
}

TEST_CASE("empty inputs are rejected") {
  ThetaBall T = theta_ball(ext_E1(), 2);
  REQUIRE_THROWS_AS(narrow_cuts(T, {}), InvalidInput);
  REQUIRE_THROWS_AS(optimally_nested_cut(T, {}), InvalidInput);
}

TEST_CASE("cut json dump carries boundary, side size and certificate") {
  CutSearch s = find_cutting_edges(ext_Fk_trivial(2), 5, 200000, 3, 5);
  std::vector<Cut> cuts = narrow_cuts(s.T, s.cutting);
  Cut best = optimally_nested_cut(s.T, cuts);
  auto j = cut_to_json(s.T, best);
  REQUIRE(j["boundary"].size() == best.boundary.size());
  REQUIRE(j["side_size"].get<long long>() == best.side_size());
  REQUIRE(j["horizon"].get<int>() == s.T.radius);
  REQUIRE_FALSE(j["certificate"].get<std::string>().empty());
}

#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "ggsplit/gog.hpp"
#include "oracles.hpp"

using namespace ggsplit;
using namespace ggtest;

namespace {

HTable c2_named(const std::string& g) {
  HTable t;
  t.mul = {{0, 1}, {1, 0}};
  t.names = {"1", g};
  t.finalise();
  return t;
}

FreeProductPresentation pres_Z_named(const std::string& g) {
  FreeProductPresentation P;
  P.free_rank = 1;
  P.free_names = {g};
  P.validate();
  return P;
}

// C2 -- 1 -- C2, the infinite dihedral graph of groups
GraphOfGroups dinf_gog() {
  GraphOfGroups G;
  G.vertices.push_back(GogVertex::finite(c2_named("s")));
  G.vertices.push_back(GogVertex::finite(c2_named("t")));
  G.add_trivial_edge(0, 1);
  return G;
}

// Z -- 1 -- C2
GraphOfGroups z_c2_gog() {
  GraphOfGroups G;
  G.vertices.push_back(GogVertex::free_product(pres_Z_named("a")));
  G.vertices.push_back(GogVertex::finite(c2_named("t")));
  G.add_trivial_edge(0, 1);
  return G;
}

// one Z vertex with a loop over the trivial group
GraphOfGroups z_loop_gog() {
  GraphOfGroups G;
  G.vertices.push_back(GogVertex::free_product(pres_Z_named("a")));
  G.add_trivial_edge(0, 0);
  return G;
}

std::vector<int> children_of(const FiniteTreePortion& T, int tid) {
  std::vector<int> out;
  for (size_t t = 0; t < T.vertices.size(); ++t)
    if (T.vertices[t].parent == tid) out.push_back((int)t);
  return out;
}

std::vector<int> degrees(const FiniteTreePortion& T) {
  std::vector<int> deg(T.vertices.size(), 0);
  for (const auto& e : T.edges) {
    ++deg[e.a];
    ++deg[e.b];
  }
  return deg;
}

// every tree edge must project onto its graph edge
void check_quotient(const GraphOfGroups& G, const FiniteTreePortion& T) {
  for (const auto& te : T.edges) {
    const auto& ge = G.edges[te.graph_edge];
    int a = T.vertices[te.a].graph_vertex;
    int b = T.vertices[te.b].graph_vertex;
    bool ok = (a == ge.u && b == ge.v) || (a == ge.v && b == ge.u);
    REQUIRE(ok);
  }
}

}  // namespace

TEST_CASE("single vertex Z: presentation and chi") {
  GraphOfGroups G;
  G.vertices.push_back(GogVertex::free_product(pres_Z_named("a")));
  G.validate();

  Presentation P = fundamental_presentation(G);
  REQUIRE(P.gens == std::vector<std::string>{"a"});
  REQUIRE(P.rels.empty());
  REQUIRE(P.str() == "< a | >");

  REQUIRE(euler_characteristic(G) == Rational(0));

  FiniteTreePortion T = bass_serre_ball(G, 0);
  REQUIRE(T.vertices.size() == 1);
  REQUIRE(T.edges.empty());
  REQUIRE(T.complete);
  // no edges at all: any radius still gives the single lift, completely
  T = bass_serre_ball(G, 3);
  REQUIRE(T.vertices.size() == 1);
  REQUIRE(T.complete);
}

TEST_CASE("two C2 vertices over a trivial edge present the infinite "
          "dihedral group") {
  GraphOfGroups G = dinf_gog();
  G.validate();

  Presentation P = fundamental_presentation(G);
  REQUIRE(P.gens == std::vector<std::string>{"s", "t"});
  REQUIRE(P.rels.size() == 2);
  using Rel = std::vector<std::pair<int, i64>>;
  REQUIRE(P.rels[0] == Rel{{0, 1}, {0, 1}});
  REQUIRE(P.rels[1] == Rel{{1, 1}, {1, 1}});
  REQUIRE(P.str() == "< s, t | s s, t t >");

  REQUIRE(euler_characteristic(G) ==
          Rational(1, 2) + Rational(1, 2) - Rational(1));
  REQUIRE(euler_characteristic(G) == Rational(0));
}

TEST_CASE("Z and C2 over a trivial edge: chi is -1/2") {
  REQUIRE(euler_characteristic(z_c2_gog()) == Rational(-1, 2));
}

TEST_CASE("loop over the trivial group presents F2") {
  GraphOfGroups G = z_loop_gog();
  G.validate();
  Presentation P = fundamental_presentation(G);
  REQUIRE(P.gens == std::vector<std::string>{"a", "t0"});
  REQUIRE(P.rels.empty());
  REQUIRE(euler_characteristic(G) == Rational(-1));
}

TEST_CASE("presentation chi on the standard presentations") {
  REQUIRE(chi_of_presentation(pres_ZZ()) == Rational(-1));
  REQUIRE(chi_of_presentation(pres_ZZb()) == Rational(-2));
  REQUIRE(chi_of_presentation(pres_Z2Z()) == Rational(-1));
  REQUIRE(chi_of_presentation(pres_Fk(1)) == Rational(0));
  REQUIRE(chi_of_presentation(pres_Fk(2)) == Rational(-1));
  FreeProductPresentation trivialP;
  trivialP.validate();
  REQUIRE(chi_of_presentation(trivialP) == Rational(1));
  FreeProductPresentation torus;
  torus.factors = {FactorSpec{FactorKind::FreeAbelian, 2}};
  torus.validate();
  REQUIRE(chi_of_presentation(torus) == Rational(0));
}

TEST_CASE("chi of a factor-extension vertex divides by the finite order") {
  auto single = [](ExtensionData E) {
    GraphOfGroups G;
    G.vertices.push_back(GogVertex::factor_extension(std::move(E)));
    return G;
  };
  REQUIRE(euler_characteristic(single(ext_Dinf())) == Rational(0));
  REQUIRE(euler_characteristic(single(ext_E1())) == Rational(-1, 2));
  REQUIRE(euler_characteristic(single(ext_Z2Z_C2())) == Rational(-1, 2));
  REQUIRE(euler_characteristic(single(ext_ZF2_C2())) == Rational(-1));
  REQUIRE(euler_characteristic(single(ext_ZZZ_C3())) == Rational(-2, 3));
  REQUIRE(euler_characteristic(single(ext_trivial_ZZb())) == Rational(-2));

  // the multiplicativity instance made concrete: Z-by-C2 vertex has the
  // same chi as the C2 * C2 graph presenting the same group
  REQUIRE(euler_characteristic(single(ext_Dinf())) ==
          euler_characteristic(dinf_gog()));
}

TEST_CASE("factor-extension vertex contributes lifts and action relators") {
  GraphOfGroups G;
  G.vertices.push_back(GogVertex::factor_extension(ext_Dinf()));
  Presentation P = fundamental_presentation(G);
  REQUIRE(P.gens == std::vector<std::string>{"b", "t"});
  using Rel = std::vector<std::pair<int, i64>>;
  REQUIRE(P.rels.size() == 2);
  // t b t^-1 = b^-1, read as the relator t b t^-1 b
  REQUIRE(P.rels[0] == Rel{{1, 1}, {0, 1}, {1, -1}, {0, 1}});
  // t^2 = 1 (the canonical lifts of this extension have trivial cocycle)
  REQUIRE(P.rels[1] == Rel{{1, 1}, {1, 1}});
}

TEST_CASE("dihedral ball of radius 2 is a path with five vertices") {
  GraphOfGroups G = dinf_gog();
  FiniteTreePortion T = bass_serre_ball(G, 2);
  REQUIRE(T.vertices.size() == 5);
  REQUIRE(T.edges.size() == 4);
  REQUIRE(T.complete);
  check_quotient(G, T);

  std::multiset<int> deg;
  for (int d : degrees(T)) deg.insert(d);
  REQUIRE(deg == std::multiset<int>{1, 1, 2, 2, 2});

  std::multiset<int> depths;
  for (const auto& v : T.vertices) depths.insert(v.depth);
  REQUIRE(depths == std::multiset<int>{0, 1, 1, 2, 2});

  // graph vertices alternate along the path
  for (const auto& v : T.vertices)
    REQUIRE(v.graph_vertex == v.depth % 2);
}

TEST_CASE("the base C2 swaps the two branches of the dihedral ball") {
  GraphOfGroups G = dinf_gog();
  FiniteTreePortion T = bass_serre_ball(G, 2);
  VertexElt s{1};   // the involution at the base vertex
  VertexElt id{0};

  auto kids = children_of(T, 0);
  REQUIRE(kids.size() == 2);
  auto a = kids[0], b = kids[1];
  REQUIRE(tree_act(G, T, s, 0) == 0);
  REQUIRE(tree_act(G, T, s, a) == b);
  REQUIRE(tree_act(G, T, s, b) == a);
  auto ka = children_of(T, a), kb = children_of(T, b);
  REQUIRE(ka.size() == 1);
  REQUIRE(kb.size() == 1);
  REQUIRE(tree_act(G, T, s, ka[0]) == kb[0]);
  REQUIRE(tree_act(G, T, s, kb[0]) == ka[0]);
  for (size_t t = 0; t < T.vertices.size(); ++t) {
    REQUIRE(tree_act(G, T, id, (int)t) == (int)t);
    // s is an involution on the whole ball
    auto once = tree_act(G, T, s, (int)t);
    REQUIRE(once.has_value());
    REQUIRE(tree_act(G, T, s, *once) == (int)t);
    // depth is preserved
    REQUIRE(T.vertices[*once].depth == T.vertices[t].depth);
  }
}

TEST_CASE("loop over trivial group truncates to the coset budget") {
  GraphOfGroups G = z_loop_gog();

  FiniteTreePortion T = bass_serre_ball(G, 1, 3);
  REQUIRE(T.vertices.size() == 4);  // star with 3 edges
  REQUIRE(T.edges.size() == 3);
  REQUIRE_FALSE(T.complete);
  for (const auto& e : T.edges) REQUIRE(e.a == 0);
  check_quotient(G, T);

  REQUIRE(bass_serre_ball(G, 0).vertices.size() == 1);
  REQUIRE(bass_serre_ball(G, 0).complete);

  FiniteTreePortion empty_budget = bass_serre_ball(G, 1, 0);
  REQUIRE(empty_budget.vertices.size() == 1);
  REQUIRE_FALSE(empty_budget.complete);

  REQUIRE_THROWS_AS(bass_serre_ball(G, 1, 3, false),
                    EnumerationBudgetExceeded);
  REQUIRE_THROWS_AS(bass_serre_ball(G, -1), EnumerationBudgetExceeded);
}

TEST_CASE("partial action on a truncated free ball") {
  GraphOfGroups G = z_loop_gog();
  const auto& P = G.vertices[0].pres;
  FiniteTreePortion T = bass_serre_ball(G, 1, 4);
  // children along the two loop directions, enumerated 1, a, a^-1, ...
  REQUIRE(T.vertices.size() == 5);

  VertexElt a{parse_word(P, "a")};
  VertexElt ainv{parse_word(P, "a^-1")};
  // children along the forward direction, reps enumerated 1, a, a^-1, a^2
  int c_one = -1, c_a = -1, c_ainv = -1, c_a2 = -1;
  for (size_t t = 1; t < T.vertices.size(); ++t) {
    if (T.vertices[t].parent_reversed) continue;
    const auto& r = std::get<GroupElement>(T.vertices[t].rep);
    std::string k = to_string(P, r);
    if (k == "1") c_one = (int)t;
    if (k == "a") c_a = (int)t;
    if (k == "a^-1") c_ainv = (int)t;
    if (k == "a^2") c_a2 = (int)t;
  }
  REQUIRE(c_one >= 0);
  REQUIRE(c_a >= 0);
  REQUIRE(c_ainv >= 0);
  REQUIRE(c_a2 >= 0);
  REQUIRE(tree_act(G, T, a, c_one) == c_a);
  REQUIRE(tree_act(G, T, a, c_ainv) == c_one);
  REQUIRE(tree_act(G, T, a, c_a) == c_a2);
  // a * a^2 = a^3 and a^-1 * a^-1 = a^-2 leave the enumerated portion
  REQUIRE_FALSE(tree_act(G, T, a, c_a2).has_value());
  REQUIRE_FALSE(tree_act(G, T, ainv, c_ainv).has_value());
}

TEST_CASE("C3 amalgam C2 ball is biregular") {
  GraphOfGroups G;
  G.vertices.push_back(GogVertex::finite(HTable::cyclic(3)));
  G.vertices.push_back(GogVertex::finite(c2_named("t")));
  G.add_trivial_edge(0, 1);
  FiniteTreePortion T = bass_serre_ball(G, 2);
  REQUIRE(T.vertices.size() == 7);  // 1 + 3 + 3
  REQUIRE(T.complete);
  check_quotient(G, T);

  VertexElt g{1};  // a generator of C3 at the base
  auto kids = children_of(T, 0);
  REQUIRE(kids.size() == 3);
  // g permutes the three branches in a 3-cycle
  std::set<int> orbit;
  int cur = kids[0];
  for (int k = 0; k < 3; ++k) {
    orbit.insert(cur);
    auto nxt = tree_act(G, T, g, cur);
    REQUIRE(nxt.has_value());
    cur = *nxt;
  }
  REQUIRE(cur == kids[0]);
  REQUIRE(orbit == std::set<int>(kids.begin(), kids.end()));
}

TEST_CASE("validation rejects malformed graphs") {
  SECTION("empty graph") {
    GraphOfGroups G;
    REQUIRE_THROWS_AS(G.validate(), InvalidInput);
  }
  SECTION("disconnected") {
    GraphOfGroups G;
    G.vertices.push_back(GogVertex::trivial());
    G.vertices.push_back(GogVertex::trivial());
    REQUIRE_THROWS_AS(G.validate(), InvalidInput);
  }
  SECTION("injection is not a homomorphism") {
    GraphOfGroups G;
    G.vertices.push_back(GogVertex::finite(c2_named("s")));
    G.vertices.push_back(GogVertex::finite(HTable::cyclic(4)));
    GogEdge e;
    e.u = 0;
    e.v = 1;
    e.group = c2_named("x");
    e.img_u = {VertexElt{0}, VertexElt{1}};
    e.img_v = {VertexElt{0}, VertexElt{1}};  // order-4 image of an involution
    G.edges.push_back(e);
    REQUIRE_THROWS_AS(G.validate(), InvalidInput);
  }
  SECTION("injection is not injective") {
    GraphOfGroups G;
    G.vertices.push_back(GogVertex::finite(c2_named("s")));
    G.vertices.push_back(GogVertex::finite(c2_named("t")));
    GogEdge e;
    e.u = 0;
    e.v = 1;
    e.group = c2_named("x");
    e.img_u = {VertexElt{0}, VertexElt{1}};
    e.img_v = {VertexElt{0}, VertexElt{0}};
    G.edges.push_back(e);
    REQUIRE_THROWS_AS(G.validate(), InvalidInput);
  }
  SECTION("nontrivial finite group into a torsion-free vertex") {
    GraphOfGroups G;
    G.vertices.push_back(GogVertex::finite(c2_named("s")));
    G.vertices.push_back(GogVertex::free_product(pres_Z_named("a")));
    GogEdge e;
    e.u = 0;
    e.v = 1;
    e.group = c2_named("x");
    e.img_u = {VertexElt{0}, VertexElt{1}};
    e.img_v = {VertexElt{GroupElement{}}, VertexElt{GroupElement{}}};
    G.edges.push_back(e);
    REQUIRE_THROWS_AS(G.validate(), InvalidInput);
  }
  SECTION("valid amalgam over C2 inside two C4 vertices") {
    GraphOfGroups G;
    G.vertices.push_back(GogVertex::finite(HTable::cyclic(4)));
    G.vertices.push_back(GogVertex::finite(HTable::cyclic(4)));
    GogEdge e;
    e.u = 0;
    e.v = 1;
    e.group = c2_named("x");
    e.img_u = {VertexElt{0}, VertexElt{2}};  // 2 is the involution in C4
    e.img_v = {VertexElt{0}, VertexElt{2}};
    G.edges.push_back(e);
    REQUIRE_NOTHROW(G.validate());
    REQUIRE(euler_characteristic(G) ==
            Rational(1, 4) + Rational(1, 4) - Rational(1, 2));
    REQUIRE(euler_characteristic(G) == Rational(0));
    // each C4 vertex has [C4 : C2] = 2 cosets, one of which is the parent
    FiniteTreePortion T = bass_serre_ball(G, 2);
    REQUIRE(T.vertices.size() == 5);  // a path again
    REQUIRE(T.complete);
  }
}

TEST_CASE("presentation of an amalgam over C2 identifies the images") {
  GraphOfGroups G;
  G.vertices.push_back(GogVertex::finite(HTable::cyclic(4)));
  G.vertices.push_back(GogVertex::finite(c2_named("t")));
  GogEdge e;
  e.u = 0;
  e.v = 1;
  e.group = c2_named("x");
  e.img_u = {VertexElt{0}, VertexElt{2}};
  e.img_v = {VertexElt{0}, VertexElt{1}};
  G.edges.push_back(e);
  Presentation P = fundamental_presentation(G);
  // generators: h1, h2, h3 of C4 and t; relator block of C4, t^2, and the
  // edge identification h2 = t
  REQUIRE(P.gens.size() == 4);
  bool found_glue = false;
  using Rel = std::vector<std::pair<int, i64>>;
  for (const auto& r : P.rels)
    if (r == Rel{{1, 1}, {3, -1}}) found_glue = true;
  REQUIRE(found_glue);
}

TEST_CASE("stable letters conjugate across non-tree edges") {
  // C2 with a loop whose two injections agree: the HNN extension C2 *_{C2}
  GraphOfGroups G;
  G.vertices.push_back(GogVertex::finite(c2_named("s")));
  GogEdge e;
  e.u = 0;
  e.v = 0;
  e.group = c2_named("x");
  e.img_u = {VertexElt{0}, VertexElt{1}};
  e.img_v = {VertexElt{0}, VertexElt{1}};
  G.edges.push_back(e);
  G.validate();
  Presentation P = fundamental_presentation(G);
  REQUIRE(P.gens == std::vector<std::string>{"s", "t0"});
  using Rel = std::vector<std::pair<int, i64>>;
  REQUIRE(P.rels.size() == 2);
  REQUIRE(P.rels[0] == Rel{{0, 1}, {0, 1}});
  // t0 s t0^-1 s^-1 from the loop identification
  REQUIRE(P.rels[1] == Rel{{1, 1}, {0, 1}, {1, -1}, {0, -1}});
  REQUIRE(euler_characteristic(G) == Rational(1, 2) - Rational(1, 2));
}

TEST_CASE("json and dot serialisation are deterministic") {
  GraphOfGroups G = dinf_gog();
  G.vertices[0].distinguished = true;
  G.vertices[0].name = "left";
  auto j1 = gog_to_json(G);
  auto j2 = gog_to_json(G);
  REQUIRE(j1.dump() == j2.dump());
  REQUIRE(j1["vertices"].size() == 2);
  REQUIRE(j1["vertices"][0]["kind"] == "finite");
  REQUIRE(j1["vertices"][0]["order"] == 2);
  REQUIRE(j1["vertices"][0]["distinguished"] == true);
  REQUIRE(j1["edges"][0]["group_order"] == 1);
  REQUIRE(j1["distinguished"] == nlohmann::ordered_json::array({0}));

  std::string dot = gog_to_dot(G);
  REQUIRE(dot.find("v0 -- v1") != std::string::npos);
  REQUIRE(dot.find("peripheries=2") != std::string::npos);
  REQUIRE(dot.find("finite(2)") != std::string::npos);

  GraphOfGroups Gz;
  Gz.vertices.push_back(GogVertex::free_product(pres_ZZb()));
  REQUIRE(Gz.vertices[0].describe() == "Z * Z * Z");
  GraphOfGroups Ge;
  Ge.vertices.push_back(GogVertex::factor_extension(ext_E1()));
  REQUIRE(Ge.vertices[0].describe() == "Z * Z-by-2");
}

TEST_CASE("enumeration of vertex group elements is deterministic and "
          "complete for finite groups") {
  GogVertex v = GogVertex::finite(HTable::cyclic(5));
  bool comp = false;
  auto els = VertexGroupOps(v).enumerate(100, &comp);
  REQUIRE(comp);
  REQUIRE(els.size() == 5);
  REQUIRE(std::get<int>(els[0]) == 0);  // identity first

  GogVertex w = GogVertex::free_product(pres_ZZ());
  auto ew = VertexGroupOps(w).enumerate(10, &comp);
  REQUIRE_FALSE(comp);
  REQUIRE(ew.size() == 10);
  auto ew2 = VertexGroupOps(w).enumerate(10, &comp);
  for (size_t i = 0; i < ew.size(); ++i)
    REQUIRE(VertexGroupOps(w).eq(ew[i], ew2[i]));

  GogVertex x = GogVertex::factor_extension(ext_Dinf());
  auto ex = VertexGroupOps(x).enumerate(6, &comp);
  REQUIRE(ex.size() == 6);
  std::set<std::string> keys;
  for (const auto& el : ex) keys.insert(VertexGroupOps(x).key(el));
  REQUIRE(keys.size() == 6);
}

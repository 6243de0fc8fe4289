#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "ggsplit/splitting.hpp"
#include "oracles.hpp"

using namespace ggsplit;
using namespace ggtest;

namespace {

ExtensionData ext_trivial_ZZ() {
  auto P = pres_ZZ();
  return build_extension(P, HTable::cyclic(1), {});
}

ExtElement elt(const ExtensionData& E, const std::string& w, int h = -1) {
  return ExtElement{parse_word(E.A, w), h < 0 ? E.H.id : h};
}

// Number of vertices of a gog whose vertex group is finite / infinite.
int count_finite(const GraphOfGroups& G) {
  int n = 0;
  for (const auto& v : G.vertices)
    if (v.kind == GogVertex::Kind::Finite) ++n;
  return n;
}

bool is_square_relator(const std::vector<std::pair<int, i64>>& r) {
  // x^2 for a single generator x, either as one token or two.
  if (r.empty()) return false;
  i64 total = 0;
  for (const auto& [g, e] : r) {
    if (g != r[0].first) return false;
    total += e;
  }
  return total == 2 || total == -2;
}

}  // namespace

// ---------------------------------------------------------------------------
// classify_subgroup
// ---------------------------------------------------------------------------

TEST_CASE("classify_subgroup: finite cyclic subgroup") {
  auto E = ext_E1();
  auto V = classify_subgroup(E, {elt(E, "", 1)});
  REQUIRE(V.finite);
  REQUIRE(V.order() == 2);
  REQUIRE(V.Hv.order() == 2);
  REQUIRE(V.vertex.kind == GogVertex::Kind::Finite);
  CHECK(V.table.mul[1][1] == V.table.id);
  CHECK(subgroup_contains(E, V, elt(E, "", 1)));
  CHECK_FALSE(subgroup_contains(E, V, elt(E, "a1")));
  CHECK_FALSE(subgroup_contains(E, V, elt(E, "a1", 1)));
}

TEST_CASE("classify_subgroup: infinite cyclic factor subgroup") {
  auto E = ext_E1();
  auto V = classify_subgroup(E, {elt(E, "a1")});
  REQUIRE_FALSE(V.finite);
  CHECK(V.Hv.order() == 1);
  CHECK(V.complexity == 1);
  REQUIRE(V.vertex.kind == GogVertex::Kind::FreeProductGroup);
  CHECK(V.subP.num_factors() == 1);
  CHECK(V.subP.free_rank == 0);
  CHECK(subgroup_contains(E, V, elt(E, "a1^3")));
  CHECK(subgroup_contains(E, V, elt(E, "a1^-2")));
  CHECK_FALSE(subgroup_contains(E, V, elt(E, "a2")));
  CHECK_FALSE(subgroup_contains(E, V, elt(E, "", 1)));
  CHECK_FALSE(subgroup_contains(E, V, elt(E, "a1", 1)));
}

TEST_CASE("classify_subgroup: whole extension recovered") {
  auto E = ext_E1();
  auto V = classify_subgroup(E, {elt(E, "a1"), elt(E, "", 1)});
  REQUIRE_FALSE(V.finite);
  CHECK(V.Hv.order() == 2);
  CHECK(V.complexity == 2);
  REQUIRE(V.vertex.kind == GogVertex::Kind::FactorExtension);
  // V `cap` A must contain both factor generators.
  CHECK(subgroup_contains(E, V, elt(E, "a1")));
  CHECK(subgroup_contains(E, V, elt(E, "a2")));
  CHECK(subgroup_contains(E, V, elt(E, "a1 a2^-1 a1", 1)));
  // The restricted action in the sub-extension still swaps the two parts.
  const auto& S = V.sub;
  int t = 1;  // the nontrivial element of Hv == C2
  auto img = S.phi[t].image(1, 1);
  REQUIRE(img.size() == 1);
  CHECK(img[0].part == 2);
  auto back = apply(S.A, S.phi[t], img);
  REQUIRE(back.size() == 1);
  CHECK(back[0].part == 1);
}

TEST_CASE("classify_subgroup: round trips through the sub-extension") {
  auto E = ext_E1();
  auto V = classify_subgroup(E, {elt(E, "a1"), elt(E, "", 1)});
  for (const auto& g : {elt(E, "a1 a2^-1"), elt(E, "a2^2", 1), elt(E, "", 1)}) {
    REQUIRE(subgroup_contains(E, V, g));
    auto s = parent_to_sub(E, V, g);
    auto back = sub_to_parent(E, V, s);
    CHECK(back == g);
  }
}

TEST_CASE("classify_subgroup: dihedral reflection is finite") {
  auto E = ext_Dinf();
  auto V = classify_subgroup(E, {elt(E, "b^2", 1)});
  REQUIRE(V.finite);
  CHECK(V.order() == 2);
  // ... while a reflection times a translation is not.
  auto W = classify_subgroup(E, {elt(E, "b^2", 1), elt(E, "b", 1)});
  REQUIRE_FALSE(W.finite);
  CHECK(W.Hv.order() == 2);
  CHECK(subgroup_contains(E, W, elt(E, "b")));
}

TEST_CASE("classify_subgroup: free-part subgroup in degenerate mode") {
  auto E = ext_Fk_trivial(2);
  auto V = classify_subgroup(E, {elt(E, "b1 b2 b1^-1")});
  REQUIRE_FALSE(V.finite);
  CHECK(V.complexity == 1);
  CHECK(V.vertex.kind == GogVertex::Kind::FreeProductGroup);
  CHECK(subgroup_contains(E, V, elt(E, "b1 b2^-3 b1^-1")));
  CHECK_FALSE(subgroup_contains(E, V, elt(E, "b2")));
  CHECK_FALSE(subgroup_contains(E, V, elt(E, "b1")));
}

TEST_CASE("classify_subgroup: mixed subgroup with conjugated factor") {
  auto E = ext_E1();
  auto V = classify_subgroup(E, {elt(E, "a2 a1 a2^-1")});
  REQUIRE_FALSE(V.finite);
  CHECK(V.complexity == 1);
  CHECK(subgroup_contains(E, V, elt(E, "a2 a1^-4 a2^-1")));
  CHECK_FALSE(subgroup_contains(E, V, elt(E, "a1")));
}

// ---------------------------------------------------------------------------
// cut stabiliser
// ---------------------------------------------------------------------------

TEST_CASE("cut_stabiliser: narrow cuts of the swap extension are rigid") {
  auto E = ext_E1();
  auto s = find_cutting_edges(E, 10, 200000, 6, 10);
  auto cuts = narrow_cuts(s.T, s.cutting, 4);
  REQUIRE_FALSE(cuts.empty());
  auto C = optimally_nested_cut(s.T, cuts);
  auto st = cut_stabiliser(s.T, C);
  CHECK(st.size() == 1);
  REQUIRE(st.size() >= 1);
  CHECK(is_identity(st[0].a));
  CHECK(st[0].h == E.H.id);
}

// ---------------------------------------------------------------------------
// relative_stallings_split: frozen fixtures
// ---------------------------------------------------------------------------

TEST_CASE("splitting: swap extension gives an amalgam over the trivial group") {
  auto E = ext_E1();
  auto s = relative_stallings_split(E);

  CHECK(s.shape == Splitting::Shape::Amalgam);
  CHECK(s.zone == 4);
  CHECK(s.radius == 10);
  REQUIRE(s.gog.vertices.size() == 2);
  REQUIRE(s.gog.edges.size() == 1);
  CHECK(s.gog.edges[0].group.order() == 1);
  REQUIRE(s.edge_data.finite);
  CHECK(s.edge_data.order() == 1);

  // One vertex is infinite cyclic, the other is C2.
  int fin = count_finite(s.gog);
  REQUIRE(fin == 1);
  int kfin = s.gog.vertices[0].kind == GogVertex::Kind::Finite ? 0 : 1;
  int kinf = 1 - kfin;
  CHECK(s.gog.vertices[kfin].table.order() == 2);
  REQUIRE(s.gog.vertices[kinf].kind == GogVertex::Kind::FreeProductGroup);
  CHECK(s.gog.vertices[kinf].pres.grushko_parts() == 1);
  CHECK(s.gog.vertices[kinf].pres.free_rank == 0);

  CHECK(euler_characteristic(s.gog) == Rational(-1, 2));

  // Fundamental group is < a, t | t^2 > up to renaming.
  auto Pr = fundamental_presentation(s.gog);
  REQUIRE(Pr.gens.size() == 2);
  REQUIRE(Pr.rels.size() == 1);
  CHECK(is_square_relator(Pr.rels[0]));

  // The infinite vertex subgroup meets A in a conjugate of a factor.
  const auto& VD = s.vertex_data[kinf == 0 ? 0 : 1];
  CHECK(VD.complexity == 1);
  CHECK(VD.Hv.order() == 1);
}

TEST_CASE("splitting: infinite dihedral gives C2 * C2") {
  auto E = ext_Dinf();
  auto s = relative_stallings_split(E);

  CHECK(s.shape == Splitting::Shape::SubdividedAmalgam);
  CHECK(s.zone == 3);
  REQUIRE(s.gog.vertices.size() == 2);
  REQUIRE(s.gog.edges.size() == 1);
  CHECK(s.gog.edges[0].group.order() == 1);
  CHECK(count_finite(s.gog) == 2);
  CHECK(s.gog.vertices[0].table.order() == 2);
  CHECK(s.gog.vertices[1].table.order() == 2);
  CHECK(euler_characteristic(s.gog) == Rational(0));

  auto Pr = fundamental_presentation(s.gog);
  REQUIRE(Pr.gens.size() == 2);
  REQUIRE(Pr.rels.size() == 2);
  CHECK(is_square_relator(Pr.rels[0]));
  CHECK(is_square_relator(Pr.rels[1]));

  // The subdividing involution: special element sigma with sigma^2 = 1,
  // nontrivial H-part, and (reflection) * sigma = a primitive translation.
  REQUIRE(s.special.has_value());
  ExtElement sg = *s.special;
  CHECK(sg.h != E.H.id);
  auto sq = ext_mul(E, sg, sg);
  CHECK(is_identity(sq.a));
  CHECK(sq.h == E.H.id);

  REQUIRE(s.vertex_data[0].finite);
  REQUIRE(s.vertex_data[0].order() == 2);
  ExtElement refl = s.vertex_data[0].elements[0];
  if (is_identity(refl.a) && refl.h == E.H.id) refl = s.vertex_data[0].elements[1];
  auto prod = ext_mul(E, refl, sg);
  CHECK(prod.h == E.H.id);
  CHECK(word_length(prod.a) == 1);
}

TEST_CASE("splitting: trivial action on Z * Z recovers the free splitting") {
  auto E = ext_trivial_ZZ();
  auto s = relative_stallings_split(E);

  CHECK(s.shape == Splitting::Shape::Amalgam);
  CHECK(s.zone == 1);
  REQUIRE(s.gog.vertices.size() == 2);
  REQUIRE(s.gog.edges.size() == 1);
  CHECK(s.gog.edges[0].group.order() == 1);
  CHECK(count_finite(s.gog) == 0);
  for (int k = 0; k < 2; ++k) {
    REQUIRE(s.gog.vertices[k].kind == GogVertex::Kind::FreeProductGroup);
    CHECK(s.gog.vertices[k].pres.grushko_parts() == 1);
    CHECK(s.vertex_data[k].complexity == 1);
  }
  CHECK(euler_characteristic(s.gog) == Rational(-1));

  auto Pr = fundamental_presentation(s.gog);
  CHECK(Pr.gens.size() == 2);
  CHECK(Pr.rels.empty());
}

TEST_CASE("splitting: free group of rank two gives an HNN extension") {
  auto E = ext_Fk_trivial(2);
  auto s = relative_stallings_split(E);

  CHECK(s.shape == Splitting::Shape::HnnLoop);
  CHECK(s.zone == 2);
  REQUIRE(s.gog.vertices.size() == 1);
  REQUIRE(s.gog.edges.size() == 1);
  CHECK(s.gog.edges[0].u == 0);
  CHECK(s.gog.edges[0].v == 0);
  CHECK(s.gog.edges[0].group.order() == 1);
  REQUIRE(s.gog.vertices[0].kind == GogVertex::Kind::FreeProductGroup);
  CHECK(s.gog.vertices[0].pres.grushko_parts() == 1);
  REQUIRE(s.special.has_value());
  CHECK(s.special->h == E.H.id);
  CHECK_FALSE(is_identity(s.special->a));
  CHECK(euler_characteristic(s.gog) == Rational(-1));

  auto Pr = fundamental_presentation(s.gog);
  CHECK(Pr.gens.size() == 2);
  CHECK(Pr.rels.empty());
}

// ---------------------------------------------------------------------------
// determinism, errors, chi sweep
// ---------------------------------------------------------------------------

TEST_CASE("splitting: deterministic across repeated runs") {
  auto E = ext_E1();
  auto a = relative_stallings_split(E);
  auto b = relative_stallings_split(E);
  CHECK(a.cut.key == b.cut.key);
  CHECK(a.shape == b.shape);
  CHECK(a.zone == b.zone);
  CHECK(fundamental_presentation(a.gog).str() ==
        fundamental_presentation(b.gog).str());
}

TEST_CASE("splitting: trivial ambient group is rejected") {
  FreeProductPresentation P;
  auto E = build_extension(P, HTable::cyclic(1), {}, true);
  CHECK_THROWS_AS(relative_stallings_split(E), InvalidInput);
}

TEST_CASE("splitting: nontrivial finite edge groups over free-abelian factors") {
  // Both fixtures have a Z^2 factor; the involution fixes an index-2
  // subgroup of the extension, so the splitting edge carries C2.
  for (ExtensionData E : {ext_Z2Z_C2(), ext_swapcoord_Z2Z()}) {
    auto s = relative_stallings_split(E);
    CHECK(s.shape == Splitting::Shape::Amalgam);
    REQUIRE(s.gog.edges.size() == 1);
    CHECK(s.gog.edges[0].group.order() == 2);
    Rational want = chi_of_presentation(E.A) / Rational(E.H.order());
    CHECK(euler_characteristic(s.gog) == want);
  }
}

TEST_CASE("splitting: euler characteristic is chi(A) / |H| across fixtures") {
  struct Row {
    const char* name;
    ExtensionData E;
  };
  std::vector<Row> rows;
  rows.push_back({"swap_ZZ", ext_E1()});
  rows.push_back({"swap_ZZ_twisted", ext_E1_twisted()});
  rows.push_back({"dihedral", ext_Dinf()});
  rows.push_back({"trivial_ZZ", ext_trivial_ZZ()});
  rows.push_back({"trivial_ZZb", ext_trivial_ZZb()});
  rows.push_back({"free_rank2", ext_Fk_trivial(2)});
  rows.push_back({"shift_ZZ", ext_shift_ZZ()});
  rows.push_back({"Z2Z_C2", ext_Z2Z_C2()});
  rows.push_back({"ZZZ_C3", ext_ZZZ_C3()});
  rows.push_back({"swapcoord_Z2Z", ext_swapcoord_Z2Z()});
  rows.push_back({"ZF2_C2", ext_ZF2_C2()});
  for (auto& r : rows) {
    INFO(r.name);
    auto s = relative_stallings_split(r.E);
    Rational want =
        chi_of_presentation(r.E.A) / Rational(r.E.H.order());
    CHECK(euler_characteristic(s.gog) == want);
    CHECK(s.gog.edges.size() >= 1);
    for (const auto& e : s.gog.edges) CHECK(e.group.order() <= r.E.H.order());
  }
}

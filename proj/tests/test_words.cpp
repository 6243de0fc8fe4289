#include <catch2/catch_amalgamated.hpp>

#include "ggsplit/rational.hpp"
#include "ggsplit/words.hpp"
#include "oracles.hpp"

using namespace ggsplit;
using namespace ggtest;

TEST_CASE("rational arithmetic is exact") {
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  CHECK(Rational(1, 2) - Rational(1, 2) == Rational(0));
  CHECK(Rational(-2, 4) == Rational(1, -2));
  CHECK(Rational(1, 2) * Rational(2, 3) == Rational(1, 3));
  CHECK(Rational(1, 2) / Rational(1, 4) == Rational(2));
  CHECK(Rational(-1, 2).str() == "-1/2");
  CHECK(Rational(3, 1).str() == "3");
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK_THROWS(Rational(1, 0));
}

TEST_CASE("parsing and normal form: free factors") {
  auto P = pres_ZZb();
  CHECK(parse_word(P, "a1 a1^-1").empty());
  CHECK(parse_word(P, "1") == GroupElement{});
  CHECK(parse_word(P, "") == GroupElement{});

  auto g = parse_word(P, "a1 a2 a2^-1 a1");
  REQUIRE(g.size() == 1);
  CHECK(g[0].part == 1);
  CHECK(g[0].data == std::vector<i64>{1, 1});
  CHECK(to_string(P, g) == "a1^2");

  auto h = parse_word(P, "a1 b a2 b^-1");
  CHECK(h.size() == 4);
  CHECK(to_string(P, h) == "a1 b a2 b^-1");

  CHECK(to_string(P, parse_word(P, "b^3 b^-5")) == "b^-2");
  CHECK_THROWS_AS(parse_word(P, "a1 q"), UnknownGenerator);
  CHECK_THROWS_AS(parse_word(P, "a1^x"), InvalidInput);
}

TEST_CASE("parsing and normal form: abelian factor") {
  auto P = pres_Z2Z();
  auto g = parse_word(P, "a1_1 a1_2 a1_1^-1");
  REQUIRE(g.size() == 1);
  CHECK(g[0].part == 1);
  CHECK(g[0].data == std::vector<i64>{0, 1});
  CHECK(to_string(P, g) == "a1_2");

  auto h = parse_word(P, "a1_1 a2 a1_1");
  CHECK(h.size() == 3);
  CHECK(parse_word(P, "a1_1 a2 a2^-1 a1_1^-1").empty());
}

TEST_CASE("seam reduction across multiplication") {
  auto P = pres_ZZb();
  auto x = parse_word(P, "a1 b");
  auto y = parse_word(P, "b^-1 a1");
  CHECK(to_string(P, mul(P, x, y)) == "a1^2");
  CHECK(mul(P, x, inv(P, x)).empty());
  CHECK(mul(P, inv(P, x), x).empty());
}

TEST_CASE("group laws on random elements") {
  auto rng = std::mt19937_64(20260815);
  for (auto P : {pres_ZZb(), pres_Z2Z(), pres_Fk(2)}) {
    for (int trial = 0; trial < 300; ++trial) {
      auto x = random_element(P, rng, 6);
      auto y = random_element(P, rng, 6);
      auto z = random_element(P, rng, 6);
      REQUIRE(normal_form_ok(P, x));
      CHECK(mul(P, mul(P, x, y), z) == mul(P, x, mul(P, y, z)));
      CHECK(is_identity(mul(P, x, inv(P, x))));
      CHECK(inv(P, mul(P, x, y)) == mul(P, inv(P, y), inv(P, x)));
      CHECK(parse_word(P, to_string(P, x)) == x);
    }
  }
}

TEST_CASE("cyclic reduction") {
  auto P = pres_ZZb();
  auto g = parse_word(P, "b a1 b^-1");
  auto [core, t] = cyc_reduce(P, g);
  CHECK(to_string(P, core) == "a1");
  CHECK(mul(P, mul(P, t, core), inv(P, t)) == g);

  auto rng = std::mt19937_64(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto x = random_element(P, rng, 8);
    if (is_identity(x)) continue;
    auto [c, u] = cyc_reduce(P, x);
    CHECK(mul(P, mul(P, u, c), inv(P, u)) == x);
    if (c.size() >= 2) CHECK(c.front().part != c.back().part);
  }
}

TEST_CASE("primitive roots") {
  auto P = pres_ZZb();
  auto check_root = [&P](const std::string& w, const std::string& root,
                         i64 m) {
    auto [r, k] = primitive_root(P, parse_word(P, w));
    CHECK(to_string(P, r) == root);
    CHECK(k == m);
    CHECK(ggsplit::pow(P, r, k) == parse_word(P, w));
  };
  check_root("a1^6", "a1", 6);
  check_root("b a1^2 b^-1", "b a1 b^-1", 2);
  check_root("a1 a2 a1 a2 a1 a2", "a1 a2", 3);
  check_root("a1 a2", "a1 a2", 1);
  check_root("b^-4", "b^-1", 4);

  auto Q = pres_Z2Z();
  auto [r, m] = primitive_root(Q, parse_word(Q, "a1_1^2 a1_2^4"));
  CHECK(to_string(Q, r) == "a1_1 a1_2^2");
  CHECK(m == 2);
}

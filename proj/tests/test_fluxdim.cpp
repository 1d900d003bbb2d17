#include <cstdlib>
#include <random>

#include "doctest.h"
#include "pmap/fluxdim.hpp"
#include "pmap/oracle.hpp"
#include "support/flux_oracle.hpp"
#include "support/random_elements.hpp"

using namespace pmap;

namespace {
const GraphSpec kLadder{GraphSpec::Ladder, 0};
MappingClass L(const std::string& text) { return MappingClass::parse(kLadder, text); }
}  // namespace

TEST_CASE("end partitions") {
  auto s0 = EndPartition::ladder(0);
  CHECK(s0.depth(0) == 0);
  CHECK(s0.depth(1) == 1);
  CHECK(s0.depth(-3) == -3);
  CHECK(s0.flipped().depth(1) == 0);
  CHECK(s0.class_on_left(1));
  CHECK(!s0.class_on_left(0));
  CHECK(s0.edge_id() == "S0");

  GraphSpec tri = GraphSpec::parse("tripod");
  auto p = EndPartition::parse(tri, "L1.0");
  Indexing ix = tri.indexing();
  CHECK(p.depth(ix.index_of(1, 1)) == 1);
  CHECK(p.depth(ix.index_of(0, 1)) == -1);
  CHECK(p.depth(ix.index_of(2, 3)) == -3);
  CHECK(p.letters_at(-1) == std::vector<int>{ix.index_of(0, 1), ix.index_of(2, 1)});
  CHECK(p.letters_at(0).empty());
  auto q = EndPartition::parse(tri, "L2.2");
  CHECK(q.letters_at(0) == std::vector<int>{ix.index_of(2, 2)});
  CHECK(q.depth(ix.index_of(2, 1)) == -1);

  CHECK_THROWS_AS(EndPartition::parse(GraphSpec::parse("lochness"), "S0"), DomainError);
  CHECK_THROWS_AS(EndPartition::parse(kLadder, "X3"), ParseError);
  CHECK_THROWS_AS(EndPartition::parse(tri, "L3.0"), DomainError);
  CHECK_THROWS_AS(EndPartition::parse(tri, "S0"), DomainError);
}

TEST_CASE("admissible pairs") {
  auto s0 = EndPartition::ladder(0);
  CHECK(admissible_pair(L("ID"), s0, 0) == 0);
  CHECK(admissible_pair(L("ID"), s0, -3) == -3);
  CHECK(admissible_pair(L("H(1,stride=1,offset=0)"), s0, 0) == 1);
  // supported inside Gamma_0
  CHECK(admissible_pair(L("W(a-2 a0,J-1.0) * LS(1,-5,-3)"), s0, 0) == 0);
  CHECK(admissible_pair(L("W(a3,J-1.0)"), s0, 0) == 3);
}

TEST_CASE("flux examples") {
  auto s0 = EndPartition::ladder(0);
  CHECK(flux(L("ID"), s0).value == 0);
  auto h = flux(L("H(1,stride=1,offset=0)"), s0);
  CHECK(h.value == 1);
  CHECK(h.m == 1);
  CHECK(h.checks.size() >= 4);
  CHECK(flux(L("H(-1,stride=1,offset=0)"), s0).value == -1);

  for (const char* swap : {"LS(1,-2,3)", "LS(2,-3,1)", "LS(1,5,9)", "LS(3,-6,-2)"}) CHECK(flux(L(swap), s0).value == 0);
  CHECK(flux(L("W(a-1 a4,J2.0) * W(A3,J0.0) * AUT(a1 -> a1 a-2)"), s0).value == 0);
  CHECK(flux(L("W(a3 a5,C1.0)"), s0).value == 0);

  for (int e = -4; e <= 4; ++e) {
    auto he = L("H(" + std::to_string(e) + ",stride=1,offset=0)");
    auto v = flux(he, s0);
    CHECK(v.value == e);
    CHECK(testing::flux_by_abelian_oracle(he, s0, v.m, v.n) == e);
  }
  // a stride-2 shift moves one loop per period across x0
  CHECK(flux(L("H(1,stride=2,offset=1)"), s0).value == 1);
  CHECK(flux(L("H(1,stride=2,offset=0) * H(1,stride=2,offset=1)"), s0).value == 2);
  CHECK(flux(L("H(1,stride=1,offset=0)"), EndPartition::ladder(7)).value == 1);

  auto j = h.to_json();
  CHECK(j["schema"] == 1);
  CHECK(j["flux"] == 1);
  CHECK(j["admissiblePair"]["m"] == 1);

  CHECK_THROWS_AS(flux(MappingClass::identity(GraphSpec::parse("tripod")), s0), DomainError);
}

TEST_CASE("property: flux is independent of the pair and additive") {
  std::mt19937 rng(7);
  auto s0 = EndPartition::ladder(0);
  auto s3 = EndPartition::ladder(3);
  for (int trial = 0; trial < 60; ++trial) {
    auto f = L(testing::random_ladder_text(rng, 4));
    auto g = L(testing::random_expr_text(rng, kLadder, 3, 6, 3));
    long ff = flux(f, s0).value, fg = flux(g, s0).value;
    CHECK(flux(g * f, s0).value == ff + fg);
    CHECK(flux(f.inverse(), s0).value == -ff);
    // the value does not depend on which spine edge is cut when no shift is present
    if (f.core().shift().identity()) CHECK(ff == 0);
    CHECK(flux(f, s3).value == ff);
    int m = admissible_pair(f, s0, -2);
    for (int extra = 0; extra < 3; ++extra) {
      auto v = flux_at(f, s0, m + extra, -2);
      REQUIRE(v.has_value());
      CHECK(*v == ff);
      CHECK(testing::flux_by_abelian_oracle(f, s0, m + extra, -2) == ff);
    }
    if (m > -2) CHECK(!flux_at(f, s0, m - 1, -2).has_value());
  }

  GraphSpec star = GraphSpec::parse("star:4");
  auto p2 = EndPartition::star_leg(star, 2, 1);
  for (int trial = 0; trial < 40; ++trial) {
    auto f = MappingClass::parse(star, testing::random_expr_text(rng, star, 4, 6, 3));
    auto g = MappingClass::parse(star, testing::random_expr_text(rng, star, 4, 6, 3));
    CHECK(flux(g * f, p2).value == flux(f, p2).value + flux(g, p2).value);
  }
}

TEST_CASE("flux families pair to the identity") {
  auto two = flux_family(2);
  CHECK(two.pairing == std::vector<std::vector<long>>{{1}});
  auto three = flux_family(3);
  CHECK(three.graph.name() == "tripod");
  CHECK(three.pairing == std::vector<std::vector<long>>{{1, 0}, {0, 1}});
  CHECK(three.is_identity());
  CHECK(three.to_json()["h1RankLowerBound"] == 2);
  CHECK(flux_family(5).is_identity());
  CHECK_THROWS_AS(flux_family(1), DomainError);
  CHECK_THROWS_AS(flux_family(0), DomainError);
}

TEST_CASE("displacement examples") {
  CHECK(displacement(L("ID")).twice_absolute() == 0);
  auto h = displacement(L("H(1,stride=1,offset=0)"));
  CHECK(h.left == 0);
  CHECK(h.right == 1);
  CHECK(h.absolute() == 1.0);
  CHECK(displacement(L("H(3,stride=1,offset=0)")).absolute() == 3.0);
  CHECK(displacement(stride_product({2, -1, 0})).absolute() == 3.0);
  CHECK(displacement(stride_product({1, -1})).forward == 2);
  // a swap across x0 moves one loop out of each side
  CHECK(displacement(L("LS(1,0,1)")).forward == 2);
  CHECK(displacement(L("LS(1,-3,-1)")).forward == 0);
  // compactly supported word map on the far side of a core edge
  CHECK(displacement(L("W(a3 a5,C1.0)")).forward == 0);
  // word on the other side: loops a-1, a0 between the edge and x0 leave A
  CHECK(displacement(L("W(a3 a5,C-2.0)")).forward == 2);
  CHECK(displacement(L("W(a-1 a3,J2.0)")).right == 1);
  CHECK_THROWS_AS(displacement(MappingClass::identity(GraphSpec::parse("lochness"))), DomainError);
}

TEST_CASE("property: |D| is symmetric and satisfies the triangle inequality") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 80; ++trial) {
    auto f = L(testing::random_ladder_text(rng, 4));
    auto g = L(testing::random_ladder_text(rng, 4));
    auto df = displacement(f), dg = displacement(g);
    CHECK(displacement(f.inverse()).twice_absolute() == df.twice_absolute());
    CHECK(displacement(g * f).forward <= df.forward + dg.forward);
    CHECK(displacement(g * f).twice_absolute() <= df.twice_absolute() + dg.twice_absolute());
    CHECK(df.forward >= 0);
  }
}

TEST_CASE("Z^k embedding check") {
  auto one = zk_embedding_check(1, 3);
  CHECK(one.passed());
  CHECK(one.checked == 7);
  auto two = zk_embedding_check(2, 2);
  CHECK(two.passed());
  CHECK(two.checked == 25);
  CHECK(two.l1_ball == 13);
  auto zero = zk_embedding_check(3, 0);
  CHECK(zero.passed());
  CHECK(zero.checked == 1);
  CHECK_THROWS_AS(zk_embedding_check(0, 1), DomainError);
}

TEST_CASE("deeper window doubling agrees") {
  setenv("PMAP_WINDOW_DOUBLING_DEPTH", "4", 1);
  CHECK(detail::window_doubling_depth() == 4);
  CHECK(flux(L("H(2,stride=3,offset=1) * W(a2 a-3,J0.0)"), EndPartition::ladder(0)).value == 2);
  CHECK(displacement(stride_product({1, 2, -1})).absolute() == 4.0);
  unsetenv("PMAP_WINDOW_DOUBLING_DEPTH");
  CHECK(detail::window_doubling_depth() == 1);
}

TEST_CASE("windowed intersections agree with path enumeration") {
  std::mt19937 rng(3);
  auto s0 = EndPartition::ladder(0);
  for (int trial = 0; trial < 40; ++trial) {
    auto f = L(testing::random_ladder_text(rng, 2));
    const TailedAut& a = f.core();
    auto li = detail::left_image(a, s0, 0, detail::default_lo(a, s0, 0));
    auto side = s0.letters_between(li.floor, 0);
    auto meet = intersect(StallingsGraph::of(li.gens), detail::rose(side));
    std::set<int> side_set(side.begin(), side.end());
    // every short product of the image generators using only side letters lies in the intersection
    for (const auto& w : oracle::products(li.gens, 3, 6, 10)) {
      bool on_side = std::all_of(w.letters().begin(), w.letters().end(), [&](const Letter& l) { return side_set.count(l.gen) > 0; });
      if (on_side) CHECK(meet.contains(w));
    }
    // and every basis element of the intersection lies in both factors
    for (const auto& b : meet.basis()) {
      CHECK(StallingsGraph::of(li.gens).contains(b));
      for (const auto& l : b.letters()) CHECK(side_set.count(l.gen) == 1);
    }
  }
}

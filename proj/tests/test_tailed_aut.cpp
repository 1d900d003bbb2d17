#include <random>

#include "doctest.h"
#include "pmap/tailed_aut.hpp"

using namespace pmap;

namespace {
Word W(const char* s) { return Word::parse(s); }

// Letters sampled on both sides of each junction and far out on every end.
std::vector<int> probe_indices(const Indexing& ix) {
  std::vector<int> out;
  for (int t = 0; t < ix.classes(); ++t)
    for (int p : {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 17, 40, 101}) out.push_back(ix.index_of(t, p));
  return out;
}

bool pointwise_equal(const TailedAut& a, const TailedAut& b) {
  for (int i : probe_indices(a.indexing()))
    if (a.image(i) != b.image(i)) return false;
  return true;
}

TailedAut ladder_shift(int e) {
  TailedAut t(Indexing::line());
  t.set_shift({1, {e}});
  return t;
}

TailedAut random_local(std::mt19937& rng, const Indexing& ix) {
  // product of transvections a_i -> a_i a_j^{+-1} among the first few letters
  TailedAut r(ix);
  std::uniform_int_distribution<int> pick(0, 2 * ix.classes() - 1), coin(0, 1);
  auto idx = [&](int k) { return ix.index_of(k % ix.classes(), k / ix.classes() + 1); };
  for (int step = 0; step < 3; ++step) {
    int i = idx(pick(rng)), j = idx(pick(rng));
    if (i == j) continue;
    TailedAut t(ix);
    t.set(i, coin(rng) ? Word::gen(i) * Word::gen(j, coin(rng) == 1) : Word::gen(j, coin(rng) == 1) * Word::gen(i));
    r = compose(t, r);
  }
  return r;
}
}  // namespace

TEST_CASE("indexing schemes are bijective on small positions") {
  for (auto ix : {Indexing::ray(), Indexing::line(), Indexing::star(3), Indexing::star(5)}) {
    std::set<int> seen;
    for (int t = 0; t < ix.classes(); ++t)
      for (int p = 1; p <= 20; ++p) {
        int i = ix.index_of(t, p);
        CHECK(ix.valid(i));
        CHECK(ix.tail_class(i) == t);
        CHECK(ix.pos(i) == p);
        CHECK(seen.insert(i).second);
      }
  }
}

TEST_CASE("tail shifts compose and normalize") {
  TailShift a{2, {1, -1}};
  TailShift b{1, {3}};
  auto ab = after(a, b);
  for (int i = -10; i <= 10; ++i) CHECK(ab(i) == a(b(i)));
  TailShift p{4, {2, 2, 2, 2}};
  p.normalize();
  CHECK(p.period == 1);
  CHECK(after(TailShift{1, {2}}, TailShift{1, {-2}}).identity());
}

TEST_CASE("composition agrees with pointwise substitution") {
  std::mt19937 rng(1);
  for (auto ix : {Indexing::ray(), Indexing::line(), Indexing::star(3)}) {
    for (int trial = 0; trial < 30; ++trial) {
      auto f = random_local(rng, ix);
      auto g = random_local(rng, ix);
      f.set_conj(0, W("a1 A2"));
      auto gf = compose(g, f);
      for (int i : probe_indices(ix)) CHECK(gf.image(i) == g.apply(f.image(i)));
      auto h = random_local(rng, ix);
      CHECK(compose(h, compose(g, f)) == compose(compose(h, g), f));
    }
  }
}

TEST_CASE("shifted maps compose across the junction of a line") {
  auto up = ladder_shift(1), down = ladder_shift(-1);
  CHECK(compose(up, down).is_identity());
  CHECK(compose(down, up).is_identity());
  TailedAut local(Indexing::line());
  local.set(0, W("a0 a1"));
  auto conj = compose(up, compose(local, down));
  for (int i : probe_indices(Indexing::line())) CHECK(conj.image(i) == up.apply(local.apply(down.apply(Word::gen(i)))));
  CHECK(conj.image(1) == W("a1 a2"));
  auto two = compose(up, up);
  CHECK(two.shift()(5) == 7);
  CHECK(two == ladder_shift(2));
}

TEST_CASE("equality compares functions, not tables") {
  TailedAut a(Indexing::ray()), b(Indexing::ray());
  a.set(4, W("a4"));
  CHECK(a == b);
  b.set(4, W("a4 a1"));
  CHECK(!(a == b));
  TailedAut c(Indexing::ray());
  c.set_conj(0, W("a1"));
  CHECK(!(c == a));
  a.prune();
  CHECK(a.table().empty());
}

TEST_CASE("inverse by folding: transvections and conjugations") {
  TailedAut t(Indexing::ray());
  t.set(1, W("a1 a2"));
  auto ti = t.inverse_by_folding();
  CHECK(ti.image(1) == W("a1 A2"));
  CHECK(compose(t, ti).is_identity());

  // a_i -> w^-1 a_i w for i <= 2 on the line, identity beyond
  TailedAut slot(Indexing::line());
  Word w = W("a3 a4");
  slot.set_conj(1, w.inverse());
  for (int i = 1; i <= 2; ++i) slot.set(i, conjugate(w.inverse(), Word::gen(i)));
  auto si = slot.inverse_by_folding();
  CHECK(compose(slot, si).is_identity());
  CHECK(compose(si, slot).is_identity());
  for (int i : probe_indices(Indexing::line())) CHECK(si.apply(slot.image(i)) == Word::gen(i));
}

TEST_CASE("inverse by folding: random local automorphisms on every indexing") {
  std::mt19937 rng(9);
  for (auto ix : {Indexing::ray(), Indexing::line(), Indexing::star(3)}) {
    for (int trial = 0; trial < 40; ++trial) {
      auto f = random_local(rng, ix);
      f = f.conjugated(W("a2 A1"));
      auto fi = f.inverse_by_folding();
      CHECK(pointwise_equal(compose(f, fi), TailedAut::identity(ix)));
      CHECK(pointwise_equal(compose(fi, f), TailedAut::identity(ix)));
    }
  }
}

TEST_CASE("non-automorphisms are rejected") {
  TailedAut sq(Indexing::ray());
  sq.set(1, W("a1 a1"));
  CHECK_THROWS_AS(sq.inverse_by_folding(), DomainError);
  TailedAut merge(Indexing::ray());
  merge.set(2, W("a1"));
  CHECK_THROWS_AS(merge.inverse_by_folding(), DomainError);
  CHECK_THROWS_AS(ladder_shift(1).inverse_by_folding(), DomainError);
}

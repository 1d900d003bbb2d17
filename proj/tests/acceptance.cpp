// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes. Tolerances and sample sizes are fixed below.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pmap/blueprint.hpp"
#include "pmap/cbwitness.hpp"
#include "pmap/classify.hpp"
#include "pmap/fluxdim.hpp"
#include "pmap/freegrp.hpp"
#include "pmap/lengthtree.hpp"
#include "pmap/oracle.hpp"
#include "support/flux_oracle.hpp"
#include "support/random_elements.hpp"
#include "support/random_metrics.hpp"

using namespace pmap;
using B = Blueprint;

namespace {

constexpr double kSquareTolerance = 1e-12;
constexpr double kClassifySeconds = 1.0;
constexpr double kWitnessSeconds = 30.0;
constexpr double kEmbeddingSeconds = 60.0;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string failure;  // first reason only
  void fail(const std::string& why) {
    if (pass) failure = why;
    pass = false;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BlueprintPtr ray() { return B::finite(1, {}, {0}); }
BlueprintPtr loop_vertex() { return B::finite(1, {{0, 0}}); }

void classification_table(Outcome& out) {
  struct Row {
    const char* name;
    BlueprintPtr graph;
    CbVerdict cb;
    const char* cb_tag;
    LocalVerdict loc;
    const char* loc_tag;
  };
  const auto CB = CbVerdict::CB, NCB = CbVerdict::NotCB;
  const auto LCB = LocalVerdict::LocallyCB, NLCB = LocalVerdict::NotLocallyCB;
  const char* finite_rank = "finite-rank";
  const char* tame = "finite-loop-ends-and-components";
  std::vector<Row> rows = {
      {"loch ness", B::lochness(), CB, "one-loop-end-discrete", LCB, tame},
      {"hungry 1", B::hungry(1), CB, "one-loop-end-discrete", LCB, tame},
      {"hungry 4", B::hungry(4), CB, "one-loop-end-discrete", LCB, tame},
      {"millipede", B::millipede(), CB, "one-loop-end-discrete", LCB, tame},
      {"single ray", ray(), CB, "rank-0", LCB, finite_rank},
      {"finite tree", B::finite(3, {{0, 1}, {1, 2}}), CB, "rank-0", LCB, finite_rank},
      {"lasso", B::finite(1, {{0, 0}}, {0}), CB, "lasso", LCB, finite_rank},
      {"rank 1 two ends", B::finite(1, {{0, 0}}, {0, 0}), NCB, "rank1-multi-end", LCB, finite_rank},
      {"rank 2 rose", B::finite(1, {{0, 0}, {0, 0}}), NCB, "finite-rank>=2", LCB, finite_rank},
      {"rank 3 two rays", B::finite(1, {{0, 0}, {0, 0}, {0, 0}}, {0, 0}), NCB, "finite-rank>=2", LCB, finite_rank},
      {"ladder", B::ladder(), NCB, "two-ends-accumulated", LCB, tame},
      {"ladder and loch ness", B::wedge(B::ladder(), B::lochness()), NCB, "two-ends-accumulated", LCB, tame},
      {"comb on loch ness", B::wedge(B::lochness(), B::comb(ray())), NCB, "accumulation-point", LCB, tame},
      {"tree spray on loch ness", B::wedge(B::lochness(), B::tree_spray(nullptr)), NCB, "accumulation-point", LCB, tame},
      {"tree spray of loops", B::tree_spray(loop_vertex()), NCB, "two-ends-accumulated", NLCB, "infinitely-many-loop-ends"},
      {"loch ness with a looped comb of combs", B::wedge(B::lochness(), B::comb(B::wedge(loop_vertex(), B::comb(ray())))), NCB,
       "two-ends-accumulated", NLCB, "infinitely-many-infinite-end-components"},
  };
  auto t0 = std::chrono::steady_clock::now();
  for (const auto& r : rows) {
    ClassificationReport rep = classify(end_profile(r.graph));
    if (rep.cb != r.cb || rep.cbReason.tag != r.cb_tag || rep.locallyCb != r.loc || rep.locCbReason.tag != r.loc_tag)
      out.fail(std::string(r.name) + ": got " + rep.cbReason.tag + " / " + rep.locCbReason.tag);
  }
  double s = seconds_since(t0);
  if (s >= kClassifySeconds) out.fail("took " + std::to_string(s) + " s");
  out.detail << rows.size() << " blueprints in " << s << " s";
}

void witness_soundness(Outcome& out) {
  std::mt19937 rng(1001);
  const char* families[] = {"lochness", "hungry:2", "millipede"};
  auto t0 = std::chrono::steady_clock::now();
  int checked = 0, max_power = 0;
  for (int k = 0; k < 200; ++k) {
    GraphSpec g = GraphSpec::parse(families[k % 3]);
    int n = 1 + static_cast<int>(rng() % 3);
    MappingClass phi = MappingClass::parse(g, testing::random_expr_text(rng, g, 4, 8, 6, false));
    WitnessFactorization w = full_witness(phi, n);
    auto v = verify(w);
    if (!v.ok) out.fail(g.name() + ": " + v.failure);
    if (!(w.product() == phi)) out.fail(g.name() + ": product differs from target");
    int bound = g.family == GraphSpec::LochNess ? 4 : g.family == GraphSpec::Hungry ? 4 + 5 * g.param : 7 + 5 * n;
    if (w.power > bound) out.fail(g.name() + ": power " + std::to_string(w.power) + " > " + std::to_string(bound));
    max_power = std::max(max_power, w.power);
    ++checked;
  }
  double s = seconds_since(t0);
  if (s >= kWitnessSeconds) out.fail("took " + std::to_string(s) + " s");
  out.detail << checked << " elements, max power " << max_power << ", " << s << " s";
}

void permutation_warmup(Outcome& out) {
  std::mt19937 rng(1002);
  int max_power = 0;
  for (int k = 0; k < 100; ++k) {
    int n = 1 + static_cast<int>(rng() % 5);
    int span = 2 + static_cast<int>(rng() % 10);
    std::vector<int> pts(static_cast<std::size_t>(span));
    for (int i = 0; i < span; ++i) pts[static_cast<std::size_t>(i)] = i + 1;
    std::shuffle(pts.begin(), pts.end(), rng);
    std::map<int, int> m;
    for (int i = 0; i < span; ++i) m[i + 1] = pts[static_cast<std::size_t>(i)];
    Perm sigma = Perm::from_pairs(m);
    PermFactorization x = sinfty_factorize(sigma, n);
    Perm prod;
    for (const auto& [p, in_f] : x.factors) {
      prod = prod * p;
      if (!in_f && !p.fixes_window(n)) out.fail("a non-F factor moves the window");
    }
    if (!(prod == sigma)) out.fail("product differs from the permutation");
    if (x.power > 3) out.fail("power " + std::to_string(x.power));
    max_power = std::max(max_power, x.power);
  }
  out.detail << "100 permutations, max power " << max_power;
}

void flux_checks(Outcome& out) {
  const GraphSpec ladder{GraphSpec::Ladder, 0};
  auto L = [&](const std::string& t) { return MappingClass::parse(ladder, t); };
  auto s0 = EndPartition::ladder(0);
  if (flux(L("H(1,stride=1,offset=0)"), s0).value != 1) out.fail("crossing shift is not +1");
  for (int e = -4; e <= 4; ++e) {
    MappingClass h = MappingClass::identity(ladder);
    for (int i = 0; i < std::abs(e); ++i) h = h * L(e > 0 ? "H(1,stride=1,offset=0)" : "H(-1,stride=1,offset=0)");
    long v = flux(h, s0).value;
    int m = admissible_pair(h, s0, 0);
    long oracle = testing::flux_by_abelian_oracle(h, s0, m, 0);
    if (v != e || oracle != e) out.fail("h^" + std::to_string(e) + " gives " + std::to_string(v) + " / oracle " + std::to_string(oracle));
  }
  std::mt19937 rng(1004);
  int zeros = 0;
  for (int k = 0; k < 100; ++k) {
    int a = -6 + static_cast<int>(rng() % 8), n = 1 + static_cast<int>(rng() % 2);
    int b = a + n + static_cast<int>(rng() % 4);
    if (flux(L("LS(" + std::to_string(n) + "," + std::to_string(a) + "," + std::to_string(b) + ")"), s0).value != 0)
      out.fail("a loop swap has nonzero flux");
    std::string multi;
    for (int j = 0; j < 3; ++j) {
      int i = -4 + static_cast<int>(rng() % 9);
      Word w = testing::random_word(rng, -4, 4, 4, i);
      if (w.uses(i)) continue;
      multi += (multi.empty() ? "" : " * ") + std::string("W(") + w.str() + ",J" + std::to_string(i) + ".0)";
    }
    if (!multi.empty() && flux(L(multi), s0).value != 0) out.fail("a compactly supported word map has nonzero flux");
    zeros += 2;
  }
  int pairs = 0;
  for (int k = 0; k < 100; ++k) {
    MappingClass f = L(testing::random_ladder_text(rng, 4)), g = L(testing::random_ladder_text(rng, 4));
    long ff = flux(f, s0).value, fg = flux(g, s0).value;
    if (flux(g * f, s0).value != ff + fg) out.fail("flux is not additive");
    int m = admissible_pair(f, s0, -1);
    for (int extra = 0; extra < 3; ++extra) {
      auto v = flux_at(f, s0, m + extra, -1);
      if (!v || *v != ff) out.fail("flux depends on the admissible pair");
      ++pairs;
    }
  }
  out.detail << "shift +1, h^e for |e|<=4, " << zeros << " zero-flux elements, 100 additive pairs, " << pairs
             << " admissible pairs";
}

void flux_family_check(Outcome& out) {
  FluxFamily fam = flux_family(3);
  if (fam.pairing != std::vector<std::vector<long>>{{1, 0}, {0, 1}}) out.fail("pairing is not the 2x2 identity");
  if (fam.to_json()["h1RankLowerBound"] != 2) out.fail("rank bound is not 2");
  if (fam.graph.name() != "tripod") out.fail("family is not on the tripod");
  out.detail << fam.graph.name() << " pairing [[1,0],[0,1]], H^1 rank >= 2";
}

void embedding_check(Outcome& out) {
  auto t0 = std::chrono::steady_clock::now();
  long total = 0;
  for (int k = 1; k <= 3; ++k) {
    EmbeddingReport r = zk_embedding_check(k, 3);
    if (!r.passed()) out.fail("k = " + std::to_string(k) + " has " + std::to_string(r.failures.size()) + " failures");
    total += r.checked;
  }
  double s = seconds_since(t0);
  if (s >= kEmbeddingSeconds) out.fail("took " + std::to_string(s) + " s");
  out.detail << total << " vectors for k = 1..3 at bound 3, " << s << " s";
}

void length_tree_checks(Outcome& out) {
  const GraphSpec comb{GraphSpec::Comb, 0};
  std::mt19937 rng(1007);
  auto random_comb = [&] { return MappingClass::parse(comb, testing::random_expr_text(rng, comb, 4, 6, 3, false)); };
  for (int k = 0; k < 500; ++k) {
    MappingClass g = random_comb(), h = random_comb();
    int lg = length(g), lh = length(h), lgh = length(g * h);
    if (lgh > std::max(lg, lh) || (lg != lh && lgh != std::max(lg, lh)) || length(g.inverse()) != lg) out.fail("ultranorm fails");
  }
  std::vector<MappingClass> ten;
  for (int k = 0; k < 10; ++k) ten.push_back(random_comb());
  UltraTree t = ultratree(ten);
  std::vector<int> seen(ten.size(), 0);
  for (const auto& leaf : t.leaves)
    for (int i : leaf) ++seen[static_cast<std::size_t>(i)];
  if (std::count(seen.begin(), seen.end(), 1) != 10) out.fail("not every input is a leaf");
  for (std::size_t v = 0; v < t.nodes.size(); ++v) {
    double twice = 2 * t.height(static_cast<int>(v));
    if (twice != std::floor(twice)) out.fail("a height is not a half-integer");
  }
  for (int a = 0; a < t.leaf_count(); ++a)
    for (int b = 0; b < t.leaf_count(); ++b)
      if (t.path_length(a, b) != t.distance[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) out.fail("tree misses a distance");
  if (t.leaf_count() >= 4 && hyperbolicity_delta(t.metric()) != 0.0) out.fail("tree metric has positive delta");

  auto random_vertex = [&](int level) {
    std::map<int, Word> f;
    for (int i = level; i < level + 4; ++i)
      if (rng() % 2) f[i] = testing::random_word(rng, 1, 5, 3);
    return LeveledVertex::make(level, f);
  };
  for (int k = 0; k < 200; ++k) {
    MappingClass phi = random_comb(), psi = random_comb();
    LeveledVertex v = random_vertex(1 + static_cast<int>(rng() % 4));
    if (!(leveled_action(psi * phi, v) == leveled_action(psi, leveled_action(phi, v)))) out.fail("composition law fails");
  }
  for (int k = 0; k < 50; ++k) {
    int level = 1 + static_cast<int>(rng() % 4);
    LeveledVertex v = random_vertex(level);
    if (!(leveled_action(leveled_transport(v), LeveledVertex::make(level, {})) == v)) out.fail("transitivity witness fails");
  }
  out.detail << "500 ultranorm pairs, tree with " << t.leaf_count() << " leaves, 200 action triples, 50 transports";
}

void four_point_checks(Outcome& out) {
  std::mt19937 rng(1008);
  for (int k = 0; k < 200; ++k) {
    DistanceMatrix d = testing::random_ultrametric(rng, 4 + static_cast<int>(rng() % 6));
    if (!is_ultrametric(d) || hyperbolicity_delta(d) != 0.0) out.fail("a generated ultrametric has positive delta");
  }
  int flagged = 0;
  for (int k = 0; k < 200; ++k) {
    DistanceMatrix d = testing::perturbed_metric(rng, 4 + static_cast<int>(rng() % 6));
    bool iso = testing::isosceles_everywhere(d);
    if (is_ultrametric(d) != iso) out.fail("a perturbed metric is misflagged");
    flagged += iso ? 0 : 1;
  }
  const double r2 = std::sqrt(2.0);
  DistanceMatrix square{{0, 1, r2, 1}, {1, 0, 1, r2}, {r2, 1, 0, 1}, {1, r2, 1, 0}};
  double delta = hyperbolicity_delta(square), expected = (2 - r2) / 2;
  out.detail << "200 ultrametrics at delta 0, " << flagged << "/200 perturbed flagged; square delta " << delta;
  if (is_ultrametric(square)) out.fail("square flagged ultrametric");
  if (std::abs(delta - expected) > kSquareTolerance) {
    std::ostringstream why;
    why.precision(15);
    why << "unit square: four-point delta is " << delta << " (sqrt 2 - 1), expected " << expected
        << "; the expected value is the Gromov product of opposite corners, " << gromov_product(square, 1, 3, 0);
    out.fail(why.str());
  }
}

void bounded_geometry(Outcome& out) {
  const GraphSpec comb{GraphSpec::Comb, 0};
  std::mt19937 rng(1009);
  int runs = 0;
  for (int n = 1; n <= 4; ++n)
    for (int k = 0; k < 25; ++k) {
      std::vector<MappingClass> F;
      int size = static_cast<int>(rng() % 9);
      for (int i = 0; i < size; ++i) {
        // half the time aim straight at tooth n
        std::string text = rng() % 2 ? "W(a" + std::to_string(1 + rng() % 4) + ",T" + std::to_string(n) + ".0)"
                                     : testing::random_expr_text(rng, comb, 3, n + 2, 3, false);
        F.push_back(MappingClass::parse(comb, text));
      }
      MappingClass g = bounded_geometry_witness(n, F);
      if (length_by_lines(g, n + 5) != n + 1) out.fail("witness has the wrong length");
      for (const auto& f : F)
        if (length_by_lines(f.inverse() * g, n + 5) <= n) out.fail("witness lies in a translate");
      ++runs;
    }
  out.detail << runs << " witnesses for n = 1..4, |F| <= 8, certified by line enumeration";
}

void oracle_equivalence(Outcome& out) {
  std::mt19937 rng(1010);
  auto random_gens = [&](int count) {
    std::vector<Word> gens;
    for (int i = 0; i < count; ++i) gens.push_back(testing::random_word(rng, 1, 3, 6));
    return gens;
  };
  int words = 0;
  for (int k = 0; k < 20; ++k) {
    auto g1 = random_gens(2), g2 = random_gens(2);
    auto s1 = StallingsGraph::of(g1), s2 = StallingsGraph::of(g2);
    auto meet = intersect(s1, s2);
    auto p1 = oracle::products(g1, 4, 6), p2 = oracle::products(g2, 4, 6);
    for (const auto& w : p1)
      if (p2.count(w) && !meet.contains(w)) out.fail("a common product is missing from the intersection");
    for (const auto& w : oracle::all_words({1, 2, 3}, 5)) {
      if (meet.contains(w) != (s1.contains(w) && s2.contains(w))) out.fail("intersection membership disagrees");
      ++words;
    }
    for (const auto& b : meet.basis())
      if (!s1.contains(b) || !s2.contains(b)) out.fail("an intersection basis element escapes a factor");
  }
  for (int mask = 1; mask < 8; ++mask)
    for (int sub = mask;; sub = (sub - 1) & mask) {
      std::set<int> big, small;
      for (int i = 0; i < 3; ++i) {
        if (mask >> i & 1) big.insert(i + 1);
        if (sub >> i & 1) small.insert(i + 1);
      }
      auto A = FreeFactor::subgraph(small);
      if (cork(FreeFactor::subgraph(big), A) != oracle::abelian_cork(big, A.generators())) out.fail("corank disagrees");
      if (sub == 0) break;
    }
  // windowed flux coranks against the abelian oracle, then with deeper doubling
  const GraphSpec ladder{GraphSpec::Ladder, 0};
  auto s0 = EndPartition::ladder(0);
  std::vector<MappingClass> els;
  std::vector<long> values;
  for (int k = 0; k < 40; ++k) {
    MappingClass f = MappingClass::parse(ladder, testing::random_ladder_text(rng, 2));
    int m = admissible_pair(f, s0, 0);
    auto v = flux_at(f, s0, m, 0);
    if (!v || *v != testing::flux_by_abelian_oracle(f, s0, m, 0)) out.fail("windowed corank disagrees with the oracle");
    els.push_back(f);
    values.push_back(flux(f, s0).value);
  }
  const char* old = std::getenv("PMAP_WINDOW_DOUBLING_DEPTH");
  std::string saved = old ? old : "";
  setenv("PMAP_WINDOW_DOUBLING_DEPTH", "3", 1);
  for (std::size_t k = 0; k < els.size(); ++k)
    if (flux(els[k], s0).value != values[k]) out.fail("flux changes under deeper window doubling");
  if (old)
    setenv("PMAP_WINDOW_DOUBLING_DEPTH", saved.c_str(), 1);
  else
    unsetenv("PMAP_WINDOW_DOUBLING_DEPTH");
  out.detail << "20 intersections over " << words << " words, coranks on rank 3, 40 windowed fluxes stable at depth 3";
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
  };
  std::vector<Criterion> criteria = {
      {"classification golden table", classification_table},
      {"witness soundness", witness_soundness},
      {"permutation warm-up", permutation_warmup},
      {"flux", flux_checks},
      {"flux family", flux_family_check},
      {"displacement embedding", embedding_check},
      {"length and tree", length_tree_checks},
      {"four-point conditions", four_point_checks},
      {"bounded geometry", bounded_geometry},
      {"oracle equivalence", oracle_equivalence},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      criteria[i].run(out);
    } catch (const std::exception& e) {
      out.fail(std::string("threw: ") + e.what());
    }
    if (!out.pass) ++failed;
    std::cout << (out.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].name << ": " << out.detail.str();
    if (!out.pass) std::cout << " | " << out.failure;
    std::cout << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria pass" << std::endl;
  return failed == 0 ? 0 : 1;
}

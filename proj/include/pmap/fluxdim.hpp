#pragma once
// Flux homomorphisms, the displacement pseudo-norm and the Z^k isometric
// embedding check on graphs with at least two ends accumulated by loops
// (ladder and star families).
//
// All subgroups here are of the form <a_i : depth(i) <= n> or images of such
// under an element. They have infinite rank, so every computation is done on
// a finite window: below a floor every letter is fixed up to the tail shift,
// and the free product splits off that deep part.

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pmap/error.hpp"
#include "pmap/freegrp.hpp"
#include "pmap/mcg.hpp"

namespace pmap {

// A cut at the midpoint x0 of a spanning-tree edge. The left side C_L holds
// the letters of depth <= 0, and A_n = <a_i : depth(i) <= n>.
class EndPartition {
 public:
  // Ladder spine edge between loops c and c+1.
  static EndPartition ladder(int c) {
    EndPartition p;
    p.graph_ = {GraphSpec::Ladder, 0};
    p.cut_ = c;
    return p;
  }
  // Edge of star leg `leg` between positions q and q+1; q = 0 is the edge at the centre.
  static EndPartition star_leg(const GraphSpec& g, int leg, int q) {
    if (g.family != GraphSpec::Star) throw DomainError("one-sided-partition", "leg cuts need a star graph");
    if (leg < 0 || leg >= g.param) throw DomainError("bad-edge", "no leg " + std::to_string(leg) + " on " + g.name());
    if (q < 0) throw DomainError("bad-edge", "edge position must be non-negative");
    EndPartition p;
    p.graph_ = g;
    p.leg_ = leg;
    p.cut_ = q;
    return p;
  }

  // "S<c>" on the ladder, "L<leg>.<q>" on a star.
  static EndPartition parse(const GraphSpec& g, std::string_view edge) {
    std::string s(edge);
    auto num = [&](const std::string& t) {
      try {
        std::size_t used = 0;
        int v = std::stoi(t, &used);
        if (used != t.size()) throw ParseError("bad edge id '" + s + "'");
        return v;
      } catch (const std::logic_error&) {
        throw ParseError("bad edge id '" + s + "'");
      }
    };
    if (g.family != GraphSpec::Ladder && g.family != GraphSpec::Star)
      throw DomainError("one-sided-partition", g.name() + " has fewer than two ends accumulated by loops");
    if (s.size() >= 2 && s[0] == 'S') {
      if (g.family != GraphSpec::Ladder) throw DomainError("bad-edge", "spine edges only exist on the ladder");
      return ladder(num(s.substr(1)));
    }
    if (s.size() >= 4 && s[0] == 'L') {
      auto dot = s.find('.');
      if (dot == std::string::npos) throw ParseError("bad edge id '" + s + "'");
      return star_leg(g, num(s.substr(1, dot - 1)), num(s.substr(dot + 1)));
    }
    throw ParseError("bad edge id '" + s + "'");
  }

  const GraphSpec& graph() const { return graph_; }
  bool is_flipped() const { return flipped_; }

  std::string edge_id() const {
    if (graph_.family == GraphSpec::Ladder) return "S" + std::to_string(cut_);
    return "L" + std::to_string(leg_) + "." + std::to_string(cut_);
  }

  // Same edge with the two sides exchanged.
  EndPartition flipped() const {
    EndPartition p = *this;
    p.flipped_ = !flipped_;
    return p;
  }

  int depth(int letter) const { return flipped_ ? 1 - raw_depth(letter) : raw_depth(letter); }

  std::vector<int> letters_at(int t) const { return raw_letters_at(flipped_ ? 1 - t : t); }

  std::vector<int> letters_between(int lo, int hi) const {
    std::vector<int> out;
    for (int t = lo; t <= hi; ++t)
      for (int i : letters_at(t)) out.push_back(i);
    return out;
  }

  // Whether tail class `cls` eventually lies on the left side.
  bool class_on_left(int cls) const {
    bool left = graph_.family == GraphSpec::Ladder ? cls == 1 : cls != leg_;
    return flipped_ ? !left : left;
  }

  nlohmann::json to_json() const { return {{"graph", graph_.name()}, {"edge", edge_id()}, {"flipped", flipped_}}; }

  friend bool operator==(const EndPartition&, const EndPartition&) = default;

 private:
  GraphSpec graph_{GraphSpec::Ladder, 0};
  int leg_ = -1;
  int cut_ = 0;
  bool flipped_ = false;

  int raw_depth(int i) const {
    if (graph_.family == GraphSpec::Ladder) return i - cut_;
    Indexing ix = graph_.indexing();
    int p = ix.pos(i);
    return ix.tail_class(i) == leg_ ? p - cut_ : -(cut_ + p);
  }
  std::vector<int> raw_letters_at(int t) const {
    if (graph_.family == GraphSpec::Ladder) return {t + cut_};
    Indexing ix = graph_.indexing();
    std::vector<int> out;
    if (cut_ + t >= 1) out.push_back(ix.index_of(leg_, cut_ + t));
    if (t <= 0 && -t - cut_ >= 1)
      for (int l = 0; l < graph_.param; ++l)
        if (l != leg_) out.push_back(ix.index_of(l, -t - cut_));
    std::sort(out.begin(), out.end());
    return out;
  }
};

namespace detail {

inline void require_partition_graph(const MappingClass& f, const EndPartition& p) {
  if (!(f.graph() == p.graph()))
    throw DomainError("mixed-graphs", "element lives on " + f.graph().name() + " but the partition is on " + p.graph().name());
}

// Number of extra window doublings used to confirm each windowed value.
inline int window_doubling_depth() {
  const char* env = std::getenv("PMAP_WINDOW_DOUBLING_DEPTH");
  if (!env) return 1;
  int d = std::atoi(env);
  return std::clamp(d, 1, 6);
}

// Common tail conjugator of the left-side tail classes.
inline Word left_conjugator(const TailedAut& a, const EndPartition& p) {
  std::optional<Word> c;
  for (int cls = 0; cls < a.indexing().classes(); ++cls) {
    if (!p.class_on_left(cls)) continue;
    const Word& w = a.conj()[static_cast<std::size_t>(cls)];
    if (c && *c != w) throw DomainError("unsupported", "left-side tails carry different conjugators");
    c = w;
  }
  return c.value_or(Word());
}

// Image of <a_i : depth(i) <= cut>, rebased at the left end (the left tail
// conjugator is removed, which makes the rebasing a homomorphism), written as
// <a_i : depth(i) < floor> * <gens> with gens using only depths >= floor.
struct LeftImage {
  int floor = 0;
  std::vector<Word> gens;
  Word conjugator;
};

inline int default_lo(const TailedAut& a, const EndPartition& p, int cut) {
  int lo = cut;
  for (int g : a.letters_touched()) lo = std::min(lo, p.depth(g));
  return lo - a.shift().span() - 1;
}

inline LeftImage left_image(const TailedAut& a, const EndPartition& p, int cut, int lo) {
  Word c = left_conjugator(a, p);
  Word ci = c.inverse();
  const int span = a.shift().span();
  LeftImage out{lo - span, {}, c};
  auto img = [&](int i) { return conjugate(ci, a.image(i)); };
  for (int t = lo - 2 * span - 1; t < lo; ++t)
    for (int i : p.letters_at(t)) {
      Word w = img(i);
      if (w.size() != 1 || w.letters()[0].inv) throw std::logic_error("window floor is not below the support");
      if (p.depth(w.letters()[0].gen) >= out.floor) out.gens.push_back(w);
    }
  for (int t = lo; t <= cut; ++t)
    for (int i : p.letters_at(t)) {
      Word w = img(i);
      for (int g : w.support())
        if (p.depth(g) < out.floor) throw std::logic_error("window image reaches below the floor");
      out.gens.push_back(std::move(w));
    }
  return out;
}

inline int max_depth(const std::vector<Word>& ws, const EndPartition& p, int start) {
  int m = start;
  for (const auto& w : ws)
    for (int g : w.support()) m = std::max(m, p.depth(g));
  return m;
}

inline StallingsGraph rose(const std::vector<int>& letters) {
  std::vector<Word> g;
  for (int i : letters) g.push_back(Word::gen(i));
  return StallingsGraph::of(g);
}

// cork(A_m, A_n) - cork(A_m, f_*(A_n)) on one window, or nullopt if (m, n)
// is not admissible.
inline std::optional<long> flux_on_window(const TailedAut& a, const EndPartition& p, int m, int n, int lo) {
  if (m < n) return std::nullopt;
  LeftImage li = left_image(a, p, n, lo);
  if (max_depth(li.gens, p, n) > m) return std::nullopt;
  long window = static_cast<long>(p.letters_between(li.floor, m).size());
  long cork_image = window - StallingsGraph::of(li.gens).rank();
  long cork_base = static_cast<long>(p.letters_between(n + 1, m).size());
  return cork_base - cork_image;
}

// cork(S, f_*(S) cap S) for S = <a_i : depth(i) <= 0>.
inline long left_intersection_corank(const TailedAut& a, const EndPartition& p, int lo) {
  LeftImage li = left_image(a, p, 0, lo);
  auto side = p.letters_between(li.floor, 0);
  auto meet = intersect(StallingsGraph::of(li.gens), rose(side));
  return static_cast<long>(side.size()) - meet.rank();
}

// Runs `compute(lo)` at the default floor and at successively doubled
// windows; all runs must agree.
template <class F>
auto window_stable(int lo, int cut, F&& compute) {
  auto base = compute(lo);
  int width = cut - lo + 1;
  for (int d = 1; d <= window_doubling_depth(); ++d) {
    int wider = cut + 1 - (width << d);
    if (compute(wider) != base) throw std::logic_error("windowed value changed when the window was doubled");
  }
  return base;
}

}  // namespace detail

// Smallest m >= n with f_*(A_n) inside A_m. Both coranks are then finite.
inline int admissible_pair(const MappingClass& f, const EndPartition& p, int n) {
  detail::require_partition_graph(f, p);
  const TailedAut& a = f.core();
  auto li = detail::left_image(a, p, n, detail::default_lo(a, p, n));
  return detail::max_depth(li.gens, p, n);
}

// Value of the flux quantity at one pair, window-checked; nullopt if the pair
// is not admissible.
inline std::optional<long> flux_at(const MappingClass& f, const EndPartition& p, int m, int n) {
  detail::require_partition_graph(f, p);
  const TailedAut& a = f.core();
  return detail::window_stable(detail::default_lo(a, p, n), n,
                               [&](int lo) { return detail::flux_on_window(a, p, m, n, lo); });
}

struct FluxCheck {
  int m = 0, n = 0;
  long value = 0;
};

struct FluxValue {
  long value = 0;
  int m = 0, n = 0;
  std::vector<FluxCheck> checks;

  nlohmann::json to_json() const {
    nlohmann::json c = nlohmann::json::array();
    for (const auto& x : checks) c.push_back({{"m", x.m}, {"n", x.n}, {"value", x.value}});
    return {{"schema", 1}, {"flux", value}, {"admissiblePair", {{"m", m}, {"n", n}}}, {"checks", c}};
  }
};

// Flux at the smallest admissible pair over n = 0, confirmed at three further
// admissible pairs.
inline FluxValue flux(const MappingClass& f, const EndPartition& p) {
  FluxValue out;
  out.n = 0;
  out.m = admissible_pair(f, p, 0);
  out.value = *flux_at(f, p, out.m, out.n);
  std::vector<std::pair<int, int>> pairs = {
      {out.m + 1, 0}, {admissible_pair(f, p, -1), -1}, {admissible_pair(f, p, 2) + 2, 2}};
  out.checks.push_back({out.m, out.n, out.value});
  for (auto [m, n] : pairs) {
    auto v = flux_at(f, p, m, n);
    if (!v) throw std::logic_error("expected admissible pair was rejected");
    out.checks.push_back({m, n, *v});
    if (*v != out.value) throw std::logic_error("flux differs between admissible pairs");
  }
  return out;
}

struct FluxFamily {
  GraphSpec graph;
  std::vector<EndPartition> partitions;
  std::vector<std::string> shift_labels;
  std::vector<MappingClass> shifts;
  std::vector<std::vector<long>> pairing;  // pairing[i][j] = flux of shift j across partition i

  bool is_identity() const {
    for (std::size_t i = 0; i < pairing.size(); ++i)
      for (std::size_t j = 0; j < pairing[i].size(); ++j)
        if (pairing[i][j] != (i == j ? 1 : 0)) return false;
    return true;
  }

  nlohmann::json to_json() const {
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : partitions) parts.push_back(p.edge_id());
    return {{"schema", 1}, {"graph", graph.name()}, {"partitions", parts}, {"shifts", shift_labels},
            {"pairing", pairing}, {"identity", is_identity()}, {"h1RankLowerBound", is_identity() ? pairing.size() : 0}};
  }
};

// Partitions P_1..P_{n-1} and loop shifts h_1..h_{n-1} with flux(h_j, P_i) = delta_ij,
// on the ladder (n = 2) or the n-legged star (n >= 3).
inline FluxFamily flux_family(int loop_ends) {
  if (loop_ends < 2) throw DomainError("family-too-small", "a flux family needs at least two ends accumulated by loops");
  FluxFamily fam;
  if (loop_ends == 2) {
    fam.graph = {GraphSpec::Ladder, 0};
    fam.partitions.push_back(EndPartition::ladder(0));
    fam.shift_labels.push_back("H(1,stride=1,offset=0)");
  } else {
    fam.graph = {GraphSpec::Star, loop_ends};
    for (int i = 1; i < loop_ends; ++i) {
      fam.partitions.push_back(EndPartition::star_leg(fam.graph, i, 0));
      fam.shift_labels.push_back("H(1,leg=" + std::to_string(i) + ")");
    }
  }
  for (const auto& s : fam.shift_labels) fam.shifts.push_back(MappingClass::parse(fam.graph, s));
  for (const auto& p : fam.partitions) {
    std::vector<long> row;
    for (const auto& h : fam.shifts) row.push_back(flux(h, p).value);
    fam.pairing.push_back(std::move(row));
  }
  return fam;
}

// ---------------------------------------------------------------------------
// Displacement D(f) = cork(A, f_*(A) cap A) + cork(B, f_*(B) cap B) with A, B
// the fundamental groups of the two sides of x0. Each side is rebased at its
// own end.

struct Displacement {
  long forward = 0;   // D(f)
  long backward = 0;  // D(f^-1)
  long left = 0, right = 0;  // the two summands of D(f)

  // |D|(f) = (D(f) + D(f^-1)) / 2, kept exact as a doubled integer.
  long twice_absolute() const { return forward + backward; }
  double absolute() const { return static_cast<double>(twice_absolute()) / 2.0; }

  nlohmann::json to_json() const {
    return {{"schema", 1}, {"D", forward}, {"Dinverse", backward}, {"left", left}, {"right", right}, {"absolute", absolute()}};
  }
};

namespace detail {
inline long side_corank(const TailedAut& a, const EndPartition& p) {
  return window_stable(default_lo(a, p, 0), 0, [&](int lo) { return left_intersection_corank(a, p, lo); });
}
}  // namespace detail

inline Displacement displacement(const MappingClass& f, const EndPartition& x0) {
  detail::require_partition_graph(f, x0);
  Displacement d;
  d.left = detail::side_corank(f.core(), x0);
  d.right = detail::side_corank(f.core(), x0.flipped());
  d.forward = d.left + d.right;
  d.backward = detail::side_corank(f.core_inverse(), x0) + detail::side_corank(f.core_inverse(), x0.flipped());
  return d;
}

inline Displacement displacement(const MappingClass& f) { return displacement(f, EndPartition::ladder(0)); }

// h_0^e_0 ... h_{k-1}^e_{k-1} with h_r the stride-k loop shift on loops r mod k.
inline MappingClass stride_product(const std::vector<int>& exps) {
  GraphSpec g{GraphSpec::Ladder, 0};
  MappingClass out = MappingClass::identity(g);
  const int k = static_cast<int>(exps.size());
  for (int r = 0; r < k; ++r) {
    if (!exps[static_cast<std::size_t>(r)]) continue;
    Generator gen;
    gen.kind = Generator::Shift;
    gen.power = exps[static_cast<std::size_t>(r)];
    gen.stride = k;
    gen.offset = r;
    out = out * MappingClass::generator(g, gen);
  }
  return out;
}

struct EmbeddingReport {
  int k = 0, bound = 0;
  long checked = 0;
  long l1_ball = 0;  // vectors with l1 norm <= bound among those checked
  std::vector<std::vector<int>> failures;
  bool passed() const { return failures.empty() && checked > 0; }

  nlohmann::json to_json() const {
    return {{"schema", 1}, {"k", k}, {"bound", bound}, {"checked", checked}, {"l1Ball", l1_ball},
            {"failures", failures}, {"passed", passed()}};
  }
};

// Checks |D|(h_0^e_0 ... h_{k-1}^e_{k-1}) = sum |e_i| on the whole box
// |e_i| <= bound (which contains the l1 ball of radius `bound`).
inline EmbeddingReport zk_embedding_check(int k, int bound) {
  if (k < 1 || bound < 0) throw DomainError("bad-argument", "need k >= 1 and bound >= 0");
  EmbeddingReport rep{k, bound, 0, 0, {}};
  std::vector<int> e(static_cast<std::size_t>(k), -bound);
  for (;;) {
    long l1 = 0;
    for (int x : e) l1 += std::abs(x);
    Displacement d = displacement(stride_product(e));
    ++rep.checked;
    if (l1 <= bound) ++rep.l1_ball;
    if (d.twice_absolute() != 2 * l1) rep.failures.push_back(e);
    std::size_t i = 0;
    while (i < e.size() && e[i] == bound) e[i++] = -bound;
    if (i == e.size()) break;
    ++e[i];
  }
  return rep;
}

}  // namespace pmap

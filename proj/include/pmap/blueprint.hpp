#pragma once
// Finite terms describing locally finite infinite graphs in standard form,
// their end/rank invariants, and finite truncations.

#include <algorithm>
#include <compare>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pmap/error.hpp"

namespace pmap {

// Cardinalities the invariants distinguish.
struct Card {
  enum Kind { Finite, Aleph0, Continuum } kind = Finite;
  long n = 0;

  static Card fin(long k) { return {Finite, k}; }
  static Card aleph0() { return {Aleph0, 0}; }
  static Card continuum() { return {Continuum, 0}; }

  bool infinite() const { return kind != Finite; }
  bool zero() const { return kind == Finite && n == 0; }
  bool is(long k) const { return kind == Finite && n == k; }

  friend Card operator+(Card a, Card b) {
    if (a.kind == Finite && b.kind == Finite) return fin(a.n + b.n);
    return {std::max(a.kind, b.kind), 0};
  }
  // aleph_0 copies
  Card countable_copies() const {
    if (zero()) return fin(0);
    return kind == Continuum ? continuum() : aleph0();
  }
  friend bool operator==(const Card&, const Card&) = default;
  friend std::strong_ordering operator<=>(const Card& a, const Card& b) {
    if (a.kind != b.kind) return a.kind <=> b.kind;
    return a.n <=> b.n;
  }

  std::string str() const {
    switch (kind) {
      case Finite: return std::to_string(n);
      case Aleph0: return "countably-infinite";
      default: return "continuum";
    }
  }
  static Card parse(const std::string& s) {
    if (s == "countably-infinite" || s == "infinite") return aleph0();
    if (s == "continuum") return continuum();
    try {
      return fin(std::stol(s));
    } catch (const std::logic_error&) {
      throw ParseError("bad cardinal '" + s + "'");
    }
  }
};

struct Blueprint;
using BlueprintPtr = std::shared_ptr<const Blueprint>;

struct Blueprint {
  enum Ctor { FiniteGraph, LochNess, Hungry, Millipede, Ladder, Wedge, Comb, TreeSpray } ctor = FiniteGraph;
  // FiniteGraph
  int vertices = 1;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> rays;  // a ray leaves from each listed vertex
  // Hungry
  int count = 0;
  // Wedge: identify left.at.first with right.at.second; Comb/TreeSpray use `left`
  BlueprintPtr left, right;
  std::pair<std::string, std::string> at;

  static BlueprintPtr finite(int n, std::vector<std::pair<int, int>> edges, std::vector<int> rays = {}) {
    auto b = std::make_shared<Blueprint>();
    b->ctor = FiniteGraph;
    b->vertices = n;
    b->edges = std::move(edges);
    b->rays = std::move(rays);
    b->validate_finite();
    return b;
  }
  static BlueprintPtr atom(Ctor c, int n = 0) {
    auto b = std::make_shared<Blueprint>();
    b->ctor = c;
    b->count = n;
    if (c == Hungry && n < 1) throw DomainError("bad-blueprint", "Hungry needs N >= 1");
    return b;
  }
  static BlueprintPtr lochness() { return atom(LochNess); }
  static BlueprintPtr hungry(int n) { return atom(Hungry, n); }
  static BlueprintPtr millipede() { return atom(Millipede); }
  static BlueprintPtr ladder() { return atom(Ladder); }
  static BlueprintPtr wedge(BlueprintPtr a, BlueprintPtr b, std::string at_a = "root", std::string at_b = "root") {
    auto w = std::make_shared<Blueprint>();
    w->ctor = Wedge;
    w->left = std::move(a);
    w->right = std::move(b);
    w->at = {std::move(at_a), std::move(at_b)};
    if (!w->left->has_name(w->at.first)) throw DomainError("bad-blueprint", "left operand has no vertex '" + w->at.first + "'");
    if (!w->right->has_name(w->at.second)) throw DomainError("bad-blueprint", "right operand has no vertex '" + w->at.second + "'");
    return w;
  }
  static BlueprintPtr comb(BlueprintPtr tooth) {
    auto c = std::make_shared<Blueprint>();
    c->ctor = Comb;
    c->left = std::move(tooth);
    return c;
  }
  static BlueprintPtr tree_spray(BlueprintPtr decoration) {
    auto c = std::make_shared<Blueprint>();
    c->ctor = TreeSpray;
    c->left = std::move(decoration);
    return c;
  }

  // Attachment vertex names.
  bool has_name(const std::string& s) const {
    switch (ctor) {
      case FiniteGraph: {
        if (s == "root") return true;
        try {
          std::size_t used = 0;
          int v = std::stoi(s, &used);
          return used == s.size() && v >= 0 && v < vertices;
        } catch (const std::logic_error&) {
          return false;
        }
      }
      case Wedge:
        if (s.rfind("right.", 0) == 0) return right->has_name(s.substr(6));
        return left->has_name(s);
      default: return s == "root";
    }
  }

  static const char* ctor_name(Ctor c) {
    static const char* names[] = {"FiniteGraph", "LochNess", "Hungry", "Millipede", "Ladder", "Wedge", "Comb", "TreeSpray"};
    return names[c];
  }

  nlohmann::json to_json() const {
    nlohmann::json args = nlohmann::json::array();
    switch (ctor) {
      case FiniteGraph: {
        nlohmann::json es = nlohmann::json::array();
        for (auto [u, v] : edges) es.push_back({u, v});
        args = {vertices, es, rays};
        break;
      }
      case Hungry: args = {count}; break;
      case Wedge: args = {left->to_json(), right->to_json(), {at.first, at.second}}; break;
      case Comb: args = {left->to_json()}; break;
      case TreeSpray: args = {left ? left->to_json() : nlohmann::json(nullptr)}; break;
      default: break;
    }
    return {{"ctor", ctor_name(ctor)}, {"args", args}};
  }

  static BlueprintPtr from_json(const nlohmann::json& j) {
    try {
      std::string c = j.at("ctor").get<std::string>();
      const auto& a = j.contains("args") ? j.at("args") : nlohmann::json::array();
      if (c == "FiniteGraph") {
        std::vector<std::pair<int, int>> es;
        for (const auto& e : a.at(1)) es.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        std::vector<int> rays = a.size() > 2 ? a.at(2).get<std::vector<int>>() : std::vector<int>{};
        return finite(a.at(0).get<int>(), es, rays);
      }
      if (c == "LochNess") return lochness();
      if (c == "Hungry") return hungry(a.at(0).get<int>());
      if (c == "Millipede") return millipede();
      if (c == "Ladder") return ladder();
      if (c == "Wedge") {
        std::string n1 = "root", n2 = "root";
        if (a.size() > 2) {
          n1 = a.at(2).at(0).get<std::string>();
          n2 = a.at(2).at(1).get<std::string>();
        }
        return wedge(from_json(a.at(0)), from_json(a.at(1)), n1, n2);
      }
      if (c == "Comb") return comb(from_json(a.at(0)));
      if (c == "TreeSpray") return tree_spray(a.empty() || a.at(0).is_null() ? nullptr : from_json(a.at(0)));
      throw ParseError("unknown blueprint constructor '" + c + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed blueprint JSON: ") + e.what());
    }
  }

 private:
  void validate_finite() const {
    if (vertices < 1) throw DomainError("bad-blueprint", "FiniteGraph needs at least one vertex");
    std::vector<int> parent(static_cast<std::size_t>(vertices));
    for (int i = 0; i < vertices; ++i) parent[static_cast<std::size_t>(i)] = i;
    std::function<int(int)> find = [&](int x) {
      return parent[static_cast<std::size_t>(x)] == x ? x : parent[static_cast<std::size_t>(x)] = find(parent[static_cast<std::size_t>(x)]);
    };
    auto in_range = [&](int v) { return v >= 0 && v < vertices; };
    for (auto [u, v] : edges) {
      if (!in_range(u) || !in_range(v)) throw DomainError("bad-blueprint", "edge endpoint out of range");
      parent[static_cast<std::size_t>(find(u))] = find(v);
    }
    for (int r : rays)
      if (!in_range(r)) throw DomainError("bad-blueprint", "ray attached to a missing vertex");
    for (int i = 1; i < vertices; ++i)
      if (find(i) != find(0)) throw DomainError("disconnected", "FiniteGraph atoms must be connected");
  }
};

// Invariants of a blueprint viewed as a graph with a root vertex.
struct Summary {
  Card rank, ends, loop_ends;
  bool accumulation = false;  // some end outside E_l is a limit of ends outside E_l
  Card limit_free_ends;       // ends outside E_l that are limits of other ends
  bool root_in_core = false;
  Card comps_root_core;  // infinite-end components of the complement of the core, root glued to an outside core
  Card comps_root_free;  // same, standalone, not counting the root's component
  Card root_comp_ends;   // ends of the root's component when the root is off the core
};

struct EndProfile {
  Card rank, endCount, elCount;
  bool elComplementDiscrete = true;
  bool elComplementHasAccumulation = false;
  Card infiniteEndComponents;
  bool isLasso = false;

  nlohmann::json to_json() const {
    return {{"rank", rank.kind == Card::Finite ? nlohmann::json(rank.n) : nlohmann::json("infinite")},
            {"endCount", endCount.str()},
            {"elCount", elCount.str()},
            {"elComplementDiscrete", elComplementDiscrete},
            {"elComplementHasAccumulation", elComplementHasAccumulation},
            {"infiniteEndComponentsOfComplementOfCore", infiniteEndComponents.str()},
            {"isLasso", isLasso}};
  }
  friend bool operator==(const EndProfile&, const EndProfile&) = default;
};

// Throws DomainError when the fields contradict each other.
inline void validate(const EndProfile& p) {
  if (p.elComplementDiscrete == p.elComplementHasAccumulation) throw DomainError("inconsistent-profile", "accumulation flags disagree");
  if (p.rank.infinite() != !p.elCount.zero()) throw DomainError("inconsistent-profile", "rank is infinite exactly when some end is accumulated by loops");
  if (p.endCount < p.elCount) throw DomainError("inconsistent-profile", "more loop-accumulated ends than ends");
  if (!p.infiniteEndComponents.zero() && !p.elComplementHasAccumulation)
    throw DomainError("inconsistent-profile", "an infinite-ended tree component forces an accumulation point");
  if (p.isLasso != (p.rank.is(1) && p.endCount.kind == Card::Finite && p.endCount.n <= 1))
    throw DomainError("inconsistent-profile", "lasso flag disagrees with rank and end count");
}

namespace detail {

// Finite skeleton: the finite graph parts plus infinite gadgets hanging at
// vertices by their roots.
struct Skeleton {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<Summary>> gadgets;
  int root = 0;
  std::map<std::string, int> names;

  int add_vertex() {
    gadgets.emplace_back();
    return n++;
  }
};

Summary summarize(const Blueprint& b);

inline Summary ray_summary() {
  Summary s;
  s.rank = Card::fin(0);
  s.ends = Card::fin(1);
  s.loop_ends = Card::fin(0);
  s.limit_free_ends = Card::fin(0);
  s.root_comp_ends = Card::fin(1);
  return s;
}

inline Skeleton compile(const Blueprint& b) {
  Skeleton s;
  switch (b.ctor) {
    case Blueprint::FiniteGraph: {
      for (int i = 0; i < b.vertices; ++i) s.names[std::to_string(s.add_vertex())] = i;
      s.edges = b.edges;
      for (int r : b.rays) s.gadgets[static_cast<std::size_t>(r)].push_back(ray_summary());
      s.names["root"] = 0;
      return s;
    }
    case Blueprint::Wedge: {
      Skeleton l = compile(*b.left), r = compile(*b.right);
      s = l;
      int glue_l = l.names.at(b.at.first), glue_r = r.names.at(b.at.second);
      std::vector<int> map(static_cast<std::size_t>(r.n));
      for (int v = 0; v < r.n; ++v) map[static_cast<std::size_t>(v)] = v == glue_r ? glue_l : s.add_vertex();
      for (int v = 0; v < r.n; ++v)
        for (const auto& g : r.gadgets[static_cast<std::size_t>(v)]) s.gadgets[static_cast<std::size_t>(map[static_cast<std::size_t>(v)])].push_back(g);
      for (auto [u, v] : r.edges) s.edges.emplace_back(map[static_cast<std::size_t>(u)], map[static_cast<std::size_t>(v)]);
      for (const auto& [name, v] : r.names) s.names["right." + name] = map[static_cast<std::size_t>(v)];
      return s;
    }
    default:
      s.add_vertex();
      s.gadgets[0].push_back(summarize(b));
      s.names["root"] = 0;
      return s;
  }
}

struct SkeletonAnalysis {
  Card rank, ends, loop_ends, limit_free_ends;
  bool accumulation = false;
  bool root_in_core = false;
  Card comps;            // standalone count
  Card comps_root_core;  // root glued to an outside core
  Card root_comp_ends;
  bool root_comp_counted = false;
};

inline SkeletonAnalysis analyse(const Skeleton& s) {
  SkeletonAnalysis out;
  out.rank = Card::fin(static_cast<long>(s.edges.size()) - s.n + 1);
  out.ends = out.loop_ends = out.limit_free_ends = Card::fin(0);
  for (const auto& gs : s.gadgets)
    for (const auto& g : gs) {
      out.rank = out.rank + g.rank;
      out.ends = out.ends + g.ends;
      out.loop_ends = out.loop_ends + g.loop_ends;
      out.limit_free_ends = out.limit_free_ends + g.limit_free_ends;
      out.accumulation = out.accumulation || g.accumulation;
    }
  auto ends_at = [&](int v) {
    Card e = Card::fin(0);
    for (const auto& g : s.gadgets[static_cast<std::size_t>(v)]) e = e + g.ends;
    return e;
  };
  auto heavy_gadgets = [&](int v) {
    int k = 0;
    for (const auto& g : s.gadgets[static_cast<std::size_t>(v)]) k += g.rank.zero() ? 0 : 1;
    return k;
  };

  // Components count with an optional extra core attached at the root.
  auto count = [&](bool root_glued, bool& root_in_core, Card& root_comp_ends, bool& root_counted) {
    root_counted = false;
    std::vector<int> deg(static_cast<std::size_t>(s.n), 0);
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(s.n));
    for (auto [u, v] : s.edges) {
      ++deg[static_cast<std::size_t>(u)];
      ++deg[static_cast<std::size_t>(v)];
      adj[static_cast<std::size_t>(u)].push_back(v);
      adj[static_cast<std::size_t>(v)].push_back(u);
    }
    std::vector<bool> alive(static_cast<std::size_t>(s.n), true);
    auto heavy = [&](int v) { return heavy_gadgets(v) > 0 || (root_glued && v == s.root); };
    std::deque<int> q;
    for (int v = 0; v < s.n; ++v)
      if (deg[static_cast<std::size_t>(v)] <= 1 && !heavy(v)) q.push_back(v);
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      if (!alive[static_cast<std::size_t>(v)]) continue;
      alive[static_cast<std::size_t>(v)] = false;
      for (int u : adj[static_cast<std::size_t>(v)])
        if (alive[static_cast<std::size_t>(u)] && --deg[static_cast<std::size_t>(u)] <= 1 && !heavy(u)) q.push_back(u);
    }
    int kcount = 0;
    for (int v = 0; v < s.n; ++v) kcount += alive[static_cast<std::size_t>(v)] ? 1 : 0;
    Card total_rank = out.rank;
    Card comps = Card::fin(0);
    if (total_rank.zero() && !root_glued) {
      root_in_core = false;
      root_comp_ends = out.ends;
      root_counted = out.ends.infinite();
      return out.ends.infinite() ? Card::fin(1) : Card::fin(0);
    }
    auto in_core = [&](int v) {
      if (!alive[static_cast<std::size_t>(v)]) return false;
      if (root_glued && v == s.root) return true;
      if (deg[static_cast<std::size_t>(v)] >= 2 || heavy_gadgets(v) >= 2) return true;
      if (deg[static_cast<std::size_t>(v)] >= 1 && heavy_gadgets(v) >= 1) return true;
      for (const auto& g : s.gadgets[static_cast<std::size_t>(v)])
        if (!g.rank.zero() && g.root_in_core) return true;
      return false;
    };
    if (kcount == 1) {
      int v = 0;
      while (!alive[static_cast<std::size_t>(v)]) ++v;
      if (!in_core(v)) {
        // The core sits inside the single gadget at v, whose root is off it.
        const Summary* big = nullptr;
        for (const auto& g : s.gadgets[static_cast<std::size_t>(v)])
          if (!g.rank.zero()) big = &g;
        Card rest = big->root_comp_ends;
        for (int u = 0; u < s.n; ++u)
          for (const auto& g : s.gadgets[static_cast<std::size_t>(u)])
            if (&g != big) rest = rest + g.ends;
        root_in_core = false;
        root_comp_ends = rest;
        root_counted = rest.infinite();
        return big->comps_root_free + (rest.infinite() ? Card::fin(1) : Card::fin(0));
      }
    }
    // Hanging trees: components of the pruned part, each attached to one core vertex.
    std::vector<int> comp(static_cast<std::size_t>(s.n), -1);
    int ncomp = 0;
    for (int v = 0; v < s.n; ++v) {
      if (alive[static_cast<std::size_t>(v)] || comp[static_cast<std::size_t>(v)] >= 0) continue;
      std::vector<int> stack{v};
      comp[static_cast<std::size_t>(v)] = ncomp;
      while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int u : adj[static_cast<std::size_t>(x)])
          if (!alive[static_cast<std::size_t>(u)] && comp[static_cast<std::size_t>(u)] < 0) {
            comp[static_cast<std::size_t>(u)] = ncomp;
            stack.push_back(u);
          }
      }
      ++ncomp;
    }
    std::vector<Card> comp_ends(static_cast<std::size_t>(ncomp), Card::fin(0));
    for (int v = 0; v < s.n; ++v)
      if (comp[static_cast<std::size_t>(v)] >= 0) comp_ends[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])] = comp_ends[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])] + ends_at(v);
    for (const auto& e : comp_ends)
      if (e.infinite()) comps = comps + Card::fin(1);
    root_in_core = in_core(s.root);
    if (!alive[static_cast<std::size_t>(s.root)]) {
      root_comp_ends = comp_ends[static_cast<std::size_t>(comp[static_cast<std::size_t>(s.root)])];
      root_counted = root_comp_ends.infinite();
    } else {
      root_comp_ends = Card::fin(0);
    }
    for (int v = 0; v < s.n; ++v) {
      if (!alive[static_cast<std::size_t>(v)]) continue;
      for (const auto& g : s.gadgets[static_cast<std::size_t>(v)]) {
        if (g.rank.zero())
          comps = comps + (g.ends.infinite() ? Card::fin(1) : Card::fin(0));
        else
          comps = comps + g.comps_root_core;
      }
    }
    return comps;
  };

  bool dummy_core = false, dummy_counted = false;
  Card dummy_ends;
  out.comps = count(false, out.root_in_core, out.root_comp_ends, out.root_comp_counted);
  out.comps_root_core = count(true, dummy_core, dummy_ends, dummy_counted);
  return out;
}

inline Summary summarize(const Blueprint& b) {
  Summary s;
  s.limit_free_ends = Card::fin(0);
  s.root_comp_ends = Card::fin(0);
  s.comps_root_core = s.comps_root_free = Card::fin(0);
  const Card inf = Card::aleph0();
  switch (b.ctor) {
    case Blueprint::LochNess:
      s.rank = inf;
      s.ends = s.loop_ends = Card::fin(1);
      s.root_in_core = true;
      return s;
    case Blueprint::Hungry:
      s.rank = inf;
      s.ends = Card::fin(b.count + 1);
      s.loop_ends = Card::fin(1);
      s.root_comp_ends = Card::fin(b.count);
      return s;
    case Blueprint::Millipede:
      s.rank = inf;
      s.ends = inf;
      s.loop_ends = Card::fin(1);
      return s;
    case Blueprint::Ladder:
      s.rank = inf;
      s.ends = s.loop_ends = Card::fin(2);
      s.root_in_core = true;
      return s;
    case Blueprint::Comb: {
      Summary t = summarize(*b.left);
      bool loops = !t.rank.zero();
      s.rank = loops ? inf : Card::fin(0);
      s.ends = Card::fin(1) + t.ends.countable_copies();
      s.loop_ends = (loops ? Card::fin(1) : Card::fin(0)) + t.loop_ends.countable_copies();
      bool spine_limit = !loops && !t.ends.zero();
      s.accumulation = t.accumulation || spine_limit;
      s.limit_free_ends = (spine_limit ? Card::fin(1) : Card::fin(0)) + t.limit_free_ends.countable_copies();
      if (loops) {
        s.comps_root_core = s.comps_root_free = t.comps_root_core.countable_copies();
      } else {
        s.root_comp_ends = s.ends;
        s.comps_root_core = s.ends.infinite() ? Card::fin(1) : Card::fin(0);
      }
      return s;
    }
    case Blueprint::TreeSpray: {
      Summary d;
      d.rank = d.ends = d.loop_ends = d.limit_free_ends = d.comps_root_core = Card::fin(0);
      if (b.left) d = summarize(*b.left);
      bool loops = !d.rank.zero();
      s.rank = loops ? inf : Card::fin(0);
      s.ends = Card::continuum();
      if (loops) {
        s.loop_ends = Card::continuum();
        s.accumulation = d.accumulation;
        s.limit_free_ends = d.limit_free_ends.countable_copies();
        s.root_in_core = true;
        s.comps_root_core = s.comps_root_free = d.comps_root_core.countable_copies();
      } else {
        s.loop_ends = Card::fin(0);
        s.accumulation = true;
        s.limit_free_ends = Card::continuum();
        s.root_comp_ends = s.ends;
        s.comps_root_core = Card::fin(1);
      }
      return s;
    }
    default: {
      SkeletonAnalysis a = analyse(compile(b));
      s.rank = a.rank;
      s.ends = a.ends;
      s.loop_ends = a.loop_ends;
      s.accumulation = a.accumulation;
      s.limit_free_ends = a.limit_free_ends;
      s.root_in_core = a.root_in_core;
      s.comps_root_core = a.comps_root_core;
      s.root_comp_ends = a.root_in_core ? Card::fin(0) : a.root_comp_ends;
      s.comps_root_free = a.comps;
      if (a.root_comp_counted) s.comps_root_free = a.comps.kind == Card::Finite ? Card::fin(a.comps.n - 1) : a.comps;
      return s;
    }
  }
}

}  // namespace detail

inline EndProfile end_profile(const Blueprint& b) {
  detail::Skeleton sk = detail::compile(b);
  detail::SkeletonAnalysis a = detail::analyse(sk);
  EndProfile p;
  p.rank = a.rank;
  p.endCount = a.ends;
  p.elCount = a.loop_ends;
  p.elComplementHasAccumulation = a.accumulation;
  p.elComplementDiscrete = a.limit_free_ends.zero();
  p.infiniteEndComponents = a.comps;
  p.isLasso = a.rank.is(1) && a.ends.kind == Card::Finite && a.ends.n <= 1;
  validate(p);
  return p;
}
inline EndProfile end_profile(const BlueprintPtr& b) { return end_profile(*b); }

// ---- truncation ----

struct Truncation {
  std::vector<std::string> names;  // vertex names, stable across radii
  std::vector<int> distance;
  std::vector<bool> boundary;
  std::vector<std::pair<int, int>> edges;  // loops appear as (v, v)

  int vertex_count() const { return static_cast<int>(names.size()); }
  int rank() const { return static_cast<int>(edges.size()) - vertex_count() + 1; }
  int loop_count() const {
    return static_cast<int>(std::count_if(edges.begin(), edges.end(), [](const auto& e) { return e.first == e.second; }));
  }
  int index_of(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
  }
  std::set<std::pair<std::string, std::string>> named_edges() const {
    std::set<std::pair<std::string, std::string>> out;
    for (auto [u, v] : edges) out.insert(std::minmax(names[static_cast<std::size_t>(u)], names[static_cast<std::size_t>(v)]));
    return out;
  }

  std::string to_dot(const std::string& graph_name = "truncation") const {
    std::string s = "graph " + graph_name + " {\n";
    for (std::size_t v = 0; v < names.size(); ++v)
      s += "  \"" + names[v] + "\"" + (boundary[v] ? " [shape=box]" : "") + ";\n";
    for (auto [u, v] : edges) s += "  \"" + names[static_cast<std::size_t>(u)] + "\" -- \"" + names[static_cast<std::size_t>(v)] + "\";\n";
    return s + "}\n";
  }
};

namespace detail {

struct Materialized {
  std::vector<std::string> names;
  std::vector<std::pair<int, int>> edges;
  std::map<std::string, int> attach;

  int add(const std::string& n) {
    names.push_back(n);
    return static_cast<int>(names.size()) - 1;
  }
  // Copy `other` in with a name prefix, return its vertex id map.
  std::vector<int> absorb(const Materialized& other, const std::string& prefix, int glue_other = -1, int glue_here = -1) {
    std::vector<int> map(other.names.size());
    for (std::size_t v = 0; v < other.names.size(); ++v)
      map[v] = static_cast<int>(v) == glue_other ? glue_here : add(prefix + other.names[v]);
    for (auto [u, v] : other.edges) edges.emplace_back(map[static_cast<std::size_t>(u)], map[static_cast<std::size_t>(v)]);
    return map;
  }
};

inline int finite_size(const Blueprint& b) {
  switch (b.ctor) {
    case Blueprint::FiniteGraph: return b.vertices;
    case Blueprint::Wedge: return finite_size(*b.left) + finite_size(*b.right);
    default: return 1;
  }
}

// Everything within `depth` of the root (and possibly more).
inline Materialized materialize(const Blueprint& b, int depth) {
  Materialized m;
  auto spine = [&](const std::string& stem, int from, int to) {
    std::vector<int> ids;
    for (int i = from; i <= to; ++i) ids.push_back(m.add(stem + std::to_string(i)));
    for (std::size_t i = 1; i < ids.size(); ++i) m.edges.emplace_back(ids[i - 1], ids[i]);
    return ids;
  };
  switch (b.ctor) {
    case Blueprint::FiniteGraph: {
      for (int v = 0; v < b.vertices; ++v) m.attach[std::to_string(v)] = m.add("u" + std::to_string(v));
      m.edges = b.edges;
      for (std::size_t k = 0; k < b.rays.size(); ++k) {
        int prev = b.rays[k];
        for (int i = 1; i <= depth; ++i) {
          int x = m.add("ray" + std::to_string(k) + "." + std::to_string(i));
          m.edges.emplace_back(prev, x);
          prev = x;
        }
      }
      m.attach["root"] = 0;
      return m;
    }
    case Blueprint::LochNess: {
      auto v = spine("v", 1, depth + 1);
      for (int x : v) m.edges.emplace_back(x, x);
      m.attach["root"] = v[0];
      return m;
    }
    case Blueprint::Hungry: {
      int w0 = m.add("w0");
      auto v = spine("v", 1, depth);
      if (!v.empty()) m.edges.emplace_back(w0, v[0]);
      for (int x : v) m.edges.emplace_back(x, x);
      for (int r = 1; r <= b.count; ++r) {
        int prev = w0;
        for (int i = 1; i <= depth; ++i) {
          int x = m.add("R" + std::to_string(r) + "." + std::to_string(i));
          m.edges.emplace_back(prev, x);
          prev = x;
        }
      }
      m.attach["root"] = w0;
      return m;
    }
    case Blueprint::Millipede: {
      auto v = spine("v", 0, depth);
      for (std::size_t i = 1; i < v.size(); ++i) {
        m.edges.emplace_back(v[i], v[i]);
        int prev = v[i];
        for (int k = 1; k + static_cast<int>(i) <= depth; ++k) {
          int x = m.add("R" + std::to_string(i) + "." + std::to_string(k));
          m.edges.emplace_back(prev, x);
          prev = x;
        }
      }
      m.attach["root"] = v[0];
      return m;
    }
    case Blueprint::Ladder: {
      auto v = spine("v", -depth, depth);
      for (int x : v) m.edges.emplace_back(x, x);
      m.attach["root"] = v[static_cast<std::size_t>(depth)];
      return m;
    }
    case Blueprint::Wedge: {
      Materialized l = materialize(*b.left, depth);
      Materialized r = materialize(*b.right, depth + finite_size(*b.right) + 1);
      m = l;
      int here = l.attach.at(b.at.first), there = r.attach.at(b.at.second);
      auto map = m.absorb(r, "right.", there, here);
      for (const auto& [name, v] : r.attach) m.attach["right." + name] = map[static_cast<std::size_t>(v)];
      return m;
    }
    case Blueprint::Comb: {
      auto s = spine("s", 0, depth);
      for (int i = 1; i <= depth; ++i) {
        Materialized t = materialize(*b.left, depth - i);
        m.absorb(t, "t" + std::to_string(i) + "/", t.attach.at("root"), s[static_cast<std::size_t>(i)]);
      }
      m.attach["root"] = s[0];
      return m;
    }
    case Blueprint::TreeSpray: {
      // binary tree addresses: "" root, then strings over {0,1}
      std::vector<std::pair<std::string, int>> level{{"", m.add("b")}};
      for (int d = 0; d <= depth; ++d) {
        std::vector<std::pair<std::string, int>> next;
        for (auto& [addr, id] : level) {
          if (b.left) {
            Materialized t = materialize(*b.left, depth - d);
            m.absorb(t, "b" + addr + "/", t.attach.at("root"), id);
          }
          if (d == depth) continue;
          for (char c : {'0', '1'}) {
            int child = m.add("b" + addr + c);
            m.edges.emplace_back(id, child);
            next.push_back({addr + c, child});
          }
        }
        level = std::move(next);
      }
      m.attach["root"] = 0;
      return m;
    }
  }
  return m;
}

}  // namespace detail

// Ball of the given radius about the root. Loops count when their vertex is
// strictly inside; other edges when both ends are within the radius.
inline Truncation truncate(const Blueprint& b, int radius) {
  if (radius < 0) throw DomainError("bad-radius", "radius must be non-negative");
  detail::Materialized m = detail::materialize(b, radius + 1);
  std::size_t n = m.names.size();
  std::vector<std::vector<int>> adj(n);
  for (auto [u, v] : m.edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  std::vector<int> dist(n, -1);
  int root = m.attach.at("root");
  std::deque<int> q{root};
  dist[static_cast<std::size_t>(root)] = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int u : adj[static_cast<std::size_t>(v)])
      if (dist[static_cast<std::size_t>(u)] < 0) {
        dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
        q.push_back(u);
      }
  }
  Truncation t;
  std::vector<int> id(n, -1);
  std::vector<std::size_t> order;
  for (std::size_t v = 0; v < n; ++v)
    if (dist[v] >= 0 && dist[v] <= radius) order.push_back(v);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return std::tie(dist[a], m.names[a]) < std::tie(dist[c], m.names[c]); });
  for (std::size_t v : order) {
    id[v] = t.vertex_count();
    t.names.push_back(m.names[v]);
    t.distance.push_back(dist[v]);
    t.boundary.push_back(false);
  }
  for (auto [u, v] : m.edges) {
    int a = id[static_cast<std::size_t>(u)], c = id[static_cast<std::size_t>(v)];
    bool keep = u == v ? (a >= 0 && dist[static_cast<std::size_t>(u)] < radius) : (a >= 0 && c >= 0);
    if (keep) {
      t.edges.emplace_back(std::min(a, c), std::max(a, c));
    } else {
      if (a >= 0) t.boundary[static_cast<std::size_t>(a)] = true;
      if (c >= 0) t.boundary[static_cast<std::size_t>(c)] = true;
    }
  }
  std::sort(t.edges.begin(), t.edges.end());
  return t;
}
inline Truncation truncate(const BlueprintPtr& b, int radius) { return truncate(*b, radius); }

}  // namespace pmap

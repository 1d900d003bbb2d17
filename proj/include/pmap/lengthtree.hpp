#pragma once
// Length function on graphs with one infinite-ended comb component, the
// dendrogram of the induced ultrametric, the leveled tree model with its
// action, full-length balls, bounded-geometry witnesses, and four-point
// hyperbolicity checks on finite metrics.

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmap/blueprint.hpp"
#include "pmap/classify.hpp"
#include "pmap/error.hpp"
#include "pmap/mcg.hpp"

namespace pmap {

// A graph whose core complement has exactly one component with infinitely
// many ends. `component` is the vertex-name prefix of that component in
// truncations; `elements` is set when an element family is registered on it.
struct CombContext {
  BlueprintPtr graph;
  std::string component;
  std::optional<GraphSpec> elements;

  // Loch Ness with a comb of rays attached at its first loop.
  static BlueprintPtr comb_blueprint() {
    return Blueprint::wedge(Blueprint::lochness(), Blueprint::comb(Blueprint::finite(1, {}, {0})));
  }
  static CombContext registered() { return {comb_blueprint(), "right.", GraphSpec{GraphSpec::Comb, 0}}; }

  nlohmann::json to_json() const {
    return {{"graph", graph->to_json()},
            {"component", component},
            {"elements", elements ? nlohmann::json(elements->name()) : nlohmann::json(nullptr)}};
  }
};

namespace detail {

inline void collect_tree_components(const BlueprintPtr& b, const std::string& prefix, std::vector<std::string>& out) {
  if (b->ctor == Blueprint::Wedge) {
    collect_tree_components(b->left, prefix, out);
    collect_tree_components(b->right, prefix + "right.", out);
    return;
  }
  if (b->ctor != Blueprint::Comb && b->ctor != Blueprint::TreeSpray) return;
  EndProfile p = end_profile(b);
  if (p.rank.is(0) && p.endCount.infinite()) out.push_back(prefix);
}

inline void require_comb_element(const MappingClass& g, const CombContext& ctx) {
  if (!ctx.elements) throw DomainError("no-comb-context", "no element family is registered on this graph");
  if (!(g.graph() == *ctx.elements))
    throw DomainError("no-comb-context", "element lives on " + g.graph().name() + ", not on " + ctx.elements->name());
}

}  // namespace detail

// Rejects graphs whose core complement has zero or several infinite-ended
// components, and components the truncation model cannot locate.
inline CombContext full_length_context(const BlueprintPtr& b) {
  EndProfile p = end_profile(b);
  if (!p.infiniteEndComponents.is(1))
    throw DomainError("not-one-comb", "the core complement has " + p.infiniteEndComponents.str() +
                                          " components with infinitely many ends; exactly one is needed");
  std::vector<std::string> found;
  detail::collect_tree_components(b, "", found);
  if (found.size() != 1) throw DomainError("unsupported-graph", "cannot locate the infinite-ended component as a wedge summand");
  CombContext ctx{b, found.front(), std::nullopt};
  if (b->to_json() == CombContext::comb_blueprint()->to_json()) ctx.elements = GraphSpec{GraphSpec::Comb, 0};
  return ctx;
}

// 0 when no tooth drifts, else one more than the largest drifting tooth.
inline int length(const MappingClass& g, const CombContext& ctx = CombContext::registered()) {
  detail::require_comb_element(g, ctx);
  int top = 0;
  for (const auto& [ray, w] : g.drift())
    if (ray.kind == 'T' && !w.is_identity()) top = std::max(top, ray.index);
  return top == 0 ? 0 : top + 1;
}

inline int distance(const MappingClass& g, const MappingClass& h, const CombContext& ctx = CombContext::registered()) {
  return length(g.inverse() * h, ctx);
}

// Reference evaluation of the length by enumerating lines between the ends
// visible in a truncation of the comb graph. A line joins two of: a tooth end
// or the spine end. It is moved iff its two ends drift by different words,
// and its distance to the core is the least core distance along it.
inline int length_by_lines(const MappingClass& g, int radius) {
  CombContext ctx = CombContext::registered();
  detail::require_comb_element(g, ctx);
  Truncation t = truncate(ctx.graph, radius);
  const std::string& pre = ctx.component;
  std::size_t n = t.names.size();
  auto in_comb = [&](std::size_t v) { return t.names[v].rfind(pre, 0) == 0; };
  std::vector<std::vector<int>> adj(n);
  for (auto [u, v] : t.edges)
    if (u != v) {
      adj[static_cast<std::size_t>(u)].push_back(v);
      adj[static_cast<std::size_t>(v)].push_back(u);
    }
  auto bfs = [&](std::vector<int> from, bool comb_only) {
    std::vector<int> d(n, -1);
    std::deque<int> q;
    for (int v : from) {
      d[static_cast<std::size_t>(v)] = 0;
      q.push_back(v);
    }
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int u : adj[static_cast<std::size_t>(v)])
        if (d[static_cast<std::size_t>(u)] < 0 && (!comb_only || in_comb(static_cast<std::size_t>(u)))) {
          d[static_cast<std::size_t>(u)] = d[static_cast<std::size_t>(v)] + 1;
          q.push_back(u);
        }
    }
    return d;
  };
  std::vector<int> core;
  for (std::size_t v = 0; v < n; ++v)
    if (!in_comb(v)) core.push_back(static_cast<int>(v));
  std::vector<int> core_dist = bfs(core, false);

  // ends: boundary vertices of the comb, labelled by tooth (0 = spine)
  struct End {
    int vertex, tooth;
  };
  std::vector<End> ends;
  for (std::size_t v = 0; v < n; ++v) {
    if (!in_comb(v) || !t.boundary[v]) continue;
    std::string rest = t.names[v].substr(pre.size());
    if (rest[0] == 't') ends.push_back({static_cast<int>(v), std::stoi(rest.substr(1))});
    else if (rest[0] == 's') ends.push_back({static_cast<int>(v), 0});
  }
  auto drift_of = [&](int tooth) { return tooth == 0 ? Word() : g.drift({'T', tooth}); };

  int need = 0;
  for (std::size_t a = 0; a < ends.size(); ++a) {
    std::vector<int> d = bfs({ends[a].vertex}, true);
    for (std::size_t b = a + 1; b < ends.size(); ++b) {
      if (drift_of(ends[a].tooth) == drift_of(ends[b].tooth)) continue;
      // walk back along the geodesic from b to a
      int v = ends[b].vertex, closest = core_dist[static_cast<std::size_t>(v)];
      while (d[static_cast<std::size_t>(v)] > 0) {
        for (int u : adj[static_cast<std::size_t>(v)])
          if (in_comb(static_cast<std::size_t>(u)) && d[static_cast<std::size_t>(u)] == d[static_cast<std::size_t>(v)] - 1) {
            v = u;
            break;
          }
        closest = std::min(closest, core_dist[static_cast<std::size_t>(v)]);
      }
      need = std::max(need, closest + 1);
    }
  }
  return need;
}

// ---------------------------------------------------------------- metrics

using DistanceMatrix = std::vector<std::vector<double>>;

constexpr double kMetricTolerance = 1e-12;

inline void require_metric(const DistanceMatrix& d) {
  std::size_t n = d.size();
  for (const auto& row : d)
    if (row.size() != n) throw DomainError("not-a-metric", "distance table is not square");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(d[i][i]) > kMetricTolerance) throw DomainError("not-a-metric", "nonzero diagonal entry");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(d[i][j]) || d[i][j] < 0) throw DomainError("not-a-metric", "negative or non-finite distance");
      if (std::abs(d[i][j] - d[j][i]) > kMetricTolerance) throw DomainError("not-a-metric", "distance table is not symmetric");
      if (i != j && d[i][j] <= kMetricTolerance) throw DomainError("not-a-metric", "distinct points at distance zero");
      for (std::size_t k = 0; k < n; ++k)
        if (d[i][k] > d[i][j] + d[j][k] + kMetricTolerance) throw DomainError("not-a-metric", "triangle inequality fails");
    }
  }
}

inline bool is_ultrametric(const DistanceMatrix& d) {
  require_metric(d);
  std::size_t n = d.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (d[i][k] > std::max(d[i][j], d[j][k]) + kMetricTolerance) return false;
  return true;
}

// (x,y)_w = (d(x,w) + d(y,w) - d(x,y)) / 2
inline double gromov_product(const DistanceMatrix& d, std::size_t x, std::size_t y, std::size_t w) {
  return (d[x][w] + d[y][w] - d[x][y]) / 2;
}

// Largest four-point defect: over all quadruples, half the gap between the
// largest and the middle of the three pairing sums.
inline double hyperbolicity_delta(const DistanceMatrix& d) {
  require_metric(d);
  std::size_t n = d.size();
  double delta = 0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y)
      for (std::size_t z = y + 1; z < n; ++z)
        for (std::size_t w = z + 1; w < n; ++w) {
          double s[3] = {d[x][y] + d[z][w], d[x][z] + d[y][w], d[x][w] + d[y][z]};
          std::sort(s, s + 3);
          delta = std::max(delta, (s[2] - s[1]) / 2);
        }
  return delta;
}

// Whitespace table, one row per line; blank lines and '#' comments skipped.
inline DistanceMatrix parse_distance_table(std::istream& in) {
  DistanceMatrix d;
  std::string line;
  while (std::getline(in, line)) {
    if (auto c = line.find('#'); c != std::string::npos) line.erase(c);
    std::istringstream row(line);
    std::vector<double> r;
    std::string cell;
    while (row >> cell) {
      try {
        std::size_t used = 0;
        r.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw ParseError("bad distance '" + cell + "'");
      } catch (const std::logic_error&) {
        throw ParseError("bad distance '" + cell + "'");
      }
    }
    if (!r.empty()) d.push_back(std::move(r));
  }
  for (const auto& r : d)
    if (r.size() != d.size()) throw ParseError("distance table must be square");
  return d;
}

// ------------------------------------------------------------ dendrogram

// Leaves are the distance-zero classes of the inputs. Heights are stored
// doubled so they stay integral; a leaf-to-leaf path has length equal to the
// doubled height of the meeting node.
struct UltraTree {
  struct Node {
    int height2 = 0;
    int parent = -1;
    std::vector<int> children;
    int leaf = -1;
  };
  std::vector<std::vector<int>> leaves;  // input positions in each class
  std::vector<int> leaf_length;
  std::vector<std::vector<int>> distance;
  std::vector<Node> nodes;  // leaves occupy nodes[0..leaves.size())
  int root = -1;

  int leaf_count() const { return static_cast<int>(leaves.size()); }
  double height(int node) const { return nodes[static_cast<std::size_t>(node)].height2 / 2.0; }

  int meet(int a, int b) const {
    std::set<int> up;
    for (int v = a; v >= 0; v = nodes[static_cast<std::size_t>(v)].parent) up.insert(v);
    for (int v = b; v >= 0; v = nodes[static_cast<std::size_t>(v)].parent)
      if (up.count(v)) return v;
    return -1;
  }
  int path_length(int a, int b) const { return a == b ? 0 : nodes[static_cast<std::size_t>(meet(a, b))].height2; }
  double gromov_at_identity(int a, int b) const {
    return (leaf_length[static_cast<std::size_t>(a)] + leaf_length[static_cast<std::size_t>(b)] -
            distance[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) /
           2.0;
  }

  DistanceMatrix metric() const {
    DistanceMatrix d(leaves.size(), std::vector<double>(leaves.size()));
    for (std::size_t i = 0; i < leaves.size(); ++i)
      for (std::size_t j = 0; j < leaves.size(); ++j) d[i][j] = distance[i][j];
    return d;
  }

  std::string to_dot() const {
    std::string s = "graph dendrogram {\n";
    for (std::size_t v = 0; v < nodes.size(); ++v) {
      const Node& x = nodes[v];
      std::string label;
      if (x.leaf >= 0) {
        for (int i : leaves[static_cast<std::size_t>(x.leaf)]) label += (label.empty() ? "g" : ",g") + std::to_string(i);
        s += "  n" + std::to_string(v) + " [shape=box,label=\"" + label + "\"];\n";
      } else {
        std::ostringstream h;
        h << x.height2 / 2.0;
        s += "  n" + std::to_string(v) + " [label=\"" + h.str() + "\"];\n";
      }
    }
    for (std::size_t v = 0; v < nodes.size(); ++v)
      if (nodes[v].parent >= 0) s += "  n" + std::to_string(nodes[v].parent) + " -- n" + std::to_string(v) + ";\n";
    return s + "}\n";
  }

  nlohmann::json to_json() const {
    nlohmann::json ns = nlohmann::json::array();
    for (const Node& x : nodes)
      ns.push_back({{"height", x.height2 / 2.0}, {"parent", x.parent}, {"children", x.children}, {"leaf", x.leaf}});
    nlohmann::json gp = nlohmann::json::array();
    for (int a = 0; a < leaf_count(); ++a) {
      nlohmann::json row = nlohmann::json::array();
      for (int b = 0; b < leaf_count(); ++b) row.push_back(gromov_at_identity(a, b));
      gp.push_back(row);
    }
    return {{"schema", 1},       {"leaves", leaves}, {"lengths", leaf_length}, {"distances", distance},
            {"nodes", ns},       {"root", root},     {"gromovAtIdentity", gp}};
  }
};

// Merges every group of clusters joined at the next distance into one node,
// so heights strictly increase toward the root.
inline UltraTree dendrogram(const std::vector<std::vector<int>>& dist) {
  UltraTree t;
  std::size_t n = dist.size();
  t.distance = dist;
  for (std::size_t i = 0; i < n; ++i) {
    UltraTree::Node leaf;
    leaf.leaf = static_cast<int>(i);
    t.nodes.push_back(leaf);
  }
  if (n == 0) return t;
  std::vector<int> cluster_of(n);
  std::iota(cluster_of.begin(), cluster_of.end(), 0);  // leaf -> current top node
  std::set<int> levels;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) levels.insert(dist[i][j]);
  for (int h : levels) {
    // union-find over current top nodes
    std::map<int, int> parent;
    std::function<int(int)> find = [&](int x) {
      auto it = parent.find(x);
      if (it == parent.end() || it->second == x) return x;
      return it->second = find(it->second);
    };
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (dist[i][j] <= h) {
          int a = find(cluster_of[i]), b = find(cluster_of[j]);
          if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    std::map<int, std::set<int>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[find(cluster_of[i])].insert(cluster_of[i]);
    std::map<int, int> new_top;
    for (const auto& [rep, members] : groups) {
      if (members.size() < 2) continue;
      int id = static_cast<int>(t.nodes.size());
      UltraTree::Node node;
      node.height2 = h;
      for (int m : members) {
        node.children.push_back(m);
        t.nodes[static_cast<std::size_t>(m)].parent = id;
      }
      t.nodes.push_back(node);
      for (int m : members) new_top[m] = id;
    }
    for (auto& c : cluster_of)
      if (auto it = new_top.find(c); it != new_top.end()) c = it->second;
  }
  t.root = cluster_of[0];
  return t;
}

inline UltraTree ultratree(const std::vector<MappingClass>& elements, const CombContext& ctx = CombContext::registered()) {
  std::vector<MappingClass> reps;
  std::vector<std::vector<int>> classes;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    std::size_t c = 0;
    while (c < reps.size() && distance(reps[c], elements[i], ctx) != 0) ++c;
    if (c == reps.size()) {
      reps.push_back(elements[i]);
      classes.emplace_back();
    }
    classes[c].push_back(static_cast<int>(i));
  }
  std::vector<std::vector<int>> dist(reps.size(), std::vector<int>(reps.size(), 0));
  for (std::size_t a = 0; a < reps.size(); ++a)
    for (std::size_t b = a + 1; b < reps.size(); ++b) dist[a][b] = dist[b][a] = distance(reps[a], reps[b], ctx);
  UltraTree t = dendrogram(dist);
  if (!is_ultrametric(t.metric())) throw std::logic_error("element distances are not an ultrametric");
  t.leaves = std::move(classes);
  for (const auto& r : reps) t.leaf_length.push_back(length(r, ctx));
  return t;
}

// Finite shadow of one-endedness: any two leaves branch apart at least half
// the smaller of their lengths away from the identity.
inline bool branches_far_from_identity(const UltraTree& t) {
  for (int a = 0; a < t.leaf_count(); ++a)
    for (int b = a + 1; b < t.leaf_count(); ++b)
      if (t.gromov_at_identity(a, b) <
          std::min(t.leaf_length[static_cast<std::size_t>(a)], t.leaf_length[static_cast<std::size_t>(b)]) / 2.0)
        return false;
  return true;
}

// ------------------------------------------------------------ leveled tree

// (level, f) with f a finitely supported map from teeth >= level to words.
struct LeveledVertex {
  int level = 1;
  std::map<int, Word> values;  // nontrivial entries only

  static LeveledVertex make(int level, const std::map<int, Word>& f) {
    if (level < 1) throw DomainError("bad-level", "levels are positive integers");
    LeveledVertex v;
    v.level = level;
    for (const auto& [i, w] : f) {
      if (i < level) throw DomainError("bad-level", "value at tooth " + std::to_string(i) + " below level " + std::to_string(level));
      if (!w.is_identity()) v.values[i] = w;
    }
    return v;
  }

  Word at(int i) const {
    auto it = values.find(i);
    return it == values.end() ? Word() : it->second;
  }

  // levels differ by one and the maps agree where both are defined
  bool adjacent(const LeveledVertex& o) const {
    if (std::abs(level - o.level) != 1) return false;
    int from = std::max(level, o.level);
    std::set<int> keys;
    for (const auto& [i, w] : values) keys.insert(i);
    for (const auto& [i, w] : o.values) keys.insert(i);
    for (int i : keys)
      if (i >= from && at(i) != o.at(i)) return false;
    return true;
  }

  friend bool operator==(const LeveledVertex&, const LeveledVertex&) = default;

  nlohmann::json to_json() const {
    nlohmann::json f = nlohmann::json::object();
    for (const auto& [i, w] : values) f[std::to_string(i)] = w.str();
    return {{"level", level}, {"values", f}};
  }
  static LeveledVertex from_json(const nlohmann::json& j) {
    try {
      std::map<int, Word> f;
      if (j.contains("values"))
        for (const auto& [k, w] : j.at("values").items()) f[std::stoi(k)] = Word::parse(w.get<std::string>());
      return make(j.at("level").get<int>(), f);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad leveled vertex: ") + e.what());
    } catch (const std::invalid_argument&) {
      throw ParseError("bad leveled vertex: tooth keys must be integers");
    }
  }
};

// (phi . f)(i) = w_i . core(f(i)), w_i the tooth-i drift of phi.
inline LeveledVertex leveled_action(const MappingClass& phi, const LeveledVertex& v,
                                    const CombContext& ctx = CombContext::registered()) {
  detail::require_comb_element(phi, ctx);
  std::set<int> teeth;
  for (const auto& [i, w] : v.values) teeth.insert(i);
  for (const auto& [ray, w] : phi.drift())
    if (ray.kind == 'T' && ray.index >= v.level) teeth.insert(ray.index);
  std::map<int, Word> out;
  for (int i : teeth) out[i] = phi.drift({'T', i}) * phi.core().apply(v.at(i));
  return LeveledVertex::make(v.level, out);
}

// The product of tooth word maps carrying (level, trivial map) to v.
inline MappingClass leveled_transport(const LeveledVertex& v) {
  GraphSpec comb{GraphSpec::Comb, 0};
  DriftMap d;
  for (const auto& [i, w] : v.values) d[{'T', i}] = w;
  return MappingClass::from_parts(comb, TailedAut(comb.indexing()), d);
}

// ------------------------------------------------- balls, bounded geometry

struct CbBall {
  int level = 0;
  int rays = 0;  // the ball is a monster graph with this many rays
  std::string monster;
  ClassificationReport report;

  nlohmann::json to_json() const {
    return {{"schema", 1}, {"level", level}, {"rays", rays}, {"monster", monster}, {"classification", report.to_json()}};
  }
};

// The open ball of radius n about the core keeps the core and cuts the comb
// at every crossing of core distance n; each cut on the way to infinitely
// many ends becomes a ray. n = 0 keeps one ray for the whole comb.
inline CbBall cb_ball(const CombContext& ctx, int n) {
  if (n < 0) throw DomainError("bad-level", "ball radius must be non-negative");
  if (!ctx.elements) throw DomainError("unsupported-graph", "balls are computed on the registered comb graph only");
  int cut = std::max(n, 1);
  Truncation t = truncate(ctx.graph, cut + 2);
  std::size_t sz = t.names.size();
  auto in_comb = [&](std::size_t v) { return t.names[v].rfind(ctx.component, 0) == 0; };
  std::vector<std::vector<int>> adj(sz);
  for (auto [u, v] : t.edges)
    if (u != v) {
      adj[static_cast<std::size_t>(u)].push_back(v);
      adj[static_cast<std::size_t>(v)].push_back(u);
    }
  std::vector<int> d(sz, -1);
  std::deque<int> q;
  for (std::size_t v = 0; v < sz; ++v)
    if (!in_comb(v)) {
      d[v] = 0;
      q.push_back(static_cast<int>(v));
    }
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int u : adj[static_cast<std::size_t>(v)])
      if (d[static_cast<std::size_t>(u)] < 0) {
        d[static_cast<std::size_t>(u)] = d[static_cast<std::size_t>(v)] + 1;
        q.push_back(u);
      }
  }
  // does the side of edge (from -> to) away from `from` reach the boundary?
  auto unbounded = [&](int from, int to) {
    std::vector<bool> seen(sz, false);
    seen[static_cast<std::size_t>(from)] = seen[static_cast<std::size_t>(to)] = true;
    std::deque<int> w{to};
    while (!w.empty()) {
      int v = w.front();
      w.pop_front();
      if (t.boundary[static_cast<std::size_t>(v)]) return true;
      for (int u : adj[static_cast<std::size_t>(v)])
        if (!seen[static_cast<std::size_t>(u)]) {
          seen[static_cast<std::size_t>(u)] = true;
          w.push_back(u);
        }
    }
    return false;
  };
  CbBall ball;
  ball.level = n;
  for (auto [u, v] : t.edges) {
    if (u == v) continue;
    int a = u, b = v;
    if (d[static_cast<std::size_t>(a)] > d[static_cast<std::size_t>(b)]) std::swap(a, b);
    if (!in_comb(static_cast<std::size_t>(b))) continue;
    if (d[static_cast<std::size_t>(a)] == cut - 1 && d[static_cast<std::size_t>(b)] == cut && unbounded(a, b)) ++ball.rays;
  }
  BlueprintPtr monster = ball.rays == 0 ? Blueprint::lochness() : Blueprint::hungry(ball.rays);
  ball.monster = ball.rays == 0 ? "lochness" : "hungry:" + std::to_string(ball.rays);
  ball.report = classify(end_profile(monster));
  return ball;
}

// An element of length n + 1 outside every translate f H_n, f in F.
// Each f rules out exactly one word on tooth n, so |F| + 1 single-letter
// candidates always suffice.
inline MappingClass bounded_geometry_witness(int n, const std::vector<MappingClass>& F,
                                             const CombContext& ctx = CombContext::registered()) {
  if (n < 1) throw DomainError("bad-level", "lengths 0 and 1 give the same ball; start at n = 1");
  if (!ctx.elements) throw DomainError("no-comb-context", "no element family is registered on this graph");
  for (const auto& f : F) detail::require_comb_element(f, ctx);
  for (int k = 1; k <= static_cast<int>(F.size()) + 1; ++k) {
    DriftMap d;
    d[{'T', n}] = Word::gen(k);
    MappingClass g = MappingClass::from_parts(*ctx.elements, TailedAut(ctx.elements->indexing()), d);
    bool ok = true;
    for (const auto& f : F)
      if (distance(f, g, ctx) <= n) {
        ok = false;
        break;
      }
    if (ok) return g;
  }
  throw std::logic_error("no bounded-geometry witness among |F| + 1 candidates");
}

}  // namespace pmap

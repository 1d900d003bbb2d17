#pragma once
// Reduced words, Stallings graphs and free factors over an integer-indexed basis.

#include <algorithm>
#include <cctype>
#include <compare>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pmap/error.hpp"

namespace pmap {

struct Letter {
  int gen = 0;
  bool inv = false;
  Letter inverse() const { return {gen, !inv}; }
  friend auto operator<=>(const Letter&, const Letter&) = default;
};

class Word {
 public:
  Word() = default;

  static Word gen(int g, bool inverted = false) {
    Word w;
    w.s_.push_back({g, inverted});
    return w;
  }

  static Word from_letters(const std::vector<Letter>& ls) {
    Word w;
    for (const auto& l : ls) w.push(l);
    return w;
  }

  const std::vector<Letter>& letters() const { return s_; }
  std::size_t size() const { return s_.size(); }
  bool is_identity() const { return s_.empty(); }

  Word inverse() const {
    Word w;
    w.s_.reserve(s_.size());
    for (auto it = s_.rbegin(); it != s_.rend(); ++it) w.s_.push_back(it->inverse());
    return w;
  }

  friend Word operator*(const Word& a, const Word& b) {
    Word w = a;
    for (const auto& l : b.s_) w.push(l);
    return w;
  }
  Word& operator*=(const Word& b) {
    for (const auto& l : b.s_) push(l);
    return *this;
  }

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word& a, const Word& b) { return a.s_ <=> b.s_; }

  std::set<int> support() const {
    std::set<int> out;
    for (const auto& l : s_) out.insert(l.gen);
    return out;
  }
  bool uses(int g) const {
    return std::any_of(s_.begin(), s_.end(), [g](const Letter& l) { return l.gen == g; });
  }

  // Substitute every basis letter a_g by img(g).
  template <class F>
  Word substitute(F&& img) const {
    Word out;
    for (const auto& l : s_) {
      Word piece = img(l.gen);
      out *= l.inv ? piece.inverse() : piece;
    }
    return out;
  }

  std::string str() const {
    if (s_.empty()) return "1";
    std::string out;
    for (std::size_t i = 0; i < s_.size(); ++i) {
      if (i) out += ' ';
      out += s_[i].inv ? 'A' : 'a';
      out += std::to_string(s_[i].gen);
    }
    return out;
  }

  // `a1 A2 a-3`, capitals invert; `1` or blank is the identity.
  static Word parse(std::string_view text) {
    Word w;
    std::size_t i = 0;
    auto skip = [&] {
      while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == '*')) ++i;
    };
    skip();
    while (i < text.size()) {
      char c = text[i];
      if (c == '1' && (i + 1 == text.size() || !std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
        ++i;
        skip();
        continue;
      }
      if (c != 'a' && c != 'A') throw ParseError("bad letter in word '" + std::string(text) + "'");
      ++i;
      bool neg = false;
      if (i < text.size() && text[i] == '-') {
        neg = true;
        ++i;
      }
      std::size_t st = i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      if (st == i) throw ParseError("missing index in word '" + std::string(text) + "'");
      int g = std::stoi(std::string(text.substr(st, i - st)));
      if (neg) g = -g;
      w.push({g, c == 'A'});
      skip();
    }
    return w;
  }

 private:
  void push(const Letter& l) {
    if (!s_.empty() && s_.back() == l.inverse())
      s_.pop_back();
    else
      s_.push_back(l);
  }
  std::vector<Letter> s_;
};

inline Word conjugate(const Word& x, const Word& w) { return x * w * x.inverse(); }

// If w = x a_g x^-1 (reduced), return x.
inline std::optional<Word> conjugator_of(const Word& w, int g) {
  const auto& s = w.letters();
  if (s.size() % 2 == 0) return std::nullopt;
  std::size_t mid = s.size() / 2;
  if (s[mid] != Letter{g, false}) return std::nullopt;
  for (std::size_t k = 0; k < mid; ++k)
    if (s[k] != s[s.size() - 1 - k].inverse()) return std::nullopt;
  return Word::from_letters({s.begin(), s.begin() + static_cast<long>(mid)});
}

// ---------------------------------------------------------------------------
// Labeled graphs and folding.

struct LabeledEdge {
  int from = 0, to = 0, gen = 0;
  friend auto operator<=>(const LabeledEdge&, const LabeledEdge&) = default;
};

struct LabeledGraph {
  int vertices = 1;
  int base = 0;
  std::vector<LabeledEdge> edges;

  int add_vertex() { return vertices++; }

  // Petal for w starting and ending at the basepoint.
  void add_petal(const Word& w) {
    if (w.is_identity()) return;
    int cur = base;
    const auto& s = w.letters();
    for (std::size_t k = 0; k < s.size(); ++k) {
      int nxt = (k + 1 == s.size()) ? base : add_vertex();
      if (s[k].inv)
        edges.push_back({nxt, cur, s[k].gen});
      else
        edges.push_back({cur, nxt, s[k].gen});
      cur = nxt;
    }
  }

  static LabeledGraph bouquet(const std::vector<Word>& gens) {
    LabeledGraph g;
    for (const auto& w : gens) g.add_petal(w);
    return g;
  }
};

class StallingsGraph {
 public:
  StallingsGraph() : adj_(1) {}

  // Folded core at the basepoint, canonically relabelled (basepoint is 0).
  static StallingsGraph fold(const LabeledGraph& in) {
    std::vector<int> parent(static_cast<std::size_t>(in.vertices));
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<std::map<Letter, int>> adj(static_cast<std::size_t>(in.vertices));
    auto find = [&](int v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    std::vector<std::pair<int, int>> pending;
    auto attach = [&](int v, Letter l, int w) {
      auto it = adj[v].find(l);
      if (it == adj[v].end())
        adj[v][l] = w;
      else
        pending.push_back({it->second, w});
    };
    auto drain = [&] {
      while (!pending.empty()) {
        auto [x, y] = pending.back();
        pending.pop_back();
        x = find(x);
        y = find(y);
        if (x == y) continue;
        if (adj[x].size() < adj[y].size()) std::swap(x, y);
        parent[y] = x;
        auto moved = std::move(adj[y]);
        adj[y].clear();
        for (auto& [l, w] : moved) attach(x, l, w);
      }
    };
    for (const auto& e : in.edges) {
      attach(find(e.from), Letter{e.gen, false}, e.to);
      drain();
      attach(find(e.to), Letter{e.gen, true}, e.from);
      drain();
    }
    std::set<LabeledEdge> es;
    for (int v = 0; v < in.vertices; ++v) {
      if (find(v) != v) continue;
      for (auto& [l, w] : adj[v])
        if (!l.inv) es.insert({v, find(w), l.gen});
    }
    return from_edges(find(in.base), {es.begin(), es.end()});
  }

  static StallingsGraph of(const std::vector<Word>& gens) { return fold(LabeledGraph::bouquet(gens)); }

  int vertex_count() const { return static_cast<int>(adj_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int rank() const { return edge_count() - vertex_count() + 1; }
  const std::vector<LabeledEdge>& edges() const { return edges_; }

  bool contains(const Word& w) const {
    int v = 0;
    for (const auto& l : w.letters()) {
      auto it = adj_[v].find(l);
      if (it == adj_[v].end()) return false;
      v = it->second;
    }
    return v == 0;
  }

  // Free basis read off a BFS spanning tree.
  std::vector<Word> basis() const {
    std::vector<Word> to(adj_.size());
    std::vector<bool> seen(adj_.size(), false);
    std::set<std::size_t> tree_edges;
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (const auto& [l, w] : adj_[v]) {
        if (seen[w]) continue;
        seen[w] = true;
        to[w] = to[v] * Word::gen(l.gen, l.inv);
        tree_edges.insert(edge_index(l.inv ? w : v, l.gen));
        q.push(w);
      }
    }
    std::vector<Word> out;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      if (tree_edges.count(i)) continue;
      const auto& e = edges_[i];
      out.push_back(to[e.from] * Word::gen(e.gen) * to[e.to].inverse());
    }
    return out;
  }

  std::set<int> labels() const {
    std::set<int> out;
    for (const auto& e : edges_) out.insert(e.gen);
    return out;
  }

  // True when the graph is the rose with one petal per letter of `gens`.
  bool is_rose_on(const std::set<int>& gens) const {
    return vertex_count() == 1 && labels() == gens && edge_count() == static_cast<int>(gens.size());
  }

  // Fiber product at the pair of basepoints, followed by core extraction.
  friend StallingsGraph intersect(const StallingsGraph& a, const StallingsGraph& b) {
    std::map<std::pair<int, int>, int> id;
    std::vector<std::pair<int, int>> order;
    std::vector<LabeledEdge> es;
    auto get = [&](std::pair<int, int> p) {
      auto [it, fresh] = id.emplace(p, static_cast<int>(order.size()));
      if (fresh) order.push_back(p);
      return it->second;
    };
    get({0, 0});
    for (std::size_t k = 0; k < order.size(); ++k) {
      auto [u, v] = order[k];
      int src = static_cast<int>(k);
      for (const auto& [l, x] : a.adj_[u]) {
        if (l.inv) continue;
        auto it = b.adj_[v].find(l);
        if (it == b.adj_[v].end()) continue;
        es.push_back({src, get({x, it->second}), l.gen});
      }
      for (const auto& [l, x] : a.adj_[u]) {
        if (!l.inv) continue;
        auto it = b.adj_[v].find(l);
        if (it != b.adj_[v].end()) get({x, it->second});
      }
    }
    return from_edges(0, es);
  }

  std::string to_dot(const std::string& name = "stallings") const {
    std::ostringstream os;
    os << "digraph " << name << " {\n  0 [shape=doublecircle];\n";
    for (const auto& e : edges_) os << "  " << e.from << " -> " << e.to << " [label=\"a" << e.gen << "\"];\n";
    os << "}\n";
    return os.str();
  }

  friend bool operator==(const StallingsGraph& a, const StallingsGraph& b) { return a.edges_ == b.edges_ && a.adj_.size() == b.adj_.size(); }

 private:
  std::size_t edge_index(int from, int gen) const {
    for (std::size_t i = 0; i < edges_.size(); ++i)
      if (edges_[i].from == from && edges_[i].gen == gen) return i;
    return edges_.size();
  }

  // Prunes hanging trees away from `base`, then relabels by BFS in letter order.
  static StallingsGraph from_edges(int base, std::vector<LabeledEdge> es) {
    std::map<int, int> deg;
    deg[base];
    for (const auto& e : es) {
      deg[e.from]++;
      deg[e.to]++;
    }
    std::vector<bool> alive(es.size(), true);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < es.size(); ++i) {
        if (!alive[i]) continue;
        const auto& e = es[i];
        bool leaf_from = e.from != base && deg[e.from] == 1;
        bool leaf_to = e.to != base && deg[e.to] == 1;
        if (e.from != e.to && (leaf_from || leaf_to)) {
          alive[i] = false;
          deg[e.from]--;
          deg[e.to]--;
          changed = true;
        }
      }
    }
    std::map<int, std::map<Letter, int>> raw;
    for (std::size_t i = 0; i < es.size(); ++i) {
      if (!alive[i]) continue;
      raw[es[i].from][Letter{es[i].gen, false}] = es[i].to;
      raw[es[i].to][Letter{es[i].gen, true}] = es[i].from;
    }
    std::map<int, int> relabel;
    std::vector<int> order{base};
    relabel[base] = 0;
    for (std::size_t k = 0; k < order.size(); ++k)
      for (const auto& [l, w] : raw[order[k]])
        if (relabel.emplace(w, static_cast<int>(order.size())).second) order.push_back(w);
    StallingsGraph g;
    g.adj_.assign(order.size(), {});
    for (std::size_t k = 0; k < order.size(); ++k)
      for (const auto& [l, w] : raw[order[k]]) {
        g.adj_[k][l] = relabel[w];
        if (!l.inv) g.edges_.push_back({static_cast<int>(k), relabel[w], l.gen});
      }
    std::sort(g.edges_.begin(), g.edges_.end());
    return g;
  }

  std::vector<std::map<Letter, int>> adj_;
  std::vector<LabeledEdge> edges_;
};

// ---------------------------------------------------------------------------
// Finite-rank free factors. Only the three constructors below exist, so
// every handle is a free factor by construction.

class FreeFactor {
 public:
  static FreeFactor subgraph(const std::set<int>& letters) {
    std::vector<Word> g;
    for (int i : letters) g.push_back(Word::gen(i));
    return FreeFactor(g, "subgraph");
  }
  template <class Aut>
  static FreeFactor image(const Aut& phi, const FreeFactor& a) {
    std::vector<Word> g;
    for (const auto& w : a.gens_) g.push_back(phi.apply(w));
    return FreeFactor(g, "image");
  }
  static FreeFactor intersection(const FreeFactor& a, const FreeFactor& b) {
    auto s = intersect(a.graph_, b.graph_);
    return FreeFactor(s.basis(), "intersection");
  }

  int rank() const { return graph_.rank(); }
  bool contains(const Word& w) const { return graph_.contains(w); }
  const std::vector<Word>& generators() const { return gens_; }
  const StallingsGraph& graph() const { return graph_; }
  const std::string& origin() const { return origin_; }

  bool subgroup_of(const FreeFactor& f) const {
    return std::all_of(gens_.begin(), gens_.end(), [&](const Word& w) { return f.contains(w); });
  }

 private:
  FreeFactor(std::vector<Word> g, std::string origin)
      : gens_(std::move(g)), graph_(StallingsGraph::of(gens_)), origin_(std::move(origin)) {}
  std::vector<Word> gens_;
  StallingsGraph graph_;
  std::string origin_;
};

// Corank of `a` inside `f`; nullopt encodes an infinite corank.
using Corank = std::optional<long>;

inline long cork(const FreeFactor& f, const FreeFactor& a) {
  if (!a.subgroup_of(f)) throw DomainError("not-nested", "corank requested for a factor that is not contained in the ambient factor");
  return f.rank() - a.rank();
}

inline std::string corank_str(const Corank& c) { return c ? std::to_string(*c) : "inf"; }

}  // namespace pmap

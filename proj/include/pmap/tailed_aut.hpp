#pragma once
// Automorphisms of infinitely generated free groups that are "eventually a
// conjugated translation": a finite table of explicit images plus, off the
// table, a_i -> c_t a_{shift(i)} c_t^-1 where t is the tail (end) class of i.

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <optional>
#include <tuple>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "pmap/freegrp.hpp"

namespace pmap {

inline int floor_mod(long a, long m) { return static_cast<int>(((a % m) + m) % m); }

// How loop indices are arranged along the ends of a graph.
struct Indexing {
  enum Kind { Ray, Line, Star } kind = Ray;
  int legs = 1;  // Star only

  static Indexing ray() { return {Ray, 1}; }
  static Indexing line() { return {Line, 2}; }
  static Indexing star(int k) { return {Star, k}; }

  int classes() const { return kind == Ray ? 1 : (kind == Line ? 2 : legs); }
  bool valid(long i) const { return kind == Line || i >= 1; }
  // Line: class 0 holds i >= 1, class 1 holds i <= 0.
  int tail_class(int i) const {
    switch (kind) {
      case Ray: return 0;
      case Line: return i >= 1 ? 0 : 1;
      default: return (i - 1) % legs;
    }
  }
  int pos(int i) const {
    switch (kind) {
      case Ray: return i;
      case Line: return i >= 1 ? i : 1 - i;
      default: return (i - 1) / legs + 1;
    }
  }
  int index_of(int cls, int p) const {
    switch (kind) {
      case Ray: return p;
      case Line: return cls == 0 ? p : 1 - p;
      default: return legs * (p - 1) + cls + 1;
    }
  }
  friend bool operator==(const Indexing&, const Indexing&) = default;
};

// Periodic translation i -> i + disp[i mod period].
struct TailShift {
  int period = 1;
  std::vector<int> disp{0};

  int operator()(int i) const { return i + disp[static_cast<std::size_t>(floor_mod(i, period))]; }
  bool identity() const {
    return std::all_of(disp.begin(), disp.end(), [](int d) { return d == 0; });
  }
  int span() const {
    int k = 0;
    for (int d : disp) k = std::max(k, std::abs(d));
    return k;
  }
  void normalize() {
    for (int p = 1; p < period; ++p) {
      if (period % p) continue;
      bool ok = true;
      for (int r = 0; r < period && ok; ++r) ok = disp[static_cast<std::size_t>(r)] == disp[static_cast<std::size_t>(r % p)];
      if (ok) {
        disp.resize(static_cast<std::size_t>(p));
        period = p;
        return;
      }
    }
  }
  // (g after f)
  friend TailShift after(const TailShift& g, const TailShift& f) {
    TailShift r;
    r.period = std::lcm(g.period, f.period);
    r.disp.assign(static_cast<std::size_t>(r.period), 0);
    for (int i = 0; i < r.period; ++i) r.disp[static_cast<std::size_t>(i)] = g(f(i)) - i;
    r.normalize();
    return r;
  }
  friend bool operator==(const TailShift& a, const TailShift& b) {
    int p = std::lcm(a.period, b.period);
    for (int i = 0; i < p; ++i)
      if (a(i) != b(i)) return false;
    return true;
  }
};

class TailedAut {
 public:
  TailedAut() = default;
  explicit TailedAut(Indexing ix) : ix_(ix), conj_(static_cast<std::size_t>(ix.classes())) {}

  static TailedAut identity(Indexing ix) { return TailedAut(ix); }

  const Indexing& indexing() const { return ix_; }
  const std::map<int, Word>& table() const { return table_; }
  const TailShift& shift() const { return shift_; }
  const std::vector<Word>& conj() const { return conj_; }

  void set(int i, Word w) { table_[i] = std::move(w); }
  void set_shift(TailShift s) {
    s.normalize();
    shift_ = std::move(s);
  }
  void set_conj(int cls, Word w) { conj_[static_cast<std::size_t>(cls)] = std::move(w); }

  Word default_image(int i) const {
    return conjugate(conj_[static_cast<std::size_t>(ix_.tail_class(i))], Word::gen(shift_(i)));
  }
  Word image(int i) const {
    auto it = table_.find(i);
    return it != table_.end() ? it->second : default_image(i);
  }
  Word apply(const Word& w) const {
    return w.substitute([this](int g) { return image(g); });
  }

  bool is_identity() const {
    if (!shift_.identity()) return false;
    for (const auto& c : conj_)
      if (!c.is_identity()) return false;
    for (const auto& [i, w] : table_)
      if (w != Word::gen(i)) return false;
    return true;
  }

  // Indices whose images or conjugators are not the plain default.
  std::set<int> letters_touched() const {
    std::set<int> out;
    for (const auto& [i, w] : table_) {
      out.insert(i);
      for (int g : w.support()) out.insert(g);
    }
    for (const auto& c : conj_)
      for (int g : c.support()) out.insert(g);
    return out;
  }

  // Largest position (per class) touched by the table or conjugators.
  int reach() const {
    int r = 0;
    for (int g : letters_touched()) r = std::max(r, ix_.pos(g));
    return r;
  }

  // iota_x composed with this map.
  TailedAut conjugated(const Word& x) const {
    TailedAut r = *this;
    for (auto& [i, w] : r.table_) w = conjugate(x, w);
    for (auto& c : r.conj_) c = x * c;
    return r;
  }

  void prune() {
    for (auto it = table_.begin(); it != table_.end();) {
      if (ix_.valid(shift_(it->first)) && it->second == default_image(it->first))
        it = table_.erase(it);
      else
        ++it;
    }
  }

  // g after f.
  friend TailedAut compose(const TailedAut& g, const TailedAut& f) {
    if (!(g.ix_ == f.ix_)) throw DomainError("mixed-graphs", "automorphisms over different index sets");
    const Indexing& ix = f.ix_;
    TailedAut r(ix);
    r.shift_ = after(g.shift_, f.shift_);
    for (int t = 0; t < ix.classes(); ++t)
      r.conj_[static_cast<std::size_t>(t)] = g.apply(f.conj_[static_cast<std::size_t>(t)]) * g.conj_[static_cast<std::size_t>(t)];
    std::set<int> dom;
    for (const auto& [i, w] : f.table_) dom.insert(i);
    for (const auto& [j, w] : g.table_)
      for (int res = 0; res < f.shift_.period; ++res) {
        int i = j - f.shift_.disp[static_cast<std::size_t>(res)];
        if (floor_mod(i, f.shift_.period) == res && ix.valid(i)) dom.insert(i);
      }
    // Near the junction of the ends a translation may move an index into
    // another tail class; those images are computed explicitly.
    int band = f.shift_.span() + 1;
    for (int t = 0; t < ix.classes(); ++t)
      for (int p = 1; p <= band; ++p) {
        int i = ix.index_of(t, p);
        if (ix.tail_class(f.shift_(i)) != t) dom.insert(i);
      }
    for (int i : dom) r.table_[i] = g.apply(f.image(i));
    r.prune();
    return r;
  }

  friend bool operator==(const TailedAut& a, const TailedAut& b) {
    if (!(a.ix_ == b.ix_) || !(a.shift_ == b.shift_) || a.conj_ != b.conj_) return false;
    std::set<int> dom;
    for (const auto& [i, w] : a.table_) dom.insert(i);
    for (const auto& [i, w] : b.table_) dom.insert(i);
    for (int i : dom)
      if (a.image(i) != b.image(i)) return false;
    return true;
  }

  // Inverse of a map with trivial translation, by folding with groupoid
  // labels on a finite window plus one probe letter per tail class.
  TailedAut inverse_by_folding() const;

 private:
  Indexing ix_;
  std::map<int, Word> table_;
  TailShift shift_;
  std::vector<Word> conj_;
};

namespace detail {

// Folds the petal graph of images E_k with each edge carrying a word over the
// source alphabet. On success every source letter a_m gets the word
// expressing it in the images, i.e. the inverse automorphism.
inline std::optional<std::map<int, Word>> invert_by_labelled_folding(const std::map<int, Word>& images) {
  struct E {
    int from, to, gen;
    Word lam;
    bool alive = true;
  };
  std::vector<E> es;
  int nv = 1;
  for (const auto& [k, w] : images) {
    if (w.is_identity()) return std::nullopt;
    int cur = 0;
    const auto& s = w.letters();
    for (std::size_t q = 0; q < s.size(); ++q) {
      int nxt = (q + 1 == s.size()) ? 0 : nv++;
      Word lam = q == 0 ? Word::gen(k, s[q].inv) : Word();
      if (s[q].inv)
        es.push_back({nxt, cur, s[q].gen, lam});
      else
        es.push_back({cur, nxt, s[q].gen, lam});
      cur = nxt;
    }
  }
  auto gauge = [&](int v, const Word& g) {
    Word gi = g.inverse();
    for (auto& e : es) {
      if (!e.alive) continue;
      if (e.from == v && e.to == v)
        e.lam = gi * e.lam * g;
      else if (e.to == v)
        e.lam = e.lam * g;
      else if (e.from == v)
        e.lam = gi * e.lam;
    }
  };
  auto merge = [&](int x, int y) {
    for (auto& e : es) {
      if (e.from == x) e.from = y;
      if (e.to == x) e.to = y;
    }
  };
  for (;;) {
    bool folded = false;
    std::map<std::tuple<int, int, bool>, std::size_t> seen;
    for (std::size_t k = 0; k < es.size() && !folded; ++k) {
      if (!es[k].alive) continue;
      for (bool incoming : {false, true}) {
        auto key = std::make_tuple(incoming ? es[k].to : es[k].from, es[k].gen, incoming);
        auto [it, fresh] = seen.emplace(key, k);
        if (fresh) continue;
        E& e1 = es[it->second];
        E& e2 = es[k];
        int v = std::get<0>(key);
        int t1 = incoming ? e1.from : e1.to;
        int t2 = incoming ? e2.from : e2.to;
        if (t1 == t2) {
          if (e1.lam != e2.lam) return std::nullopt;  // a relation among the images
          e2.alive = false;
        } else if (t2 != 0 && t2 != v) {
          Word g = incoming ? e2.lam * e1.lam.inverse() : e2.lam.inverse() * e1.lam;
          gauge(t2, g);
          merge(t2, t1);
          e2.alive = false;
        } else if (t1 != 0 && t1 != v) {
          Word g = incoming ? e1.lam * e2.lam.inverse() : e1.lam.inverse() * e2.lam;
          gauge(t1, g);
          merge(t1, t2);
          e2.alive = false;
        } else {
          // One edge is a loop at v, the other joins v to the basepoint.
          E& loop = (t1 == v) ? e1 : e2;
          E& arm = (t1 == v) ? e2 : e1;
          Word g = incoming ? loop.lam * arm.lam.inverse() : loop.lam.inverse() * arm.lam;
          gauge(v, g);
          merge(v, 0);
          loop.alive = false;
        }
        folded = true;
        break;
      }
    }
    if (!folded) break;
  }
  std::map<int, Word> inv;
  std::set<int> gens;
  for (const auto& [k, w] : images) gens.insert(k);
  for (const auto& e : es) {
    if (!e.alive) continue;
    if (e.from != 0 || e.to != 0 || !gens.count(e.gen) || inv.count(e.gen)) return std::nullopt;
    inv[e.gen] = e.lam;
  }
  if (inv.size() != gens.size()) return std::nullopt;
  return inv;
}

}  // namespace detail

inline TailedAut TailedAut::inverse_by_folding() const {
  if (!shift_.identity()) throw DomainError("unsupported", "folding inverse needs a trivial translation part");
  std::set<int> window = letters_touched();
  int far = reach() + 1;
  std::vector<int> probes;
  for (int t = 0; t < ix_.classes(); ++t) {
    int p = ix_.index_of(t, far);
    probes.push_back(p);
    window.insert(p);
  }
  std::map<int, Word> images;
  for (int k : window) images[k] = image(k);
  for (const auto& [k, w] : images)
    for (int g : w.support())
      if (!window.count(g)) throw DomainError("not-invertible", "image leaves the window");
  auto inv = detail::invert_by_labelled_folding(images);
  if (!inv) throw DomainError("not-invertible", "basis images do not fold to a rose: not an automorphism");
  TailedAut r(ix_);
  for (int t = 0; t < ix_.classes(); ++t) {
    int p = probes[static_cast<std::size_t>(t)];
    auto c = conjugator_of((*inv)[p], p);
    if (!c) throw DomainError("not-invertible", "probe letter did not return as a conjugate");
    r.conj_[static_cast<std::size_t>(t)] = *c;
  }
  for (const auto& [k, w] : *inv)
    if (std::find(probes.begin(), probes.end(), k) == probes.end()) r.table_[k] = w;
  r.prune();
  if (!compose(*this, r).is_identity() || !compose(r, *this).is_identity())
    throw DomainError("not-invertible", "folded inverse failed the composition check");
  return r;
}

}  // namespace pmap

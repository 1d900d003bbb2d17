#pragma once
// Pure mapping classes on the registered graph families.
//
// An element is stored as (core, drift). `core` is the automorphism of pi_1
// based far out on the primary end accumulated by loops. `drift` assigns to
// each ray end R the word d_R with f(p_R) = d_R^-1 p_R, p_R the tree path from
// the basepoint out to R. Composition:
//   (core_g, d^g) o (core_f, d^f) = (core_g core_f, d^g . core_g(d^f)).
// With this convention ray word maps compose as W(w1) o W(w2) = W(w1 w2).

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pmap/error.hpp"
#include "pmap/freegrp.hpp"
#include "pmap/tailed_aut.hpp"

namespace pmap {

// Which graph an element lives on.
struct GraphSpec {
  enum Family { LochNess, Hungry, Millipede, Ladder, Comb, Star } family = LochNess;
  int param = 0;  // ray count for Hungry, leg count for Star

  static GraphSpec parse(std::string_view s) {
    std::string t(s);
    for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto num_after = [&](std::size_t at) {
      try {
        std::size_t used = 0;
        int v = std::stoi(t.substr(at), &used);
        if (at + used != t.size()) throw ParseError("bad graph '" + t + "'");
        return v;
      } catch (const std::logic_error&) {
        throw ParseError("bad graph '" + t + "'");
      }
    };
    if (t == "lochness" || t == "loch-ness") return {LochNess, 0};
    if (t == "millipede") return {Millipede, 0};
    if (t == "ladder") return {Ladder, 0};
    if (t == "comb") return {Comb, 0};
    if (t == "tripod") return {Star, 3};
    if (t.rfind("hungry:", 0) == 0) {
      int n = num_after(7);
      if (n < 1) throw DomainError("bad-graph", "hungry needs at least one ray");
      return {Hungry, n};
    }
    if (t.rfind("star:", 0) == 0) {
      int k = num_after(5);
      if (k < 2) throw DomainError("bad-graph", "star needs at least two legs");
      return {Star, k};
    }
    throw ParseError("unknown graph '" + t + "'");
  }

  std::string name() const {
    switch (family) {
      case LochNess: return "lochness";
      case Hungry: return "hungry:" + std::to_string(param);
      case Millipede: return "millipede";
      case Ladder: return "ladder";
      case Comb: return "comb";
      default: return param == 3 ? "tripod" : "star:" + std::to_string(param);
    }
  }

  Indexing indexing() const {
    if (family == Ladder) return Indexing::line();
    if (family == Star) return Indexing::star(param);
    return Indexing::ray();
  }

  // Ray ends that can carry a drift: 'R' rays or 'T' comb teeth.
  bool has_ray(char kind, int idx) const {
    if (kind == 'R') return (family == Hungry && idx >= 1 && idx <= param) || (family == Millipede && idx >= 1);
    if (kind == 'T') return family == Comb && idx >= 1;
    return false;
  }

  friend bool operator==(const GraphSpec&, const GraphSpec&) = default;
};

struct RayId {
  char kind = 'R';
  int index = 1;
  std::string str() const { return std::string(1, kind) + std::to_string(index); }
  static RayId parse(std::string_view s) {
    if (s.size() < 2 || (s[0] != 'R' && s[0] != 'T')) throw ParseError("bad ray id '" + std::string(s) + "'");
    try {
      return {s[0], std::stoi(std::string(s.substr(1)))};
    } catch (const std::logic_error&) {
      throw ParseError("bad ray id '" + std::string(s) + "'");
    }
  }
  friend auto operator<=>(const RayId&, const RayId&) = default;
};

using DriftMap = std::map<RayId, Word>;

// One registered generator as written in an element expression.
struct Generator {
  enum Kind { Identity, WordMap, LoopSwap, Shift, Aut } kind = Identity;
  // WordMap: slot kind R (ray), C (core edge), J (loop), T (comb tooth)
  char slot = 'R';
  int slot_index = 0;
  int slot_sub = 0;
  Word word;
  // LoopSwap
  int n = 0, m1 = 0, m2 = 0;
  // Shift: stride/offset on the ladder, leg on a star
  int power = 0, stride = 1, offset = 0, leg = -1;
  // Aut
  std::map<int, Word> images;

  std::string str() const {
    switch (kind) {
      case Identity: return "ID";
      case WordMap:
        return "W(" + word.str() + "," + std::string(1, slot) + std::to_string(slot_index) + "." + std::to_string(slot_sub) + ")";
      case LoopSwap: return "LS(" + std::to_string(n) + "," + std::to_string(m1) + "," + std::to_string(m2) + ")";
      case Shift:
        if (leg >= 0) return "H(" + std::to_string(power) + ",leg=" + std::to_string(leg) + ")";
        return "H(" + std::to_string(power) + ",stride=" + std::to_string(stride) + ",offset=" + std::to_string(offset) + ")";
      default: {
        std::string s = "AUT(";
        bool first = true;
        for (const auto& [i, w] : images) {
          if (!first) s += ", ";
          first = false;
          s += "a" + std::to_string(i) + " -> " + w.str();
        }
        return s + ")";
      }
    }
  }
};

struct Factor {
  Generator gen;
  bool inverted = false;
  std::string str() const { return inverted ? "(" + gen.str() + ")^-1" : gen.str(); }
};

// Product as written: the leftmost factor is applied last.
using Expr = std::vector<Factor>;

inline Expr inverse_expr(const Expr& e) {
  Expr r(e.rbegin(), e.rend());
  for (auto& f : r) f.inverted = !f.inverted;
  return r;
}

inline std::string expr_str(const Expr& e) {
  if (e.empty()) return "ID";
  std::string s;
  for (std::size_t i = 0; i < e.size(); ++i) s += (i ? " * " : "") + e[i].str();
  return s;
}

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view s) : s_(s) {}

  Expr parse() {
    Expr e = product();
    ws();
    if (p_ != s_.size()) fail("trailing input");
    return e;
  }

 private:
  std::string_view s_;
  std::size_t p_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at column " + std::to_string(p_) + " in '" + std::string(s_) + "'");
  }
  void ws() {
    while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
  }
  bool eat(char c) {
    ws();
    if (p_ < s_.size() && s_[p_] == c) {
      ++p_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
  bool keyword(std::string_view k) {
    ws();
    if (s_.substr(p_, k.size()) != k) return false;
    std::size_t q = p_ + k.size();
    if (q < s_.size() && std::isalnum(static_cast<unsigned char>(s_[q]))) return false;
    p_ = q;
    return true;
  }
  int integer() {
    ws();
    std::size_t st = p_;
    if (p_ < s_.size() && (s_[p_] == '+' || s_[p_] == '-')) ++p_;
    std::size_t digits = p_;
    while (p_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p_]))) ++p_;
    if (digits == p_) fail("expected integer");
    return std::stoi(std::string(s_.substr(st, p_ - st)));
  }
  std::string until(std::string_view stops) {
    ws();
    std::size_t st = p_;
    while (p_ < s_.size() && stops.find(s_[p_]) == std::string_view::npos) ++p_;
    return std::string(s_.substr(st, p_ - st));
  }

  Expr product() {
    Expr e = power();
    while (eat('*')) {
      Expr r = power();
      e.insert(e.end(), r.begin(), r.end());
    }
    return e;
  }
  Expr power() {
    Expr e = atom();
    while (eat('^')) {
      int k = integer();
      Expr base = k < 0 ? inverse_expr(e) : e;
      Expr out;
      for (int i = 0; i < std::abs(k); ++i) out.insert(out.end(), base.begin(), base.end());
      e = out;
    }
    return e;
  }
  Expr atom() {
    if (eat('(')) {
      Expr e = product();
      expect(')');
      return e;
    }
    Generator g;
    if (keyword("ID")) return {};
    if (keyword("W")) {
      expect('(');
      g.kind = Generator::WordMap;
      g.word = Word::parse(until(","));
      expect(',');
      ws();
      if (p_ >= s_.size()) fail("expected slot");
      g.slot = s_[p_++];
      if (std::string_view("RCJT").find(g.slot) == std::string_view::npos) fail("slot must be R, C, J or T");
      g.slot_index = integer();
      if (eat('.')) g.slot_sub = integer();
      expect(')');
    } else if (keyword("LS")) {
      expect('(');
      g.kind = Generator::LoopSwap;
      g.n = integer();
      expect(',');
      g.m1 = integer();
      expect(',');
      g.m2 = integer();
      expect(')');
    } else if (keyword("H")) {
      expect('(');
      g.kind = Generator::Shift;
      g.power = integer();
      while (eat(',')) {
        std::string key = until("=");
        while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
        expect('=');
        int v = integer();
        if (key == "stride")
          g.stride = v;
        else if (key == "offset")
          g.offset = v;
        else if (key == "leg")
          g.leg = v;
        else
          fail("unknown shift key '" + key + "'");
      }
      expect(')');
    } else if (keyword("AUT")) {
      expect('(');
      g.kind = Generator::Aut;
      do {
        ws();
        if (!eat('a')) fail("expected basis letter");
        int i = integer();
        ws();
        if (s_.substr(p_, 2) != "->") fail("expected '->'");
        p_ += 2;
        if (g.images.count(i)) fail("letter listed twice");
        g.images[i] = Word::parse(until(",)"));
      } while (eat(','));
      expect(')');
    } else {
      fail("expected a generator");
    }
    return {Factor{g, false}};
  }
};

inline DriftMap drift_after(const DriftMap& dg, const TailedAut& core_g, const DriftMap& df) {
  DriftMap r = dg;
  for (const auto& [k, w] : df) r[k] = r[k] * core_g.apply(w);
  for (auto it = r.begin(); it != r.end();)
    it = it->second.is_identity() ? r.erase(it) : std::next(it);
  return r;
}

inline DriftMap drift_of_inverse(const TailedAut& core_inv, const DriftMap& d) {
  DriftMap r;
  for (const auto& [k, w] : d) r[k] = core_inv.apply(w).inverse();
  return r;
}

}  // namespace detail

inline Expr parse_expr(std::string_view s) { return detail::ExprParser(s).parse(); }

class MappingClass {
 public:
  MappingClass() = default;
  explicit MappingClass(GraphSpec g) : graph_(g), fwd_(g.indexing()), inv_(g.indexing()) {}

  static MappingClass identity(const GraphSpec& g) { return MappingClass(g); }

  // Assemble from a core automorphism and drifts; the inverse is computed by
  // folding, so the core must have trivial translation part.
  static MappingClass from_parts(const GraphSpec& g, TailedAut core, DriftMap drift) {
    MappingClass m(g);
    core.prune();
    m.check_letters(core);
    for (const auto& [k, w] : drift) {
      if (!g.has_ray(k.kind, k.index)) throw DomainError("bad-slot", "graph " + g.name() + " has no ray " + k.str());
      m.check_word(w);
    }
    m.inv_ = core.inverse_by_folding();
    m.fwd_ = std::move(core);
    for (const auto& [k, w] : drift)
      if (!w.is_identity()) m.drift_[k] = w;
    m.inv_drift_ = detail::drift_of_inverse(m.inv_, m.drift_);
    return m;
  }

  static MappingClass generator(const GraphSpec& g, const Generator& gen);
  static MappingClass evaluate(const GraphSpec& g, const Expr& e) {
    MappingClass r(g);
    for (auto it = e.rbegin(); it != e.rend(); ++it) {
      MappingClass x = generator(g, it->gen);
      r = compose(it->inverted ? x.inverse() : x, r);
    }
    return r;
  }
  static MappingClass parse(const GraphSpec& g, std::string_view text) { return evaluate(g, parse_expr(text)); }

  const GraphSpec& graph() const { return graph_; }
  const TailedAut& core() const { return fwd_; }
  const TailedAut& core_inverse() const { return inv_; }
  const DriftMap& drift() const { return drift_; }
  Word drift(const RayId& r) const {
    auto it = drift_.find(r);
    return it == drift_.end() ? Word() : it->second;
  }

  MappingClass inverse() const {
    MappingClass r = *this;
    std::swap(r.fwd_, r.inv_);
    std::swap(r.drift_, r.inv_drift_);
    return r;
  }

  bool is_identity() const { return fwd_.is_identity() && drift_.empty(); }

  friend MappingClass compose(const MappingClass& g, const MappingClass& f) {
    if (!(g.graph_ == f.graph_)) throw DomainError("mixed-graphs", "cannot compose elements of " + g.graph_.name() + " and " + f.graph_.name());
    MappingClass r(f.graph_);
    r.fwd_ = compose(g.fwd_, f.fwd_);
    r.inv_ = compose(f.inv_, g.inv_);
    r.drift_ = detail::drift_after(g.drift_, g.fwd_, f.drift_);
    r.inv_drift_ = detail::drift_after(f.inv_drift_, f.inv_, g.inv_drift_);
    return r;
  }
  friend MappingClass operator*(const MappingClass& g, const MappingClass& f) { return compose(g, f); }

  friend bool operator==(const MappingClass& a, const MappingClass& b) {
    return a.graph_ == b.graph_ && a.fwd_ == b.fwd_ && a.drift_ == b.drift_;
  }

  // Translation summary: ladder residue classes or star legs -> net power.
  std::map<std::string, long> shift_powers() const {
    std::map<std::string, long> out;
    const auto& sh = fwd_.shift();
    if (sh.identity()) return out;
    if (graph_.family == GraphSpec::Star) {
      int k = graph_.param;
      for (int leg = 1; leg < k; ++leg) {
        int d = sh(leg + 1) - (leg + 1);
        if (d) out["leg=" + std::to_string(leg)] = d / k;
      }
      return out;
    }
    for (int r = 0; r < sh.period; ++r) {
      int d = sh.disp[static_cast<std::size_t>(r)];
      if (!d) continue;
      std::string key = "stride=" + std::to_string(sh.period) + ",offset=" + std::to_string(r);
      if (d % sh.period == 0)
        out[key] = d / sh.period;
      else
        out[key + ",displacement"] = d;
    }
    return out;
  }

  // Finite set of basis indices the element touches (forward and inverse).
  std::set<int> support_letters() const {
    std::set<int> s = fwd_.letters_touched();
    for (int i : inv_.letters_touched()) s.insert(i);
    for (const auto& [k, w] : drift_)
      for (int g : w.support()) s.insert(g);
    for (const auto& [k, w] : inv_drift_)
      for (int g : w.support()) s.insert(g);
    return s;
  }

  nlohmann::json to_json() const;
  static MappingClass from_json(const nlohmann::json& j);

 private:
  GraphSpec graph_;
  TailedAut fwd_, inv_;
  DriftMap drift_, inv_drift_;

  void check_word(const Word& w) const {
    for (int g : w.support())
      if (!graph_.indexing().valid(g)) throw DomainError("bad-letter", "letter a" + std::to_string(g) + " does not exist on " + graph_.name());
  }
  void check_letters(const TailedAut& a) const {
    for (int g : a.letters_touched()) check_word(Word::gen(g));
  }
};

namespace detail {

// a_i -> c^-1 a_i c on the side of the core edge (v_j, v_j+1) away from the
// primary end.
inline TailedAut near_side_conjugation(const GraphSpec& g, int j, const Word& c) {
  TailedAut a(g.indexing());
  Word ci = c.inverse();
  if (g.family == GraphSpec::Ladder) {
    a.set_conj(1, ci);
    for (int i = 1; i <= j; ++i) a.set(i, conjugate(ci, Word::gen(i)));
    for (int i = j + 1; i <= 0; ++i) a.set(i, Word::gen(i));
  } else {
    for (int i = 1; i <= j; ++i) a.set(i, conjugate(ci, Word::gen(i)));
  }
  a.prune();
  return a;
}

inline void require(bool ok, const std::string& tag, const std::string& what) {
  if (!ok) throw DomainError(tag, what);
}

}  // namespace detail

inline MappingClass MappingClass::generator(const GraphSpec& g, const Generator& gen) {
  using detail::require;
  const Indexing ix = g.indexing();
  MappingClass m(g);
  switch (gen.kind) {
    case Generator::Identity: return m;
    case Generator::WordMap: {
      m.check_word(gen.word);
      const int j = gen.slot_index;
      if (gen.slot == 'R' || gen.slot == 'T') {
        require(g.has_ray(gen.slot, j), "bad-slot", "graph " + g.name() + " has no end " + std::string(1, gen.slot) + std::to_string(j));
        DriftMap d;
        d[{gen.slot, j}] = gen.word;
        return from_parts(g, TailedAut(ix), d);
      }
      if (gen.slot == 'J') {
        require(ix.valid(j), "bad-slot", "no loop a" + std::to_string(j));
        require(!gen.word.uses(j), "not-invertible", "a loop word map on a" + std::to_string(j) + " may not use a" + std::to_string(j));
        TailedAut a(ix);
        a.set(j, gen.word * Word::gen(j));
        return from_parts(g, a, {});
      }
      // core edge (v_j, v_j+1)
      require(g.family != GraphSpec::Comb && g.family != GraphSpec::Star, "unsupported",
              "core-edge word maps are only registered on the monster and ladder families");
      int lo = g.family == GraphSpec::Hungry ? 0 : (g.family == GraphSpec::Ladder ? j : 1);
      require(j >= lo, "bad-slot", "no core edge C" + std::to_string(j) + " on " + g.name());
      DriftMap d;
      if (g.family == GraphSpec::Hungry)
        for (int b = 1; b <= g.param; ++b) d[{'R', b}] = gen.word;
      if (g.family == GraphSpec::Millipede)
        for (int b = 1; b <= j; ++b) d[{'R', b}] = gen.word;
      return from_parts(g, detail::near_side_conjugation(g, j, gen.word), d);
    }
    case Generator::LoopSwap: {
      require(g.family != GraphSpec::Star, "unsupported", "loop swaps are not registered on star graphs");
      require(gen.n >= 1 && gen.m2 - gen.m1 >= gen.n, "bad-swap", "loop swap needs n >= 1 and m2 - m1 >= n");
      require(ix.valid(gen.m1), "bad-swap", "loop swap starts before the first loop");
      TailedAut a(ix);
      for (int k = 0; k < gen.n; ++k) {
        a.set(gen.m1 + k, Word::gen(gen.m2 + k));
        a.set(gen.m2 + k, Word::gen(gen.m1 + k));
      }
      m.fwd_ = a;
      m.inv_ = a;
      return m;
    }
    case Generator::Shift: {
      if (gen.leg >= 0) {
        require(g.family == GraphSpec::Star, "unsupported", "leg shifts need a star graph");
        int k = g.param;
        require(gen.leg >= 1 && gen.leg < k, "bad-shift", "leg must be in 1.." + std::to_string(k - 1));
        require(gen.power == 1 || gen.power == -1, "bad-shift", "leg shifts take power +1 or -1; use ^ for powers");
        auto make = [&](int e) {
          TailedAut a(ix);
          TailShift s{k, std::vector<int>(static_cast<std::size_t>(k), 0)};
          // residue of leg t is (t + 1) mod k
          s.disp[static_cast<std::size_t>(floor_mod(1, k))] = -k * e;
          s.disp[static_cast<std::size_t>(floor_mod(gen.leg + 1, k))] = k * e;
          a.set_shift(s);
          if (e > 0)
            a.set(ix.index_of(0, 1), Word::gen(ix.index_of(gen.leg, 1)));
          else
            a.set(ix.index_of(gen.leg, 1), Word::gen(ix.index_of(0, 1)));
          return a;
        };
        m.fwd_ = make(gen.power);
        m.inv_ = make(-gen.power);
        return m;
      }
      require(g.family == GraphSpec::Ladder, "unsupported", "stride shifts need the ladder");
      require(gen.stride >= 1, "bad-shift", "stride must be positive");
      auto make = [&](int e) {
        TailedAut a(ix);
        TailShift s{gen.stride, std::vector<int>(static_cast<std::size_t>(gen.stride), 0)};
        s.disp[static_cast<std::size_t>(floor_mod(gen.offset, gen.stride))] = gen.stride * e;
        a.set_shift(s);
        return a;
      };
      m.fwd_ = make(gen.power);
      m.inv_ = make(-gen.power);
      return m;
    }
    case Generator::Aut: {
      TailedAut a(ix);
      for (const auto& [i, w] : gen.images) {
        require(ix.valid(i), "bad-letter", "no loop a" + std::to_string(i));
        a.set(i, w);
      }
      return from_parts(g, a, {});
    }
  }
  return m;
}

// ---- serialization ----

namespace detail {

inline nlohmann::json aut_json(const TailedAut& a) {
  nlohmann::json t = nlohmann::json::object();
  for (const auto& [i, w] : a.table()) t[std::to_string(i)] = w.str();
  nlohmann::json c = nlohmann::json::array();
  for (const auto& w : a.conj()) c.push_back(w.str());
  return {{"table", t}, {"shift", {{"period", a.shift().period}, {"disp", a.shift().disp}}}, {"conj", c}};
}

inline TailedAut aut_from_json(const Indexing& ix, const nlohmann::json& j) {
  TailedAut a(ix);
  for (const auto& [k, v] : j.at("table").items()) a.set(std::stoi(k), Word::parse(v.get<std::string>()));
  TailShift s{j.at("shift").at("period").get<int>(), j.at("shift").at("disp").get<std::vector<int>>()};
  if (s.period < 1 || static_cast<int>(s.disp.size()) != s.period) throw ParseError("bad shift record");
  a.set_shift(s);
  const auto& c = j.at("conj");
  if (static_cast<int>(c.size()) != ix.classes()) throw ParseError("conjugator count does not match the graph");
  for (int t = 0; t < ix.classes(); ++t) a.set_conj(t, Word::parse(c.at(static_cast<std::size_t>(t)).get<std::string>()));
  a.prune();
  return a;
}

inline nlohmann::json drift_json(const DriftMap& d) {
  nlohmann::json o = nlohmann::json::object();
  for (const auto& [k, w] : d) o[k.str()] = w.str();
  return o;
}

inline DriftMap drift_from_json(const nlohmann::json& j) {
  DriftMap d;
  for (const auto& [k, v] : j.items()) {
    Word w = Word::parse(v.get<std::string>());
    if (!w.is_identity()) d[RayId::parse(k)] = w;
  }
  return d;
}

}  // namespace detail

inline nlohmann::json MappingClass::to_json() const {
  return {{"graph", graph_.name()},
          {"core", detail::aut_json(fwd_)},
          {"coreInverse", detail::aut_json(inv_)},
          {"drift", detail::drift_json(drift_)},
          {"driftInverse", detail::drift_json(inv_drift_)},
          {"shiftPowers", shift_powers()}};
}

inline MappingClass MappingClass::from_json(const nlohmann::json& j) {
  try {
    MappingClass m(GraphSpec::parse(j.at("graph").get<std::string>()));
    const Indexing ix = m.graph_.indexing();
    m.fwd_ = detail::aut_from_json(ix, j.at("core"));
    m.inv_ = detail::aut_from_json(ix, j.at("coreInverse"));
    m.drift_ = detail::drift_from_json(j.at("drift"));
    m.inv_drift_ = detail::drift_from_json(j.at("driftInverse"));
    for (const auto& [k, w] : m.drift_)
      if (!m.graph_.has_ray(k.kind, k.index)) throw DomainError("bad-slot", "no ray " + k.str());
    MappingClass one = compose(m, m.inverse());
    if (!one.is_identity() || !compose(m.inverse(), m).is_identity())
      throw DomainError("not-invertible", "recorded inverse does not invert the element");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed element JSON: ") + e.what());
  }
}

// ---- induced automorphisms at other basepoints ----

struct Basepoint {
  enum Kind { PrimaryEnd, Vertex, RayEnd } kind = PrimaryEnd;
  int vertex = 0;
  RayId ray;

  static Basepoint parse(std::string_view s) {
    if (s == "end" || s == "primary") return {};
    if (!s.empty() && s[0] == 'v') {
      try {
        return {Vertex, std::stoi(std::string(s.substr(1))), {}};
      } catch (const std::logic_error&) {
        throw ParseError("bad vertex '" + std::string(s) + "'");
      }
    }
    return {RayEnd, 0, RayId::parse(s)};
  }
};

// Induced automorphism of pi_1 at the given basepoint, identified with the
// primary-end group along the spanning tree.
//  - primary end: the core itself;
//  - ray end R: iota_{d_R} o core;
//  - vertex v_j (ray-indexed graphs with j >= 1, or the ladder): iota_c o core,
//    c the longest suffix of a near-side image written in far-side letters.
//    This picks the representative that fixes v_j whenever the element's
//    near-side words avoid far letters at their ends.
inline TailedAut induced_aut(const MappingClass& g, const Basepoint& bp) {
  const TailedAut& core = g.core();
  if (bp.kind == Basepoint::PrimaryEnd) return core;
  if (bp.kind == Basepoint::RayEnd) {
    if (!g.graph().has_ray(bp.ray.kind, bp.ray.index)) throw DomainError("bad-basepoint", "no ray " + bp.ray.str());
    TailedAut r = core.conjugated(g.drift(bp.ray));
    r.prune();
    return r;
  }
  const GraphSpec& gs = g.graph();
  const int j = bp.vertex;
  bool ladder = gs.family == GraphSpec::Ladder;
  if (gs.family == GraphSpec::Star || (!ladder && j < 1))
    throw DomainError("bad-basepoint", "vertex basepoints are registered at v_j, j >= 1, on ray-indexed graphs and the ladder");
  if (!core.shift().identity()) throw DomainError("basepoint-in-support", "a loop shift moves every vertex between its ends");
  Word probe = ladder ? core.conj()[1].inverse() * Word::gen(std::min(j, 0) - core.reach() - 1) : core.image(1);
  std::vector<Letter> tail;
  for (auto it = probe.letters().rbegin(); it != probe.letters().rend() && it->gen > j; ++it) tail.push_back(*it);
  std::reverse(tail.begin(), tail.end());
  TailedAut psi = core.conjugated(Word::from_letters(tail));
  psi.prune();
  return psi;
}

// ---- rays-and-loops decomposition ----

// g = (ray parts, in any order) o loop part; the ray parts commute.
struct RaysAndLoops {
  MappingClass loops;
  std::vector<std::pair<RayId, MappingClass>> rays;
};

inline RaysAndLoops split_rays_and_loops(const MappingClass& g) {
  RaysAndLoops out;
  out.loops = MappingClass::from_parts(g.graph(), g.core(), {});
  for (const auto& [k, w] : g.drift()) out.rays.push_back({k, MappingClass::from_parts(g.graph(), TailedAut(g.graph().indexing()), {{k, w}})});
  return out;
}

// ---- raw generator-by-generator evaluation at a vertex ----
// Independent of the normal form: each generator's action at v_j is written
// down directly, then composed. Used to check rewriting soundness.
namespace check {

struct VertexAction {
  TailedAut psi;
  Word delta;  // psi = iota_delta o core
};

inline VertexAction raw_generator_at(const GraphSpec& g, const Generator& gen, int j) {
  const Indexing ix = g.indexing();
  MappingClass m = MappingClass::generator(g, gen);
  if (gen.kind == Generator::Shift) throw DomainError("basepoint-in-support", "loop shifts move every vertex");
  if (gen.kind == Generator::LoopSwap && j >= gen.m1 && j <= gen.m2 + gen.n - 1)
    throw DomainError("basepoint-in-support", "loop swap moves the basepoint");
  if (gen.kind == Generator::WordMap && gen.slot == 'C') {
    const int k = gen.slot_index;
    if (j > k) return {detail::near_side_conjugation(g, k, gen.word), Word()};
    // basepoint on the near side: the far side is conjugated by w
    TailedAut a(ix);
    a.set_conj(0, gen.word);
    if (g.family == GraphSpec::Ladder) {
      for (int i = 1; i <= k; ++i) a.set(i, Word::gen(i));
      for (int i = k + 1; i <= 0; ++i) a.set(i, conjugate(gen.word, Word::gen(i)));
    } else {
      for (int i = 1; i <= k; ++i) a.set(i, Word::gen(i));
    }
    a.prune();
    return {a, gen.word};
  }
  return {m.core(), Word()};
}

inline VertexAction raw_vertex_action(const GraphSpec& g, const Expr& e, int j) {
  VertexAction acc{TailedAut(g.indexing()), Word()};
  for (auto it = e.rbegin(); it != e.rend(); ++it) {
    VertexAction x = raw_generator_at(g, it->gen, j);
    MappingClass m = MappingClass::generator(g, it->gen);
    TailedAut xcore = m.core();
    if (it->inverted) {
      // delta_{g^-1} = core_g^-1(delta_g)^-1
      x.delta = m.core_inverse().apply(x.delta).inverse();
      x.psi = x.psi.inverse_by_folding();
      xcore = m.core_inverse();
    }
    acc.delta = x.delta * xcore.apply(acc.delta);
    acc.psi = compose(x.psi, acc.psi);
  }
  return acc;
}

}  // namespace check

}  // namespace pmap

#pragma once
// Certified factorizations g = x_1 x_2 ... x_k with every x_i either in a
// fixed finite set F or in the neighbourhood V_K of mappings that fix the
// window K = [v_1, v_n] and keep its complement away from it.
//
// Graphs: lochness, hungry:N, millipede. K always absorbs the ray segments it
// cuts off from the core.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmap/error.hpp"
#include "pmap/freegrp.hpp"
#include "pmap/mcg.hpp"

namespace pmap {

// ---- bijections of the positive integers with finite support ----

struct Perm {
  std::map<int, int> moved;  // x -> p(x) where different

  static Perm identity() { return {}; }
  static Perm from_pairs(const std::map<int, int>& m) {
    Perm p;
    std::set<int> targets;
    for (auto [x, y] : m) {
      if (x < 1 || y < 1) throw DomainError("bad-permutation", "points are positive integers");
      if (!targets.insert(y).second) throw DomainError("bad-permutation", "not injective");
      if (x != y) p.moved[x] = y;
    }
    for (auto [x, y] : p.moved)
      if (!p.moved.count(y) && !m.count(y)) throw DomainError("bad-permutation", "not a bijection");
    return p;
  }
  // (a_1 ... a_k) cycles
  static Perm cycle(const std::vector<int>& pts) {
    std::map<int, int> m;
    for (std::size_t i = 0; i < pts.size(); ++i) m[pts[i]] = pts[(i + 1) % pts.size()];
    return from_pairs(m);
  }
  // (a_1, b_1)(a_2, b_2)... for disjoint pairs
  static Perm swaps(const std::vector<std::pair<int, int>>& ps) {
    Perm p;
    for (auto [a, b] : ps) {
      p.moved[a] = b;
      p.moved[b] = a;
    }
    return p;
  }

  int operator()(int x) const {
    auto it = moved.find(x);
    return it == moved.end() ? x : it->second;
  }
  bool is_identity() const { return moved.empty(); }
  int max_support() const { return moved.empty() ? 0 : moved.rbegin()->first; }
  Perm inverse() const {
    Perm r;
    for (auto [x, y] : moved) r.moved[y] = x;
    return r;
  }
  // p after q
  friend Perm operator*(const Perm& p, const Perm& q) {
    Perm r;
    std::set<int> pts;
    for (auto [x, y] : p.moved) pts.insert(x);
    for (auto [x, y] : q.moved) pts.insert(x);
    for (int x : pts)
      if (p(q(x)) != x) r.moved[x] = p(q(x));
    return r;
  }
  friend bool operator==(const Perm&, const Perm&) = default;
  bool fixes_window(int n) const {
    for (int i = 1; i <= n; ++i)
      if ((*this)(i) != i) return false;
    return true;
  }
  std::string str() const {
    std::string s;
    std::set<int> seen;
    for (auto [x, y] : moved) {
      if (seen.count(x)) continue;
      s += "(";
      int z = x;
      do {
        seen.insert(z);
        s += std::to_string(z);
        z = (*this)(z);
        if (z != x) s += " ";
      } while (z != x);
      s += ")";
    }
    return s.empty() ? "()" : s;
  }
};

struct PermFactorization {
  Perm target, f, g, u, h;  // h = f g u g f fixes the window
  int m = 0;
  std::vector<std::pair<Perm, bool>> factors;  // (element, in F)
  int power = 0;
};

namespace detail {

inline int packed_power(const std::vector<bool>& in_f) {
  // adjacent V_K factors merge; a leading V_K factor needs an identity in F
  std::vector<bool> merged;
  for (bool b : in_f)
    if (b || merged.empty() || merged.back()) merged.push_back(b);
  int fs = static_cast<int>(std::count(merged.begin(), merged.end(), true));
  return fs + (!merged.empty() && !merged.front() ? 1 : 0);
}

}  // namespace detail

inline PermFactorization sinfty_factorize(const Perm& sigma, int n) {
  if (n < 1) throw DomainError("bad-window", "window size must be positive");
  PermFactorization out;
  out.target = sigma;
  std::vector<std::pair<int, int>> fp;
  for (int i = 1; i <= n; ++i) fp.emplace_back(i, n + i);
  out.f = Perm::swaps(fp);
  if (sigma.is_identity()) return out;
  if (sigma.fixes_window(n)) {
    out.factors = {{sigma, false}};
    out.power = 1;
    return out;
  }
  // u sends sigma(i) back to i on the window, completed by pairing leftovers
  std::map<int, int> um;
  std::set<int> images, window;
  for (int i = 1; i <= n; ++i) {
    um[sigma(i)] = i;
    images.insert(sigma(i));
    window.insert(i);
  }
  std::vector<int> free_src, free_dst;
  for (int i : window)
    if (!images.count(i)) free_src.push_back(i);
  for (int y : images)
    if (!window.count(y)) free_dst.push_back(y);
  for (std::size_t k = 0; k < free_src.size(); ++k) um[free_src[k]] = free_dst[k];
  out.u = Perm::from_pairs(um);
  out.m = std::max(out.u.max_support(), 2 * n);
  std::vector<std::pair<int, int>> gp;
  for (int i = n + 1; i <= 2 * n; ++i) gp.emplace_back(i, out.m + i - n);
  out.g = Perm::swaps(gp);
  out.h = out.f * out.g * out.u * out.g * out.f;
  if (!out.h.fixes_window(n) || !out.g.fixes_window(n)) throw DomainError("internal", "window not fixed");
  Perm v = out.u * sigma;
  // sigma = u^-1 v = g f h^-1 f g v
  out.factors = {{out.g, false}, {out.f, true}, {out.h.inverse(), false}, {out.f, true}, {out.g * v, false}};
  std::vector<bool> roles;
  for (const auto& [p, in_f] : out.factors) roles.push_back(in_f);
  out.power = detail::packed_power(roles);
  Perm prod;
  for (const auto& [p, in_f] : out.factors) prod = prod * p;
  if (!(prod == sigma)) throw DomainError("internal", "permutation factors do not recombine");
  return out;
}

// ---- V_K certificates ----

struct VkCertificate {
  bool ok = true;
  std::string failure;
  nlohmann::json checks = nlohmann::json::array();
};

namespace detail {

inline void require_cb_family(const GraphSpec& g) {
  if (g.family != GraphSpec::LochNess && g.family != GraphSpec::Hungry && g.family != GraphSpec::Millipede)
    throw DomainError("not-cb-family", "witnesses are built on lochness, hungry:N and millipede, not " + g.name());
}

// Rays cut off from the core by the window.
inline bool tree_component_ray(const GraphSpec& g, const RayId& r, int n) {
  return g.family == GraphSpec::Hungry || (g.family == GraphSpec::Millipede && r.index <= n);
}

inline bool avoids_window(const Word& w, int n) {
  for (int x : w.support())
    if (x <= n) return false;
  return true;
}

// a_i fixed for i <= n; a_i sent into A_{n+1,oo} for i > n.
inline std::optional<std::string> window_condition(const TailedAut& a, int n) {
  if (!a.shift().identity()) return "translation part moves the window";
  for (const auto& c : a.conj())
    if (!avoids_window(c, n)) return "tail conjugator " + c.str() + " uses window letters";
  for (int i = 1; i <= n; ++i)
    if (a.image(i) != Word::gen(i)) return "a" + std::to_string(i) + " -> " + a.image(i).str();
  for (const auto& [i, w] : a.table())
    if (i > n && !avoids_window(w, n)) return "a" + std::to_string(i) + " -> " + w.str() + " leaves A_{n+1,oo}";
  return std::nullopt;
}

}  // namespace detail

inline VkCertificate certify_vk(const MappingClass& g, int n) {
  const GraphSpec& gs = g.graph();
  detail::require_cb_family(gs);
  VkCertificate cert;
  auto check = [&](const std::string& at, const TailedAut& a, const TailedAut& ainv) {
    auto bad = detail::window_condition(a, n);
    if (!bad) bad = detail::window_condition(ainv, n);
    cert.checks.push_back({{"basepoint", at}, {"table", detail::aut_json(a)}, {"ok", !bad}});
    if (bad && cert.ok) {
      cert.ok = false;
      cert.failure = "at " + at + ": " + *bad;
    }
  };
  check("end", g.core(), g.core_inverse());
  std::set<RayId> rays;
  for (const auto& [r, w] : g.drift()) rays.insert(r);
  if (gs.family == GraphSpec::Hungry)
    for (int b = 1; b <= gs.param; ++b) rays.insert({'R', b});
  for (const auto& r : rays) {
    if (detail::tree_component_ray(gs, r, n)) {
      check(r.str(), induced_aut(g, {Basepoint::RayEnd, 0, r}), induced_aut(g.inverse(), {Basepoint::RayEnd, 0, r}));
    } else {
      bool ok = detail::avoids_window(g.drift(r), n) && detail::avoids_window(g.inverse().drift(r), n);
      cert.checks.push_back({{"basepoint", r.str()}, {"drift", g.drift(r).str()}, {"ok", ok}});
      if (!ok && cert.ok) {
        cert.ok = false;
        cert.failure = "far ray " + r.str() + " wraps around window loops";
      }
    }
  }
  return cert;
}

// ---- factorizations ----

struct WitnessFactor {
  MappingClass element;
  bool in_f = false;
  int f_index = -1;
  std::string label;
};

struct WitnessFactorization {
  MappingClass target;
  int n = 1;
  std::string construction;
  std::vector<std::string> f_labels;
  std::vector<MappingClass> f_set;
  std::vector<WitnessFactor> factors;
  int power = 0;
  int bound = 0;
  std::map<std::string, long> parameters;  // m, M and similar recipe choices

  MappingClass product() const {
    MappingClass r = MappingClass::identity(target.graph());
    for (const auto& f : factors) r = r * f.element;
    return r;
  }

  nlohmann::json to_json() const {
    nlohmann::json fs = nlohmann::json::array();
    for (std::size_t i = 0; i < f_set.size(); ++i) fs.push_back({{"label", f_labels[i]}, {"element", f_set[i].to_json()}});
    nlohmann::json xs = nlohmann::json::array();
    for (const auto& f : factors) {
      nlohmann::json x = {{"role", f.in_f ? "F" : "VK"}, {"label", f.label}, {"element", f.element.to_json()}};
      if (f.in_f)
        x["fIndex"] = f.f_index;
      else
        x["certificate"] = certify_vk(f.element, n).checks;
      xs.push_back(x);
    }
    return {{"schema", 1},
            {"construction", construction},
            {"target", target.to_json()},
            {"window", {{"n", n}}},
            {"fSet", fs},
            {"factors", xs},
            {"power", power},
            {"bound", bound},
            {"parameters", parameters}};
  }

  static WitnessFactorization from_json(const nlohmann::json& j) {
    try {
      WitnessFactorization w;
      w.target = MappingClass::from_json(j.at("target"));
      w.n = j.at("window").at("n").get<int>();
      w.construction = j.at("construction").get<std::string>();
      for (const auto& f : j.at("fSet")) {
        w.f_labels.push_back(f.at("label").get<std::string>());
        w.f_set.push_back(MappingClass::from_json(f.at("element")));
      }
      for (const auto& x : j.at("factors")) {
        WitnessFactor f{MappingClass::from_json(x.at("element")), x.at("role").get<std::string>() == "F", -1, x.value("label", "")};
        if (f.in_f) f.f_index = x.at("fIndex").get<int>();
        w.factors.push_back(f);
      }
      w.power = j.at("power").get<int>();
      w.bound = j.at("bound").get<int>();
      if (j.contains("parameters")) w.parameters = j.at("parameters").get<std::map<std::string, long>>();
      return w;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed witness JSON: ") + e.what());
    }
  }
};

namespace detail {

inline MappingClass loop_swap(const GraphSpec& g, int n, int m1, int m2) {
  Generator gen;
  gen.kind = Generator::LoopSwap;
  gen.n = n;
  gen.m1 = m1;
  gen.m2 = m2;
  return MappingClass::generator(g, gen);
}

inline MappingClass ray_word_map(const GraphSpec& g, const RayId& r, const Word& w) {
  return MappingClass::from_parts(g, TailedAut(g.indexing()), {{r, w}});
}

// Letters the element can reach: every a_i it moves or mentions.
inline int window_reach(const MappingClass& g) {
  auto s = g.support_letters();
  return s.empty() ? 0 : *s.rbegin();
}

inline int max_letter(const Word& w, int floor) {
  int m = floor;
  for (int x : w.support()) m = std::max(m, x);
  return m;
}

// F for the window: the swap f = LS(n,1,n+1) and W(a_{n+1}, R_b)^{+-} for the listed rays.
struct FSet {
  std::vector<std::string> labels;
  std::vector<MappingClass> elements;
};

inline std::vector<int> f_rays(const GraphSpec& g, int n) {
  std::vector<int> out;
  int top = g.family == GraphSpec::Hungry ? g.param : (g.family == GraphSpec::Millipede ? n : 0);
  for (int b = 1; b <= top; ++b) out.push_back(b);
  return out;
}

inline FSet canonical_f(const GraphSpec& g, int n, const std::vector<int>& rays) {
  FSet f;
  f.labels.push_back("f=LS(" + std::to_string(n) + ",1," + std::to_string(n + 1) + ")");
  f.elements.push_back(loop_swap(g, n, 1, n + 1));
  for (int b : rays) {
    MappingClass w = ray_word_map(g, {'R', b}, Word::gen(n + 1));
    f.labels.push_back("W(a" + std::to_string(n + 1) + ",R" + std::to_string(b) + ")");
    f.elements.push_back(w);
    f.labels.push_back("W(a" + std::to_string(n + 1) + ",R" + std::to_string(b) + ")^-1");
    f.elements.push_back(w.inverse());
  }
  return f;
}

class Builder {
 public:
  Builder(const GraphSpec& g, int n, FSet f) : g_(g), n_(n), f_(std::move(f)) {}

  void v(const MappingClass& x, const std::string& label) {
    if (x.is_identity()) return;
    out_.push_back({x, false, -1, label});
  }
  void f(int index) { out_.push_back({f_.elements[static_cast<std::size_t>(index)], true, index, f_.labels[static_cast<std::size_t>(index)]}); }
  void append(const std::vector<WitnessFactor>& xs) { out_.insert(out_.end(), xs.begin(), xs.end()); }

  WitnessFactorization finish(const MappingClass& target, const std::string& construction, int bound) {
    WitnessFactorization w;
    w.target = target;
    w.n = n_;
    w.construction = construction;
    w.f_labels = f_.labels;
    w.f_set = f_.elements;
    // merge adjacent V_K factors
    for (auto& x : out_) {
      if (!x.in_f && !w.factors.empty() && !w.factors.back().in_f) {
        w.factors.back().element = w.factors.back().element * x.element;
        w.factors.back().label += " * " + x.label;
        if (w.factors.back().element.is_identity()) w.factors.pop_back();
      } else {
        w.factors.push_back(x);
      }
    }
    std::vector<bool> roles;
    for (const auto& x : w.factors) roles.push_back(x.in_f);
    w.power = packed_power(roles);
    w.bound = bound;
    return w;
  }

 private:
  GraphSpec g_;
  int n_;
  FSet f_;
  std::vector<WitnessFactor> out_;
};

// Index of the F entry W(a_{n+1}, R_b)^{sign}.
inline int f_ray_index(const FSet& f, const RayId& r, int n, bool inverted) {
  std::string want = "W(a" + std::to_string(n + 1) + "," + r.str() + ")" + (inverted ? "^-1" : "");
  for (std::size_t i = 0; i < f.labels.size(); ++i)
    if (f.labels[i] == want) return static_cast<int>(i);
  throw DomainError("internal", "F has no entry " + want);
}

inline void require_window(int n) {
  if (n < 1) throw DomainError("bad-window", "window K = [v_1, v_n] needs n >= 1");
}

}  // namespace detail

struct Verification {
  bool ok = true;
  std::string failure;
};

// Rechecks a factorization from its factor list alone.
inline Verification verify(const WitnessFactorization& w) {
  auto fail = [](std::string s) { return Verification{false, std::move(s)}; };
  try {
    detail::require_cb_family(w.target.graph());
    if (!(w.product() == w.target)) return fail("factors do not multiply to the target");
    auto canon = detail::canonical_f(w.target.graph(), w.n, detail::f_rays(w.target.graph(), w.n));
    if (w.f_set.size() > canon.elements.size()) return fail("F is larger than the window's finite set");
    for (std::size_t i = 0; i < w.f_set.size(); ++i)
      if (!(w.f_set[i] == canon.elements[i])) return fail("F entry " + std::to_string(i) + " is not the canonical one");
    std::vector<bool> roles;
    for (std::size_t k = 0; k < w.factors.size(); ++k) {
      const auto& x = w.factors[k];
      roles.push_back(x.in_f);
      if (x.in_f) {
        if (x.f_index < 0 || x.f_index >= static_cast<int>(w.f_set.size()) || !(w.f_set[static_cast<std::size_t>(x.f_index)] == x.element))
          return fail("factor " + std::to_string(k) + " is not the claimed element of F");
      } else {
        auto c = certify_vk(x.element, w.n);
        if (!c.ok) return fail("factor " + std::to_string(k) + " is not in V_K: " + c.failure);
      }
    }
    int p = detail::packed_power(roles);
    if (p != w.power) return fail("declared power " + std::to_string(w.power) + " but factors pack into " + std::to_string(p));
    if (w.power > w.bound) return fail("power exceeds the bound");
  } catch (const DomainError& e) {
    return fail(e.what());
  }
  return {};
}

// Loop-only u:  u = g f nu f g  with g = LS(n, n+1, m+1), nu = f g u g f.
inline WitnessFactorization loops_factorize(const MappingClass& u, int n) {
  const GraphSpec& gs = u.graph();
  detail::require_cb_family(gs);
  detail::require_window(n);
  if (!u.drift().empty()) throw DomainError("not-loop-supported", "element drags rays; split off the ray parts first");
  if (!u.core().shift().identity()) throw DomainError("not-loop-supported", "element is not compactly supported");
  for (const auto& c : u.core().conj())
    if (!c.is_identity()) throw DomainError("not-loop-supported", "element is not compactly supported");
  auto fs = detail::canonical_f(gs, n, {});
  detail::Builder b(gs, n, fs);
  int m = std::max(detail::window_reach(u), 2 * n);
  if (u.is_identity()) {
    auto w = b.finish(u, "loops", 3);
    w.parameters["m"] = m;
    return w;
  }
  MappingClass f = fs.elements[0];
  MappingClass g = detail::loop_swap(gs, n, n + 1, m + 1);
  MappingClass nu = f * g * u * g * f;
  b.v(g, "g=LS(" + std::to_string(n) + "," + std::to_string(n + 1) + "," + std::to_string(m + 1) + ")");
  b.f(0);
  b.v(nu, "nu=(gf)^-1 u (gf)");
  b.f(0);
  b.v(g, "g");
  auto w = b.finish(u, "loops", 3);
  w.parameters["m"] = m;
  return w;
}

// W(w, R) = h W1^-1 g f (rho g) W1 (g rho^-1) f (g h), W1 = W(a_{n+1}, R).
inline WitnessFactorization ray_factorize(const GraphSpec& gs, const RayId& ray, const Word& word, int n) {
  detail::require_cb_family(gs);
  detail::require_window(n);
  if (!gs.has_ray(ray.kind, ray.index) || ray.kind != 'R') throw DomainError("bad-slot", "graph " + gs.name() + " has no ray " + ray.str());
  std::vector<int> rays = detail::f_rays(gs, n);
  if (std::find(rays.begin(), rays.end(), ray.index) == rays.end()) rays.push_back(ray.index);
  auto fs = detail::canonical_f(gs, n, rays);
  detail::Builder b(gs, n, fs);
  MappingClass target = detail::ray_word_map(gs, ray, word);
  if (word.is_identity()) return b.finish(target, "ray", 5);
  int fw = detail::f_ray_index(fs, ray, n, false);
  if (word == Word::gen(n + 1)) {
    b.f(fw);
    return b.finish(target, "ray", 5);
  }
  int m = detail::max_letter(word, 2 * n + 1);
  MappingClass f = fs.elements[0];
  MappingClass h = detail::loop_swap(gs, 1, n + 1, m + 1);
  MappingClass g = detail::loop_swap(gs, n, n + 1, m + 2);
  Word w1 = h.core().apply(word);
  Word w2 = compose(f, g).core().apply(w1);
  TailedAut rho_core(gs.indexing());
  rho_core.set(m + 2, Word::gen(m + 2) * w2);
  MappingClass rho = MappingClass::from_parts(gs, rho_core, {});
  b.v(h, "h=LS(1," + std::to_string(n + 1) + "," + std::to_string(m + 1) + ")");
  b.f(detail::f_ray_index(fs, ray, n, true));
  b.v(g, "g=LS(" + std::to_string(n) + "," + std::to_string(n + 1) + "," + std::to_string(m + 2) + ")");
  b.f(0);
  b.v(rho * g, "rho g, rho: a" + std::to_string(m + 2) + " -> " + rho_core.image(m + 2).str());
  b.f(fw);
  b.v(g * rho.inverse(), "g rho^-1");
  b.f(0);
  b.v(g * h, "g h");
  auto w = b.finish(target, "ray", 5);
  w.parameters["m"] = m;
  w.parameters["w''.maxLetter"] = detail::max_letter(w2, 0);
  w.parameters["w''.minLetter"] = w2.is_identity() ? 0 : *w2.support().begin();
  return w;
}

// Far Millipede rays R_b, b > n:  X = g f Y f g  with g = LS(n, n+1, M+1).
inline WitnessFactorization far_rays_factorize(const MappingClass& x, int n) {
  const GraphSpec& gs = x.graph();
  detail::require_window(n);
  if (gs.family != GraphSpec::Millipede) throw DomainError("unsupported", "far rays exist only on the millipede");
  if (!x.core().is_identity()) throw DomainError("not-ray-supported", "far-ray block must be a product of ray word maps");
  // blocks [n+1, 2n] and [M+1, M+n] of the swap must not overlap
  int big_m = 2 * n;
  for (const auto& [r, w] : x.drift()) {
    if (r.index <= n) throw DomainError("not-ray-supported", "ray " + r.str() + " is cut off by the window");
    big_m = detail::max_letter(w, big_m);
  }
  auto fs = detail::canonical_f(gs, n, detail::f_rays(gs, n));
  detail::Builder b(gs, n, fs);
  if (x.is_identity()) return b.finish(x, "far-rays", 3);
  MappingClass f = fs.elements[0];
  MappingClass g = detail::loop_swap(gs, n, n + 1, big_m + 1);
  b.v(g, "g=LS(" + std::to_string(n) + "," + std::to_string(n + 1) + "," + std::to_string(big_m + 1) + ")");
  b.f(0);
  b.v(f * g * x * g * f, "fg X gf");
  b.f(0);
  b.v(g, "g");
  auto w = b.finish(x, "far-rays", 3);
  w.parameters["M"] = big_m;
  return w;
}

struct ApproximateInverse {
  MappingClass u;
  int window = 0;  // u is supported on [v_1, v_window] plus ray segments
  VkCertificate certificate;  // for u * phi
  bool folding_check = false;  // u's images of a_1..a_window fold to the rose on those letters
};

inline ApproximateInverse approximate_inverse(const MappingClass& phi, int n) {
  detail::require_cb_family(phi.graph());
  detail::require_window(n);
  for (const auto& c : phi.core().conj())
    if (!c.is_identity()) throw DomainError("not-compactly-supported", "element moves the primary end basepoint");
  ApproximateInverse out;
  out.window = std::max(n, detail::window_reach(phi));
  out.u = certify_vk(phi, n).ok ? MappingClass::identity(phi.graph()) : phi.inverse();
  out.certificate = certify_vk(out.u * phi, n);
  std::vector<Word> images;
  std::set<int> letters;
  for (int i = 1; i <= out.window; ++i) {
    images.push_back(out.u.core().image(i));
    letters.insert(i);
  }
  out.folding_check = StallingsGraph::of(images).is_rose_on(letters);
  return out;
}

inline int witness_bound(const GraphSpec& g, int n) {
  switch (g.family) {
    case GraphSpec::LochNess: return 4;
    case GraphSpec::Hungry: return 4 + 5 * g.param;
    default: return 7 + 5 * n;
  }
}

// phi = u^-1 (u phi), u^-1 split into loop part, near rays and far rays.
inline WitnessFactorization full_witness(const MappingClass& phi, int n) {
  const GraphSpec& gs = phi.graph();
  detail::require_cb_family(gs);
  detail::require_window(n);
  auto fs = detail::canonical_f(gs, n, detail::f_rays(gs, n));
  detail::Builder b(gs, n, fs);
  ApproximateInverse ai = approximate_inverse(phi, n);
  if (!ai.certificate.ok) throw DomainError("internal", "approximate inverse failed: " + ai.certificate.failure);
  MappingClass v = ai.u * phi;
  MappingClass uinv = ai.u.inverse();
  // uinv = (ray parts) o loops; loops^-1... applied first is the loop part on the right
  RaysAndLoops parts = split_rays_and_loops(uinv);
  DriftMap far;
  auto remap = [&](const WitnessFactorization& w) {
    // translate the F indices of a sub-witness into this F
    std::vector<WitnessFactor> xs = w.factors;
    for (auto& x : xs)
      if (x.in_f) {
        auto it = std::find(fs.labels.begin(), fs.labels.end(), w.f_labels[static_cast<std::size_t>(x.f_index)]);
        x.f_index = static_cast<int>(it - fs.labels.begin());
      }
    return xs;
  };
  std::map<std::string, long> params;
  for (const auto& [r, piece] : parts.rays) {
    if (detail::tree_component_ray(gs, r, n)) {
      auto w = ray_factorize(gs, r, piece.drift(r), n);
      b.append(remap(w));
      if (w.parameters.count("m")) params["m." + r.str()] = w.parameters.at("m");
    } else {
      far[r] = piece.drift(r);
    }
  }
  if (!far.empty()) {
    auto w = far_rays_factorize(MappingClass::from_parts(gs, TailedAut(gs.indexing()), far), n);
    b.append(remap(w));
    params["M"] = w.parameters.at("M");
  }
  auto lw = loops_factorize(parts.loops, n);
  b.append(remap(lw));
  params["m.loops"] = lw.parameters.at("m");
  b.v(v, "u phi");
  auto w = b.finish(phi, "full", witness_bound(gs, n));
  w.parameters = params;
  w.parameters["window'"] = ai.window;
  return w;
}

}  // namespace pmap

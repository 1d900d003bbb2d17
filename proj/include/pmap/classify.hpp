#pragma once
// Coarse-boundedness, local coarse-boundedness, asymptotic dimension and
// first-cohomology bounds for pure mapping class groups, read off an EndProfile.

#include <string>
#include <tuple>

#include "json.hpp"
#include "pmap/blueprint.hpp"

namespace pmap {

struct Reason {
  std::string tag;
  std::string criterion;
  friend bool operator==(const Reason&, const Reason&) = default;
};

enum class CbVerdict { CB, NotCB };
enum class LocalVerdict { LocallyCB, NotLocallyCB };

struct ClassificationReport {
  CbVerdict cb = CbVerdict::NotCB;
  Reason cbReason;
  LocalVerdict locallyCb = LocalVerdict::NotLocallyCB;
  Reason locCbReason;
  std::string asdim;          // "0", "infinite", "discrete-case", "not-defined"
  std::string h1LowerBound;   // "0", "n", or "countably-infinite-direct-sum"
  std::string mapCbNote;      // "MapCB", "MapNotCB", "unknown"

  nlohmann::json to_json() const {
    auto reason = [](const Reason& r) { return nlohmann::json{{"tag", r.tag}, {"criterion", r.criterion}}; };
    return {{"cbVerdict", cb == CbVerdict::CB ? "CB" : "NotCB"},
            {"cbReason", reason(cbReason)},
            {"locallyCbVerdict", locallyCb == LocalVerdict::LocallyCB ? "LocallyCB" : "NotLocallyCB"},
            {"locCbReason", reason(locCbReason)},
            {"asdim", asdim},
            {"h1LowerBound", h1LowerBound},
            {"mapCbNote", mapCbNote}};
  }
};

inline std::pair<CbVerdict, Reason> classify_cb(const EndProfile& p) {
  validate(p);
  if (p.rank.is(0))
    return {CbVerdict::CB, {"rank-0", "a tree: the pure mapping class group is trivial"}};
  if (p.rank.is(1)) {
    if (p.isLasso) return {CbVerdict::CB, {"lasso", "rank one with exactly one end"}};
    return {CbVerdict::NotCB,
            {"rank1-multi-end",
             "rank one is CB only with a single end; otherwise the group splits as R semidirect PMap of the core graph with a ray, R unbounded"}};
  }
  if (p.rank.kind == Card::Finite)
    return {CbVerdict::NotCB, {"finite-rank>=2", "finite rank at least two surjects onto an infinite discrete Out(F_n)-type quotient"}};
  if (!p.elCount.is(1))
    return {CbVerdict::NotCB, {"two-ends-accumulated", "at least two ends accumulated by loops give an unbounded flux homomorphism"}};
  if (p.elComplementDiscrete)
    return {CbVerdict::CB, {"one-loop-end-discrete", "exactly one end accumulated by loops and no accumulation point among the remaining ends"}};
  return {CbVerdict::NotCB, {"accumulation-point", "one end accumulated by loops but the remaining ends contain an accumulation point"}};
}

inline std::pair<LocalVerdict, Reason> classify_locally_cb(const EndProfile& p) {
  validate(p);
  if (p.rank.kind == Card::Finite)
    return {LocalVerdict::LocallyCB, {"finite-rank", "finite rank: the pure mapping class group is discrete"}};
  if (p.elCount.infinite())
    return {LocalVerdict::NotLocallyCB, {"infinitely-many-loop-ends", "infinitely many ends accumulated by loops"}};
  if (p.infiniteEndComponents.infinite())
    return {LocalVerdict::NotLocallyCB,
            {"infinitely-many-infinite-end-components", "infinitely many components of the core complement have infinitely many ends"}};
  return {LocalVerdict::LocallyCB,
          {"finite-loop-ends-and-components", "finitely many loop-accumulated ends and finitely many infinite-ended core complement components"}};
}

inline std::string asdim(const EndProfile& p) {
  if (p.rank.kind == Card::Finite) return "discrete-case";
  if (classify_locally_cb(p).first != LocalVerdict::LocallyCB) return "not-defined";
  return p.elCount.is(1) ? "0" : "infinite";
}

inline std::string h1_lower_bound(const EndProfile& p) {
  if (p.elCount.infinite()) return "countably-infinite-direct-sum";
  if (p.elCount.n >= 2) return std::to_string(p.elCount.n - 1);
  return "0";
}

inline std::string map_cb_note(const EndProfile& p) {
  if (p.elCount.kind == Card::Finite && p.elCount.n >= 2 && p.endCount.kind == Card::Finite) return "MapNotCB";
  if (p.elCount.is(1) && p.elComplementDiscrete) return "MapCB";
  return "unknown";
}

inline ClassificationReport classify(const EndProfile& p) {
  ClassificationReport r;
  std::tie(r.cb, r.cbReason) = classify_cb(p);
  std::tie(r.locallyCb, r.locCbReason) = classify_locally_cb(p);
  r.asdim = asdim(p);
  r.h1LowerBound = h1_lower_bound(p);
  r.mapCbNote = map_cb_note(p);
  return r;
}

}  // namespace pmap

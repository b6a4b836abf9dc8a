#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "termrank/model/model.hpp"

namespace termrank::rank {

using geom::AffineFunc;
using geom::Point;
using geom::Polyhedron;
using model::SLCLoop;
using model::TransitionSystem;

struct LRFCert {
  AffineFunc rho;
};

struct MLRFCert {
  std::vector<AffineFunc> components;
  std::size_t depth() const { return components.size(); }
};

struct RecurrentSetWitness {
  Polyhedron set;      // over the loop's transition space
  std::size_t round = 0;  // round at which elimination stalled
};

struct LexStage {
  std::vector<std::string> ranked;
  std::map<model::LocId, AffineFunc> functions;
};

struct LexCert {
  std::vector<std::string> dead_edges;  // internal edges with empty relation
  std::vector<LexStage> stages;
};

struct CheckResult {
  bool ok = true;
  std::string message;
  explicit operator bool() const { return ok; }
  static CheckResult fail(std::string msg) { return {false, std::move(msg)}; }
};

// Linear ranking functions.
bool verify_lrf(const SLCLoop& loop, const AffineFunc& rho);
std::optional<LRFCert> find_lrf(const SLCLoop& loop);

// Multiphase ranking functions. Phase contexts f_j(x) < 0 are tightened for
// integer-valued variables before the entailment checks.
bool verify_mlrf(const SLCLoop& loop, const MLRFCert& cert);
/// Nested template at depths 1..d; the first depth that succeeds wins.
std::optional<MLRFCert> find_mlrf_bounded(const SLCLoop& loop, std::size_t d);

enum class IterativeSpace { kTransition, kDisplacement };

struct IterativeResult {
  enum class Kind { kMlrf, kRecurrent, kUnknown } kind = Kind::kUnknown;
  std::optional<MLRFCert> mlrf;
  std::optional<RecurrentSetWitness> recurrent;
  std::vector<AffineFunc> eliminated;  // every recorded rho, in discovery order
  std::vector<std::size_t> round_of;   // round index of each recorded rho
  std::size_t rounds = 0;
  std::vector<Polyhedron> trace;       // Q_0, Q_1, ... in the transition space
};

IterativeResult find_mlrf_iterative(const SLCLoop& loop, std::size_t max_iters = 10,
                                    IterativeSpace space = IterativeSpace::kTransition);

bool verify_recurrent(const SLCLoop& loop, const RecurrentSetWitness& w);

struct BoundedDecision {
  enum class Kind { kTerminating, kNonterminating, kNotApplicable } kind = Kind::kNotApplicable;
  std::optional<LRFCert> lrf;
  std::optional<Point> fixpoint;  // over the transition space, x' = x
};

/// Throws InternalError when a closed bounded loop has neither a fixpoint
/// nor an LRF. Loops with strict rows are not closed and yield not-applicable.
BoundedDecision decide_bounded(const SLCLoop& loop);

/// Lexicographic per-location ranking of a non-trivial SCC.
std::optional<LexCert> rank_scc_lex(const TransitionSystem& ts, const model::Scc& scc,
                                    std::size_t max_stages);
CheckResult verify_lex(const TransitionSystem& ts, const model::Scc& scc, const LexCert& cert);

/// Edge ids of `edges` that lie on some cycle of the subgraph they induce.
std::vector<std::string> cyclic_part(const TransitionSystem& ts, const std::vector<std::string>& edges);

nlohmann::json to_json(const LRFCert& c);
nlohmann::json to_json(const MLRFCert& c);
nlohmann::json to_json(const LexCert& c);
nlohmann::json to_json(const RecurrentSetWitness& w);
LRFCert lrf_from_json(const nlohmann::json& j);
MLRFCert mlrf_from_json(const nlohmann::json& j);
LexCert lex_from_json(const nlohmann::json& j);
RecurrentSetWitness recurrent_from_json(const nlohmann::json& j, const std::vector<geom::VarId>& vars);

}  // namespace termrank::rank

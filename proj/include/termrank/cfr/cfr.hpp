#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "termrank/model/model.hpp"

namespace termrank::cfr {

using geom::Constraint;
using geom::Polyhedron;
using geom::VarId;
using model::TransitionSystem;

/// Every predicate has the arity of `vars`. A clause's head arguments are the
/// unprimed variables and its body arguments the primed ones, so the clause
/// constraint lives in the transition space.
struct Clause {
  std::string id;
  std::string head;
  std::optional<std::string> body;
  Polyhedron constraint;
  std::string origin;  // id of the TS edge this clause derives from
};

struct Version {
  std::string base;
  std::vector<Constraint> context;  // properties known to hold, unprimed
};

struct CHCProgram {
  std::vector<VarId> vars;
  std::vector<std::string> preds;
  std::vector<Clause> clauses;
  std::string entry;
  std::map<std::string, Version> versions;  // filled by partial_evaluate
};

using PropertyMap = std::map<std::string, std::vector<Constraint>>;

struct PeOptions {
  std::size_t version_cap = 64;
};

CHCProgram ts_to_chc(const TransitionSystem& ts);
/// Throws SemanticError on a clause whose body names an unknown predicate.
TransitionSystem chc_to_ts(const CHCProgram& p);

/// Guard harvesting over the SCC's internal edges. Properties go to the SCC
/// entry locations, or to every SCC location with `all_locations`.
PropertyMap infer_properties(const TransitionSystem& ts, const model::Scc& scc, bool all_locations = false);

CHCProgram partial_evaluate(const CHCProgram& p, const PropertyMap& props, const PeOptions& opts = {});

/// Locations of the SCC entered from outside it (or holding init).
std::vector<model::LocId> scc_heads(const TransitionSystem& ts, const model::Scc& scc);

/// The SCC's edges behind a fresh init location that jumps, with unchanged
/// values, to each head (each SCC location when there is no head).
TransitionSystem scc_subsystem(const TransitionSystem& ts, const model::Scc& scc);

struct Refinement {
  PropertyMap props;
  CHCProgram chc;
  CHCProgram specialized;
  TransitionSystem refined;
};

/// ts -> CHC -> specialization -> TS. Without explicit properties they are
/// inferred for every non-trivial SCC.
Refinement refine(const TransitionSystem& ts, const std::optional<PropertyMap>& props = std::nullopt,
                  bool all_locations = false, const PeOptions& opts = {});

/// Prolog-like listing, one clause per line.
std::string dump(const CHCProgram& p);

nlohmann::json properties_to_json(const PropertyMap& props);
PropertyMap properties_from_json(const nlohmann::json& j, const std::vector<VarId>& vars);

}  // namespace termrank::cfr

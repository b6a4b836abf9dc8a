#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "termrank/geom/polyhedron.hpp"

namespace termrank::model {

using geom::Polyhedron;
using geom::VarId;
using LocId = std::string;

VarId primed(const VarId& v);
bool is_primed(const VarId& v);
/// Strips one trailing apostrophe; identity on unprimed names.
VarId unprimed(const VarId& v);
std::vector<VarId> primed(const std::vector<VarId>& vars);
/// x_1..x_n followed by x'_1..x'_n.
std::vector<VarId> transition_space(const std::vector<VarId>& vars);

struct SLCLoop {
  std::vector<VarId> vars;
  Polyhedron rel;
};

struct Edge {
  std::string id;
  LocId src;
  LocId dst;
  Polyhedron rel;
};

struct TransitionSystem {
  std::vector<VarId> vars;
  std::vector<LocId> locations;  // declaration order
  LocId init;
  std::vector<Edge> edges;

  bool has_location(const LocId& l) const;
  const Edge* find_edge(const std::string& id) const;
  const Edge& edge(const std::string& id) const;  // throws SemanticError
};

using Model = std::variant<TransitionSystem, SLCLoop>;

struct Scc {
  std::vector<LocId> locations;
  std::vector<std::string> edges;  // internal edge ids, in TS order
  bool trivial = true;
};

struct DisplacementLoop {
  std::vector<VarId> vars;
  std::vector<VarId> disp;  // disp[i] stands for vars[i]' - vars[i]
  Polyhedron rel;           // over vars ++ disp
};

/// Throws SemanticError on any violated invariant.
void validate(const SLCLoop& loop);
void validate(const TransitionSystem& ts);

Model parse_input(std::string_view text);
Model model_from_json(const nlohmann::json& doc);
nlohmann::json serialize(const Model& m);
nlohmann::json serialize(const TransitionSystem& ts);
nlohmann::json serialize(const SLCLoop& loop);

/// Reverse topological order (sinks first). Locations inside an SCC keep
/// declaration order.
std::vector<Scc> sccs(const TransitionSystem& ts);

DisplacementLoop to_displacement(const SLCLoop& loop);

/// The loop as a one-location TS: location "l0", self-loop edge "t0".
TransitionSystem as_transition_system(const SLCLoop& loop);

/// Constraint strings of a polyhedron, one per row, in row order.
std::vector<std::string> constraint_strings(const Polyhedron& p);

/// Equality up to constraint order and syntactic normalization.
bool same_constraints(const Polyhedron& a, const Polyhedron& b);
bool structurally_equal(const TransitionSystem& a, const TransitionSystem& b);
bool structurally_equal(const SLCLoop& a, const SLCLoop& b);

}  // namespace termrank::model

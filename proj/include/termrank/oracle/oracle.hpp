#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "termrank/model/model.hpp"

namespace termrank::oracle {

using State = std::vector<std::int64_t>;  // one value per model variable

struct BoxConfig {
  std::int64_t bound = 5;        // states live in [-bound, bound]^n
  std::size_t max_steps = 1000;
};

enum class Outcome { kTerminated, kNonterminated, kEscaped, kBudget };

std::string to_string(Outcome o);

struct StateVerdict {
  model::LocId location;
  State initial;
  Outcome outcome = Outcome::kTerminated;
  std::size_t steps = 0;  // longest run, for terminated (and budget = max_steps)
};

struct OracleVerdict {
  std::vector<StateVerdict> results;  // one per initial state, in input order
  std::size_t explored = 0;           // distinct (location, state) pairs
  std::set<State> reachable;          // location-erased
};

/// Initial states default to every box state at the init location.
OracleVerdict run_box(const model::Model& m, const BoxConfig& cfg,
                      const std::optional<std::vector<State>>& initial = std::nullopt);
/// Same exploration without OpenMP; the reference for the parallel kernel.
OracleVerdict run_box_serial(const model::Model& m, const BoxConfig& cfg,
                             const std::optional<std::vector<State>>& initial = std::nullopt);

struct CurvePoint {
  std::int64_t k;
  Outcome outcome;
  std::size_t steps;
};

std::vector<CurvePoint> steps_curve(const model::SLCLoop& loop, const std::function<State(std::int64_t)>& family,
                                    std::int64_t k_lo, std::int64_t k_hi, const BoxConfig& cfg);

/// "x=0,y=5" against the variable order; unspecified variables are an error.
State parse_state(const std::string& text, const std::vector<geom::VarId>& vars);

nlohmann::json to_json(const OracleVerdict& v, const std::vector<geom::VarId>& vars, const BoxConfig& cfg);

}  // namespace termrank::oracle

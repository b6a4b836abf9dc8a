#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "termrank/cfr/cfr.hpp"
#include "termrank/model/model.hpp"
#include "termrank/rank/ranking.hpp"

namespace termrank::driver {

enum class RankClass { kLrf, kLex, kMlrfBounded, kMlrfIterative };
enum class CfrScheme { kNone, kPre, kOnFailure };
enum class Verdict { kTerminating, kNonterminating, kUnknown };

std::string to_string(RankClass c);
std::string to_string(CfrScheme s);
std::string to_string(Verdict v);

struct StrategyConfig {
  std::vector<RankClass> rank_classes{RankClass::kLrf, RankClass::kLex, RankClass::kMlrfBounded,
                                      RankClass::kMlrfIterative};
  CfrScheme cfr = CfrScheme::kNone;
  std::size_t max_mlrf_depth = 5;
  std::size_t max_lex_stages = 5;
  std::size_t max_iterative_rounds = 10;
  std::optional<cfr::PropertyMap> props;  // overrides inference
  bool props_all_locations = false;

  void validate() const;  // throws SemanticError
};

/// lrf | lex | mlrf | auto
std::vector<RankClass> strategy_classes(const std::string& name);
CfrScheme cfr_scheme(const std::string& name);

struct SccResult {
  std::vector<model::LocId> locations;
  std::vector<std::string> edges;
  Verdict verdict = Verdict::kUnknown;
  std::string method;             // rank class that settled the SCC
  nlohmann::json certificate;     // null when none
  std::optional<cfr::Refinement> refinement;  // on-failure refinement of the SCC
  std::vector<SccResult> nested;              // analysis of that refinement
};

struct AnalysisReport {
  std::string model_kind;  // "loop" | "ts"
  StrategyConfig config;
  Verdict overall = Verdict::kUnknown;
  std::vector<SccResult> sccs;
  std::optional<cfr::Refinement> refinement;  // cfr = pre
  double seconds = 0;

  nlohmann::json to_json(bool with_timing = true) const;
  std::string to_text() const;
};

AnalysisReport analyze(const model::Model& m, const StrategyConfig& cfg);

/// Independent re-check of a JSON report against the model: every
/// certificate and witness, and every refinement through a simulation check.
rank::CheckResult verify_certificate(const model::Model& m, const nlohmann::json& report);

/// Every refined run is an original run (edge strengthening) and every
/// original run from init is matched by a refined one (context simulation).
rank::CheckResult check_refinement(const model::TransitionSystem& original, const model::TransitionSystem& refined,
                                   const std::map<std::string, cfr::Version>& versions,
                                   const std::map<std::string, std::string>& edge_origin);

int exit_code(Verdict v);

}  // namespace termrank::driver

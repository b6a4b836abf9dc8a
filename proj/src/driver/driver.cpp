#include "termrank/driver/driver.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

#include "termrank/geom/errors.hpp"
#include "termrank/geom/text.hpp"

namespace termrank::driver {

using geom::AffineFunc;
using geom::Constraint;
using geom::Polyhedron;
using model::SLCLoop;
using model::TransitionSystem;
using nlohmann::json;
using rank::CheckResult;

std::string to_string(RankClass c) {
  switch (c) {
    case RankClass::kLrf: return "lrf";
    case RankClass::kLex: return "lex";
    case RankClass::kMlrfBounded: return "mlrf_bounded";
    case RankClass::kMlrfIterative: return "mlrf_iterative";
  }
  return "?";
}

std::string to_string(CfrScheme s) {
  switch (s) {
    case CfrScheme::kNone: return "none";
    case CfrScheme::kPre: return "pre";
    case CfrScheme::kOnFailure: return "on-failure";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kTerminating: return "terminating";
    case Verdict::kNonterminating: return "nonterminating";
    case Verdict::kUnknown: return "unknown";
  }
  return "?";
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::kTerminating: return 0;
    case Verdict::kNonterminating: return 1;
    case Verdict::kUnknown: return 2;
  }
  return 2;
}

void StrategyConfig::validate() const {
  if (rank_classes.empty()) throw SemanticError("at least one ranking class is required");
  if (max_mlrf_depth == 0 || max_lex_stages == 0 || max_iterative_rounds == 0) {
    throw SemanticError("depth, stage and round bounds must be positive");
  }
}

std::vector<RankClass> strategy_classes(const std::string& name) {
  if (name == "lrf") return {RankClass::kLrf};
  if (name == "lex") return {RankClass::kLex};
  if (name == "mlrf") return {RankClass::kMlrfBounded, RankClass::kMlrfIterative};
  if (name == "auto") return {RankClass::kLrf, RankClass::kLex, RankClass::kMlrfBounded, RankClass::kMlrfIterative};
  throw SemanticError("unknown strategy '" + name + "'");
}

CfrScheme cfr_scheme(const std::string& name) {
  if (name == "none") return CfrScheme::kNone;
  if (name == "pre") return CfrScheme::kPre;
  if (name == "on-failure") return CfrScheme::kOnFailure;
  throw SemanticError("unknown CFR scheme '" + name + "'");
}

namespace {

std::optional<SLCLoop> self_loop(const TransitionSystem& ts, const model::Scc& scc) {
  if (scc.locations.size() != 1 || scc.edges.size() != 1) return std::nullopt;
  return SLCLoop{ts.vars, ts.edge(scc.edges[0]).rel};
}

// The fixpoint transition as a one-point recurrent set.
rank::RecurrentSetWitness fixpoint_witness(const SLCLoop& loop, const geom::Point& p) {
  std::vector<Constraint> rows;
  for (const auto& v : model::transition_space(loop.vars)) {
    rows.push_back(Constraint::eq(AffineFunc::variable(v), AffineFunc(p.at(v))));
  }
  return {Polyhedron(loop.rel.space(), rows), 0};
}

bool try_loop_class(RankClass cls, const SLCLoop& loop, const StrategyConfig& cfg, SccResult& r, bool lrf_is_lex,
                    const TransitionSystem& ts, const model::Scc& scc) {
  switch (cls) {
    case RankClass::kLrf:
      if (lrf_is_lex) {
        if (auto c = rank::rank_scc_lex(ts, scc, 1)) {
          r.verdict = Verdict::kTerminating;
          r.certificate = rank::to_json(*c);
          return true;
        }
        return false;
      }
      if (auto c = rank::find_lrf(loop)) {
        r.verdict = Verdict::kTerminating;
        r.certificate = rank::to_json(*c);
        return true;
      }
      if (const auto d = rank::decide_bounded(loop); d.kind == rank::BoundedDecision::Kind::kNonterminating) {
        r.verdict = Verdict::kNonterminating;
        r.certificate = rank::to_json(fixpoint_witness(loop, *d.fixpoint));
        return true;
      }
      return false;
    case RankClass::kLex:
      if (auto c = rank::rank_scc_lex(ts, scc, cfg.max_lex_stages)) {
        r.verdict = Verdict::kTerminating;
        r.certificate = rank::to_json(*c);
        return true;
      }
      return false;
    case RankClass::kMlrfBounded:
      if (auto c = rank::find_mlrf_bounded(loop, cfg.max_mlrf_depth)) {
        r.verdict = Verdict::kTerminating;
        r.certificate = rank::to_json(*c);
        return true;
      }
      return false;
    case RankClass::kMlrfIterative: {
      const auto it = rank::find_mlrf_iterative(loop, cfg.max_iterative_rounds);
      if (it.kind == rank::IterativeResult::Kind::kMlrf) {
        r.verdict = Verdict::kTerminating;
        r.certificate = rank::to_json(*it.mlrf);
        return true;
      }
      if (it.kind == rank::IterativeResult::Kind::kRecurrent) {
        r.verdict = Verdict::kNonterminating;
        r.certificate = rank::to_json(*it.recurrent);
        return true;
      }
      return false;
    }
  }
  return false;
}

std::vector<SccResult> analyze_system(const TransitionSystem& ts, const StrategyConfig& cfg, bool allow_refine);

SccResult attack(const TransitionSystem& ts, const model::Scc& scc, const StrategyConfig& cfg, bool allow_refine) {
  SccResult r;
  r.locations = scc.locations;
  r.edges = scc.edges;
  const auto loop = self_loop(ts, scc);
  for (RankClass cls : cfg.rank_classes) {
    bool done = false;
    if (loop) {
      done = try_loop_class(cls, *loop, cfg, r, true, ts, scc);
    } else if (cls == RankClass::kLrf || cls == RankClass::kLex) {
      const auto c = rank::rank_scc_lex(ts, scc, cls == RankClass::kLrf ? 1 : cfg.max_lex_stages);
      if (c) {
        r.verdict = Verdict::kTerminating;
        r.certificate = rank::to_json(*c);
        done = true;
      }
    }
    if (done) {
      r.method = to_string(cls);
      return r;
    }
  }
  if (allow_refine && cfg.cfr == CfrScheme::kOnFailure) {
    const TransitionSystem sub = cfr::scc_subsystem(ts, scc);
    std::optional<cfr::PropertyMap> props;
    if (cfg.props) {
      props.emplace();
      for (const auto& [l, ps] : *cfg.props) {
        if (sub.has_location(l)) (*props)[l] = ps;
      }
    }
    r.refinement = cfr::refine(sub, props, cfg.props_all_locations);
    r.nested = analyze_system(r.refinement->refined, cfg, false);
    bool all = true;
    for (const auto& n : r.nested) all = all && n.verdict == Verdict::kTerminating;
    if (all) {
      r.verdict = Verdict::kTerminating;
      r.method = "cfr";
    }
  }
  return r;
}

std::string scc_name(const model::Scc& scc) {
  std::string s = "{";
  for (std::size_t i = 0; i < scc.locations.size(); ++i) s += (i ? ", " : "") + scc.locations[i];
  return s + "}";
}

std::vector<SccResult> analyze_system(const TransitionSystem& ts, const StrategyConfig& cfg, bool allow_refine) {
  std::vector<SccResult> out;
  for (const auto& scc : model::sccs(ts)) {
    if (scc.trivial) continue;
    try {
      out.push_back(attack(ts, scc, cfg, allow_refine));
    } catch (const ResourceError& e) {
      throw ResourceError("SCC " + scc_name(scc) + ": " + e.what());
    }
  }
  return out;
}

Verdict overall_of(const std::vector<SccResult>& sccs, const model::LocId& init) {
  bool all = true;
  for (const auto& s : sccs) {
    if (s.verdict == Verdict::kNonterminating && s.locations.size() == 1 && s.locations[0] == init) {
      return Verdict::kNonterminating;
    }
    all = all && s.verdict == Verdict::kTerminating;
  }
  return all ? Verdict::kTerminating : Verdict::kUnknown;
}

json refinement_json(const cfr::Refinement& r) {
  json versions = json::object();
  for (const auto& [name, v] : r.specialized.versions) {
    std::vector<std::string> ctx;
    for (const auto& c : v.context) ctx.push_back(geom::to_string(c));
    versions[name] = json{{"base", v.base}, {"context", ctx}};
  }
  json origin = json::object();
  for (const auto& c : r.specialized.clauses) origin[c.id] = c.origin;
  return json{{"props", cfr::properties_to_json(r.props)},
              {"system", model::serialize(r.refined)},
              {"versions", versions},
              {"edge_origin", origin}};
}

json scc_json(const SccResult& s) {
  json j{{"locations", s.locations},
         {"edges", s.edges},
         {"verdict", to_string(s.verdict)},
         {"method", s.method},
         {"certificate", s.certificate}};
  if (s.refinement) {
    j["refinement"] = refinement_json(*s.refinement);
    json nested = json::array();
    for (const auto& n : s.nested) nested.push_back(scc_json(n));
    j["nested"] = nested;
  }
  return j;
}

void scc_text(std::ostringstream& os, const SccResult& s, const std::string& indent) {
  os << indent << "SCC {";
  for (std::size_t i = 0; i < s.locations.size(); ++i) os << (i ? ", " : "") << s.locations[i];
  os << "}: " << to_string(s.verdict);
  if (!s.method.empty()) os << " via " << s.method;
  os << "\n";
  if (s.certificate.is_null()) {
  } else if (s.certificate["kind"] == "lrf") {
    os << indent << "  rho = " << geom::to_string(rank::lrf_from_json(s.certificate).rho) << "\n";
  } else if (s.certificate["kind"] == "mlrf") {
    os << indent << "  <";
    const auto c = rank::mlrf_from_json(s.certificate);
    for (std::size_t i = 0; i < c.components.size(); ++i) os << (i ? ", " : "") << geom::to_string(c.components[i]);
    os << ">\n";
  } else if (s.certificate["kind"] == "lex") {
    const auto c = rank::lex_from_json(s.certificate);
    for (std::size_t k = 0; k < c.stages.size(); ++k) {
      os << indent << "  stage " << k + 1 << " ranks";
      for (const auto& e : c.stages[k].ranked) os << " " << e;
      os << ":";
      for (const auto& [l, f] : c.stages[k].functions) os << " " << l << " -> " << geom::to_string(f) << ";";
      os << "\n";
    }
  } else if (s.certificate["kind"] == "recurrent_set") {
    os << indent << "  recurrent set {";
    const auto& rows = s.certificate["constraints"];
    for (std::size_t i = 0; i < rows.size(); ++i) os << (i ? ", " : "") << rows[i].get<std::string>();
    os << "}\n";
  }
  for (const auto& n : s.nested) scc_text(os, n, indent + "  ");
}

}  // namespace

json AnalysisReport::to_json(bool with_timing) const {
  std::vector<std::string> classes;
  for (auto c : config.rank_classes) classes.push_back(to_string(c));
  json sccs_json = json::array();
  for (const auto& s : sccs) sccs_json.push_back(scc_json(s));
  json j{{"format", 1},
         {"model", model_kind},
         {"overall", to_string(overall)},
         {"config",
          {{"rank_classes", classes},
           {"cfr", to_string(config.cfr)},
           {"max_mlrf_depth", config.max_mlrf_depth},
           {"max_lex_stages", config.max_lex_stages},
           {"max_iterative_rounds", config.max_iterative_rounds}}},
         {"sccs", sccs_json},
         {"refinement", refinement ? refinement_json(*refinement) : json(nullptr)}};
  if (with_timing) j["timing"] = {{"seconds", seconds}};
  return j;
}

std::string AnalysisReport::to_text() const {
  std::ostringstream os;
  os << "overall: " << to_string(overall) << "\n";
  if (refinement) {
    os << "refined system: " << refinement->refined.locations.size() << " locations, "
       << refinement->refined.edges.size() << " edges\n";
  }
  for (const auto& s : sccs) scc_text(os, s, "");
  return os.str();
}

AnalysisReport analyze(const model::Model& m, const StrategyConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  AnalysisReport rep;
  rep.config = cfg;
  if (const auto* loop = std::get_if<SLCLoop>(&m)) {
    rep.model_kind = "loop";
    const TransitionSystem ts = model::as_transition_system(*loop);
    const model::Scc scc = model::sccs(ts)[0];
    SccResult r;
    r.locations = scc.locations;
    r.edges = scc.edges;
    for (RankClass cls : cfg.rank_classes) {
      if (try_loop_class(cls, *loop, cfg, r, false, ts, scc)) {
        r.method = to_string(cls);
        break;
      }
    }
    rep.overall = r.verdict;
    rep.sccs.push_back(std::move(r));
  } else {
    rep.model_kind = "ts";
    const auto& ts = std::get<TransitionSystem>(m);
    if (cfg.cfr == CfrScheme::kPre) {
      rep.refinement = cfr::refine(ts, cfg.props, cfg.props_all_locations);
      rep.sccs = analyze_system(rep.refinement->refined, cfg, false);
      rep.overall = overall_of(rep.sccs, rep.refinement->refined.init);
    } else {
      rep.sccs = analyze_system(ts, cfg, true);
      rep.overall = overall_of(rep.sccs, ts.init);
    }
  }
  if (auto c = verify_certificate(m, rep.to_json(false)); !c) {
    throw InternalError("analysis produced a certificate the checker rejects: " + c.message);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Independent checker.

CheckResult check_refinement(const TransitionSystem& original, const TransitionSystem& refined,
                             const std::map<std::string, cfr::Version>& versions,
                             const std::map<std::string, std::string>& edge_origin) {
  if (refined.vars != original.vars) return CheckResult::fail("refined system changes the variables");
  auto version = [&](const model::LocId& l) -> const cfr::Version* {
    auto it = versions.find(l);
    return it == versions.end() ? nullptr : &it->second;
  };
  for (const auto& l : refined.locations) {
    const cfr::Version* v = version(l);
    if (!v) return CheckResult::fail("refined location '" + l + "' has no version record");
    if (!original.has_location(v->base)) return CheckResult::fail("version '" + l + "' has an unknown base");
  }
  const Polyhedron universe(original.vars);
  const cfr::Version* init = version(refined.init);
  if (init->base != original.init) return CheckResult::fail("refined init is not a version of the original init");
  for (const auto& c : init->context) {
    if (!geom::entails(universe, c)) return CheckResult::fail("refined init restricts the initial states");
  }
  // Strengthening: refined edges only keep original behaviour.
  for (const auto& e : refined.edges) {
    auto it = edge_origin.find(e.id);
    if (it == edge_origin.end()) return CheckResult::fail("refined edge '" + e.id + "' has no origin");
    const model::Edge* o = original.find_edge(it->second);
    if (!o) return CheckResult::fail("refined edge '" + e.id + "' has an unknown origin");
    if (version(e.src)->base != o->src || version(e.dst)->base != o->dst) {
      return CheckResult::fail("refined edge '" + e.id + "' does not follow its origin");
    }
    if (!geom::entails(e.rel, o->rel)) return CheckResult::fail("refined edge '" + e.id + "' adds behaviour");
  }
  // Simulation: from a state satisfying its version context, every original
  // step is matched by one refined edge into a context that holds afterwards.
  for (const auto& l : refined.locations) {
    const cfr::Version* v = version(l);
    for (const auto& o : original.edges) {
      if (o.src != v->base) continue;
      const Polyhedron step = o.rel.with(v->context);
      if (geom::is_empty(step)) continue;
      bool matched = false;
      for (const auto& e : refined.edges) {
        if (e.src != l || edge_origin.at(e.id) != o.id || !geom::entails(step, e.rel)) continue;
        bool ctx = true;
        for (const auto& c : version(e.dst)->context) {
          ctx = ctx && geom::entails(step, c.rename([](const geom::VarId& x) { return model::primed(x); }));
        }
        if (ctx) {
          matched = true;
          break;
        }
      }
      if (!matched) return CheckResult::fail("original edge '" + o.id + "' is not simulated from '" + l + "'");
    }
  }
  return {};
}

namespace {

struct ParsedRefinement {
  TransitionSystem refined;
  std::map<std::string, cfr::Version> versions;
  std::map<std::string, std::string> edge_origin;
};

ParsedRefinement parse_refinement(const json& j) {
  ParsedRefinement r;
  r.refined = std::get<TransitionSystem>(model::model_from_json(j.at("system")));
  for (const auto& [name, v] : j.at("versions").items()) {
    cfr::Version ver{v.at("base").get<std::string>(), {}};
    for (const auto& c : v.at("context")) ver.context.push_back(geom::parse_constraint(c.get<std::string>()));
    r.versions[name] = ver;
  }
  for (const auto& [id, o] : j.at("edge_origin").items()) r.edge_origin[id] = o.get<std::string>();
  return r;
}

CheckResult check_certificate(const TransitionSystem& ts, const model::Scc& scc, const json& cert,
                              const std::string& where) {
  const std::string kind = cert.value("kind", "");
  if (kind == "lex") {
    if (auto c = rank::verify_lex(ts, scc, rank::lex_from_json(cert)); !c) {
      return CheckResult::fail(where + ": lex certificate rejected: " + c.message);
    }
    return {};
  }
  const auto loop = self_loop(ts, scc);
  if (!loop) return CheckResult::fail(where + ": " + kind + " certificate on a non-self-loop SCC");
  if (kind == "lrf") {
    if (!rank::verify_lrf(*loop, rank::lrf_from_json(cert).rho)) return CheckResult::fail(where + ": LRF rejected");
  } else if (kind == "mlrf") {
    if (!rank::verify_mlrf(*loop, rank::mlrf_from_json(cert))) return CheckResult::fail(where + ": MLRF rejected");
  } else if (kind == "recurrent_set") {
    if (!rank::verify_recurrent(*loop, rank::recurrent_from_json(cert, ts.vars))) {
      return CheckResult::fail(where + ": recurrent set rejected");
    }
  } else {
    return CheckResult::fail(where + ": unknown certificate kind '" + kind + "'");
  }
  return {};
}

// Checks the SCC entries of a report against `ts`; sets the verdicts the
// entries actually support.
CheckResult check_sccs(const TransitionSystem& ts, const json& entries, bool terminating_claimed,
                       bool nonterminating_claimed, bool allow_refinement) {
  const auto all = model::sccs(ts);
  std::set<std::size_t> proven;
  bool nonterm_at_init = false;
  for (const auto& entry : entries) {
    const auto locs = entry.at("locations").get<std::vector<model::LocId>>();
    const std::string where = "SCC " + entry.at("locations").dump();
    std::size_t k = 0;
    while (k < all.size() && (all[k].trivial || all[k].locations != locs)) ++k;
    if (k == all.size()) return CheckResult::fail(where + ": not an SCC of the analyzed system");
    const model::Scc& scc = all[k];
    if (entry.at("edges").get<std::vector<std::string>>() != scc.edges) {
      return CheckResult::fail(where + ": edge list differs from the recomputed SCC");
    }
    const std::string verdict = entry.at("verdict").get<std::string>();
    if (verdict == "unknown") continue;
    if (entry.contains("refinement")) {
      if (!allow_refinement) return CheckResult::fail(where + ": nested refinement is not allowed here");
      if (verdict != "terminating") return CheckResult::fail(where + ": refinement only supports termination");
      const TransitionSystem sub = cfr::scc_subsystem(ts, scc);
      const ParsedRefinement pr = parse_refinement(entry.at("refinement"));
      if (auto c = check_refinement(sub, pr.refined, pr.versions, pr.edge_origin); !c) {
        return CheckResult::fail(where + ": " + c.message);
      }
      if (auto c = check_sccs(pr.refined, entry.at("nested"), true, false, false); !c) {
        return CheckResult::fail(where + ", refined: " + c.message);
      }
      proven.insert(k);
      continue;
    }
    if (entry.at("certificate").is_null()) return CheckResult::fail(where + ": verdict without certificate");
    if (auto c = check_certificate(ts, scc, entry.at("certificate"), where); !c) return c;
    const std::string kind = entry.at("certificate").at("kind").get<std::string>();
    if (verdict == "terminating" && kind != "recurrent_set") {
      proven.insert(k);
    } else if (verdict == "nonterminating" && kind == "recurrent_set") {
      nonterm_at_init = nonterm_at_init || (scc.locations.size() == 1 && scc.locations[0] == ts.init);
    } else {
      return CheckResult::fail(where + ": certificate kind does not support verdict '" + verdict + "'");
    }
  }
  if (terminating_claimed) {
    for (std::size_t k = 0; k < all.size(); ++k) {
      if (!all[k].trivial && !proven.count(k)) {
        return CheckResult::fail("SCC " + json(all[k].locations).dump() + " lacks a termination proof");
      }
    }
  }
  if (nonterminating_claimed && !nonterm_at_init) {
    return CheckResult::fail("no verified recurrent set at the initial location");
  }
  return {};
}

}  // namespace

CheckResult verify_certificate(const model::Model& m, const json& report) {
  try {
    if (report.value("format", 0) != 1) return CheckResult::fail("unsupported report format");
    const std::string overall = report.at("overall").get<std::string>();
    const bool is_loop = std::holds_alternative<SLCLoop>(m);
    if (report.at("model").get<std::string>() != (is_loop ? "loop" : "ts")) {
      return CheckResult::fail("report describes a different kind of model");
    }
    TransitionSystem ts = is_loop ? model::as_transition_system(std::get<SLCLoop>(m)) : std::get<TransitionSystem>(m);
    const json& ref = report.contains("refinement") ? report.at("refinement") : json(nullptr);
    bool allow_nested = true;
    if (!ref.is_null()) {
      if (is_loop) return CheckResult::fail("loops are not refined");
      const ParsedRefinement pr = parse_refinement(ref);
      if (auto c = check_refinement(ts, pr.refined, pr.versions, pr.edge_origin); !c) {
        return CheckResult::fail("refinement: " + c.message);
      }
      ts = pr.refined;
      allow_nested = false;
    }
    if (is_loop) {
      // The loop entry carries loop-level certificates over the single edge.
      for (const auto& entry : report.at("sccs")) {
        if (entry.contains("refinement")) return CheckResult::fail("loops are not refined");
      }
    }
    return check_sccs(ts, report.at("sccs"), overall == "terminating", overall == "nonterminating", allow_nested);
  } catch (const json::exception& e) {
    return CheckResult::fail(std::string("malformed report: ") + e.what());
  } catch (const Error& e) {
    return CheckResult::fail(std::string("malformed report: ") + e.what());
  }
}

}  // namespace termrank::driver

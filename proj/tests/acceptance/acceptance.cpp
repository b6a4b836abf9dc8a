// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "../support/fixtures.hpp"
#include "../support/iso.hpp"
#include "termrank/cfr/cfr.hpp"
#include "termrank/driver/driver.hpp"
#include "termrank/geom/errors.hpp"
#include "termrank/geom/text.hpp"
#include "termrank/oracle/oracle.hpp"
#include "termrank/rank/ranking.hpp"

using namespace termrank;
using geom::AffineFunc;
using geom::Constraint;
using geom::Polyhedron;
using model::SLCLoop;
using model::TransitionSystem;
using nlohmann::json;
using testing::load;
using testing::load_loop;
using testing::load_ts;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

driver::StrategyConfig config(const std::string& strategy, driver::CfrScheme cfr) {
  driver::StrategyConfig cfg;
  cfg.rank_classes = driver::strategy_classes(strategy);
  cfg.cfr = cfr;
  return cfg;
}

std::size_t nontrivial(const TransitionSystem& ts) {
  std::size_t k = 0;
  for (const auto& s : model::sccs(ts)) k += !s.trivial;
  return k;
}

Outcome criterion1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = load("example_ts.json");
  const auto rep = driver::analyze(m, config("lrf", driver::CfrScheme::kPre));
  o.require(rep.overall == driver::Verdict::kTerminating, "not terminating");
  o.require(rep.refinement.has_value(), "no refinement");
  if (rep.refinement) {
    const auto& r = rep.refinement->refined;
    o.require(r.locations.size() == 8, "refined system does not have 8 locations");
    o.require(testing::isomorphic(r, load_ts("example_refined.json")), "refined system not isomorphic to the expected one");
    o.require(nontrivial(r) == 2, "refined system does not have two non-trivial SCCs");
  }
  o.require(rep.sccs.size() == 2, "expected two SCC results");
  for (const auto& s : rep.sccs) {
    o.require(s.verdict == driver::Verdict::kTerminating, "an SCC is not terminating");
    o.require(s.certificate.value("kind", "") == "lex" && s.certificate["stages"].size() == 1,
              "an SCC lacks a 1-stage certificate");
  }
  const auto c = driver::verify_certificate(m, rep.to_json());
  o.require(static_cast<bool>(c), "checker: " + c.message);
  const double t = since(t0);
  o.require(t < 5.0, "took " + std::to_string(t) + " s");
  if (o.ok) o.detail = std::to_string(t) + " s";
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto m = load("example_ts.json");
  const auto neg = driver::analyze(m, config("lrf", driver::CfrScheme::kNone));
  o.require(neg.overall == driver::Verdict::kUnknown, "lrf without refinement is not unknown");
  o.require(static_cast<bool>(driver::verify_certificate(m, neg.to_json())), "checker rejects the unknown report");
  const auto pos = driver::analyze(m, config("lex", driver::CfrScheme::kNone));
  o.require(pos.overall == driver::Verdict::kTerminating, "lex is not terminating");
  o.require(pos.sccs.size() == 1 && pos.sccs[0].certificate["stages"].size() == 2, "lex certificate is not 2-stage");
  const auto c = driver::verify_certificate(m, pos.to_json());
  o.require(static_cast<bool>(c), "checker: " + c.message);
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto ts = load_ts("example_ts.json");
  const auto chc = cfr::ts_to_chc(ts);
  o.require(chc.clauses.size() == 5, "clause count is not 5");
  o.require(cfr::dump(chc) ==
                "q_n0(x,y,z) :- q_n1(x,y,z).\n"
                "q_n1(x,y,z) :- {x >= 1}, q_n2(x,y,z).\n"
                "q_n1(x,y,z) :- {x <= 0}, q_n3(x,y,z).\n"
                "q_n2(x,y,z) :- {y <= z - 1, y' = y + 1}, q_n1(x,y',z).\n"
                "q_n2(x,y,z) :- {y >= z, x' = x - 1}, q_n1(x',y,z).\n",
            "five-clause listing differs");
  const cfr::PropertyMap props{{"n1", {geom::normalize(geom::parse_constraint("x >= 1")),
                                       geom::normalize(geom::parse_constraint("y >= z"))}}};
  const auto pe = cfr::partial_evaluate(chc, props);
  o.require(pe.clauses.size() == 9, "specialized program does not have 9 clauses");
  const auto expected = load_ts("example_refined.json");
  o.require(testing::isomorphic(cfr::chc_to_ts(pe), expected), "specialized program not isomorphic to the listing");
  for (const char* q : {"Q5", "Q6", "Q7", "Q8"}) {
    bool found = false;
    for (const auto& c : pe.clauses) found = found || geom::equivalent(c.constraint, expected.edge(q).rel);
    o.require(found, std::string("strengthened clause ") + q + " missing");
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto l1 = load_loop("loop1.json");
  const auto l2 = load_loop("loop2.json");
  o.require(rank::find_lrf(l1).has_value(), "no LRF for loop1");
  o.require(rank::verify_lrf(l1, geom::parse_affine("y - x")), "y - x rejected for loop1");
  o.require(!rank::find_lrf(l2).has_value(), "LRF found for loop2");
  o.require(rank::find_mlrf_bounded(l2, 3).has_value(), "no depth-3 MLRF for loop2");
  rank::MLRFCert zyx;
  for (const char* f : {"z", "y", "x"}) zyx.components.push_back(geom::parse_affine(f));
  o.require(rank::verify_mlrf(l2, zyx), "<z, y, x> rejected for loop2");
  o.require(!rank::find_mlrf_bounded(l2, 1).has_value(), "depth-1 MLRF found for loop2");
  return o;
}

Outcome criterion5() {
  Outcome o;
  const auto l2 = load_loop("loop2.json");
  const auto r2 = rank::find_mlrf_iterative(l2);
  o.require(r2.kind == rank::IterativeResult::Kind::kMlrf && r2.mlrf && rank::verify_mlrf(l2, *r2.mlrf),
            "no verified MLRF for loop2");
  const auto fx = load_loop("fixpoint.json");
  const auto rf = rank::find_mlrf_iterative(fx);
  o.require(rf.kind == rank::IterativeResult::Kind::kRecurrent && rf.recurrent, "no recurrent set for the fixpoint loop");
  if (rf.recurrent) o.require(rank::verify_recurrent(fx, *rf.recurrent), "recurrent set rejected");
  oracle::BoxConfig box;
  const auto v = oracle::run_box(fx, box, std::vector<oracle::State>{{0}});
  o.require(v.results.size() == 1 && v.results[0].outcome == oracle::Outcome::kNonterminated, "no lasso from x = 0");
  return o;
}

SLCLoop random_bounded_loop(std::mt19937& rng) {
  std::uniform_int_distribution<int> nv(1, 3), co(-2, 2), nr(1, 3), box(1, 3);
  const std::size_t n = nv(rng);
  std::vector<geom::VarId> vars;
  for (std::size_t i = 0; i < n; ++i) vars.push_back(std::string(1, static_cast<char>('a' + i)));
  const auto space = model::transition_space(vars);
  std::vector<Constraint> rows;
  for (const auto& v : space) {
    const int b = box(rng);
    rows.push_back(Constraint::le(AffineFunc::variable(v), AffineFunc(Rational(b))));
    rows.push_back(Constraint::ge(AffineFunc::variable(v), AffineFunc(Rational(-b))));
  }
  const int m = nr(rng);
  for (int r = 0; r < m; ++r) {
    AffineFunc f(Rational(co(rng)));
    for (const auto& v : space) f.add_term(v, Rational(co(rng)));
    rows.push_back({f, rng() % 3 == 0 ? geom::Rel::kEq : geom::Rel::kLe});
  }
  return SLCLoop{vars, Polyhedron(space, rows)};
}

Outcome criterion6() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(2024);
  int fix = 0, lrf = 0;
  for (int i = 0; i < 100; ++i) {
    const SLCLoop l = random_bounded_loop(rng);
    std::vector<Constraint> eqs;
    for (const auto& v : l.vars) {
      eqs.push_back(Constraint::eq(AffineFunc::variable(model::primed(v)), AffineFunc::variable(v)));
    }
    const bool has_fix = !geom::is_empty(l.rel.with(eqs));
    const bool has_lrf = rank::find_lrf(l).has_value();
    o.require(has_fix != has_lrf, "loop " + std::to_string(i) + " violates the dichotomy");
    try {
      const auto d = rank::decide_bounded(l);
      o.require(d.kind != rank::BoundedDecision::Kind::kNotApplicable, "decide_bounded not applicable");
    } catch (const InternalError& e) {
      o.require(false, std::string("decide_bounded raised: ") + e.what());
    }
    fix += has_fix;
    lrf += has_lrf;
  }
  const double t = since(t0);
  o.require(t < 60.0, "took " + std::to_string(t) + " s");
  if (o.ok) o.detail = std::to_string(fix) + " fixpoint, " + std::to_string(lrf) + " LRF, " + std::to_string(t) + " s";
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto l2 = load_loop("loop2.json");
  oracle::BoxConfig cfg;
  cfg.bound = 1000;
  cfg.max_steps = 1000;
  const auto curve = oracle::steps_curve(l2, [](std::int64_t k) { return oracle::State{0, 0, k}; }, 1, 10, cfg);
  o.require(curve.size() == 10, "curve has the wrong length");
  std::vector<long long> steps;
  for (const auto& p : curve) {
    o.require(p.outcome == oracle::Outcome::kTerminated, "a curve point did not terminate");
    steps.push_back(static_cast<long long>(p.steps));
  }
  for (std::size_t i = 1; i < steps.size(); ++i) o.require(steps[i] >= steps[i - 1], "curve decreases");
  for (std::size_t i = 2; i < steps.size(); ++i) {
    o.require(std::llabs(steps[i] - 2 * steps[i - 1] + steps[i - 2]) <= 2, "second difference exceeds 2");
  }
  oracle::BoxConfig b40;
  b40.bound = 40;
  const auto v = oracle::run_box(l2, b40, std::vector<oracle::State>{{0, 0, 3}});
  o.require(v.results.size() == 1 && v.results[0].outcome == oracle::Outcome::kTerminated && v.results[0].steps == 12,
            "run from (0,0,3) does not take 12 steps");
  if (o.ok) {
    std::string s;
    for (auto k : steps) s += (s.empty() ? "" : ",") + std::to_string(k);
    o.detail = "curve " + s;
  }
  return o;
}

// ---- criterion 8: certificate mutation ------------------------------------

const std::vector<std::string> kFixtures = {"example_ts.json", "example_refined.json",  "nested_ts.json",     "spin_ts.json",
                                            "loop1.json",   "loop2.json",    "fixpoint.json",      "twophase_loop.json",
                                            "bounded_loop.json"};

constexpr std::int64_t kBruteBox = 3;

// Integer points of a relation inside [-kBruteBox, kBruteBox]^space.
class PointCache {
 public:
  const std::vector<geom::Point>& of(const Polyhedron& rel) {
    std::ostringstream key;
    for (const auto& v : rel.space()) key << v << ",";
    for (const auto& c : rel.constraints()) key << geom::to_string(c) << ";";
    auto [it, fresh] = cache_.try_emplace(key.str());
    if (fresh) {
      geom::Point p;
      enumerate(rel, 0, p, it->second);
    }
    return it->second;
  }

 private:
  void enumerate(const Polyhedron& rel, std::size_t i, geom::Point& p, std::vector<geom::Point>& out) {
    if (i == rel.space().size()) {
      if (rel.contains(p)) out.push_back(p);
      return;
    }
    for (std::int64_t k = -kBruteBox; k <= kBruteBox; ++k) {
      p[rel.space()[i]] = Rational(static_cast<long>(k));
      enumerate(rel, i + 1, p, out);
    }
  }
  std::map<std::string, std::vector<geom::Point>> cache_;
};

AffineFunc primed_f(const AffineFunc& f) {
  return f.rename([](const geom::VarId& v) { return model::primed(v); });
}

bool brute_lrf(PointCache& pc, const Polyhedron& rel, const AffineFunc& rho) {
  for (const auto& p : pc.of(rel)) {
    if (rho.eval(p) < 0 || rho.eval(p) - primed_f(rho).eval(p) < 1) return false;
  }
  return true;
}

bool brute_mlrf(PointCache& pc, const Polyhedron& rel, const rank::MLRFCert& c) {
  for (const auto& p : pc.of(rel)) {
    bool ranked = false;
    for (const auto& f : c.components) {
      if (f.eval(p) - primed_f(f).eval(p) < 1) return false;
      if (f.eval(p) >= 0) {
        ranked = true;
        break;
      }
    }
    if (!ranked) return false;
  }
  return true;
}

bool brute_lex(PointCache& pc, const TransitionSystem& ts, const model::Scc& scc, const rank::LexCert& c) {
  std::vector<std::string> live;
  for (const auto& id : scc.edges) {
    const bool dead = std::find(c.dead_edges.begin(), c.dead_edges.end(), id) != c.dead_edges.end();
    if (dead && !pc.of(ts.edge(id).rel).empty()) return false;
    if (!dead) live.push_back(id);
  }
  auto fn = [](const rank::LexStage& s, const model::LocId& l) {
    auto it = s.functions.find(l);
    return it == s.functions.end() ? AffineFunc() : it->second;
  };
  std::vector<std::string> remaining = rank::cyclic_part(ts, live);
  for (const auto& s : c.stages) {
    for (const auto& id : remaining) {
      const auto& e = ts.edge(id);
      const AffineFunc fs = fn(s, e.src), fd = primed_f(fn(s, e.dst));
      const bool strict = std::find(s.ranked.begin(), s.ranked.end(), id) != s.ranked.end();
      for (const auto& p : pc.of(e.rel)) {
        const Rational d = fs.eval(p) - fd.eval(p);
        if (d < 0) return false;
        if (strict && (d < 1 || fs.eval(p) < 0)) return false;
      }
    }
    std::vector<std::string> rest;
    for (const auto& id : remaining) {
      if (std::find(s.ranked.begin(), s.ranked.end(), id) == s.ranked.end()) rest.push_back(id);
    }
    for (const auto& id : s.ranked) {
      if (std::find(remaining.begin(), remaining.end(), id) == remaining.end()) return false;
    }
    remaining = rank::cyclic_part(ts, rest);
  }
  return remaining.empty();
}

bool brute_recurrent(PointCache& pc, const SLCLoop& loop, const rank::RecurrentSetWitness& w) {
  const auto& pts = pc.of(w.set);
  if (pts.empty()) return false;
  auto pre = [&](const geom::Point& p) {
    std::vector<Rational> x;
    for (const auto& v : loop.vars) x.push_back(p.at(v));
    return x;
  };
  auto post = [&](const geom::Point& p) {
    std::vector<Rational> x;
    for (const auto& v : loop.vars) x.push_back(p.at(model::primed(v)));
    return x;
  };
  std::set<std::vector<Rational>> enabled;
  for (const auto& p : pts) {
    if (!loop.rel.contains(p)) return false;
    enabled.insert(pre(p));
  }
  for (const auto& x : enabled) {
    bool on_border = false;
    for (const auto& c : x) on_border = on_border || c == kBruteBox || c == -kBruteBox;
    bool stays = false;
    for (const auto& p : pts) stays = stays || (pre(p) == x && enabled.count(post(p)));
    if (!stays && !on_border) return false;
  }
  return true;
}

std::vector<AffineFunc> bump(const AffineFunc& f, const std::vector<geom::VarId>& vars) {
  std::vector<AffineFunc> out;
  for (const auto& v : vars) {
    AffineFunc g = f;
    g.set_coeff(v, f.coeff(v) + 1);
    out.push_back(g);
  }
  AffineFunc g = f;
  g.set_constant(f.constant() + 1);
  out.push_back(g);
  return out;
}

struct Site {
  json::json_pointer ptr;
  TransitionSystem ts;
  model::Scc scc;
};

void collect(const TransitionSystem& ts, const json& entries, const json::json_pointer& base, std::vector<Site>& out) {
  const auto all = model::sccs(ts);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const json& e = entries[i];
    const auto locs = e["locations"].get<std::vector<model::LocId>>();
    const auto it = std::find_if(all.begin(), all.end(), [&](const model::Scc& s) { return s.locations == locs; });
    if (it == all.end()) continue;
    if (e.contains("refinement")) {
      const auto refined = std::get<TransitionSystem>(model::model_from_json(e["refinement"]["system"]));
      collect(refined, e["nested"], base / i / "nested", out);
    } else if (!e["certificate"].is_null()) {
      out.push_back({base / i / "certificate", ts, *it});
    }
  }
}

// Mutant certificates paired with a brute-force validity verdict.
std::vector<std::pair<json, bool>> mutants(PointCache& pc, const Site& s, const json& cert) {
  std::vector<std::pair<json, bool>> out;
  const std::string kind = cert["kind"];
  const auto loop_rel = [&] { return s.ts.edge(s.scc.edges[0]).rel; };
  if (kind == "lrf") {
    for (const auto& g : bump(rank::lrf_from_json(cert).rho, s.ts.vars)) {
      out.emplace_back(rank::to_json(rank::LRFCert{g}), brute_lrf(pc, loop_rel(), g));
    }
  } else if (kind == "mlrf") {
    const auto c = rank::mlrf_from_json(cert);
    for (std::size_t k = 0; k < c.components.size(); ++k) {
      for (const auto& g : bump(c.components[k], s.ts.vars)) {
        auto m = c;
        m.components[k] = g;
        out.emplace_back(rank::to_json(m), brute_mlrf(pc, loop_rel(), m));
      }
    }
  } else if (kind == "lex") {
    const auto c = rank::lex_from_json(cert);
    for (std::size_t k = 0; k < c.stages.size(); ++k) {
      for (const auto& [l, f] : c.stages[k].functions) {
        for (const auto& g : bump(f, s.ts.vars)) {
          auto m = c;
          m.stages[k].functions[l] = g;
          out.emplace_back(rank::to_json(m), brute_lex(pc, s.ts, s.scc, m));
        }
      }
    }
  } else if (kind == "recurrent_set") {
    const SLCLoop loop{s.ts.vars, loop_rel()};
    const auto w = rank::recurrent_from_json(cert, s.ts.vars);
    const auto rows = w.set.constraints();
    for (std::size_t k = 0; k < rows.size(); ++k) {
      for (const auto& g : bump(rows[k].lhs, w.set.space())) {
        auto r = rows;
        r[k].lhs = g;
        const rank::RecurrentSetWitness m{Polyhedron(w.set.space(), r), w.round};
        out.emplace_back(rank::to_json(m), brute_recurrent(pc, loop, m));
      }
    }
  }
  return out;
}

Outcome criterion8() {
  Outcome o;
  PointCache pc;
  std::set<std::string> seen;
  std::size_t certs = 0, total = 0, rejected = 0, accepted_valid = 0, rejected_invalid = 0;
  for (const auto& f : kFixtures) {
    const auto m = load(f);
    const TransitionSystem base = std::holds_alternative<SLCLoop>(m) ? model::as_transition_system(std::get<SLCLoop>(m))
                                                                     : std::get<TransitionSystem>(m);
    for (const char* strategy : {"lrf", "lex", "mlrf", "auto"}) {
      for (auto cfr : {driver::CfrScheme::kNone, driver::CfrScheme::kPre, driver::CfrScheme::kOnFailure}) {
        const json rep = driver::analyze(m, config(strategy, cfr)).to_json(false);
        if (!seen.insert(f + rep.dump()).second) continue;
        const TransitionSystem analyzed =
            rep["refinement"].is_null() ? base
                                        : std::get<TransitionSystem>(model::model_from_json(rep["refinement"]["system"]));
        std::vector<Site> sites;
        collect(analyzed, rep["sccs"], json::json_pointer("/sccs"), sites);
        for (const auto& s : sites) {
          ++certs;
          std::size_t here_rejected = 0;
          for (const auto& [cert, valid] : mutants(pc, s, rep[s.ptr])) {
            json bad = rep;
            bad[s.ptr] = cert;
            ++total;
            if (!driver::verify_certificate(m, bad)) {
              ++rejected;
              ++here_rejected;
              rejected_invalid += !valid;
            } else {
              o.require(valid, f + ": checker accepted an invalid mutant " + cert.dump());
              accepted_valid += valid;
            }
          }
          o.require(here_rejected > 0, f + ": no mutant of " + rep[s.ptr].dump() + " was rejected");
        }
      }
    }
  }
  o.require(certs > 0, "no certificates produced");
  if (o.ok) {
    o.detail = std::to_string(certs) + " certificates, " + std::to_string(total) + " mutants, " +
               std::to_string(rejected) + " rejected (" + std::to_string(rejected_invalid) + " invalid by brute force), " + std::to_string(accepted_valid) +
               " accepted and still valid by brute force";
  }
  return o;
}

Outcome criterion9() {
  Outcome o;
  oracle::BoxConfig box;
  box.bound = 5;
  std::size_t states = 0;
  for (const char* f : {"example_ts.json", "example_refined.json", "nested_ts.json", "spin_ts.json"}) {
    const auto ts = load_ts(f);
    const auto refined = cfr::refine(ts).refined;
    const auto a = oracle::run_box(ts, box);
    const auto b = oracle::run_box(refined, box);
    std::multiset<std::tuple<oracle::State, int, std::size_t>> va, vb;
    for (const auto& r : a.results) va.emplace(r.initial, static_cast<int>(r.outcome), r.steps);
    for (const auto& r : b.results) vb.emplace(r.initial, static_cast<int>(r.outcome), r.steps);
    o.require(va == vb, std::string(f) + ": verdicts differ after refinement");
    o.require(a.reachable == b.reachable, std::string(f) + ": reachable states differ after refinement");
    states += va.size();
  }
  if (o.ok) o.detail = std::to_string(states) + " initial states compared";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 running example end-to-end with pre-refinement", criterion1},
      {"2 running example controls without refinement", criterion2},
      {"3 clause listings", criterion3},
      {"4 LRF and MLRF on loops 1 and 2", criterion4},
      {"5 iterative MLRF search and recurrent set", criterion5},
      {"6 bounded-loop dichotomy on 100 random loops", criterion6},
      {"7 linear step bound and frozen trajectory", criterion7},
      {"8 certificate mutation", criterion8},
      {"9 refinement preserves oracle verdicts", criterion9},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %s%s%s\n", o.ok ? "PASS" : "FAIL", name, o.detail.empty() ? "" : ": ",
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.ok;
  }
  return failed == 0 ? 0 : 1;
}

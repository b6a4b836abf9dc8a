#include <algorithm>
#include <map>
#include <set>

#include "termrank/geom/errors.hpp"
#include "termrank/geom/farkas.hpp"
#include "termrank/rank/ranking.hpp"

namespace termrank::rank {

using geom::Constraint;
using geom::ParamAffine;
using geom::TemplateLp;
using geom::VarId;
using model::Edge;
using model::LocId;

std::vector<std::string> cyclic_part(const TransitionSystem& ts, const std::vector<std::string>& edges) {
  TransitionSystem sub;
  sub.vars = ts.vars;
  sub.init = ts.init;
  std::set<LocId> locs;
  for (const auto& id : edges) {
    const Edge& e = ts.edge(id);
    locs.insert(e.src);
    locs.insert(e.dst);
    sub.edges.push_back(e);
  }
  sub.locations.assign(locs.begin(), locs.end());
  std::vector<std::string> out;
  for (const auto& scc : model::sccs(sub)) out.insert(out.end(), scc.edges.begin(), scc.edges.end());
  std::vector<std::string> ordered;
  for (const auto& id : edges) {
    if (std::find(out.begin(), out.end(), id) != out.end()) ordered.push_back(id);
  }
  return ordered;
}

namespace {

AffineFunc prime(const AffineFunc& f) { return f.rename([](const VarId& v) { return model::primed(v); }); }
ParamAffine prime(const ParamAffine& f) { return f.rename([](const VarId& v) { return model::primed(v); }); }

// rho_src(x) - rho_dst(x')
AffineFunc edge_delta(const std::map<LocId, AffineFunc>& f, const Edge& e) {
  auto get = [&](const LocId& l) {
    auto it = f.find(l);
    return it == f.end() ? AffineFunc() : it->second;
  };
  return get(e.src) - prime(get(e.dst));
}

bool ranks(const std::map<LocId, AffineFunc>& f, const Edge& e) {
  auto it = f.find(e.src);
  const AffineFunc src = it == f.end() ? AffineFunc() : it->second;
  return geom::entails(e.rel, Constraint::ge(src, AffineFunc(0))) &&
         geom::entails(e.rel, Constraint::ge(edge_delta(f, e), AffineFunc(1)));
}

bool non_increasing(const std::map<LocId, AffineFunc>& f, const Edge& e) {
  return geom::entails(e.rel, Constraint::ge(edge_delta(f, e), AffineFunc(0)));
}

std::optional<std::map<LocId, AffineFunc>> solve_stage(const TransitionSystem& ts, const model::Scc& scc,
                                                       const std::vector<std::string>& remaining,
                                                       const std::vector<std::string>& strict) {
  TemplateLp lp;
  std::map<LocId, ParamAffine> t;
  for (const auto& l : scc.locations) t[l] = lp.affine_template(ts.vars);
  for (const auto& id : remaining) {
    const Edge& e = ts.edge(id);
    const ParamAffine d = t.at(e.src) - prime(t.at(e.dst));
    if (std::find(strict.begin(), strict.end(), id) != strict.end()) {
      lp.require_nonneg(e.rel, d.plus_constant(-1));
      lp.require_nonneg(e.rel, t.at(e.src));
    } else {
      lp.require_nonneg(e.rel, d);
    }
  }
  const auto sol = lp.solve();
  if (!sol) return std::nullopt;
  std::map<LocId, AffineFunc> out;
  for (const auto& [l, p] : t) out[l] = p.instantiate(*sol);
  return out;
}

}  // namespace

std::optional<LexCert> rank_scc_lex(const TransitionSystem& ts, const model::Scc& scc, std::size_t max_stages) {
  LexCert cert;
  std::vector<std::string> live;
  for (const auto& id : scc.edges) {
    if (geom::is_empty(ts.edge(id).rel)) {
      cert.dead_edges.push_back(id);
    } else {
      live.push_back(id);
    }
  }
  std::vector<std::string> remaining = cyclic_part(ts, live);
  for (std::size_t stage = 0; stage < max_stages && !remaining.empty(); ++stage) {
    // Grow the strictly ranked set greedily in edge order.
    std::vector<std::string> strict;
    for (const auto& id : remaining) {
      strict.push_back(id);
      if (!solve_stage(ts, scc, remaining, strict)) strict.pop_back();
    }
    if (strict.empty()) return std::nullopt;
    auto funcs = solve_stage(ts, scc, remaining, strict);
    if (!funcs) throw InternalError("lexicographic stage became infeasible");
    LexStage s;
    s.functions = *funcs;
    std::vector<std::string> rest;
    for (const auto& id : remaining) {
      if (ranks(s.functions, ts.edge(id))) {
        s.ranked.push_back(id);
      } else {
        rest.push_back(id);
      }
    }
    cert.stages.push_back(std::move(s));
    remaining = cyclic_part(ts, rest);
  }
  if (!remaining.empty()) return std::nullopt;
  if (auto check = verify_lex(ts, scc, cert); !check) {
    throw InternalError("synthesized lexicographic certificate fails verification: " + check.message);
  }
  return cert;
}

CheckResult verify_lex(const TransitionSystem& ts, const model::Scc& scc, const LexCert& cert) {
  std::set<std::string> internal(scc.edges.begin(), scc.edges.end());
  std::set<LocId> locs(scc.locations.begin(), scc.locations.end());
  std::vector<std::string> live;
  for (const auto& id : scc.edges) {
    if (std::find(cert.dead_edges.begin(), cert.dead_edges.end(), id) == cert.dead_edges.end()) live.push_back(id);
  }
  for (const auto& id : cert.dead_edges) {
    if (!internal.count(id)) return CheckResult::fail("dead edge '" + id + "' is not internal to the SCC");
    if (!geom::is_empty(ts.edge(id).rel)) return CheckResult::fail("edge '" + id + "' is not dead");
  }
  std::vector<std::string> remaining = cyclic_part(ts, live);
  for (std::size_t k = 0; k < cert.stages.size(); ++k) {
    const LexStage& s = cert.stages[k];
    const std::string where = "stage " + std::to_string(k + 1);
    for (const auto& [l, f] : s.functions) {
      if (!locs.count(l)) return CheckResult::fail(where + ": function for foreign location '" + l + "'");
      for (const auto& v : f.vars()) {
        if (std::find(ts.vars.begin(), ts.vars.end(), v) == ts.vars.end()) {
          return CheckResult::fail(where + ": function mentions unknown variable '" + v + "'");
        }
      }
    }
    for (const auto& id : remaining) {
      if (!non_increasing(s.functions, ts.edge(id))) {
        return CheckResult::fail(where + ": increases on edge '" + id + "'");
      }
    }
    std::vector<std::string> rest = remaining;
    for (const auto& id : s.ranked) {
      auto it = std::find(rest.begin(), rest.end(), id);
      if (it == rest.end()) return CheckResult::fail(where + ": ranked edge '" + id + "' is not pending");
      if (!ranks(s.functions, ts.edge(id))) return CheckResult::fail(where + ": does not rank edge '" + id + "'");
      rest.erase(it);
    }
    remaining = cyclic_part(ts, rest);
  }
  if (!remaining.empty()) return CheckResult::fail("edges still on cycles after the last stage");
  return {};
}

}  // namespace termrank::rank

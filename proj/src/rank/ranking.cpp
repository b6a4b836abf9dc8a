#include "termrank/rank/ranking.hpp"

#include <algorithm>
#include <set>

#include "termrank/geom/errors.hpp"
#include "termrank/geom/farkas.hpp"
#include "termrank/geom/text.hpp"

namespace termrank::rank {

using geom::Constraint;
using geom::LinExpr;
using geom::ParamAffine;
using termrank::Rational;
using geom::Rel;
using geom::TemplateLp;
using geom::VarId;
using model::primed;

namespace {

AffineFunc prime(const AffineFunc& f) { return f.rename([](const VarId& v) { return primed(v); }); }
ParamAffine prime(const ParamAffine& f) { return f.rename([](const VarId& v) { return primed(v); }); }

bool over_vars(const AffineFunc& f, const std::vector<VarId>& vars) {
  for (const auto& v : f.vars()) {
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) return false;
  }
  return true;
}

// f(x) - f(x')
AffineFunc delta(const AffineFunc& f) { return f - prime(f); }

// f >= k as a constraint
Constraint at_least(const AffineFunc& f, const Rational& k) { return Constraint::ge(f, AffineFunc(k)); }

}  // namespace

bool verify_lrf(const SLCLoop& loop, const AffineFunc& rho) {
  if (!over_vars(rho, loop.vars)) return false;
  return geom::entails(loop.rel, at_least(rho, 0)) && geom::entails(loop.rel, at_least(delta(rho), 1));
}

std::optional<LRFCert> find_lrf(const SLCLoop& loop) {
  if (geom::is_empty(loop.rel)) return LRFCert{AffineFunc()};
  TemplateLp lp;
  const ParamAffine rho = lp.affine_template(loop.vars);
  lp.require_nonneg(loop.rel, rho);
  lp.require_nonneg(loop.rel, (rho - prime(rho)).plus_constant(-1));
  const auto sol = lp.solve();
  if (!sol) return std::nullopt;
  LRFCert cert{rho.instantiate(*sol)};
  if (!verify_lrf(loop, cert.rho)) throw InternalError("synthesized LRF fails verification");
  return cert;
}

bool verify_mlrf(const SLCLoop& loop, const MLRFCert& cert) {
  if (cert.components.empty()) return false;
  Polyhedron ctx = loop.rel;
  for (const auto& f : cert.components) {
    if (!over_vars(f, loop.vars)) return false;
    if (!geom::entails(ctx, at_least(delta(f), 1))) return false;
    ctx = ctx.with(geom::tighten_for_integers(Constraint{f, Rel::kLt}));
  }
  return geom::is_empty(ctx);
}

namespace {

std::optional<MLRFCert> nested_at_depth(const SLCLoop& loop, std::size_t d) {
  TemplateLp lp;
  std::vector<ParamAffine> f;
  for (std::size_t i = 0; i < d; ++i) f.push_back(lp.affine_template(loop.vars));
  lp.require_nonneg(loop.rel, (f[0] - prime(f[0])).plus_constant(-1));
  for (std::size_t i = 1; i < d; ++i) {
    lp.require_nonneg(loop.rel, (f[i - 1] + f[i] - prime(f[i])).plus_constant(-1));
  }
  lp.require_nonneg(loop.rel, f[d - 1]);
  const auto sol = lp.solve();
  if (!sol) return std::nullopt;
  MLRFCert cert;
  for (const auto& t : f) cert.components.push_back(t.instantiate(*sol));
  return cert;
}

}  // namespace

std::optional<MLRFCert> find_mlrf_bounded(const SLCLoop& loop, std::size_t d) {
  if (d == 0) throw SemanticError("MLRF depth must be positive");
  if (geom::is_empty(loop.rel)) return MLRFCert{{AffineFunc()}};
  for (std::size_t k = 1; k <= d; ++k) {
    if (auto cert = nested_at_depth(loop, k)) {
      if (!verify_mlrf(loop, *cert)) throw InternalError("nested ranking function fails MLRF verification");
      return cert;
    }
  }
  return std::nullopt;
}

namespace {

// The working polyhedron of the iterative algorithm, in either coordinate
// system. Both share the unprimed variables, so enabled states coincide.
struct IterSpace {
  const SLCLoop& loop;
  IterativeSpace kind;
  model::DisplacementLoop disp;

  Polyhedron initial() const { return kind == IterativeSpace::kTransition ? loop.rel : disp.rel; }

  // Transitions on which g(x) - g(x') > 0, for g = coeffs.x + c.
  AffineFunc decrease(const AffineFunc& g) const {
    if (kind == IterativeSpace::kTransition) return delta(g);
    AffineFunc out;
    for (std::size_t i = 0; i < loop.vars.size(); ++i) out.add_term(disp.disp[i], -g.coeff(loop.vars[i]));
    return out;
  }

  Polyhedron to_transition(const Polyhedron& q) const {
    if (kind == IterativeSpace::kTransition) return q;
    std::vector<Constraint> rows;
    for (const auto& c : q.constraints()) {
      AffineFunc f = c.lhs;
      for (std::size_t i = 0; i < loop.vars.size(); ++i) {
        f = f.substitute(disp.disp[i], AffineFunc::variable(primed(loop.vars[i])) - AffineFunc::variable(loop.vars[i]));
      }
      rows.push_back({f, c.rel});
    }
    return Polyhedron(loop.rel.space(), rows);
  }
};

// Nonnegative generators of the functions that are nonnegative on E.
std::vector<AffineFunc> generators(const Polyhedron& e) {
  std::vector<AffineFunc> out;
  for (const auto& c : e.constraints()) {
    if (c.lhs.is_constant()) continue;
    out.push_back(-c.lhs);
    if (c.rel == Rel::kEq) out.push_back(c.lhs);
  }
  return out;
}

std::optional<MLRFCert> assemble(const SLCLoop& loop, const IterativeResult& r) {
  MLRFCert all;
  for (auto it = r.eliminated.rbegin(); it != r.eliminated.rend(); ++it) all.components.push_back(*it);
  if (verify_mlrf(loop, all)) return all;
  MLRFCert by_round;
  for (std::size_t k = r.rounds; k-- > 0;) {
    AffineFunc sum;
    bool any = false;
    for (std::size_t i = 0; i < r.eliminated.size(); ++i) {
      if (r.round_of[i] == k) {
        sum += r.eliminated[i];
        any = true;
      }
    }
    if (any) by_round.components.push_back(sum);
  }
  if (verify_mlrf(loop, by_round)) return by_round;
  return find_mlrf_bounded(loop, std::max<std::size_t>(r.eliminated.size(), 1));
}

}  // namespace

IterativeResult find_mlrf_iterative(const SLCLoop& loop, std::size_t max_iters, IterativeSpace space) {
  IterSpace sp{loop, space, model::to_displacement(loop)};
  IterativeResult r;
  Polyhedron q = sp.initial();
  r.trace.push_back(sp.to_transition(q));
  if (geom::is_empty(q)) {
    r.kind = IterativeResult::Kind::kMlrf;
    r.mlrf = MLRFCert{{AffineFunc()}};
    return r;
  }
  for (std::size_t round = 0; round < max_iters; ++round) {
    const Polyhedron enabled = geom::project(q, loop.vars);
    bool eliminated = false;
    for (const auto& g : generators(enabled)) {
      const AffineFunc dec = sp.decrease(g);
      if (geom::is_empty(q.with(Constraint{-dec, Rel::kLt}))) continue;
      q = q.with(Constraint{dec, Rel::kLe}).simplified();
      r.eliminated.push_back(g);
      r.round_of.push_back(round);
      eliminated = true;
    }
    r.rounds = round + 1;
    r.trace.push_back(sp.to_transition(q));
    if (!eliminated) {
      RecurrentSetWitness w{sp.to_transition(q), round};
      if (verify_recurrent(loop, w)) {
        r.kind = IterativeResult::Kind::kRecurrent;
        r.recurrent = w;
      }
      return r;
    }
    if (geom::is_empty(q)) {
      r.mlrf = assemble(loop, r);
      if (r.mlrf) r.kind = IterativeResult::Kind::kMlrf;
      return r;
    }
  }
  return r;
}

bool verify_recurrent(const SLCLoop& loop, const RecurrentSetWitness& w) {
  if (w.set.space() != loop.rel.space()) return false;
  if (geom::is_empty(w.set)) return false;
  if (!geom::entails(w.set, loop.rel)) return false;
  const Polyhedron enabled = geom::project(w.set, loop.vars);
  const Polyhedron targets = geom::project(w.set, model::primed(loop.vars))
                                 .rename([](const VarId& v) { return model::unprimed(v); })
                                 .with_space(loop.vars);
  return geom::entails(targets, enabled);
}

BoundedDecision decide_bounded(const SLCLoop& loop) {
  BoundedDecision out;
  if (geom::is_empty(loop.rel)) {
    out.kind = BoundedDecision::Kind::kTerminating;
    out.lrf = LRFCert{AffineFunc()};
    return out;
  }
  if (loop.rel.has_strict() || !geom::is_bounded(loop.rel)) return out;
  std::vector<Constraint> fix;
  for (const auto& v : loop.vars) {
    fix.push_back(Constraint::eq(AffineFunc::variable(primed(v)), AffineFunc::variable(v)));
  }
  Polyhedron fixed = loop.rel.with(fix);
  if (!geom::is_empty(fixed)) {
    // Lexicographically smallest fixpoint, for a canonical witness.
    for (const auto& v : loop.vars) {
      const auto r = geom::optimize(fixed, AffineFunc::variable(v), geom::Direction::kMinimize);
      fixed = fixed.with(Constraint::eq(AffineFunc::variable(v), AffineFunc(r.value)));
    }
    out.kind = BoundedDecision::Kind::kNonterminating;
    out.fixpoint = geom::sample_point(fixed);
    return out;
  }
  out.lrf = find_lrf(loop);
  if (!out.lrf) throw InternalError("bounded loop without fixpoint has no LRF");
  out.kind = BoundedDecision::Kind::kTerminating;
  return out;
}

}  // namespace termrank::rank

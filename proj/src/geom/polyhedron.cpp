#include "termrank/geom/polyhedron.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "termrank/geom/errors.hpp"
#include "termrank/geom/simplex.hpp"

namespace termrank::geom {

namespace {

void check_vars(const std::vector<VarId>& space, const Constraint& c) {
  for (const auto& [v, _] : c.lhs.coeffs()) {
    if (std::find(space.begin(), space.end(), v) == space.end()) {
      throw SemanticError("constraint mentions variable '" + v + "' outside the space");
    }
  }
}

Constraint negate(const Constraint& c) {
  // not (e <= 0) is -e < 0; not (e < 0) is -e <= 0.
  return {-c.lhs, c.rel == Rel::kLt ? Rel::kLe : Rel::kLt};
}

struct LpView {
  LpProblem lp;
  std::map<VarId, std::size_t> index;
};

// Rows a.x + k (<=|<|=) 0 become a.x <= -k; strict rows optionally get the
// extra slack column: a.x + eps <= -k.
LpView to_lp(const Polyhedron& p, bool strict_slack) {
  LpView view;
  for (const auto& v : p.space()) {
    view.index.emplace(v, view.lp.nonneg.size());
    view.lp.nonneg.push_back(false);
  }
  std::size_t eps = 0;
  if (strict_slack) {
    eps = view.lp.nonneg.size();
    view.lp.nonneg.push_back(false);
  }
  const std::size_t n = view.lp.nonneg.size();
  for (const auto& c : p.constraints()) {
    LpRow row;
    row.coeffs.assign(n, Rational(0));
    for (const auto& [v, a] : c.lhs.coeffs()) row.coeffs[view.index.at(v)] = a;
    row.equality = c.rel == Rel::kEq;
    row.rhs = -c.lhs.constant();
    if (strict_slack && c.strict()) row.coeffs[eps] = 1;
    view.lp.rows.push_back(std::move(row));
  }
  if (strict_slack) {
    LpRow cap;
    cap.coeffs.assign(n, Rational(0));
    cap.coeffs[eps] = 1;
    cap.rhs = 1;
    view.lp.rows.push_back(std::move(cap));
    view.lp.objective.assign(n, Rational(0));
    view.lp.objective[eps] = 1;
  }
  return view;
}

Point point_from(const Polyhedron& p, const LpView& view, const std::vector<Rational>& x) {
  Point pt;
  for (const auto& v : p.space()) pt[v] = x[view.index.at(v)];
  return pt;
}

// Key for merging parallel inequality rows: the gradient scaled to primitive
// integers (the constant follows the same scaling).
std::pair<AffineFunc, Rational> gradient_form(const AffineFunc& lhs) {
  AffineFunc grad = lhs;
  grad.set_constant(0);
  const Rational k = integer_scale(grad);
  grad *= k;
  return {grad, lhs.constant() * k};
}

}  // namespace

Polyhedron::Polyhedron(std::vector<VarId> space, std::vector<Constraint> constraints)
    : space_(std::move(space)), constraints_(std::move(constraints)) {
  for (const auto& c : constraints_) check_vars(space_, c);
}

Polyhedron Polyhedron::empty(std::vector<VarId> space) {
  return Polyhedron(std::move(space), {Constraint{AffineFunc(Rational(1)), Rel::kLe}});
}

bool Polyhedron::has_strict() const {
  return std::any_of(constraints_.begin(), constraints_.end(),
                     [](const Constraint& c) { return c.strict(); });
}

bool Polyhedron::in_space(const VarId& v) const {
  return std::find(space_.begin(), space_.end(), v) != space_.end();
}

Polyhedron Polyhedron::with(const Constraint& c) const {
  check_vars(space_, c);
  Polyhedron out = *this;
  out.constraints_.push_back(c);
  return out;
}

Polyhedron Polyhedron::with(const std::vector<Constraint>& cs) const {
  Polyhedron out = *this;
  for (const auto& c : cs) {
    check_vars(space_, c);
    out.constraints_.push_back(c);
  }
  return out;
}

Polyhedron Polyhedron::intersect(const Polyhedron& other) const { return with(other.constraints_); }

Polyhedron Polyhedron::with_space(std::vector<VarId> space) const {
  return Polyhedron(std::move(space), constraints_);
}

Polyhedron Polyhedron::rename(const std::function<VarId(const VarId&)>& f) const {
  std::vector<VarId> space;
  space.reserve(space_.size());
  for (const auto& v : space_) space.push_back(f(v));
  std::vector<Constraint> cs;
  cs.reserve(constraints_.size());
  for (const auto& c : constraints_) cs.push_back(c.rename(f));
  return Polyhedron(std::move(space), std::move(cs));
}

bool Polyhedron::contains(const Point& p) const {
  return std::all_of(constraints_.begin(), constraints_.end(),
                     [&](const Constraint& c) { return c.holds(p); });
}

Polyhedron Polyhedron::simplified() const {
  struct Bound {
    Rational constant;
    bool strict;
  };
  std::vector<AffineFunc> order;  // first-occurrence order of gradients
  std::map<AffineFunc, Bound> ineqs;
  std::vector<Constraint> eqs;
  std::map<AffineFunc, Rational> eq_by_grad;

  for (const auto& raw : constraints_) {
    if (raw.lhs.is_constant()) {
      if (!raw.constant_truth()) return empty(space_);
      continue;
    }
    if (raw.rel == Rel::kEq) {
      auto [grad, k] = gradient_form(raw.lhs);
      if (grad.coeffs().begin()->second < 0) {
        grad *= Rational(-1);
        k = -k;
      }
      auto [it, inserted] = eq_by_grad.try_emplace(grad, k);
      if (!inserted) {
        if (it->second != k) return empty(space_);
        continue;
      }
      eqs.push_back(normalize(raw));
      continue;
    }
    auto [grad, k] = gradient_form(raw.lhs);
    auto [it, inserted] = ineqs.try_emplace(grad, Bound{k, raw.strict()});
    if (inserted) {
      order.push_back(grad);
    } else if (k > it->second.constant) {
      it->second = {k, raw.strict()};
    } else if (k == it->second.constant && raw.strict()) {
      it->second.strict = true;
    }
  }

  std::vector<Constraint> out = eqs;
  std::set<AffineFunc> consumed;
  for (const auto& grad : order) {
    if (consumed.count(grad)) continue;
    const Bound& b = ineqs.at(grad);
    const AffineFunc neg = -grad;
    auto opp = ineqs.find(neg);
    if (opp != ineqs.end()) {
      // grad.x + k1 <= 0 and -grad.x + k2 <= 0, i.e. k2 <= grad.x <= -k1.
      const Rational lo = opp->second.constant;
      const Rational hi = -b.constant;
      if (lo > hi || (lo == hi && (b.strict || opp->second.strict))) return empty(space_);
      if (lo == hi) {
        AffineFunc lhs = grad;
        lhs.set_constant(b.constant);
        out.push_back(normalize({lhs, Rel::kEq}));
        consumed.insert(grad);
        consumed.insert(neg);
        continue;
      }
    }
    AffineFunc lhs = grad;
    lhs.set_constant(b.constant);
    out.push_back(normalize({lhs, b.strict ? Rel::kLt : Rel::kLe}));
  }
  return Polyhedron(space_, std::move(out));
}

bool is_empty(const Polyhedron& p) { return !sample_point(p).has_value(); }

std::optional<Point> sample_point(const Polyhedron& p) {
  const Polyhedron q = p.simplified();
  const bool strict = q.has_strict();
  const LpView view = to_lp(q, strict);
  const LpSolution sol = solve_lp(view.lp);
  if (sol.status == LpStatus::kInfeasible) return std::nullopt;
  if (strict && sol.value <= 0) return std::nullopt;
  return point_from(q, view, sol.x);
}

bool entails(const Polyhedron& p, const Constraint& c) {
  if (c.rel == Rel::kEq) {
    return entails(p, Constraint{c.lhs, Rel::kLe}) && entails(p, Constraint{-c.lhs, Rel::kLe});
  }
  return is_empty(p.with(negate(c)));
}

bool entails(const Polyhedron& p, const Polyhedron& q) {
  if (is_empty(p)) return true;
  return std::all_of(q.constraints().begin(), q.constraints().end(),
                     [&](const Constraint& c) { return entails(p, c); });
}

bool equivalent(const Polyhedron& p, const Polyhedron& q) { return entails(p, q) && entails(q, p); }

OptResult optimize(const Polyhedron& p, const AffineFunc& obj, Direction dir) {
  for (const auto& [v, _] : obj.coeffs()) {
    if (!p.in_space(v)) throw SemanticError("objective mentions variable '" + v + "' outside the space");
  }
  OptResult res;
  if (p.has_strict() && is_empty(p)) return res;
  LpView view = to_lp(p, false);
  const Rational sign = dir == Direction::kMaximize ? 1 : -1;
  view.lp.objective.assign(view.lp.nonneg.size(), Rational(0));
  for (const auto& [v, a] : obj.coeffs()) view.lp.objective[view.index.at(v)] = sign * a;
  const LpSolution sol = solve_lp(view.lp);
  if (sol.status == LpStatus::kInfeasible) return res;
  if (sol.status == LpStatus::kUnbounded) {
    res.status = OptStatus::kUnbounded;
    return res;
  }
  res.status = OptStatus::kOptimal;
  res.value = sign * sol.value + obj.constant();
  res.multipliers = sol.duals;
  if (!p.has_strict()) {
    res.attained = true;
    res.witness = point_from(p, view, sol.x);
    return res;
  }
  AffineFunc face = obj;
  face.set_constant(obj.constant() - res.value);
  if (auto w = sample_point(p.with(Constraint{face, Rel::kEq}))) {
    res.attained = true;
    res.witness = std::move(*w);
  }
  return res;
}

bool is_bounded(const Polyhedron& p) {
  if (is_empty(p)) return true;
  for (const auto& v : p.space()) {
    const AffineFunc f = AffineFunc::variable(v);
    if (optimize(p, f, Direction::kMaximize).status == OptStatus::kUnbounded) return false;
    if (optimize(p, f, Direction::kMinimize).status == OptStatus::kUnbounded) return false;
  }
  return true;
}

Polyhedron remove_redundant(const Polyhedron& p) {
  std::vector<Constraint> rows = p.constraints();
  for (std::size_t i = 0; i < rows.size();) {
    std::vector<Constraint> others;
    others.reserve(rows.size() - 1);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (j != i) others.push_back(rows[j]);
    }
    if (entails(Polyhedron(p.space(), others), rows[i])) {
      rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  return Polyhedron(p.space(), std::move(rows));
}

Polyhedron project(const Polyhedron& p, const std::vector<VarId>& keep, const ProjectOptions& opts) {
  for (const auto& v : keep) {
    if (!p.in_space(v)) throw SemanticError("projection target '" + v + "' is not in the space");
  }
  if (is_empty(p)) return Polyhedron::empty(keep);

  std::vector<VarId> elim;
  for (const auto& v : p.space()) {
    if (std::find(keep.begin(), keep.end(), v) == keep.end()) elim.push_back(v);
  }
  std::vector<Constraint> rows = p.simplified().constraints();

  while (!elim.empty()) {
    // Equalities first: exact substitution, no row growth.
    bool substituted = false;
    for (auto vit = elim.begin(); vit != elim.end() && !substituted; ++vit) {
      for (auto rit = rows.begin(); rit != rows.end(); ++rit) {
        if (rit->rel != Rel::kEq) continue;
        const Rational a = rit->lhs.coeff(*vit);
        if (a == 0) continue;
        // v = -(lhs - a v) / a
        AffineFunc rest = rit->lhs;
        rest.set_coeff(*vit, 0);
        const AffineFunc value = rest * Rational(-1 / a);
        const VarId v = *vit;
        rows.erase(rit);
        for (auto& r : rows) r.lhs = r.lhs.substitute(v, value);
        elim.erase(vit);
        substituted = true;
        break;
      }
    }
    if (!substituted) {
      // Fourier-Motzkin on the variable with the fewest generated rows.
      std::size_t best = 0;
      std::size_t best_cost = 0;
      for (std::size_t i = 0; i < elim.size(); ++i) {
        std::size_t pos = 0, neg = 0;
        for (const auto& r : rows) {
          const int s = sgn(r.lhs.coeff(elim[i]));
          pos += s > 0;
          neg += s < 0;
        }
        const std::size_t cost = pos * neg;
        if (i == 0 || cost < best_cost) {
          best = i;
          best_cost = cost;
        }
      }
      const VarId v = elim[best];
      elim.erase(elim.begin() + static_cast<std::ptrdiff_t>(best));
      std::vector<Constraint> pos, neg, next;
      for (auto& r : rows) {
        const int s = sgn(r.lhs.coeff(v));
        if (s > 0) {
          pos.push_back(std::move(r));
        } else if (s < 0) {
          neg.push_back(std::move(r));
        } else {
          next.push_back(std::move(r));
        }
      }
      if (next.size() + pos.size() * neg.size() > opts.row_cap) {
        throw ResourceError("Fourier-Motzkin row cap of " + std::to_string(opts.row_cap) +
                            " exceeded while eliminating '" + v + "'");
      }
      for (const auto& pr : pos) {
        const Rational a = pr.lhs.coeff(v);
        for (const auto& nr : neg) {
          const Rational b = -nr.lhs.coeff(v);
          Constraint combo{pr.lhs * b + nr.lhs * a,
                           pr.strict() || nr.strict() ? Rel::kLt : Rel::kLe};
          combo.lhs.set_coeff(v, 0);
          next.push_back(std::move(combo));
        }
      }
      rows = std::move(next);
    }
    rows = Polyhedron(p.space(), std::move(rows)).simplified().constraints();
    if (rows.size() > 12) rows = remove_redundant(Polyhedron(p.space(), rows)).constraints();
  }
  return remove_redundant(Polyhedron(keep, std::move(rows)).simplified());
}

}  // namespace termrank::geom

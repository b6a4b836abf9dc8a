#include "termrank/geom/farkas.hpp"

#include "termrank/geom/errors.hpp"
#include "termrank/geom/simplex.hpp"

namespace termrank::geom {

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  for (const auto& [u, k] : o.terms) {
    auto [it, inserted] = terms.try_emplace(u, k);
    if (!inserted) {
      it->second += k;
      if (it->second == 0) terms.erase(it);
    }
  }
  constant += o.constant;
  return *this;
}

LinExpr& LinExpr::operator*=(const Rational& k) {
  if (k == 0) {
    terms.clear();
    constant = 0;
    return *this;
  }
  for (auto& [_, v] : terms) v *= k;
  constant *= k;
  return *this;
}

Rational LinExpr::eval(const std::vector<Rational>& sol) const {
  Rational acc = constant;
  for (const auto& [u, k] : terms) acc += k * sol.at(u);
  return acc;
}

ParamAffine ParamAffine::rename(const std::function<VarId(const VarId&)>& f) const {
  ParamAffine out;
  out.constant = constant;
  for (const auto& [v, e] : coeffs) out.coeffs[f(v)] += e;
  return out;
}

ParamAffine& ParamAffine::operator+=(const ParamAffine& o) {
  for (const auto& [v, e] : o.coeffs) coeffs[v] += e;
  constant += o.constant;
  return *this;
}

ParamAffine operator-(ParamAffine a, const ParamAffine& b) {
  for (const auto& [v, e] : b.coeffs) a.coeffs[v] += e * Rational(-1);
  a.constant += b.constant * Rational(-1);
  return a;
}

ParamAffine ParamAffine::plus_constant(const Rational& k) const {
  ParamAffine out = *this;
  out.constant.constant += k;
  return out;
}

AffineFunc ParamAffine::instantiate(const std::vector<Rational>& sol) const {
  AffineFunc f(constant.eval(sol));
  for (const auto& [v, e] : coeffs) f.add_term(v, e.eval(sol));
  return f;
}

Unknown TemplateLp::add_unknown(bool nonneg) {
  nonneg_.push_back(nonneg);
  return nonneg_.size() - 1;
}

ParamAffine TemplateLp::affine_template(const std::vector<VarId>& vars) {
  ParamAffine f;
  for (const auto& v : vars) f.coeffs[v] = LinExpr::of(add_unknown());
  f.constant = LinExpr::of(add_unknown());
  return f;
}

void TemplateLp::add_le(const LinExpr& e) { rows_.push_back({e, false}); }
void TemplateLp::add_eq(const LinExpr& e) { rows_.push_back({e, true}); }

void TemplateLp::require_nonneg(const Polyhedron& p, const ParamAffine& f) {
  for (const auto& [v, _] : f.coeffs) {
    if (!p.in_space(v)) throw SemanticError("template mentions '" + v + "' outside the polyhedron space");
  }
  // Per variable: f.coeff(v) = -sum mult_i * row_i.coeff(v).
  std::map<VarId, LinExpr> balance;
  for (const auto& v : p.space()) {
    auto it = f.coeffs.find(v);
    balance[v] = it == f.coeffs.end() ? LinExpr{} : it->second;
  }
  LinExpr const_balance = f.constant;
  for (const auto& c : p.constraints()) {
    const Unknown m = add_unknown(c.rel != Rel::kEq);
    for (const auto& [v, a] : c.lhs.coeffs()) balance[v] += LinExpr::of(m, a);
    const_balance += LinExpr::of(m, c.lhs.constant());
  }
  for (const auto& v : p.space()) add_eq(balance[v]);
  // f.const + sum mult_i * const_i = l_0 >= 0
  const_balance *= Rational(-1);
  add_le(const_balance);
}

std::optional<std::vector<Rational>> TemplateLp::solve(const LinExpr* maximize, bool* unbounded) const {
  LpProblem lp;
  lp.nonneg = nonneg_;
  const std::size_t n = nonneg_.size();
  for (const auto& r : rows_) {
    LpRow row;
    row.coeffs.assign(n, Rational(0));
    for (const auto& [u, k] : r.expr.terms) row.coeffs[u] = k;
    row.equality = r.equality;
    row.rhs = -r.expr.constant;
    lp.rows.push_back(std::move(row));
  }
  if (maximize) {
    lp.objective.assign(n, Rational(0));
    for (const auto& [u, k] : maximize->terms) lp.objective[u] = k;
  }
  const LpSolution sol = solve_lp(lp);
  if (unbounded) *unbounded = sol.status == LpStatus::kUnbounded;
  if (sol.status != LpStatus::kOptimal) return std::nullopt;
  return sol.x;
}

}  // namespace termrank::geom

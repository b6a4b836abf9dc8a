#include "termrank/geom/constraint.hpp"

namespace termrank::geom {

bool Constraint::holds(const Point& p) const {
  const Rational v = lhs.eval(p);
  switch (rel) {
    case Rel::kLe: return v <= 0;
    case Rel::kEq: return v == 0;
    case Rel::kLt: return v < 0;
  }
  return false;
}

bool Constraint::constant_truth() const { return holds({}); }

Constraint normalize(const Constraint& c) {
  Constraint out{c.lhs * integer_scale(c.lhs), c.rel};
  if (out.rel == Rel::kEq && !out.lhs.coeffs().empty() &&
      out.lhs.coeffs().begin()->second < 0) {
    out.lhs *= Rational(-1);
  }
  return out;
}

Constraint tighten_for_integers(const Constraint& c) {
  if (c.rel != Rel::kLt || c.lhs.is_constant()) return normalize(c);
  // Make the variable part primitive, then round the constant.
  AffineFunc vars_only = c.lhs;
  vars_only.set_constant(0);
  const Rational k = integer_scale(vars_only);
  AffineFunc scaled = c.lhs * k;
  // a.x + b < 0  <=>  a.x < -b  <=>  a.x <= ceil(-b) - 1
  const Rational bound = Rational(ceil(Rational(-scaled.constant())) - 1);
  scaled.set_constant(-bound);
  return normalize({scaled, Rel::kLe});
}

}  // namespace termrank::geom

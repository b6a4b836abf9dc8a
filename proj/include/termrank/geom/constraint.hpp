#pragma once

#include <string>

#include "termrank/geom/affine.hpp"

namespace termrank::geom {

enum class Rel { kLe, kEq, kLt };  // lhs <= 0, lhs = 0, lhs < 0

struct Constraint {
  AffineFunc lhs;
  Rel rel = Rel::kLe;

  // a <= b, a = b, a < b, a >= b, a > b
  static Constraint le(const AffineFunc& a, const AffineFunc& b) { return {a - b, Rel::kLe}; }
  static Constraint eq(const AffineFunc& a, const AffineFunc& b) { return {a - b, Rel::kEq}; }
  static Constraint lt(const AffineFunc& a, const AffineFunc& b) { return {a - b, Rel::kLt}; }
  static Constraint ge(const AffineFunc& a, const AffineFunc& b) { return {b - a, Rel::kLe}; }
  static Constraint gt(const AffineFunc& a, const AffineFunc& b) { return {b - a, Rel::kLt}; }

  bool strict() const { return rel == Rel::kLt; }
  bool holds(const Point& p) const;

  /// Truth value when lhs is constant; meaningless otherwise.
  bool constant_truth() const;

  Constraint rename(const std::function<VarId(const VarId&)>& f) const {
    return {lhs.rename(f), rel};
  }

  friend bool operator==(const Constraint& a, const Constraint& b) {
    return a.rel == b.rel && a.lhs == b.lhs;
  }
  friend bool operator<(const Constraint& a, const Constraint& b) {
    if (a.rel != b.rel) return a.rel < b.rel;
    return a.lhs < b.lhs;
  }
};

/// Scales lhs to coprime integers; equalities additionally get a positive
/// leading coefficient. The result is a canonical representative.
Constraint normalize(const Constraint& c);

/// Integer tightening of a strict row: with integer-valued variables,
/// a.x + b < 0 is equivalent to a.x <= ceil(-b) - 1 once a is primitive.
/// Non-strict rows are returned normalized.
Constraint tighten_for_integers(const Constraint& c);

}  // namespace termrank::geom

#pragma once

#include <vector>

#include "termrank/geom/rational.hpp"

namespace termrank::geom {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

/// coeffs . x <= rhs, or = rhs when `equality`.
struct LpRow {
  std::vector<Rational> coeffs;
  bool equality = false;
  Rational rhs;
};

/// maximize objective . x subject to rows; variables are free unless flagged
/// non-negative. An empty objective asks for feasibility only.
struct LpProblem {
  std::vector<bool> nonneg;
  std::vector<LpRow> rows;
  std::vector<Rational> objective;

  std::size_t num_vars() const { return nonneg.size(); }
};

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Rational value;
  std::vector<Rational> x;
  /// One multiplier per row when optimal: objective = sum y_i * row_i,
  /// value = sum y_i * rhs_i, y_i >= 0 on inequality rows.
  std::vector<Rational> duals;
};

/// Dense two-phase primal simplex over exact rationals with Bland's rule.
LpSolution solve_lp(const LpProblem& lp);

}  // namespace termrank::geom

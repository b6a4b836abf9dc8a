#pragma once

#include <map>
#include <optional>
#include <vector>

#include "termrank/geom/polyhedron.hpp"

namespace termrank::geom {

using Unknown = std::size_t;

/// Linear expression over LP unknowns.
struct LinExpr {
  std::map<Unknown, Rational> terms;
  Rational constant{0};

  static LinExpr of(Unknown u, const Rational& k = 1) {
    LinExpr e;
    e.terms[u] = k;
    return e;
  }
  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator*=(const Rational& k);
  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, LinExpr b) { return a += (b *= Rational(-1)); }
  friend LinExpr operator*(LinExpr a, const Rational& k) { return a *= k; }
  Rational eval(const std::vector<Rational>& sol) const;
};

/// Affine function of program variables whose coefficients are themselves
/// linear in LP unknowns (a synthesis template).
struct ParamAffine {
  std::map<VarId, LinExpr> coeffs;
  LinExpr constant;

  ParamAffine rename(const std::function<VarId(const VarId&)>& f) const;
  ParamAffine& operator+=(const ParamAffine& o);
  friend ParamAffine operator+(ParamAffine a, const ParamAffine& b) { return a += b; }
  friend ParamAffine operator-(ParamAffine a, const ParamAffine& b);
  ParamAffine plus_constant(const Rational& k) const;
  AffineFunc instantiate(const std::vector<Rational>& sol) const;
};

/// LP over template unknowns and Farkas multipliers. require_nonneg encodes
/// "f >= 0 on every point of P" through the affine form of Farkas' lemma:
/// f = sum l_i * (-row_i) + sum m_j * (-eq_j) + l_0 with l >= 0. Strict rows
/// enter as their closures, which is exact for non-strict goals over a
/// nonempty P.
class TemplateLp {
 public:
  Unknown add_unknown(bool nonneg = false);
  ParamAffine affine_template(const std::vector<VarId>& vars);

  void add_le(const LinExpr& e);  // e <= 0
  void add_eq(const LinExpr& e);  // e = 0

  /// Caller guarantees P is nonempty; an empty P needs no requirement.
  void require_nonneg(const Polyhedron& p, const ParamAffine& f);

  /// Feasible point (lexicographically canonical under Bland's rule), or
  /// nullopt. With an objective, maximizes it; unbounded counts as
  /// infeasible for synthesis purposes and is reported through `unbounded`.
  std::optional<std::vector<Rational>> solve(const LinExpr* maximize = nullptr,
                                             bool* unbounded = nullptr) const;

  std::size_t num_unknowns() const { return nonneg_.size(); }
  std::size_t num_rows() const { return rows_.size(); }

 private:
  struct Row {
    LinExpr expr;
    bool equality;
  };
  std::vector<bool> nonneg_;
  std::vector<Row> rows_;
};

}  // namespace termrank::geom

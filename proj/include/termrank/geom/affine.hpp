#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>

#include "termrank/geom/rational.hpp"

namespace termrank::geom {

using VarId = std::string;
using Point = std::map<VarId, Rational>;

/// a_1 x_1 + ... + a_n x_n + a_0 with exact coefficients. Zero coefficients
/// are never stored, so structural equality is semantic equality.
class AffineFunc {
 public:
  AffineFunc() = default;
  explicit AffineFunc(Rational constant) : constant_(std::move(constant)) {}

  static AffineFunc variable(const VarId& v, const Rational& coeff = 1);

  const std::map<VarId, Rational>& coeffs() const { return coeffs_; }
  const Rational& constant() const { return constant_; }
  Rational coeff(const VarId& v) const;

  void set_coeff(const VarId& v, const Rational& value);
  void set_constant(const Rational& value) { constant_ = value; }
  void add_term(const VarId& v, const Rational& value);

  bool is_constant() const { return coeffs_.empty(); }
  bool is_zero() const { return coeffs_.empty() && constant_ == 0; }
  std::set<VarId> vars() const;

  /// Missing variables evaluate as zero.
  Rational eval(const Point& p) const;

  AffineFunc rename(const std::function<VarId(const VarId&)>& f) const;
  AffineFunc substitute(const VarId& v, const AffineFunc& replacement) const;

  AffineFunc& operator+=(const AffineFunc& o);
  AffineFunc& operator-=(const AffineFunc& o);
  AffineFunc& operator*=(const Rational& k);

  friend AffineFunc operator+(AffineFunc a, const AffineFunc& b) { return a += b; }
  friend AffineFunc operator-(AffineFunc a, const AffineFunc& b) { return a -= b; }
  friend AffineFunc operator*(AffineFunc a, const Rational& k) { return a *= k; }
  friend AffineFunc operator*(const Rational& k, AffineFunc a) { return a *= k; }
  friend AffineFunc operator-(AffineFunc a) { return a *= Rational(-1); }
  friend bool operator==(const AffineFunc& a, const AffineFunc& b) {
    return a.constant_ == b.constant_ && a.coeffs_ == b.coeffs_;
  }
  friend bool operator<(const AffineFunc& a, const AffineFunc& b);

 private:
  std::map<VarId, Rational> coeffs_;
  Rational constant_{0};
};

/// Positive multiplier turning every coefficient (constant included) into a
/// coprime integer.
Rational integer_scale(const AffineFunc& f);

/// Pretty form "2*x - y + 3".
std::string to_string(const AffineFunc& f);

nlohmann::json to_json(const AffineFunc& f);
AffineFunc affine_from_json(const nlohmann::json& j);

}  // namespace termrank::geom

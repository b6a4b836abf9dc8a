#include "termrank/geom/affine.hpp"

#include <sstream>

#include "termrank/geom/errors.hpp"

namespace termrank::geom {

AffineFunc AffineFunc::variable(const VarId& v, const Rational& coeff) {
  AffineFunc f;
  f.set_coeff(v, coeff);
  return f;
}

Rational AffineFunc::coeff(const VarId& v) const {
  auto it = coeffs_.find(v);
  return it == coeffs_.end() ? Rational(0) : it->second;
}

void AffineFunc::set_coeff(const VarId& v, const Rational& value) {
  if (value == 0) {
    coeffs_.erase(v);
  } else {
    coeffs_[v] = value;
  }
}

void AffineFunc::add_term(const VarId& v, const Rational& value) {
  if (value == 0) return;
  auto [it, inserted] = coeffs_.try_emplace(v, value);
  if (!inserted) {
    it->second += value;
    if (it->second == 0) coeffs_.erase(it);
  }
}

std::set<VarId> AffineFunc::vars() const {
  std::set<VarId> out;
  for (const auto& [v, _] : coeffs_) out.insert(v);
  return out;
}

Rational AffineFunc::eval(const Point& p) const {
  Rational acc = constant_;
  for (const auto& [v, a] : coeffs_) {
    auto it = p.find(v);
    if (it != p.end()) acc += a * it->second;
  }
  return acc;
}

AffineFunc AffineFunc::rename(const std::function<VarId(const VarId&)>& f) const {
  AffineFunc out(constant_);
  for (const auto& [v, a] : coeffs_) out.add_term(f(v), a);
  return out;
}

AffineFunc AffineFunc::substitute(const VarId& v, const AffineFunc& replacement) const {
  auto it = coeffs_.find(v);
  if (it == coeffs_.end()) return *this;
  const Rational a = it->second;
  AffineFunc out = *this;
  out.coeffs_.erase(v);
  out += replacement * a;
  return out;
}

AffineFunc& AffineFunc::operator+=(const AffineFunc& o) {
  for (const auto& [v, a] : o.coeffs_) add_term(v, a);
  constant_ += o.constant_;
  return *this;
}

AffineFunc& AffineFunc::operator-=(const AffineFunc& o) {
  for (const auto& [v, a] : o.coeffs_) add_term(v, -a);
  constant_ -= o.constant_;
  return *this;
}

AffineFunc& AffineFunc::operator*=(const Rational& k) {
  if (k == 0) {
    coeffs_.clear();
    constant_ = 0;
    return *this;
  }
  for (auto& [_, a] : coeffs_) a *= k;
  constant_ *= k;
  return *this;
}

bool operator<(const AffineFunc& a, const AffineFunc& b) {
  if (a.coeffs_ != b.coeffs_) {
    return std::lexicographical_compare(
        a.coeffs_.begin(), a.coeffs_.end(), b.coeffs_.begin(), b.coeffs_.end(),
        [](const auto& l, const auto& r) {
          if (l.first != r.first) return l.first < r.first;
          return l.second < r.second;
        });
  }
  return a.constant_ < b.constant_;
}

Rational integer_scale(const AffineFunc& f) {
  Integer den_lcm = 1;
  Integer num_gcd = 0;
  auto absorb = [&](const Rational& q) {
    if (q == 0) return;
    mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), q.get_den_mpz_t());
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), q.get_num_mpz_t());
  };
  for (const auto& [_, a] : f.coeffs()) absorb(a);
  absorb(f.constant());
  if (num_gcd == 0) return 1;
  // Every entry p/q becomes p * lcm / q / gcd(numerators); that is integral
  // because gcd(numerators) divides p and lcm/q is integral, and coprime.
  return Rational(den_lcm, num_gcd);
}

std::string to_string(const AffineFunc& f) {
  std::ostringstream os;
  bool first = true;
  auto emit = [&](const Rational& a, const std::string& v) {
    Rational mag = abs(a);
    if (first) {
      if (a < 0) os << "-";
    } else {
      os << (a < 0 ? " - " : " + ");
    }
    first = false;
    if (v.empty()) {
      os << mag.get_str();
    } else if (mag != 1) {
      os << mag.get_str() << "*" << v;
    } else {
      os << v;
    }
  };
  for (const auto& [v, a] : f.coeffs()) emit(a, v);
  if (f.constant() != 0 || first) emit(f.constant(), "");
  return os.str();
}

nlohmann::json to_json(const AffineFunc& f) {
  nlohmann::json coeffs = nlohmann::json::object();
  for (const auto& [v, a] : f.coeffs()) coeffs[v] = termrank::to_json(a);
  return {{"coeffs", coeffs}, {"constant", termrank::to_json(f.constant())}};
}

AffineFunc affine_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_object()) {
    throw ParseError("affine function must be {\"coeffs\": {...}, \"constant\": q}", 1, 1);
  }
  AffineFunc f(j.contains("constant") ? rational_from_json(j["constant"]) : Rational(0));
  for (const auto& [v, a] : j["coeffs"].items()) f.add_term(v, rational_from_json(a));
  return f;
}

}  // namespace termrank::geom

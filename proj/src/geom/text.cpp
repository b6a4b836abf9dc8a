#include "termrank/geom/text.hpp"

#include <cctype>
#include <optional>
#include <sstream>

#include "termrank/geom/errors.hpp"

namespace termrank::geom {

namespace {

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::size_t pos() const { return pos_; }
  void set_pos(std::size_t p) { pos_ = p; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " in '" + std::string(s_) + "'", 1, pos_ + 1);
  }

  std::optional<Rational> number() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) return std::nullopt;
    std::size_t end = pos_;
    if (pos_ < s_.size() && s_[pos_] == '/') {
      std::size_t save = pos_++;
      std::size_t dstart = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (dstart == pos_) {
        pos_ = save;
      } else {
        end = pos_;
      }
    }
    try {
      return parse_rational(s_.substr(start, end - start));
    } catch (const ParseError&) {
      pos_ = start;
      fail("bad numeric literal");
    }
  }

  std::optional<std::string> ident() {
    skip_ws();
    if (pos_ >= s_.size()) return std::nullopt;
    const char c0 = s_[pos_];
    if (!(std::isalpha(static_cast<unsigned char>(c0)) || c0 == '_')) return std::nullopt;
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '.')) {
      ++pos_;
    }
    while (pos_ < s_.size() && s_[pos_] == '\'') ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

AffineFunc parse_term(Lexer& lx) {
  if (auto k = lx.number()) {
    lx.accept('*');
    if (auto v = lx.ident()) return AffineFunc::variable(*v, *k);
    return AffineFunc(*k);
  }
  if (auto v = lx.ident()) {
    Rational k = 1;
    if (lx.accept('*')) {
      auto n = lx.number();
      if (!n) lx.fail("expected a number after '*'");
      k = *n;
    }
    return AffineFunc::variable(*v, k);
  }
  lx.fail("expected a term");
}

AffineFunc parse_expr(Lexer& lx) {
  AffineFunc acc;
  bool first = true;
  for (;;) {
    Rational sign = 1;
    if (lx.accept('-')) {
      sign = -1;
    } else if (lx.accept('+')) {
    } else if (!first) {
      break;
    }
    acc += parse_term(lx) * sign;
    first = false;
  }
  return acc;
}

enum class RawRel { kLe, kGe, kEq, kLt, kGt };

std::optional<RawRel> parse_rel(Lexer& lx) {
  const char c = lx.peek();
  if (c == '<') {
    lx.accept('<');
    return lx.accept('=') ? RawRel::kLe : RawRel::kLt;
  }
  if (c == '>') {
    lx.accept('>');
    return lx.accept('=') ? RawRel::kGe : RawRel::kGt;
  }
  if (c == '=') {
    lx.accept('=');
    lx.accept('=');
    return RawRel::kEq;
  }
  return std::nullopt;
}

Constraint parse_one(Lexer& lx) {
  const AffineFunc lhs = parse_expr(lx);
  const auto rel = parse_rel(lx);
  if (!rel) lx.fail("expected one of <=, >=, =, <, >");
  const AffineFunc rhs = parse_expr(lx);
  switch (*rel) {
    case RawRel::kLe: return Constraint::le(lhs, rhs);
    case RawRel::kGe: return Constraint::ge(lhs, rhs);
    case RawRel::kEq: return Constraint::eq(lhs, rhs);
    case RawRel::kLt: return Constraint::lt(lhs, rhs);
    case RawRel::kGt: return Constraint::gt(lhs, rhs);
  }
  lx.fail("unreachable relation");
}

bool is_primed(const VarId& v) { return !v.empty() && v.back() == '\''; }

}  // namespace

AffineFunc parse_affine(std::string_view text) {
  Lexer lx(text);
  AffineFunc f = parse_expr(lx);
  if (!lx.at_end()) lx.fail("unexpected trailing input");
  return f;
}

Constraint parse_constraint(std::string_view text) {
  Lexer lx(text);
  Constraint c = parse_one(lx);
  if (!lx.at_end()) lx.fail("unexpected trailing input");
  return c;
}

std::vector<Constraint> parse_constraints(std::string_view text) {
  Lexer lx(text);
  std::vector<Constraint> out;
  if (lx.at_end()) return out;
  do {
    out.push_back(parse_one(lx));
  } while (lx.accept(','));
  if (!lx.at_end()) lx.fail("unexpected trailing input");
  return out;
}

std::string to_string(const Constraint& raw) {
  const Constraint c = normalize(raw);
  if (c.lhs.is_constant()) {
    return c.constant_truth() ? "0 <= 0" : "1 <= 0";
  }
  // Pivot: first primed variable if any, else the first variable.
  VarId pivot = c.lhs.coeffs().begin()->first;
  for (const auto& [v, _] : c.lhs.coeffs()) {
    if (is_primed(v)) {
      pivot = v;
      break;
    }
  }
  AffineFunc lhs = c.lhs;
  const char* rel = c.rel == Rel::kEq ? "=" : c.rel == Rel::kLe ? "<=" : "<";
  if (lhs.coeff(pivot) < 0) {
    lhs *= Rational(-1);
    rel = c.rel == Rel::kEq ? "=" : c.rel == Rel::kLe ? ">=" : ">";
  }
  const AffineFunc left = AffineFunc::variable(pivot, lhs.coeff(pivot));
  AffineFunc right = left - lhs;
  std::ostringstream os;
  os << to_string(left) << " " << rel << " " << to_string(right);
  return os.str();
}

}  // namespace termrank::geom

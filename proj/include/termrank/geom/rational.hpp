#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include <json.hpp>

namespace termrank {

/// Arbitrary-precision rational, always kept in lowest terms.
using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "p", "-p" or "p/q". Throws ParseError on malformed text or q = 0.
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

Integer floor(const Rational& q);
Integer ceil(const Rational& q);

/// Integral values that fit in int64 become JSON integers, everything else a
/// "p/q" string.
nlohmann::json to_json(const Rational& q);
Rational rational_from_json(const nlohmann::json& j);

}  // namespace termrank

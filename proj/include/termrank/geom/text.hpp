#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "termrank/geom/constraint.hpp"

namespace termrank::geom {

/// Parses a linear expression: terms like 3, 1/2, x, 2*x, 2x, x*2, -y', joined
/// by + and -. Identifiers may carry trailing apostrophes (primed variables).
AffineFunc parse_affine(std::string_view text);

/// One relation "lhs REL rhs" with REL in <=, >=, =, ==, <, >. The result is
/// normalized to lhs' (<=|=|<) 0.
Constraint parse_constraint(std::string_view text);

/// Comma-separated conjunction.
std::vector<Constraint> parse_constraints(std::string_view text);

/// Human form, e.g. "x' = x + 1", "y <= z - 1", "x >= 1". Round-trips
/// through parse_constraint up to positive scaling.
std::string to_string(const Constraint& c);

}  // namespace termrank::geom

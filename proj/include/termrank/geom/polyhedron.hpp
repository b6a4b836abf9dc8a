#pragma once

#include <optional>
#include <string>
#include <vector>

#include "termrank/geom/constraint.hpp"

namespace termrank::geom {

/// Conjunction of (possibly strict) linear constraints over an ordered
/// variable space. Values are immutable in spirit: every operation returns a
/// new polyhedron.
class Polyhedron {
 public:
  Polyhedron() = default;
  explicit Polyhedron(std::vector<VarId> space, std::vector<Constraint> constraints = {});

  static Polyhedron universe(std::vector<VarId> space) { return Polyhedron(std::move(space)); }
  static Polyhedron empty(std::vector<VarId> space);

  const std::vector<VarId>& space() const { return space_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  bool has_strict() const;
  bool in_space(const VarId& v) const;

  /// Throws SemanticError if c mentions a variable outside the space.
  Polyhedron with(const Constraint& c) const;
  Polyhedron with(const std::vector<Constraint>& cs) const;
  Polyhedron intersect(const Polyhedron& other) const;  // spaces must agree as sets
  Polyhedron with_space(std::vector<VarId> space) const;
  Polyhedron rename(const std::function<VarId(const VarId&)>& f) const;

  bool contains(const Point& p) const;

  /// Normalized rows; syntactic tautologies dropped, duplicates and parallel
  /// rows merged, opposite inequality pairs fused into equalities. A
  /// constant contradiction collapses to the canonical empty form.
  Polyhedron simplified() const;

  friend bool operator==(const Polyhedron& a, const Polyhedron& b) {
    return a.space_ == b.space_ && a.constraints_ == b.constraints_;
  }

 private:
  std::vector<VarId> space_;
  std::vector<Constraint> constraints_;
};

enum class Direction { kMaximize, kMinimize };
enum class OptStatus { kInfeasible, kUnbounded, kOptimal };

struct OptResult {
  OptStatus status = OptStatus::kInfeasible;
  Rational value;          // optimum (supremum/infimum when not attained)
  bool attained = false;   // false only with strict rows on the optimal face
  Point witness;           // a point of P reaching value when attained
  /// Farkas multipliers, one per constraint of P: for maximize,
  /// obj = sum y_i * grad_i with value = obj.const - sum y_i * const_i,
  /// y_i >= 0 on inequality rows (minimize: same for -obj).
  std::vector<Rational> multipliers;
};

struct ProjectOptions {
  std::size_t row_cap = 2000;
};

bool is_empty(const Polyhedron& p);
std::optional<Point> sample_point(const Polyhedron& p);
bool entails(const Polyhedron& p, const Constraint& c);
bool entails(const Polyhedron& p, const Polyhedron& q);  // p ⊆ q, same space
bool equivalent(const Polyhedron& p, const Polyhedron& q);
OptResult optimize(const Polyhedron& p, const AffineFunc& obj, Direction dir);
bool is_bounded(const Polyhedron& p);

/// Exact Fourier-Motzkin projection onto `keep` with entailment-based
/// redundancy removal. Throws ResourceError past the row cap.
Polyhedron project(const Polyhedron& p, const std::vector<VarId>& keep,
                   const ProjectOptions& opts = {});

/// Drops rows entailed by the others.
Polyhedron remove_redundant(const Polyhedron& p);

}  // namespace termrank::geom

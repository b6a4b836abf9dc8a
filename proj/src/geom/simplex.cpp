#include "termrank/geom/simplex.hpp"

#include <cassert>
#include <optional>

namespace termrank::geom {

namespace {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : t_(rows, std::vector<Rational>(cols + 1)), z_(cols + 1), basis_(rows), cols_(cols) {}

  Rational& at(std::size_t r, std::size_t c) { return t_[r][c]; }
  Rational& rhs(std::size_t r) { return t_[r][cols_]; }
  std::size_t rows() const { return t_.size(); }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }
  std::vector<Rational>& objective_row() { return z_; }

  void pivot(std::size_t r, std::size_t c) {
    std::vector<Rational>& prow = t_[r];
    const Rational inv = 1 / prow[c];
    for (auto& v : prow) {
      if (sgn(v) != 0) v *= inv;
    }
    auto eliminate = [&](std::vector<Rational>& row) {
      if (sgn(row[c]) == 0) return;
      const Rational f = row[c];
      for (std::size_t k = 0; k <= cols_; ++k) {
        if (sgn(prow[k]) != 0) row[k] -= f * prow[k];
      }
    };
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (i != r) eliminate(t_[i]);
    }
    eliminate(z_);
    basis_[r] = c;
  }

  // Runs Bland-rule iterations on the current objective row.
  // Returns false when the objective is unbounded.
  bool optimize(std::size_t allowed_cols) {
    for (;;) {
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < allowed_cols; ++j) {
        if (sgn(z_[j]) < 0) {
          enter = j;
          break;
        }
      }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      Rational best;
      for (std::size_t i = 0; i < t_.size(); ++i) {
        const Rational& a = t_[i][*enter];
        if (sgn(a) <= 0) continue;
        Rational ratio = t_[i][cols_] / a;
        if (!leave || ratio < best || (ratio == best && basis_[i] < basis_[*leave])) {
          leave = i;
          best = std::move(ratio);
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter);
    }
  }

 private:
  std::vector<std::vector<Rational>> t_;
  std::vector<Rational> z_;
  std::vector<std::size_t> basis_;
  std::size_t cols_;
};

}  // namespace

LpSolution solve_lp(const LpProblem& lp) {
  const std::size_t n = lp.num_vars();
  const std::size_t m = lp.rows.size();

  // Column layout: structural (free variables split into plus/minus parts),
  // then one slack per inequality row, then one artificial per row.
  std::vector<std::size_t> plus_col(n);
  std::vector<std::optional<std::size_t>> minus_col(n);
  std::size_t cols = 0;
  for (std::size_t j = 0; j < n; ++j) {
    plus_col[j] = cols++;
    if (!lp.nonneg[j]) minus_col[j] = cols++;
  }
  std::vector<std::optional<std::size_t>> slack_col(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!lp.rows[i].equality) slack_col[i] = cols++;
  }
  const std::size_t first_artificial = cols;
  cols += m;

  Tableau tab(m, cols);
  std::vector<int> sign(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    const LpRow& row = lp.rows[i];
    assert(row.coeffs.size() == n);
    sign[i] = sgn(row.rhs) < 0 ? -1 : 1;
    const Rational s(sign[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (sgn(row.coeffs[j]) == 0) continue;
      tab.at(i, plus_col[j]) = s * row.coeffs[j];
      if (minus_col[j]) tab.at(i, *minus_col[j]) = -s * row.coeffs[j];
    }
    if (slack_col[i]) tab.at(i, *slack_col[i]) = s;
    tab.at(i, first_artificial + i) = 1;
    tab.rhs(i) = s * row.rhs;
    tab.basis()[i] = first_artificial + i;
  }

  // Phase 1: maximize -(sum of artificials).
  auto& z = tab.objective_row();
  for (std::size_t k = 0; k <= cols; ++k) z[k] = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < first_artificial; ++k) {
      if (sgn(tab.at(i, k)) != 0) z[k] -= tab.at(i, k);
    }
    z[cols] -= tab.rhs(i);
  }
  tab.optimize(first_artificial);

  LpSolution sol;
  if (sgn(z[cols]) < 0) {
    sol.status = LpStatus::kInfeasible;
    return sol;
  }
  // Drive zero-valued artificials out of the basis where possible; rows where
  // that is impossible are redundant and keep their artificial at zero.
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis()[i] < first_artificial) continue;
    for (std::size_t k = 0; k < first_artificial; ++k) {
      if (sgn(tab.at(i, k)) != 0) {
        tab.pivot(i, k);
        break;
      }
    }
  }

  std::vector<Rational> cost(cols);
  const bool has_objective = !lp.objective.empty();
  if (has_objective) {
    for (std::size_t j = 0; j < n; ++j) {
      cost[plus_col[j]] = lp.objective[j];
      if (minus_col[j]) cost[*minus_col[j]] = -lp.objective[j];
    }
  }
  for (std::size_t k = 0; k <= cols; ++k) z[k] = k < cols ? Rational(-cost[k]) : Rational(0);
  for (std::size_t i = 0; i < m; ++i) {
    const Rational& cb = cost[tab.basis()[i]];
    if (sgn(cb) == 0) continue;
    for (std::size_t k = 0; k <= cols; ++k) {
      if (sgn(tab.at(i, k)) != 0) z[k] += cb * tab.at(i, k);
    }
  }
  if (has_objective && !tab.optimize(first_artificial)) {
    sol.status = LpStatus::kUnbounded;
    return sol;
  }

  sol.status = LpStatus::kOptimal;
  sol.value = z[cols];
  std::vector<Rational> colval(cols);
  for (std::size_t i = 0; i < m; ++i) colval[tab.basis()[i]] = tab.rhs(i);
  sol.x.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    sol.x[j] = colval[plus_col[j]];
    if (minus_col[j]) sol.x[j] -= colval[*minus_col[j]];
  }
  sol.duals.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    sol.duals[i] = Rational(sign[i]) * z[first_artificial + i];
  }
  return sol;
}

}  // namespace termrank::geom

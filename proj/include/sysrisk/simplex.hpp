#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "sysrisk/errors.hpp"

namespace sysrisk {

// min c'z  subject to  A z >= rhs  and  z_j >= 0 where nonneg[j]
// (empty nonneg means every variable is nonnegative).
struct LinearProgram {
  std::vector<double> objective;
  std::vector<std::vector<double>> constraints;
  std::vector<double> rhs;
  std::vector<bool> nonneg;
};

struct LpSolution {
  double value = 0.0;
  std::vector<double> argmin;
};

namespace detail {

class SimplexTableau {
 public:
  static constexpr double kTol = 1e-9;

  SimplexTableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), t_(rows, std::vector<double>(cols + 1, 0.0)),
        basis_(rows, 0) {}

  std::vector<std::vector<double>>& t() { return t_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t p, std::size_t q, std::vector<double>& costrow) {
    const double piv = t_[p][q];
    for (auto& v : t_[p]) v /= piv;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == p || std::abs(t_[i][q]) < 1e-14) continue;
      const double m = t_[i][q];
      for (std::size_t j = 0; j <= cols_; ++j) t_[i][j] -= m * t_[p][j];
    }
    if (std::abs(costrow[q]) > 0.0) {
      const double m = costrow[q];
      for (std::size_t j = 0; j <= cols_; ++j) costrow[j] -= m * t_[p][j];
    }
    basis_[p] = q;
  }

  // Bland's rule on both choices; guarantees termination.
  bool iterate(std::vector<double>& costrow, const std::vector<bool>& eligible) {
    for (std::size_t it = 0; it < 50000; ++it) {
      std::size_t q = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (eligible[j] && costrow[j] < -kTol) {
          q = j;
          break;
        }
      }
      if (q == cols_) return true;  // optimal

      std::size_t p = rows_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows_; ++i) {
        if (t_[i][q] > kTol) {
          const double ratio = t_[i][cols_] / t_[i][q];
          if (ratio < best_ratio - kTol ||
              (ratio < best_ratio + kTol && (p == rows_ || basis_[i] < basis_[p]))) {
            best_ratio = ratio;
            p = i;
          }
        }
      }
      if (p == rows_) return false;  // unbounded direction
      pivot(p, q, costrow);
    }
    throw Error("simplex iteration limit exceeded");
  }

 private:
  std::size_t rows_, cols_;
  std::vector<std::vector<double>> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

// Two-phase dense simplex.
inline LpSolution solve_lp(const LinearProgram& lp) {
  const std::size_t m = lp.constraints.size();
  const std::size_t n = lp.objective.size();
  if (lp.rhs.size() != m) throw DimensionMismatch("lp rhs size mismatch");
  for (const auto& row : lp.constraints)
    if (row.size() != n) throw DimensionMismatch("lp constraint row size mismatch");
  if (!lp.nonneg.empty() && lp.nonneg.size() != n)
    throw DimensionMismatch("lp nonneg flag size mismatch");
  if (m == 0) throw Error("lp needs at least one constraint");

  const auto is_nonneg = [&](std::size_t j) {
    return lp.nonneg.empty() || lp.nonneg[j];
  };

  // Free variables are split z = z+ - z-.
  std::vector<std::size_t> pos_col(n), neg_col(n, std::size_t(-1));
  std::size_t ns = 0;
  for (std::size_t j = 0; j < n; ++j) {
    pos_col[j] = ns++;
    if (!is_nonneg(j)) neg_col[j] = ns++;
  }

  const std::size_t surplus0 = ns;
  const std::size_t art0 = ns + m;
  const std::size_t ncols = ns + 2 * m;  // worst case: one artificial per row

  detail::SimplexTableau tab(m, ncols);
  auto& t = tab.t();
  std::vector<bool> is_artificial(ncols, false);
  std::size_t n_art = 0;

  for (std::size_t i = 0; i < m; ++i) {
    double sign = lp.rhs[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      t[i][pos_col[j]] = sign * lp.constraints[i][j];
      if (neg_col[j] != std::size_t(-1)) t[i][neg_col[j]] = -sign * lp.constraints[i][j];
    }
    t[i][surplus0 + i] = -sign;  // A z - s = b
    t[i][ncols] = sign * lp.rhs[i];
    if (sign < 0.0) {
      // Negated row: the surplus column is +1 and can start basic.
      tab.basis()[i] = surplus0 + i;
    } else {
      const std::size_t a = art0 + n_art++;
      t[i][a] = 1.0;
      is_artificial[a] = true;
      tab.basis()[i] = a;
    }
  }

  std::vector<bool> eligible(ncols, true);

  // Phase 1: drive the artificial variables to zero.
  {
    std::vector<double> cost(ncols + 1, 0.0);
    for (std::size_t j = 0; j < ncols; ++j)
      if (is_artificial[j]) cost[j] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (is_artificial[tab.basis()[i]])
        for (std::size_t j = 0; j <= ncols; ++j) cost[j] -= t[i][j];
    }
    if (!tab.iterate(cost, eligible))
      throw Error("phase-1 unbounded; malformed problem");
    if (-cost[ncols] > 1e-7) throw Infeasible("lp has no feasible point");

    for (std::size_t i = 0; i < m; ++i) {
      if (!is_artificial[tab.basis()[i]]) continue;
      for (std::size_t j = 0; j < ncols; ++j) {
        if (!is_artificial[j] && std::abs(t[i][j]) > detail::SimplexTableau::kTol) {
          tab.pivot(i, j, cost);
          break;
        }
      }
      // A row that stays artificial is redundant; its basic value is zero.
    }
  }

  // Phase 2 on the real objective; artificial columns stay out.
  for (std::size_t j = 0; j < ncols; ++j)
    if (is_artificial[j]) eligible[j] = false;
  {
    std::vector<double> cost(ncols + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      cost[pos_col[j]] = lp.objective[j];
      if (neg_col[j] != std::size_t(-1)) cost[neg_col[j]] = -lp.objective[j];
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double cb = cost[tab.basis()[i]];
      if (cb != 0.0)
        for (std::size_t j = 0; j <= ncols; ++j) cost[j] -= cb * t[i][j];
    }
    if (!tab.iterate(cost, eligible)) throw Unbounded("lp objective unbounded below");
  }

  std::vector<double> split(ncols, 0.0);
  for (std::size_t i = 0; i < m; ++i) split[tab.basis()[i]] = t[i][ncols];

  LpSolution sol;
  sol.argmin.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    sol.argmin[j] = split[pos_col[j]];
    if (neg_col[j] != std::size_t(-1)) sol.argmin[j] -= split[neg_col[j]];
  }
  double value = 0.0;
  for (std::size_t j = 0; j < n; ++j) value += lp.objective[j] * sol.argmin[j];
  sol.value = value;

  for (std::size_t i = 0; i < m; ++i) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < n; ++j) lhs += lp.constraints[i][j] * sol.argmin[j];
    if (lhs < lp.rhs[i] - 1e-8)
      throw Error("simplex returned an infeasible point; constraint residual " +
                  std::to_string(lhs - lp.rhs[i]));
  }
  return sol;
}

}  // namespace sysrisk

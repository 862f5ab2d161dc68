#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "cqbandit/error.hpp"

namespace cqb {

/// maximize objective . x  s.t.  eq_lhs x = eq_rhs,  ub_lhs x <= ub_rhs,  x >= 0.
template <typename Scalar>
struct LinearProgram {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector objective;
  Matrix eq_lhs;
  Vector eq_rhs;
  Matrix ub_lhs;
  Vector ub_rhs;

  Eigen::Index num_vars() const { return objective.size(); }
};

enum class LpStatus { optimal, infeasible, unbounded };

template <typename Scalar>
struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  Scalar objective = Scalar(0);
};

namespace detail {

template <typename Scalar>
class Tableau {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Index = Eigen::Index;

  Tableau(Matrix tab, std::vector<Index> basis, Scalar tol, Scalar pivot_tol)
      : tab_(std::move(tab)), basis_(std::move(basis)), tol_(tol), pivot_tol_(pivot_tol) {}

  Index rows() const { return tab_.rows() - 1; }
  Index rhs_col() const { return tab_.cols() - 1; }
  Scalar rhs(Index r) const { return tab_(r, rhs_col()); }
  Scalar& at(Index r, Index c) { return tab_(r, c); }
  const std::vector<Index>& basis() const { return basis_; }

  /// Loads `cost` (minimization) into the reduced-cost row, priced out against the basis.
  void set_cost(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& cost) {
    const Index m = rows();
    tab_.row(m).setZero();
    tab_.row(m).head(cost.size()) = cost.transpose();
    for (Index r = 0; r < m; ++r) {
      const Scalar cb = tab_(m, basis_[r]);
      if (cb != Scalar(0)) tab_.row(m) -= cb * tab_.row(r);
    }
  }

  /// Objective value of the current basis for the loaded minimization cost.
  Scalar value() const { return -tab_(rows(), rhs_col()); }

  void pivot(Index r, Index col) {
    tab_.row(r) /= tab_(r, col);
    for (Index i = 0; i < tab_.rows(); ++i) {
      if (i == r) continue;
      const Scalar f = tab_(i, col);
      if (f != Scalar(0)) tab_.row(i) -= f * tab_.row(r);
    }
    tab_(r, col) = Scalar(1);
    basis_[r] = col;
  }

  /// Bland's rule iterations over columns [0, num_cols). Returns false if unbounded.
  bool minimize(Index num_cols) {
    const Index m = rows();
    for (;;) {
      Index enter = -1;
      for (Index j = 0; j < num_cols; ++j) {
        if (tab_(m, j) < -tol_) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;

      Index leave = -1;
      Scalar best = std::numeric_limits<Scalar>::infinity();
      for (Index r = 0; r < m; ++r) {
        const Scalar a = tab_(r, enter);
        if (a <= pivot_tol_) continue;
        const Scalar ratio = rhs(r) / a;
        if (ratio < best - tol_ || (ratio <= best + tol_ && leave >= 0 && basis_[r] < basis_[leave])) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

  void drop_row(Index r) {
    const Index last = tab_.rows() - 1;
    for (Index i = r; i < last; ++i) tab_.row(i) = tab_.row(i + 1);
    tab_.conservativeResize(last, Eigen::NoChange);
    basis_.erase(basis_.begin() + r);
  }

  Matrix& raw() { return tab_; }

 private:
  Matrix tab_;
  std::vector<Index> basis_;
  Scalar tol_;
  Scalar pivot_tol_;  // round-off in eliminated entries must never be pivoted on
};

}  // namespace detail

/// Dense two-phase primal simplex with Bland's anti-cycling rule.
///
/// Intended for small problems (tens to low thousands of columns). Rows with
/// a nonnegative right-hand side start from their slack; every other row gets
/// a phase-one artificial. Redundant equality rows are dropped after phase one.
template <typename Scalar>
LpResult<Scalar> simplex(const LinearProgram<Scalar>& lp, Scalar tol = Scalar(1e-11),
                         Scalar pivot_tol = Scalar(1e-9)) {
  using Index = Eigen::Index;
  using Vector = typename LinearProgram<Scalar>::Vector;
  using Matrix = typename LinearProgram<Scalar>::Matrix;

  const Index n = lp.num_vars();
  const Index m_eq = lp.eq_lhs.rows();
  const Index m_ub = lp.ub_lhs.rows();
  const Index m = m_eq + m_ub;

  // Columns: [x (n) | slacks (m_ub) | artificials (m) | rhs]
  const Index slack0 = n, art0 = n + m_ub, rhs = n + m_ub + m;
  Matrix tab = Matrix::Zero(m + 1, rhs + 1);
  std::vector<Index> basis(static_cast<std::size_t>(m));
  std::vector<bool> needs_art(static_cast<std::size_t>(m), false);

  for (Index i = 0; i < m_eq; ++i) {
    const Scalar sign = lp.eq_rhs(i) < Scalar(0) ? Scalar(-1) : Scalar(1);
    tab.row(i).head(n) = sign * lp.eq_lhs.row(i);
    tab(i, rhs) = sign * lp.eq_rhs(i);
    needs_art[i] = true;
  }
  for (Index i = 0; i < m_ub; ++i) {
    const Index r = m_eq + i;
    const Scalar sign = lp.ub_rhs(i) < Scalar(0) ? Scalar(-1) : Scalar(1);
    tab.row(r).head(n) = sign * lp.ub_lhs.row(i);
    tab(r, slack0 + i) = sign;
    tab(r, rhs) = sign * lp.ub_rhs(i);
    needs_art[r] = sign < Scalar(0);
    if (!needs_art[r]) basis[r] = slack0 + i;
  }
  Vector phase1_cost = Vector::Zero(rhs);
  for (Index r = 0; r < m; ++r) {
    if (needs_art[r]) {
      tab(r, art0 + r) = Scalar(1);
      basis[r] = art0 + r;
      phase1_cost(art0 + r) = Scalar(1);
    }
  }

  detail::Tableau<Scalar> tableau(std::move(tab), std::move(basis), tol, pivot_tol);
  LpResult<Scalar> result;

  tableau.set_cost(phase1_cost);
  tableau.minimize(rhs);
  if (tableau.value() > Scalar(1e3) * tol) {
    result.status = LpStatus::infeasible;
    return result;
  }

  // Drive zero-level artificials out of the basis; drop rows that are redundant.
  for (Index r = tableau.rows() - 1; r >= 0; --r) {
    if (tableau.basis()[static_cast<std::size_t>(r)] < art0) continue;
    Index col = -1;
    for (Index j = 0; j < art0; ++j) {
      if (std::abs(tableau.at(r, j)) > pivot_tol) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      tableau.pivot(r, col);
    } else {
      tableau.drop_row(r);
    }
  }
  // Artificial columns may no longer enter.
  tableau.raw().middleCols(art0, m).setZero();

  Vector phase2_cost = Vector::Zero(rhs);
  phase2_cost.head(n) = -lp.objective;
  tableau.set_cost(phase2_cost);
  if (!tableau.minimize(art0)) {
    result.status = LpStatus::unbounded;
    return result;
  }

  result.status = LpStatus::optimal;
  result.x = Vector::Zero(n);
  for (Index r = 0; r < tableau.rows(); ++r) {
    const Index b = tableau.basis()[static_cast<std::size_t>(r)];
    if (b < n) result.x(b) = std::max(Scalar(0), tableau.rhs(r));
  }
  result.objective = lp.objective.dot(result.x);

  const Scalar check = Scalar(1e-7);
  const bool eq_ok = m_eq == 0 || ((lp.eq_lhs * result.x - lp.eq_rhs).array().abs() <= check).all();
  const bool ub_ok = m_ub == 0 || ((lp.ub_lhs * result.x - lp.ub_rhs).array() <= check).all();
  if (!eq_ok || !ub_ok) throw Error(Errc::numerical_degeneracy, "simplex lost feasibility to round-off");
  return result;
}

}  // namespace cqb

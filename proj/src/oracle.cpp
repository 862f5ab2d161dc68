#include "cqbandit/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>

#include "cqbandit/error.hpp"

namespace cqb {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

LpSolution to_solution(const Instance& inst, const LpResult<double>& res) {
  LpSolution sol;
  const int C = inst.num_contexts(), J = inst.J;
  if (res.status != LpStatus::optimal) {
    sol.status = LpSolutionStatus::infeasible;
    return sol;
  }
  sol.status = LpSolutionStatus::optimal;
  sol.x.resize(C, J);
  for (int c = 0; c < C; ++c) {
    for (int j = 0; j < J; ++j) sol.x(c, j) = std::max(0.0, res.x(c * J + j));
  }
  sol.objective = aggregate_reward(inst, sol.x);
  sol.active_margin = -aggregate_costs(inst, sol.x);
  return sol;
}

bool deterministic_costs(const Instance& inst) {
  if (inst.cost.variant != CostVariant::tabular) return false;
  for (const auto& tab : inst.cost.tabular) {
    if (tab.kind != TabularKind::deterministic) return false;
  }
  return true;
}

}  // namespace

Vec aggregate_costs(const Instance& inst, const Mat& x) {
  Vec agg = Vec::Zero(inst.K);
  for (int c = 0; c < inst.num_contexts(); ++c) {
    agg += inst.contexts.p(c) * (mean_cost_matrix(inst, c) * x.row(c).transpose());
  }
  return agg;
}

double aggregate_reward(const Instance& inst, const Mat& x) {
  double total = 0.0;
  for (int c = 0; c < inst.num_contexts(); ++c) {
    for (int j = 0; j < inst.J; ++j) total += inst.contexts.p(c) * mean_reward(inst, c, j) * x(c, j);
  }
  return total;
}

LinearProgram<double> fluid_lp(const Instance& inst, double eps) {
  const int C = inst.num_contexts(), J = inst.J, K = inst.K;
  const int n = C * J;
  LinearProgram<double> lp;
  lp.objective.resize(n);
  lp.eq_lhs = Mat::Zero(C, n);
  lp.eq_rhs = Vec::Ones(C);
  lp.ub_lhs = Mat::Zero(K, n);
  lp.ub_rhs = Vec::Constant(K, -eps);
  for (int c = 0; c < C; ++c) {
    const Mat w = mean_cost_matrix(inst, c);
    for (int j = 0; j < J; ++j) {
      const int col = c * J + j;
      lp.objective(col) = inst.contexts.p(c) * mean_reward(inst, c, j);
      lp.eq_lhs(c, col) = 1.0;
      lp.ub_lhs.col(col) = inst.contexts.p(c) * w.col(j);
    }
  }
  return lp;
}

LpSolution solve_tightened(const Instance& inst, double eps) {
  if (!(eps >= 0.0)) throw Error(Errc::invalid_config, "tightening eps must be nonnegative");
  return to_solution(inst, simplex(fluid_lp(inst, eps)));
}

LpSolution solve_baseline(const Instance& inst) { return solve_tightened(inst, 0.0); }

SlaterPoint slater_point(const Instance& inst) {
  if (!solve_baseline(inst).optimal()) throw Error(Errc::lp_infeasible, "baseline LP is infeasible");

  // Append a margin variable m: maximize m s.t. sum p w x + m <= 0, m <= 1.
  const LinearProgram<double> base = fluid_lp(inst, 0.0);
  const Eigen::Index n = base.num_vars();
  LinearProgram<double> lp;
  lp.objective = Vec::Zero(n + 1);
  lp.objective(n) = 1.0;
  lp.eq_lhs = Mat::Zero(base.eq_lhs.rows(), n + 1);
  lp.eq_lhs.leftCols(n) = base.eq_lhs;
  lp.eq_rhs = base.eq_rhs;
  lp.ub_lhs = Mat::Zero(inst.K + 1, n + 1);
  lp.ub_lhs.topLeftCorner(inst.K, n) = base.ub_lhs;
  lp.ub_lhs.col(n).head(inst.K).setOnes();
  lp.ub_lhs(inst.K, n) = 1.0;
  lp.ub_rhs = Vec::Zero(inst.K + 1);
  lp.ub_rhs(inst.K) = 1.0;

  const LpResult<double> res = simplex(lp);
  if (res.status != LpStatus::optimal) throw Error(Errc::lp_infeasible, "Slater margin LP failed");
  SlaterPoint out;
  out.margin = std::clamp(res.x(n), 0.0, 1.0);
  LpResult<double> xs = res;
  xs.x = res.x.head(n);
  out.solution = to_solution(inst, xs);
  return out;
}

double slater_margin(const Instance& inst) { return slater_point(inst).margin; }

Mat mixture(double eps, double delta, const LpSolution& x_star, const LpSolution& x_interior) {
  if (!(delta > 0.0) || eps < 0.0 || eps > delta) {
    throw Error(Errc::invalid_mixture, "mixture requires 0 <= eps <= delta and delta > 0");
  }
  if (x_star.x.rows() != x_interior.x.rows() || x_star.x.cols() != x_interior.x.cols()) {
    throw Error(Errc::invalid_mixture, "mixture operands have different shapes");
  }
  if (eps == 0.0) return x_star.x;
  if (eps == delta) return x_interior.x;
  const double a = eps / delta;
  return (1.0 - a) * x_star.x + a * x_interior.x;
}

std::optional<double> enumerate_vertices(const LinearProgram<double>& lp, double tol) {
  const int n = static_cast<int>(lp.num_vars());
  const int m_eq = static_cast<int>(lp.eq_lhs.rows());
  const int m_ub = static_cast<int>(lp.ub_lhs.rows());
  if (n > 24 || m_ub > 16) throw Error(Errc::too_large, "vertex enumeration limited to tiny LPs");

  std::optional<double> best;
  for (unsigned active = 0; active < (1u << m_ub); ++active) {
    const int rows = m_eq + std::popcount(active);
    if (rows > n) continue;
    for (unsigned free_mask = 0; free_mask < (1u << n); ++free_mask) {
      if (std::popcount(free_mask) != rows) continue;
      if (rows == 0) continue;

      Mat a(rows, rows);
      Vec b(rows);
      std::vector<int> free_vars;
      for (int v = 0; v < n; ++v) {
        if (free_mask & (1u << v)) free_vars.push_back(v);
      }
      int r = 0;
      for (int i = 0; i < m_eq; ++i, ++r) {
        for (int f = 0; f < rows; ++f) a(r, f) = lp.eq_lhs(i, free_vars[f]);
        b(r) = lp.eq_rhs(i);
      }
      for (int i = 0; i < m_ub; ++i) {
        if (!(active & (1u << i))) continue;
        for (int f = 0; f < rows; ++f) a(r, f) = lp.ub_lhs(i, free_vars[f]);
        b(r) = lp.ub_rhs(i);
        ++r;
      }
      Eigen::FullPivLU<Mat> lu(a);
      if (lu.rank() < rows) continue;
      const Vec sol = lu.solve(b);

      Vec x = Vec::Zero(n);
      for (int f = 0; f < rows; ++f) x(free_vars[f]) = sol(f);
      if ((x.array() < -tol).any()) continue;
      if (m_eq > 0 && ((lp.eq_lhs * x - lp.eq_rhs).array().abs() > tol).any()) continue;
      if (m_ub > 0 && ((lp.ub_lhs * x - lp.ub_rhs).array() > tol).any()) continue;
      const double value = lp.objective.dot(x);
      if (!best || value > *best) best = value;
    }
  }
  return best;
}

double brute_force_value(const Instance& inst, double eps) {
  if (inst.num_contexts() * inst.J > kBruteForceCap) {
    throw Error(Errc::too_large, "brute force limited to |C| * J <= 12");
  }
  const auto value = enumerate_vertices(fluid_lp(inst, eps));
  return value ? *value : kNaN;
}

double best_sequence_value(const Instance& inst, long horizon) {
  if (inst.num_contexts() != 1 || !deterministic_costs(inst)) {
    throw Error(Errc::invalid_config, "sequence search needs one context and deterministic costs");
  }
  if (std::pow(static_cast<double>(inst.J), static_cast<double>(horizon)) > 1e6) {
    throw Error(Errc::too_large, "sequence search limited to J^T <= 10^6");
  }
  const Mat w = mean_cost_matrix(inst, 0);
  Vec r(inst.J);
  for (int j = 0; j < inst.J; ++j) r(j) = mean_reward(inst, 0, j);

  double best = -std::numeric_limits<double>::infinity();
  Vec cum = Vec::Zero(inst.K);
  std::function<void(long, double)> dfs = [&](long depth, double value) {
    if (depth == horizon) {
      best = std::max(best, value);
      return;
    }
    for (int j = 0; j < inst.J; ++j) {
      cum += w.col(j);
      if ((cum.array() <= 1e-12).all()) dfs(depth + 1, value + r(j));
      cum -= w.col(j);
    }
  };
  dfs(0, 0.0);
  return std::isfinite(best) ? best : kNaN;
}

double best_randomized_policy_value(const Instance& inst, long horizon) {
  if (inst.num_contexts() != 1 || !deterministic_costs(inst)) {
    throw Error(Errc::invalid_config, "policy search needs one context and deterministic costs");
  }
  const double count = std::pow(static_cast<double>(inst.J), static_cast<double>(horizon));
  if (count > 5000) throw Error(Errc::too_large, "randomized policy search limited to J^T <= 5000");
  const int n = static_cast<int>(count);
  const int K = inst.K;
  const Mat w = mean_cost_matrix(inst, 0);

  LinearProgram<double> lp;
  lp.objective = Vec::Zero(n);
  lp.eq_lhs = Mat::Ones(1, n);
  lp.eq_rhs = Vec::Ones(1);
  lp.ub_lhs = Mat::Zero(horizon * K, n);
  lp.ub_rhs = Vec::Zero(horizon * K);
  for (int s = 0; s < n; ++s) {
    int code = s;
    Vec cum = Vec::Zero(K);
    for (long t = 0; t < horizon; ++t) {
      const int j = code % inst.J;
      code /= inst.J;
      lp.objective(s) += mean_reward(inst, 0, j);
      cum += w.col(j);
      lp.ub_lhs.block(t * K, s, K, 1) = cum;
    }
  }
  const LpResult<double> res = simplex(lp);
  return res.status == LpStatus::optimal ? res.objective : kNaN;
}

}  // namespace cqb

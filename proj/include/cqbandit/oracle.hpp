#pragma once

#include "cqbandit/instances.hpp"
#include "cqbandit/simplex.hpp"

namespace cqb {

enum class LpSolutionStatus { optimal, infeasible };

struct LpSolution {
  Mat x;  // |C| x J, row c is the action distribution for context c
  double objective = 0.0;
  LpSolutionStatus status = LpSolutionStatus::infeasible;
  Vec active_margin;  // length K: -(sum_c,j p_c w_k x_cj), i.e. slack of "<= 0"

  bool optimal() const { return status == LpSolutionStatus::optimal; }
};

/// Fluid LP with every cost row tightened by eps:
///   max sum p_c r(c,j) x_cj  s.t.  sum_j x_cj = 1,  x >= 0,  sum p_c w_k(c,j) x_cj + eps <= 0.
/// Mean costs for linear cost models are computed from mu_star.
LinearProgram<double> fluid_lp(const Instance& instance, double eps);

LpSolution solve_baseline(const Instance& instance);
LpSolution solve_tightened(const Instance& instance, double eps);

/// Largest delta (capped at 1) such that some x has every cost aggregate <= -delta,
/// together with the maximizing x. Throws lp_infeasible if the baseline is infeasible.
struct SlaterPoint {
  double margin = 0.0;
  LpSolution solution;
};
SlaterPoint slater_point(const Instance& instance);
double slater_margin(const Instance& instance);

/// (1 - eps/delta) x_star + (eps/delta) x_interior. Throws invalid_mixture if eps > delta.
Mat mixture(double eps, double delta, const LpSolution& x_star, const LpSolution& x_interior);

/// Aggregate cost sum_c,j p_c w_k(c,j) x_cj for each k.
Vec aggregate_costs(const Instance& instance, const Mat& x);
double aggregate_reward(const Instance& instance, const Mat& x);

/// Optimal value of a small LP by enumerating basic feasible solutions.
/// Returns nullopt when the feasible set is empty.
std::optional<double> enumerate_vertices(const LinearProgram<double>& lp, double tol = 1e-9);

/// Vertex-enumeration value of the eps-tightened fluid LP. |C|*J must be <= 12.
/// NaN when infeasible.
double brute_force_value(const Instance& instance, double eps);

inline constexpr int kBruteForceCap = 12;

/// Best expected reward over deterministic action sequences (open-loop
/// policies) of length `horizon` meeting every anytime constraint
/// sum_{t<=tau} w_k(a_t) <= 0. Single context, deterministic costs, J^horizon <= 10^6.
/// Returns NaN if no sequence is feasible.
double best_sequence_value(const Instance& instance, long horizon);

/// Best expected reward over *distributions* of action sequences meeting the
/// anytime constraints in expectation. Any history-dependent policy on a
/// single-context, deterministic-cost instance induces such a distribution.
/// Returns NaN if infeasible.
double best_randomized_policy_value(const Instance& instance, long horizon);

}  // namespace cqb

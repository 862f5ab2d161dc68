#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cqbandit/confidence.hpp"
#include "cqbandit/dual.hpp"
#include "cqbandit/instances.hpp"

namespace cqb {

enum class Policy {
  pessimistic_optimistic,
  linucb_unconstrained,  // same loop, multiplier term forced to zero
  oracle_lp,             // samples j ~ x*(c, .) from the baseline LP
  uniform,
};

std::string_view to_string(Policy policy);
std::optional<Policy> parse_policy(std::string_view name);

struct AlgState {
  RidgeState<double> ridge_reward;
  std::vector<RidgeState<double>> ridge_cost;  // one per constraint, linear costs only
  QueueVector queues;
  Schedule schedule;
  long t = 0;        // completed rounds
  double m = 1.0;    // reward parameter norm bound
  double p = 0.0;    // confidence parameter
};

/// Fresh state for `instance`. p defaults to 1/T.
AlgState init_state(const Instance& instance, Schedule schedule, std::optional<double> p = std::nullopt);

/// value[j] = r_hat[j] - (1/v) * sum_k cost_est(k, j) * q[k].
Vec pseudo_values(const Vec& r_hat, const Mat& cost_est, const QueueVector& q, double v);

/// argmax with ties going to the lowest index.
int select_action(const Vec& values);

struct RoundRecord {
  long t = 0;
  int context = 0;
  int action = 0;
  double reward = 0.0;       // realized
  double mean_reward = 0.0;  // r(c, action)
  Vec cost;                  // realized chosen costs, length K
  Vec mean_cost;             // w_k(c, action)
  Vec dual_cost;             // the cost fed to the dual update
  Vec queue;                 // queues after this round's update, i.e. Q(t+1)
  double beta_sqrt = 0.0;    // reward-ellipsoid radius used this round
  double conf_dist = 0.0;    // ||theta_hat - theta_star||_Sigma before this round's update
};

/// Optimistic reward estimates r_hat(c, j) for all j under the current state.
Vec optimistic_rewards(const AlgState& state, const Instance& instance, int c);
/// Pessimistic cost estimates (K x J) for the linear-cost variant.
Mat pessimistic_costs(const AlgState& state, const Instance& instance, int c);

/// One round of the main algorithm (costs revealed before acting).
RoundRecord step(AlgState& state, const Observation& obs, const Instance& instance, const StreamKey& key);

/// One round of the linear-cost variant (costs learned and revealed after acting).
RoundRecord step_linear_cost(AlgState& state, const Observation& obs, const Instance& instance, const StreamKey& key);

struct RunMeta {
  std::uint64_t seed = 0;
  std::uint32_t replication = 0;
  Policy policy = Policy::pessimistic_optimistic;
  ScheduleKind schedule = ScheduleKind::experiment_mab;
  std::string instance;
};

/// Column-oriented per-round log of one run.
struct Trajectory {
  RunMeta meta;
  int K = 1;
  long rounds = 0;
  Eigen::VectorXi context, action;
  Vec reward, mean_reward;
  Mat cost, mean_cost, dual_cost, queue;  // T x K
  Vec beta_sqrt, conf_dist;               // empty unless traced

  Trajectory() = default;
  Trajectory(long horizon, int num_constraints, bool traced);
  void append(const RoundRecord& rec);
  bool traced() const { return beta_sqrt.size() > 0; }
};

struct RunOptions {
  std::uint64_t seed = 0;
  std::uint32_t replication = 0;
  std::optional<long> horizon;  // defaults to instance.T
  std::optional<double> p;      // defaults to 1/T
  bool trace_confidence = false;
};

/// Executes T rounds of `policy`. Linear cost models select the linear-cost
/// step automatically. oracle-lp throws lp_infeasible if the baseline LP is infeasible.
Trajectory run(const Instance& instance, Policy policy, const Schedule& schedule, const RunOptions& options);

/// Per-round CSV: t, context, action, reward, cost_1..K, q_1..K, cum_reward,
/// cum_cost_1..K [, beta_sqrt, conf_dist]. Floats use 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace cqb

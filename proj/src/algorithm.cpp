#include "cqbandit/algorithm.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "cqbandit/error.hpp"
#include "cqbandit/oracle.hpp"

namespace cqb {
namespace {

/// Radius of the reward ellipsoid B_t for the coming round.
Radius<double> reward_radius(const AlgState& s) { return radius(s.t, s.ridge_reward.dim(), s.m, s.p); }

/// Cost ellipsoids use norm bound 1 (||mu_star|| <= 1).
Radius<double> cost_radius(const AlgState& s, Eigen::Index dim) { return radius(s.t, dim, 1.0, s.p); }

int sample_from(const Eigen::RowVectorXd& dist, RngStream& rng) {
  const double u = rng.uniform() * dist.sum();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < dist.size(); ++j) {
    acc += dist(j);
    if (u < acc) return static_cast<int>(j);
  }
  for (Eigen::Index j = dist.size() - 1; j >= 0; --j) {
    if (dist(j) > 0.0) return static_cast<int>(j);
  }
  return 0;
}

/// Shared round logic. `xstar` is only read by oracle-lp.
RoundRecord play_round(AlgState& state, const Observation& obs, const Instance& inst, const StreamKey& key,
                       Policy policy, const LpSolution* xstar) {
  const long t = state.t + 1;
  if (obs.t != t) throw Error(Errc::invalid_config, "observation round does not follow the state's round counter");
  const bool linear = inst.cost.variant == CostVariant::linear;
  if (!linear && !obs.costs) throw Error(Errc::invalid_config, "tabular setting requires the cost matrix before acting");

  const int c = obs.c;
  const double v = state.schedule.v(t);
  const double eps = state.schedule.epsilon(t);
  const Radius<double> rad = reward_radius(state);

  RoundRecord rec;
  rec.t = t;
  rec.context = c;
  rec.beta_sqrt = rad.beta_sqrt;
  rec.conf_dist = confidence_distance(state.ridge_reward, inst.reward.theta_star);

  // Cost signal the policy acts on: observed costs, or pessimistic estimates.
  Mat cost_signal = linear ? pessimistic_costs(state, inst, c) : *obs.costs;

  int j = 0;
  switch (policy) {
    case Policy::pessimistic_optimistic:
    case Policy::linucb_unconstrained: {
      const Vec r_hat = optimistic_rewards(state, inst, c);
      if (policy == Policy::pessimistic_optimistic) {
        j = select_action(pseudo_values(r_hat, cost_signal, state.queues, v));
      } else {
        j = select_action(r_hat);
      }
      break;
    }
    case Policy::oracle_lp: {
      RngStream rng = key.stream(t, Purpose::policy);
      j = sample_from(xstar->x.row(c), rng);
      break;
    }
    case Policy::uniform: {
      RngStream rng = key.stream(t, Purpose::policy);
      j = static_cast<int>(rng.below(static_cast<std::uint64_t>(inst.J)));
      break;
    }
  }
  rec.action = j;

  RngStream reward_rng = key.stream(t, Purpose::reward);
  rec.reward = realize_reward(inst, reward_rng, c, j);
  rec.mean_reward = mean_reward(inst, c, j);
  rec.mean_cost = mean_cost_matrix(inst, c).col(j);

  if (linear) {
    RngStream cost_rng = key.stream(t, Purpose::cost);
    rec.cost = realize_linear_cost(inst, cost_rng, c, j);
    rec.dual_cost = policy == Policy::pessimistic_optimistic ? Vec(cost_signal.col(j)) : rec.cost;
  } else {
    rec.cost = cost_signal.col(j);
    rec.dual_cost = rec.cost;
  }

  state.ridge_reward.update(inst.features(c, j), rec.reward);
  if (linear) {
    for (int k = 0; k < inst.K; ++k) state.ridge_cost[k].update(inst.cost.linear[k].psi(c, j), rec.cost(k));
  }
  state.queues = dual_update(state.queues, rec.dual_cost, eps);
  state.t = t;
  rec.queue = state.queues.values();
  return rec;
}

}  // namespace

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::pessimistic_optimistic: return "pessimistic-optimistic";
    case Policy::linucb_unconstrained: return "linucb-unconstrained";
    case Policy::oracle_lp: return "oracle-lp";
    case Policy::uniform: return "uniform";
  }
  return "pessimistic-optimistic";
}

std::optional<Policy> parse_policy(std::string_view name) {
  for (auto p : {Policy::pessimistic_optimistic, Policy::linucb_unconstrained, Policy::oracle_lp, Policy::uniform}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

AlgState init_state(const Instance& inst, Schedule schedule, std::optional<double> p) {
  const double conf = p.value_or(1.0 / static_cast<double>(inst.T));
  if (!(conf > 0.0 && conf < 1.0)) throw Error(Errc::invalid_config, "confidence parameter p must lie in (0, 1)");
  AlgState state{RidgeState<double>(inst.dim()), {}, QueueVector(inst.K), std::move(schedule), 0, inst.reward.m, conf};
  if (inst.cost.variant == CostVariant::linear) {
    for (const auto& lin : inst.cost.linear) state.ridge_cost.emplace_back(lin.psi.dim());
  }
  return state;
}

Vec pseudo_values(const Vec& r_hat, const Mat& cost_est, const QueueVector& q, double v) {
  if (!(v > 0.0)) throw Error(Errc::invalid_config, "V_t must be positive");
  return r_hat - (cost_est.transpose() * q.values()) / v;
}

int select_action(const Vec& values) {
  int best = 0;
  for (int j = 1; j < values.size(); ++j) {
    if (values(j) > values(best)) best = j;
  }
  return best;
}

Vec optimistic_rewards(const AlgState& state, const Instance& inst, int c) {
  const Radius<double> rad = reward_radius(state);
  Vec r_hat(inst.J);
  for (int j = 0; j < inst.J; ++j) r_hat(j) = optimistic_reward(state.ridge_reward, rad, inst.features(c, j));
  return r_hat;
}

Mat pessimistic_costs(const AlgState& state, const Instance& inst, int c) {
  Mat w(inst.K, inst.J);
  for (int k = 0; k < inst.K; ++k) {
    const auto& ridge = state.ridge_cost[k];
    const Radius<double> rad = cost_radius(state, ridge.dim());
    for (int j = 0; j < inst.J; ++j) w(k, j) = pessimistic_cost(ridge, rad, inst.cost.linear[k].psi(c, j));
  }
  return w;
}

RoundRecord step(AlgState& state, const Observation& obs, const Instance& inst, const StreamKey& key) {
  if (inst.cost.variant != CostVariant::tabular) {
    throw Error(Errc::invalid_config, "step() needs costs revealed before acting; use step_linear_cost()");
  }
  return play_round(state, obs, inst, key, Policy::pessimistic_optimistic, nullptr);
}

RoundRecord step_linear_cost(AlgState& state, const Observation& obs, const Instance& inst, const StreamKey& key) {
  if (inst.cost.variant != CostVariant::linear) {
    throw Error(Errc::invalid_config, "step_linear_cost() needs a linear cost model");
  }
  return play_round(state, obs, inst, key, Policy::pessimistic_optimistic, nullptr);
}

Trajectory::Trajectory(long horizon, int num_constraints, bool traced)
    : K(num_constraints),
      context(horizon),
      action(horizon),
      reward(horizon),
      mean_reward(horizon),
      cost(horizon, num_constraints),
      mean_cost(horizon, num_constraints),
      dual_cost(horizon, num_constraints),
      queue(horizon, num_constraints) {
  if (traced) {
    beta_sqrt.resize(horizon);
    conf_dist.resize(horizon);
  }
}

void Trajectory::append(const RoundRecord& rec) {
  const long i = rounds++;
  context(i) = rec.context;
  action(i) = rec.action;
  reward(i) = rec.reward;
  mean_reward(i) = rec.mean_reward;
  cost.row(i) = rec.cost.transpose();
  mean_cost.row(i) = rec.mean_cost.transpose();
  dual_cost.row(i) = rec.dual_cost.transpose();
  queue.row(i) = rec.queue.transpose();
  if (traced()) {
    beta_sqrt(i) = rec.beta_sqrt;
    conf_dist(i) = rec.conf_dist;
  }
}

Trajectory run(const Instance& inst, Policy policy, const Schedule& schedule, const RunOptions& opt) {
  validate(inst);
  const long horizon = opt.horizon.value_or(inst.T);
  if (horizon < 1) throw Error(Errc::invalid_config, "horizon must be positive");
  std::optional<double> p = opt.p;
  if (!p) p = 1.0 / static_cast<double>(horizon);

  std::optional<LpSolution> xstar;
  if (policy == Policy::oracle_lp) {
    xstar = solve_baseline(inst);
    if (!xstar->optimal()) throw Error(Errc::lp_infeasible, "baseline LP is infeasible");
  }

  AlgState state = init_state(inst, schedule, p);
  const StreamKey key{opt.seed, opt.replication};
  Trajectory traj(horizon, inst.K, opt.trace_confidence);
  traj.meta = {opt.seed, opt.replication, policy, schedule.kind(), inst.name};
  for (long t = 1; t <= horizon; ++t) {
    const Observation obs = sample_round(inst, key, t);
    traj.append(play_round(state, obs, inst, key, policy, xstar ? &*xstar : nullptr));
  }
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const int K = traj.K;
  os << "t,context,action,reward";
  for (int k = 1; k <= K; ++k) os << ",cost_" << k;
  for (int k = 1; k <= K; ++k) os << ",q_" << k;
  os << ",cum_reward";
  for (int k = 1; k <= K; ++k) os << ",cum_cost_" << k;
  if (traj.traced()) os << ",beta_sqrt,conf_dist";
  os << '\n';

  char buf[32];
  const auto num = [&](double x) -> const char* {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  };
  double cum_reward = 0.0;
  Vec cum_cost = Vec::Zero(K);
  for (long i = 0; i < traj.rounds; ++i) {
    cum_reward += traj.reward(i);
    cum_cost += traj.cost.row(i).transpose();
    os << (i + 1) << ',' << traj.context(i) << ',' << traj.action(i) << ',' << num(traj.reward(i));
    for (int k = 0; k < K; ++k) os << ',' << num(traj.cost(i, k));
    for (int k = 0; k < K; ++k) os << ',' << num(traj.queue(i, k));
    os << ',' << num(cum_reward);
    for (int k = 0; k < K; ++k) os << ',' << num(cum_cost(k));
    if (traj.traced()) os << ',' << num(traj.beta_sqrt(i)) << ',' << num(traj.conf_dist(i));
    os << '\n';
  }
}

}  // namespace cqb

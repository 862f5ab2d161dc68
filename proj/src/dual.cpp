#include "cqbandit/dual.hpp"

#include <cmath>

#include "cqbandit/error.hpp"
#include "cqbandit/instances.hpp"

namespace cqb {

QueueVector::QueueVector(Eigen::VectorXd q) : q_(std::move(q)) {
  if ((q_.array() < 0.0).any()) throw Error(Errc::invalid_config, "queue entries must be nonnegative");
}

QueueVector dual_update(const QueueVector& q, const Eigen::Ref<const Eigen::VectorXd>& chosen_costs, double eps) {
  QueueVector out;
  out.q_ = (q.q_ + chosen_costs).array() + eps;
  out.q_ = out.q_.cwiseMax(0.0);
  return out;
}

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::theory_main: return "theory-main";
    case ScheduleKind::theory_linear_cost: return "theory-linear-cost";
    case ScheduleKind::experiment_mab: return "experiment-mab";
    case ScheduleKind::experiment_ward: return "experiment-ward";
    case ScheduleKind::custom: return "custom";
  }
  return "custom";
}

std::optional<ScheduleKind> parse_schedule_kind(std::string_view name) {
  for (auto kind : {ScheduleKind::theory_main, ScheduleKind::theory_linear_cost, ScheduleKind::experiment_mab,
                    ScheduleKind::experiment_ward, ScheduleKind::custom}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

Schedule::Schedule(ScheduleKind kind, double delta, int num_constraints, int dim, long horizon)
    : kind_(kind), delta_(delta), k_(num_constraints), d_(dim), horizon_(horizon) {
  if (kind == ScheduleKind::custom) throw Error(Errc::invalid_config, "custom schedule needs v and eps functions");
  const bool uses_delta = kind == ScheduleKind::theory_main || kind == ScheduleKind::theory_linear_cost;
  if (uses_delta && !(delta > 0.0 && delta <= 1.0)) {
    throw Error(Errc::invalid_config, "schedule requires delta in (0, 1]");
  }
  if (num_constraints < 1 || dim < 1 || horizon < 1) throw Error(Errc::invalid_config, "schedule needs K, d, T >= 1");
}

Schedule::Schedule(Fn v_fn, Fn eps_fn, double delta)
    : kind_(ScheduleKind::custom), delta_(delta), v_fn_(std::move(v_fn)), eps_fn_(std::move(eps_fn)) {
  if (!v_fn_ || !eps_fn_) throw Error(Errc::invalid_config, "custom schedule needs v and eps functions");
}

double Schedule::v(long t) const {
  const double tt = static_cast<double>(t);
  switch (kind_) {
    case ScheduleKind::theory_main:
      return delta_ * std::pow(k_, 0.25) * std::sqrt(2.0 * tt / 3.0);
    case ScheduleKind::theory_linear_cost:
      return delta_ * d_ * std::sqrt(tt) * std::log(1.0 + static_cast<double>(horizon_)) / 4.0;
    case ScheduleKind::experiment_mab:
      return std::sqrt(tt);
    case ScheduleKind::experiment_ward:
      return 4.0 * std::sqrt(tt);
    case ScheduleKind::custom:
      return v_fn_(t);
  }
  return 0.0;
}

double Schedule::epsilon(long t) const {
  const double tt = static_cast<double>(t);
  switch (kind_) {
    case ScheduleKind::theory_main:
      return std::pow(k_, 0.75) * std::sqrt(6.0 / tt);
    case ScheduleKind::theory_linear_cost:
      return 4.0 * d_ * std::log(1.0 + static_cast<double>(horizon_)) / std::sqrt(tt);
    case ScheduleKind::experiment_mab:
      return 6.0 / std::sqrt(tt);
    case ScheduleKind::experiment_ward:
      return 1.0 / std::sqrt(tt);
    case ScheduleKind::custom:
      return eps_fn_(t);
  }
  return 0.0;
}

Schedule make_schedule(ScheduleKind kind, const Instance& instance) {
  return Schedule(kind, instance.delta, instance.K, instance.dim(), instance.T);
}

Schedule power_law_schedule(double v_coef, double v_exp, double eps_coef, double eps_exp, double delta) {
  if (!(v_coef > 0.0) || !(eps_coef > 0.0) || eps_exp < 0.0) {
    throw Error(Errc::invalid_config, "power-law schedule needs positive coefficients and eps_exp >= 0");
  }
  return Schedule([=](long t) { return v_coef * std::pow(static_cast<double>(t), v_exp); },
                  [=](long t) { return eps_coef * std::pow(static_cast<double>(t), -eps_exp); }, delta);
}

std::optional<long> first_round_below(const Schedule& s, double threshold, long t_max) {
  for (long t = 1; t <= t_max; ++t) {
    if (s.epsilon(t) <= threshold) return t;
  }
  return std::nullopt;
}

std::optional<long> tau_prime(const Schedule& s, long t_max) {
  return first_round_below(s, s.delta() / 2.0, t_max);
}

}  // namespace cqb

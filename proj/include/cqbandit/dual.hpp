#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace cqb {

struct Instance;

/// Nonnegative virtual queues, one per constraint.
class QueueVector {
 public:
  QueueVector() = default;
  explicit QueueVector(Eigen::Index k) : q_(Eigen::VectorXd::Zero(k)) {}
  /// Throws invalid_config on a negative entry.
  explicit QueueVector(Eigen::VectorXd q);

  const Eigen::VectorXd& values() const { return q_; }
  double operator[](Eigen::Index k) const { return q_(k); }
  Eigen::Index size() const { return q_.size(); }

 private:
  friend QueueVector dual_update(const QueueVector&, const Eigen::Ref<const Eigen::VectorXd>&, double);
  Eigen::VectorXd q_;
};

/// q'[k] = max(0, q[k] + chosen_costs[k] + eps).
QueueVector dual_update(const QueueVector& q, const Eigen::Ref<const Eigen::VectorXd>& chosen_costs, double eps);

enum class ScheduleKind {
  theory_main,         // V_t = delta K^0.25 sqrt(2t/3),     eps_t = K^0.75 sqrt(6/t)
  theory_linear_cost,  // V_t = delta d sqrt(t) log(1+T)/4,  eps_t = 4 d log(1+T) / sqrt(t)
  experiment_mab,      // V_t = sqrt(t),                     eps_t = 6 / sqrt(t)
  experiment_ward,     // V_t = 4 sqrt(t),                   eps_t = 1 / sqrt(t)
  custom,
};

std::string_view to_string(ScheduleKind kind);
std::optional<ScheduleKind> parse_schedule_kind(std::string_view name);

/// V_t and eps_t sequences. Parameters (delta, K, d, T) come from the instance.
class Schedule {
 public:
  using Fn = std::function<double(long)>;

  Schedule(ScheduleKind kind, double delta, int num_constraints, int dim, long horizon);
  /// Custom schedule; throws invalid_config if either function is empty.
  /// `delta` is only used to locate tau'.
  Schedule(Fn v_fn, Fn eps_fn, double delta = 1.0);

  ScheduleKind kind() const { return kind_; }
  double delta() const { return delta_; }

  double v(long t) const;
  double epsilon(long t) const;

 private:
  ScheduleKind kind_;
  double delta_ = 1.0;
  int k_ = 1;
  int d_ = 1;
  long horizon_ = 1;
  Fn v_fn_;
  Fn eps_fn_;
};

/// Builds a named schedule from the instance's delta, K, d and T. Throws
/// invalid_config when delta is outside (0, 1] for the delta-scaled kinds.
Schedule make_schedule(ScheduleKind kind, const Instance& instance);

/// V_t = v_coef * t^v_exp, eps_t = eps_coef * t^(-eps_exp).
Schedule power_law_schedule(double v_coef, double v_exp, double eps_coef, double eps_exp, double delta = 1.0);

inline double v_t(const Schedule& s, long t) { return s.v(t); }
inline double epsilon_t(const Schedule& s, long t) { return s.epsilon(t); }

/// Smallest t >= 1 with eps_t <= threshold, or nullopt if none up to t_max.
std::optional<long> first_round_below(const Schedule& s, double threshold, long t_max);

/// tau': first round with eps_t <= delta / 2.
std::optional<long> tau_prime(const Schedule& s, long t_max);

}  // namespace cqb

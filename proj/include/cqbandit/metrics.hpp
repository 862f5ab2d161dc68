#pragma once

#include <iosfwd>
#include <optional>
#include <span>

#include "cqbandit/algorithm.hpp"

namespace cqb {

/// Across-run estimates of the pseudo-regret and violation curves.
/// Vectors are indexed by tau - 1.
struct AggregateCurves {
  long n_runs = 0;
  long horizon = 0;
  int K = 1;
  Vec regret;          // tau * opt - mean over runs of sum_{t<=tau} r(c_t, A_t)
  Vec regret_stderr;
  Vec regret_realized;  // same with realized rewards
  Vec regret_realized_stderr;
  Vec violation;        // sum_k (mean over runs of sum_{t<=tau} W_k)^+
  Mat mean_cum_cost;    // T x K, mean over runs of cumulative realized cost
  Mat viol_freq;        // T x K, fraction of runs with positive cumulative cost
  Vec queue_over_sqrt_t;  // K, max over runs and t >= t_min of Q_k(t) / sqrt(t)
};

Vec regret_curve(std::span<const Trajectory> runs, double opt_per_round);
Vec regret_stderr(std::span<const Trajectory> runs, double opt_per_round);
/// Realized-reward accounting, for cross-checking the mean-reward estimator.
Vec realized_regret_curve(std::span<const Trajectory> runs, double opt_per_round);
Vec violation_curve(std::span<const Trajectory> runs);
Vec pathwise_violation_freq(std::span<const Trajectory> runs, int k);
Vec queue_stats(std::span<const Trajectory> runs, long t_min);

/// Least-squares slope of log(curve[tau]) against log(tau) over every integer
/// tau in [t_lo, t_hi]. Throws nonpositive_values if the curve is <= 0 there.
double loglog_slope(const Vec& curve, long t_lo, long t_hi);

/// Smallest tau_hat such that violation[tau] == 0 for all tau >= tau_hat;
/// nullopt if the curve is positive at the horizon.
std::optional<long> zero_violation_from(const Vec& violation);

/// Streaming reduction over runs, added in a fixed order so results are
/// reproducible no matter how runs were scheduled.
class CurveAccumulator {
 public:
  CurveAccumulator(long horizon, int num_constraints, double opt_per_round, long t_min);

  /// Throws mismatched_runs if the trajectory's shape or instance differs from earlier runs.
  void add(const Trajectory& traj);
  AggregateCurves finish() const;
  long count() const { return n_; }

 private:
  long horizon_;
  int k_;
  double opt_;
  long t_min_;
  long n_ = 0;
  std::string instance_;
  Vec sum_, sumsq_, sum_real_, sumsq_real_;
  Mat cost_sum_, positive_;
  Vec queue_max_;
};

/// Aggregate CSV: tau, regret, regret_stderr, violation, viol_freq_1..K
/// [, regret_realized, regret_realized_stderr].
void write_aggregate_csv(std::ostream& os, const AggregateCurves& curves, bool realized_columns);

}  // namespace cqb

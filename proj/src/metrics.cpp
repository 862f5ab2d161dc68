#include "cqbandit/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "cqbandit/error.hpp"

namespace cqb {
namespace {

void check_runs(std::span<const Trajectory> runs) {
  if (runs.empty()) throw Error(Errc::mismatched_runs, "no trajectories to aggregate");
  for (const auto& r : runs) {
    if (r.rounds != runs[0].rounds || r.K != runs[0].K || r.meta.instance != runs[0].meta.instance) {
      throw Error(Errc::mismatched_runs, "trajectories differ in instance, horizon or K");
    }
  }
}

/// Mean and standard error over runs of the cumulative sums of `column(run)`.
template <typename Column>
std::pair<Vec, Vec> cumulative_mean(std::span<const Trajectory> runs, Column column) {
  const long T = runs[0].rounds;
  const double n = static_cast<double>(runs.size());
  Vec sum = Vec::Zero(T), sumsq = Vec::Zero(T);
  for (const auto& r : runs) {
    double acc = 0.0;
    const Vec& col = column(r);
    for (long i = 0; i < T; ++i) {
      acc += col(i);
      sum(i) += acc;
      sumsq(i) += acc * acc;
    }
  }
  Vec mean = sum / n;
  Vec se = Vec::Zero(T);
  if (runs.size() > 1) {
    for (long i = 0; i < T; ++i) {
      const double var = std::max(0.0, (sumsq(i) - n * mean(i) * mean(i)) / (n - 1.0));
      se(i) = std::sqrt(var / n);
    }
  }
  return {mean, se};
}

Vec taus(long T) { return Vec::LinSpaced(T, 1.0, static_cast<double>(T)); }

}  // namespace

Vec regret_curve(std::span<const Trajectory> runs, double opt) {
  check_runs(runs);
  return opt * taus(runs[0].rounds) - cumulative_mean(runs, [](const Trajectory& r) -> const Vec& { return r.mean_reward; }).first;
}

Vec regret_stderr(std::span<const Trajectory> runs, double) {
  check_runs(runs);
  return cumulative_mean(runs, [](const Trajectory& r) -> const Vec& { return r.mean_reward; }).second;
}

Vec realized_regret_curve(std::span<const Trajectory> runs, double opt) {
  check_runs(runs);
  return opt * taus(runs[0].rounds) - cumulative_mean(runs, [](const Trajectory& r) -> const Vec& { return r.reward; }).first;
}

Vec violation_curve(std::span<const Trajectory> runs) {
  check_runs(runs);
  const long T = runs[0].rounds;
  Vec v = Vec::Zero(T);
  for (int k = 0; k < runs[0].K; ++k) {
    Vec col_sum = Vec::Zero(T);
    for (const auto& r : runs) {
      double acc = 0.0;
      for (long i = 0; i < T; ++i) {
        acc += r.cost(i, k);
        col_sum(i) += acc;
      }
    }
    v += (col_sum / static_cast<double>(runs.size())).cwiseMax(0.0);
  }
  return v;
}

Vec pathwise_violation_freq(std::span<const Trajectory> runs, int k) {
  check_runs(runs);
  const long T = runs[0].rounds;
  Vec freq = Vec::Zero(T);
  for (const auto& r : runs) {
    double acc = 0.0;
    for (long i = 0; i < T; ++i) {
      acc += r.cost(i, k);
      if (acc > 0.0) freq(i) += 1.0;
    }
  }
  return freq / static_cast<double>(runs.size());
}

Vec queue_stats(std::span<const Trajectory> runs, long t_min) {
  check_runs(runs);
  const long T = runs[0].rounds;
  Vec out = Vec::Zero(runs[0].K);
  for (const auto& r : runs) {
    for (long i = 0; i < T; ++i) {
      const long t = i + 2;  // row i holds Q(i + 2)
      if (t < t_min) continue;
      const double s = std::sqrt(static_cast<double>(t));
      for (int k = 0; k < r.K; ++k) out(k) = std::max(out(k), r.queue(i, k) / s);
    }
  }
  return out;
}

double loglog_slope(const Vec& curve, long t_lo, long t_hi) {
  if (t_lo < 1 || t_hi <= t_lo || t_hi > curve.size()) {
    throw Error(Errc::invalid_config, "loglog_slope range must satisfy 1 <= t_lo < t_hi <= length");
  }
  const long n = t_hi - t_lo + 1;
  double mx = 0.0, my = 0.0;
  for (long tau = t_lo; tau <= t_hi; ++tau) {
    const double y = curve(tau - 1);
    if (!(y > 0.0)) throw Error(Errc::nonpositive_values, "curve must be positive on the fitted range");
    mx += std::log(static_cast<double>(tau));
    my += std::log(y);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (long tau = t_lo; tau <= t_hi; ++tau) {
    const double dx = std::log(static_cast<double>(tau)) - mx;
    sxy += dx * (std::log(curve(tau - 1)) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::optional<long> zero_violation_from(const Vec& violation) {
  const long T = violation.size();
  long tau_hat = T + 1;
  while (tau_hat > 1 && violation(tau_hat - 2) == 0.0) --tau_hat;
  if (tau_hat == T + 1) return std::nullopt;
  return tau_hat;
}

CurveAccumulator::CurveAccumulator(long horizon, int num_constraints, double opt, long t_min)
    : horizon_(horizon),
      k_(num_constraints),
      opt_(opt),
      t_min_(t_min),
      sum_(Vec::Zero(horizon)),
      sumsq_(Vec::Zero(horizon)),
      sum_real_(Vec::Zero(horizon)),
      sumsq_real_(Vec::Zero(horizon)),
      cost_sum_(Mat::Zero(horizon, num_constraints)),
      positive_(Mat::Zero(horizon, num_constraints)),
      queue_max_(Vec::Zero(num_constraints)) {}

void CurveAccumulator::add(const Trajectory& r) {
  if (r.rounds != horizon_ || r.K != k_ || (n_ > 0 && r.meta.instance != instance_)) {
    throw Error(Errc::mismatched_runs, "trajectory does not match the accumulator's instance, horizon or K");
  }
  instance_ = r.meta.instance;
  ++n_;
  double acc = 0.0, acc_real = 0.0;
  Vec cost_acc = Vec::Zero(k_);
  for (long i = 0; i < horizon_; ++i) {
    acc += r.mean_reward(i);
    acc_real += r.reward(i);
    sum_(i) += acc;
    sumsq_(i) += acc * acc;
    sum_real_(i) += acc_real;
    sumsq_real_(i) += acc_real * acc_real;
    const long t = i + 2;
    const double s = std::sqrt(static_cast<double>(t));
    for (int k = 0; k < k_; ++k) {
      cost_acc(k) += r.cost(i, k);
      cost_sum_(i, k) += cost_acc(k);
      if (cost_acc(k) > 0.0) positive_(i, k) += 1.0;
      if (t >= t_min_) queue_max_(k) = std::max(queue_max_(k), r.queue(i, k) / s);
    }
  }
}

AggregateCurves CurveAccumulator::finish() const {
  if (n_ == 0) throw Error(Errc::mismatched_runs, "no trajectories to aggregate");
  const double n = static_cast<double>(n_);
  AggregateCurves out;
  out.n_runs = n_;
  out.horizon = horizon_;
  out.K = k_;
  const Vec tau = taus(horizon_);
  const auto stderr_of = [&](const Vec& s, const Vec& ss) {
    Vec se = Vec::Zero(horizon_);
    if (n_ < 2) return se;
    for (long i = 0; i < horizon_; ++i) {
      const double mean = s(i) / n;
      se(i) = std::sqrt(std::max(0.0, (ss(i) - n * mean * mean) / (n - 1.0)) / n);
    }
    return se;
  };
  out.regret = opt_ * tau - sum_ / n;
  out.regret_stderr = stderr_of(sum_, sumsq_);
  out.regret_realized = opt_ * tau - sum_real_ / n;
  out.regret_realized_stderr = stderr_of(sum_real_, sumsq_real_);
  out.mean_cum_cost = cost_sum_ / n;
  out.violation = out.mean_cum_cost.cwiseMax(0.0).rowwise().sum();
  out.viol_freq = positive_ / n;
  out.queue_over_sqrt_t = queue_max_;
  return out;
}

void write_aggregate_csv(std::ostream& os, const AggregateCurves& a, bool realized_columns) {
  os << "tau,regret,regret_stderr,violation";
  for (int k = 1; k <= a.K; ++k) os << ",viol_freq_" << k;
  if (realized_columns) os << ",regret_realized,regret_realized_stderr";
  os << '\n';
  char buf[32];
  const auto num = [&](double x) -> const char* {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  };
  for (long i = 0; i < a.horizon; ++i) {
    os << (i + 1) << ',' << num(a.regret(i));
    os << ',' << num(a.regret_stderr(i));
    os << ',' << num(a.violation(i));
    for (int k = 0; k < a.K; ++k) os << ',' << num(a.viol_freq(i, k));
    if (realized_columns) {
      os << ',' << num(a.regret_realized(i));
      os << ',' << num(a.regret_realized_stderr(i));
    }
    os << '\n';
  }
}

}  // namespace cqb

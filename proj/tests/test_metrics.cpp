#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "cqbandit/error.hpp"
#include "cqbandit/metrics.hpp"
#include "cqbandit/oracle.hpp"

using namespace cqb;

namespace {

// Fabricated run with constant per-round costs and reward.
Trajectory constant_run(long T, const Vec& cost, double mean_reward) {
  Trajectory tr(T, static_cast<int>(cost.size()), false);
  tr.meta.instance = "fabricated";
  for (long t = 1; t <= T; ++t) {
    RoundRecord rec;
    rec.t = t;
    rec.reward = mean_reward;
    rec.mean_reward = mean_reward;
    rec.cost = cost;
    rec.mean_cost = cost;
    rec.dual_cost = cost;
    rec.queue = Vec::Zero(cost.size());
    tr.append(rec);
  }
  return tr;
}

std::vector<Trajectory> batch(const Instance& inst, Policy policy, const Schedule& s, int n, long T) {
  std::vector<Trajectory> out;
  for (int r = 0; r < n; ++r) {
    RunOptions opt;
    opt.seed = 1000;
    opt.replication = static_cast<std::uint32_t>(r);
    opt.horizon = T;
    out.push_back(run(inst, policy, s, opt));
  }
  return out;
}

Instance mab() { return mab_instance(mab_defaults::rewards(), mab_defaults::costs(), mab_defaults::budget); }

}  // namespace

TEST_CASE("violation of fabricated runs") {
  const std::vector<Trajectory> neg{constant_run(10, Vec::Constant(1, -1.0), 0.5)};
  CHECK(violation_curve(neg).isZero(0.0));

  const std::vector<Trajectory> pos{constant_run(10, Vec::Constant(1, 0.5), 0.5)};
  const Vec v = violation_curve(pos);
  for (long tau = 1; tau <= 10; ++tau) CHECK(v(tau - 1) == doctest::Approx(0.5 * tau));

  const std::vector<Trajectory> two{constant_run(10, (Vec(2) << 3.0, -5.0).finished(), 0.5)};
  CHECK(violation_curve(two)(9) == doctest::Approx(30.0));

  // Violation is taken on the mean over runs, so opposite runs cancel.
  const std::vector<Trajectory> mixed{constant_run(4, Vec::Constant(1, 1.0), 0.0), constant_run(4, Vec::Constant(1, -1.0), 0.0)};
  CHECK(violation_curve(mixed).isZero(0.0));
  CHECK(pathwise_violation_freq(mixed, 0).isConstant(0.5));
}

TEST_CASE("pathwise frequencies") {
  const std::vector<Trajectory> neg{constant_run(6, Vec::Constant(1, -1.0), 0.5)};
  CHECK(pathwise_violation_freq(neg, 0).isZero(0.0));
  const std::vector<Trajectory> pos{constant_run(6, Vec::Constant(1, 0.5), 0.5)};
  CHECK(pathwise_violation_freq(pos, 0).isOnes(0.0));
  const std::vector<Trajectory> zero{constant_run(6, Vec::Zero(1), 0.5)};
  CHECK(pathwise_violation_freq(zero, 0).isZero(0.0));
}

TEST_CASE("queue statistic") {
  Trajectory tr = constant_run(100, Vec::Constant(1, 0.1), 0.5);
  for (long i = 0; i < 100; ++i) tr.queue(i, 0) = std::sqrt(static_cast<double>(i + 2));
  const std::vector<Trajectory> runs{tr};
  CHECK(queue_stats(runs, 1)(0) == doctest::Approx(1.0));
  CHECK(queue_stats(runs, 50)(0) == doctest::Approx(1.0));

  const std::vector<Trajectory> idle{constant_run(100, Vec::Constant(1, -1.0), 0.5)};
  CHECK(queue_stats(idle, 1)(0) == 0.0);
}

TEST_CASE("regret of a single fabricated run") {
  const std::vector<Trajectory> runs{constant_run(5, Vec::Constant(1, -1.0), 0.25)};
  const Vec r = regret_curve(runs, 0.75);
  for (long tau = 1; tau <= 5; ++tau) CHECK(r(tau - 1) == doctest::Approx(0.5 * tau));
  CHECK(regret_stderr(runs, 0.75).isZero(0.0));

  const std::vector<Trajectory> one{constant_run(1, Vec::Constant(1, 0.0), 0.3)};
  CHECK(regret_curve(one, 0.7)(0) == doctest::Approx(0.4));
}

TEST_CASE("runs of different shapes are rejected") {
  const std::vector<Trajectory> rounds{constant_run(5, Vec::Zero(1), 0.1), constant_run(6, Vec::Zero(1), 0.1)};
  CHECK_THROWS_AS(regret_curve(rounds, 0.5), Error);
  const std::vector<Trajectory> ks{constant_run(5, Vec::Zero(1), 0.1), constant_run(5, Vec::Zero(2), 0.1)};
  CHECK_THROWS_AS(violation_curve(ks), Error);

  CurveAccumulator acc(5, 1, 0.5, 1);
  Trajectory other = constant_run(5, Vec::Zero(1), 0.1);
  acc.add(other);
  other.meta.instance = "elsewhere";
  try {
    acc.add(other);
    FAIL("expected mismatched_runs");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::mismatched_runs);
  }
}

TEST_CASE("streaming accumulator matches the batch estimators") {
  const Instance inst = ward_instance(WardConfig{}, 4);
  const Schedule s = make_schedule(ScheduleKind::experiment_ward, inst);
  const auto runs = batch(inst, Policy::pessimistic_optimistic, s, 12, 2000);
  const double opt = solve_baseline(inst).objective;

  CurveAccumulator acc(2000, inst.K, opt, 30);
  for (const auto& r : runs) acc.add(r);
  const AggregateCurves a = acc.finish();
  CHECK(a.n_runs == 12);
  CHECK((a.regret - regret_curve(runs, opt)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((a.regret_stderr - regret_stderr(runs, opt)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((a.regret_realized - realized_regret_curve(runs, opt)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((a.violation - violation_curve(runs)).cwiseAbs().maxCoeff() < 1e-9);
  for (int k = 0; k < inst.K; ++k) CHECK(a.viol_freq.col(k) == pathwise_violation_freq(runs, k));
  CHECK(a.queue_over_sqrt_t == queue_stats(runs, 30));
}

TEST_CASE("oracle policy has no detectable regret") {
  const Instance inst = ward_instance(WardConfig{}, 4);
  const Schedule s = make_schedule(ScheduleKind::experiment_ward, inst);
  const double opt = solve_baseline(inst).objective;
  const auto runs = batch(inst, Policy::oracle_lp, s, 50, 10000);
  const double r = regret_curve(runs, opt)(9999);
  const double se = regret_stderr(runs, opt)(9999);
  CHECK(se > 0.0);
  CHECK(std::abs(r) <= 4 * se);

  const auto mab_runs = batch(mab(), Policy::oracle_lp, s, 50, 10000);
  CHECK(std::abs(regret_curve(mab_runs, 0.7)(9999)) <= 1e-12 * 0.7 * 10000);
}

TEST_CASE("uniform policy regret grows linearly") {
  const auto runs = batch(mab(), Policy::uniform, Schedule(ScheduleKind::experiment_mab, 0.5, 1, 4, 10000), 20, 10000);
  const Vec r = regret_curve(runs, 0.7);
  CHECK(r(9999) / 10000 == doctest::Approx(0.35).epsilon(0.02));
  CHECK(loglog_slope(r, 100, 10000) == doctest::Approx(1.0).epsilon(0.02));

  const Vec real = realized_regret_curve(runs, 0.7);
  CurveAccumulator acc(10000, 1, 0.7, 1);
  for (const auto& tr : runs) acc.add(tr);
  CHECK(std::abs(real(9999) - r(9999)) <= 4 * acc.finish().regret_realized_stderr(9999));
}

TEST_CASE("log-log slope") {
  const long n = 100000;
  Vec sq(n), lin(n), logsq(n);
  for (long t = 1; t <= n; ++t) {
    const double x = static_cast<double>(t);
    sq(t - 1) = 3.0 * std::sqrt(x);
    lin(t - 1) = 0.2 * x;
    logsq(t - 1) = 2.0 * std::sqrt(x) * std::log(x);
  }
  CHECK(std::abs(loglog_slope(sq, 1, n) - 0.5) < 1e-9);
  CHECK(std::abs(loglog_slope(lin, 10, n) - 1.0) < 1e-9);
  const double s = loglog_slope(logsq, 1000, n);
  CHECK(s > 0.5);
  CHECK(s < 0.62);

  CHECK_THROWS_AS(loglog_slope(sq, 0, 10), Error);
  CHECK_THROWS_AS(loglog_slope(sq, 10, n + 1), Error);
  Vec bad = sq;
  bad(20) = 0.0;
  CHECK_THROWS_AS(loglog_slope(bad, 1, 100), Error);
}

TEST_CASE("zero-violation onset") {
  CHECK(zero_violation_from((Vec(5) << 0.3, 0.1, 0.0, 0.0, 0.0).finished()) == 3);
  CHECK(zero_violation_from((Vec(5) << 0.0, 0.1, 0.0, 0.2, 0.0).finished()) == 5);
  CHECK(zero_violation_from(Vec::Zero(4)) == 1);
  CHECK_FALSE(zero_violation_from((Vec(3) << 0.0, 0.0, 0.1).finished()).has_value());
}

TEST_CASE("aggregate csv layout") {
  CurveAccumulator acc(3, 2, 0.5, 1);
  acc.add(constant_run(3, (Vec(2) << 0.5, -0.5).finished(), 0.25));
  std::ostringstream os;
  write_aggregate_csv(os, acc.finish(), true);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "tau,regret,regret_stderr,violation,viol_freq_1,viol_freq_2,regret_realized,regret_realized_stderr");
  std::getline(is, line);
  CHECK(line == "1,0.25,0,0.5,1,0,0.25,0");
}

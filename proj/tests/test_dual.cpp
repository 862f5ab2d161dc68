#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cqbandit/algorithm.hpp"
#include "cqbandit/dual.hpp"
#include "cqbandit/error.hpp"

using namespace cqb;

namespace {

Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("queue update clips at zero") {
  CHECK(dual_update(QueueVector(1), v({-0.5}), 0.2)[0] == 0.0);
  CHECK(dual_update(QueueVector(v({1.0})), v({0.3}), 0.1)[0] == doctest::Approx(1.4));
  const QueueVector q = dual_update(QueueVector(v({2.0, 0.0})), v({-1.0, 1.0}), 0.0);
  CHECK(q[0] == 1.0);
  CHECK(q[1] == 1.0);
}

TEST_CASE("negative queues are rejected") {
  CHECK_THROWS_AS(QueueVector(v({0.5, -1e-3})), Error);
  CHECK_NOTHROW(QueueVector(v({0.0, 3.0})));
}

TEST_CASE("named schedules") {
  const Schedule main(ScheduleKind::theory_main, 1.0, 1, 4, 1000);
  CHECK(main.v(6) == doctest::Approx(2.0));
  CHECK(main.epsilon(6) == doctest::Approx(1.0));
  const Schedule main_k(ScheduleKind::theory_main, 0.5, 16, 4, 1000);
  CHECK(main_k.v(6) == doctest::Approx(0.5 * 2.0 * 2.0));
  CHECK(main_k.epsilon(6) == doctest::Approx(8.0));

  const Schedule mab(ScheduleKind::experiment_mab, 0.5, 1, 4, 1000);
  CHECK(mab.v(100) == doctest::Approx(10.0));
  CHECK(mab.epsilon(36) == doctest::Approx(1.0));

  const Schedule ward(ScheduleKind::experiment_ward, 0.05, 3, 6, 1000);
  CHECK(ward.v(4) == doctest::Approx(8.0));
  CHECK(ward.epsilon(4) == doctest::Approx(0.5));

  const long T = 999;
  const Schedule lin(ScheduleKind::theory_linear_cost, 0.5, 1, 4, T);
  CHECK(lin.v(16) == doctest::Approx(0.5 * 4 * 4 * std::log(1000.0) / 4));
  CHECK(lin.epsilon(16) == doctest::Approx(4 * 4 * std::log(1000.0) / 4));
}

TEST_CASE("schedule names round-trip") {
  for (auto kind : {ScheduleKind::theory_main, ScheduleKind::theory_linear_cost, ScheduleKind::experiment_mab,
                    ScheduleKind::experiment_ward, ScheduleKind::custom}) {
    CHECK(parse_schedule_kind(to_string(kind)) == kind);
  }
  CHECK_FALSE(parse_schedule_kind("theory").has_value());
}

TEST_CASE("delta outside (0, 1] is rejected for delta-scaled schedules") {
  CHECK_THROWS_AS(Schedule(ScheduleKind::theory_main, 0.0, 1, 4, 100), Error);
  CHECK_THROWS_AS(Schedule(ScheduleKind::theory_linear_cost, 1.5, 1, 4, 100), Error);
  CHECK_NOTHROW(Schedule(ScheduleKind::theory_main, 1.0, 1, 4, 100));
}

TEST_CASE("power law and custom schedules") {
  const Schedule s = power_law_schedule(2.0, 0.5, 3.0, 0.25);
  CHECK(s.v(16) == doctest::Approx(8.0));
  CHECK(s.epsilon(16) == doctest::Approx(1.5));
  CHECK(s.kind() == ScheduleKind::custom);
  CHECK_THROWS_AS(Schedule(Schedule::Fn{}, [](long) { return 0.0; }), Error);
}

TEST_CASE("tau prime") {
  const Schedule main(ScheduleKind::theory_main, 1.0, 1, 4, 1000);
  CHECK(tau_prime(main, 1000) == 24);
  CHECK(main.epsilon(24) <= 0.5);
  CHECK(main.epsilon(23) > 0.5);
  CHECK_FALSE(tau_prime(main, 23).has_value());
  CHECK(first_round_below(main, 10.0, 5) == 1);
}

TEST_CASE("queue trajectories telescope and grow boundedly") {
  const Instance inst = ward_instance(WardConfig{}, 3);
  const Schedule sched = make_schedule(ScheduleKind::experiment_ward, inst);
  RunOptions opt;
  opt.seed = 5;
  opt.horizon = 3000;
  const Trajectory traj = run(inst, Policy::pessimistic_optimistic, sched, opt);

  Vec drift = Vec::Zero(inst.K);
  Vec prev = Vec::Zero(inst.K);
  for (long t = 1; t <= traj.rounds; ++t) {
    const Vec w = traj.dual_cost.row(t - 1).transpose();
    const Vec q = traj.queue.row(t - 1).transpose();
    const double eps = sched.epsilon(t);
    drift += w + Vec::Constant(inst.K, eps);
    for (int k = 0; k < inst.K; ++k) {
      REQUIRE(q(k) >= 0.0);
      CHECK(q(k) == doctest::Approx(std::max(0.0, prev(k) + w(k) + eps)).epsilon(1e-12));
      CHECK(std::abs(q(k) - prev(k)) <= std::abs(w(k)) + eps + 1e-12);
      CHECK(q(k) >= drift(k) - 1e-9);
    }
    prev = q;
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cqbandit/confidence.hpp"
#include "cqbandit/rng.hpp"

using namespace cqb;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace {

Vec random_unit_ball(RngStream& rng, int d) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.normal();
  return v / v.norm() * rng.uniform();
}

}  // namespace

TEST_CASE("fresh ridge state") {
  const auto s1 = ridge_init<double>(1);
  CHECK(s1.sigma()(0, 0) == 1.0);
  CHECK(s1.theta_hat()(0) == 0.0);
  const auto s3 = ridge_init<double>(3);
  CHECK(s3.sigma_inv().isIdentity(0.0));
  CHECK(contains(s3, Radius<double>{0.1, 0.5}, Vec::Zero(3)));
}

TEST_CASE("one update from the identity") {
  const auto s = rank_one_update(ridge_init<double>(2), Vec::Unit(2, 0), 1.0);
  CHECK(s.sigma().isApprox((Vec(2) << 2, 1).finished().asDiagonal().toDenseMatrix()));
  CHECK(s.sigma_inv()(0, 0) == doctest::Approx(0.5));
  CHECK(s.sigma_inv()(1, 1) == doctest::Approx(1.0));
  CHECK(s.theta_hat()(0) == doctest::Approx(0.5));
  CHECK(s.theta_hat()(1) == doctest::Approx(0.0));
  CHECK(s.n_updates() == 1);
}

TEST_CASE("zero feature only bumps the counter") {
  auto s = rank_one_update(ridge_init<double>(3), Vec::Ones(3) / 2.0, 0.3);
  const auto before = s;
  s.update(Vec::Zero(3), 5.0);
  CHECK(s.sigma() == before.sigma());
  CHECK(s.sigma_inv() == before.sigma_inv());
  CHECK(s.theta_hat() == before.theta_hat());
  CHECK(s.n_updates() == before.n_updates() + 1);
}

TEST_CASE("streaming estimate matches a dense solve of the update log") {
  const int d = 5;
  RngStream rng(21, 0, 0, Purpose::policy);
  RidgeState<double> s(d);
  Mat phis(d, 1000);
  Vec ys(1000);
  for (int i = 0; i < 1000; ++i) {
    phis.col(i) = random_unit_ball(rng, d);
    ys(i) = rng.normal();
    s.update(phis.col(i), ys(i));

    if (i % 97 == 0 || i == 999) {
      const Mat sigma = Mat::Identity(d, d) + phis.leftCols(i + 1) * phis.leftCols(i + 1).transpose();
      CHECK((s.sigma() - sigma).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((s.sigma_inv() - sigma.inverse()).cwiseAbs().maxCoeff() < 1e-8);
      const Vec theta = sigma.ldlt().solve(phis.leftCols(i + 1) * ys.head(i + 1));
      CHECK((s.theta_hat() - theta).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("radius formula") {
  const double T = 1000.0, m = 0.8;
  CHECK(radius<double>(0, 4, m, 1.0 / T).beta_sqrt == doctest::Approx(m + std::sqrt(2 * std::log(T))));
  for (int d : {1, 3, 7}) {
    CHECK(radius<double>(d, d, m, 0.01).beta_sqrt ==
          doctest::Approx(m + std::sqrt(2 * std::log(100.0) + d * std::log(2.0))));
  }
  double prev = 0.0;
  for (long t = 0; t < 5000; ++t) {
    const double b = radius<double>(t, 6, 1.0, 1e-4).beta_sqrt;
    CHECK(b >= prev);
    prev = b;
  }
}

TEST_CASE("optimistic reward") {
  const auto fresh = ridge_init<double>(2);
  CHECK(optimistic_reward(fresh, Radius<double>{0.5, 0.1}, Vec::Unit(2, 0)) == doctest::Approx(0.5));
  CHECK(optimistic_reward(fresh, Radius<double>{10.0, 0.1}, (Vec(2) << 0.1, 0.2).finished()) == 1.0);
  const auto s = rank_one_update(fresh, Vec::Unit(2, 0), 1.0);
  CHECK(weighted_norm(s.sigma_inv(), Vec::Unit(2, 0)) == doctest::Approx(std::sqrt(0.5)));
  CHECK(optimistic_reward(s, Radius<double>{1.0, 0.1}, Vec::Unit(2, 0)) == 1.0);
  CHECK(optimistic_reward(s, Radius<double>{0.1, 0.1}, Vec::Unit(2, 0)) == doctest::Approx(0.5 + 0.1 * std::sqrt(0.5)));
}

TEST_CASE("pessimistic cost") {
  const auto fresh = ridge_init<double>(2);
  CHECK(pessimistic_cost(fresh, Radius<double>{0.5, 0.1}, Vec::Unit(2, 0)) == doctest::Approx(-0.5));
  CHECK(pessimistic_cost(fresh, Radius<double>{10.0, 0.1}, Vec::Unit(2, 0)) == -1.0);
  CHECK(pessimistic_cost(fresh, Radius<double>{10.0, 0.1}, Vec::Zero(2)) == 0.0);
}

TEST_CASE("ellipsoid membership") {
  auto s = rank_one_update(ridge_init<double>(3), (Vec(3) << 0.3, 0.1, -0.2).finished(), 0.7);
  CHECK(contains(s, Radius<double>{0.0, 0.1}, s.theta_hat()));
  const auto fresh = ridge_init<double>(3);
  const Vec on_boundary = (Vec(3) << 0.6, 0.0, 0.8).finished() * 1.7;
  CHECK(contains(fresh, Radius<double>{1.7, 0.1}, on_boundary));
  CHECK_FALSE(contains(fresh, Radius<double>{1.7 * (1 - 1e-9), 0.1}, on_boundary));
}

TEST_CASE("estimates bracket the truth whenever the ellipsoid covers it") {
  const int d = 4;
  RngStream rng(31, 0, 0, Purpose::instance);
  const Vec theta = random_unit_ball(rng, d);
  RidgeState<double> s(d);
  int covered_rounds = 0;
  for (long t = 0; t < 2000; ++t) {
    const Radius<double> r = radius<double>(t, d, 1.0, 1e-3);
    if (contains(s, r, theta)) {
      ++covered_rounds;
      for (int probe = 0; probe < 4; ++probe) {
        const Vec phi = random_unit_ball(rng, d);
        if (theta.dot(phi) <= 1.0) CHECK(optimistic_reward(s, r, phi) >= theta.dot(phi) - 1e-12);
        CHECK(pessimistic_cost(s, r, phi) <= theta.dot(phi) + 1e-12);
      }
    }
    const Vec phi = random_unit_ball(rng, d);
    s.update(phi, theta.dot(phi) + 0.5 * rng.normal());
  }
  CHECK(covered_rounds > 1900);
}

TEST_CASE("long runs keep the inverse consistent") {
  const int d = 3;
  RngStream rng(41, 0, 0, Purpose::instance);
  RidgeState<double> s(d);
  for (int i = 0; i < 20000; ++i) {
    s.update(random_unit_ball(rng, d), rng.normal());
    if (i % 2500 == 0) CHECK((s.sigma_inv() - s.sigma().inverse()).cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK(s.inverse_drift() < 1e-8);
}

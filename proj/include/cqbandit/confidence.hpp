#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "cqbandit/error.hpp"

namespace cqb {

/// Ridge regression state with identity prior: sigma = I + sum phi phi^T.
///
/// sigma_inv is maintained by Sherman-Morrison rank-one updates. Every
/// `kCheckPeriod` updates the inverse drift ||sigma * sigma_inv - I||_max is
/// measured and the inverse is rebuilt from a Cholesky factorization when it
/// exceeds `kRefactorDrift`; every `kRefactorPeriod` updates it is rebuilt
/// unconditionally.
template <typename Scalar>
class RidgeState {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  static constexpr long kCheckPeriod = 64;
  static constexpr long kRefactorPeriod = 1024;
  static constexpr Scalar kRefactorDrift = Scalar(1e-10);
  static constexpr Scalar kMaxDrift = Scalar(1e-8);

  RidgeState() = default;
  explicit RidgeState(Eigen::Index dim)
      : sigma_(Matrix::Identity(dim, dim)),
        sigma_inv_(Matrix::Identity(dim, dim)),
        b_(Vector::Zero(dim)),
        theta_hat_(Vector::Zero(dim)) {}

  Eigen::Index dim() const { return b_.size(); }
  const Matrix& sigma() const { return sigma_; }
  const Matrix& sigma_inv() const { return sigma_inv_; }
  const Vector& b() const { return b_; }
  const Vector& theta_hat() const { return theta_hat_; }
  long n_updates() const { return n_updates_; }

  template <typename Derived>
  void update(const Eigen::MatrixBase<Derived>& phi, Scalar y) {
    ++n_updates_;
    b_.noalias() += y * phi;
    if (!phi.isZero(0)) {
      sigma_.noalias() += phi * phi.transpose();
      const Vector u = sigma_inv_ * phi;
      sigma_inv_.noalias() -= (u * u.transpose()) / (Scalar(1) + phi.dot(u));
    }
    if (n_updates_ % kRefactorPeriod == 0) {
      refactor();
    } else if (n_updates_ % kCheckPeriod == 0 && inverse_drift() > kRefactorDrift) {
      refactor();
    }
    theta_hat_.noalias() = sigma_inv_ * b_;
  }

  /// ||sigma * sigma_inv - I||_max.
  Scalar inverse_drift() const {
    return (sigma_ * sigma_inv_ - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
  }

  void refactor() {
    Eigen::LLT<Matrix> llt(sigma_);
    if (llt.info() != Eigen::Success) {
      throw Error(Errc::numerical_degeneracy, "ridge covariance lost positive definiteness");
    }
    sigma_inv_ = llt.solve(Matrix::Identity(dim(), dim()));
    sigma_inv_ = Scalar(0.5) * (sigma_inv_ + sigma_inv_.transpose()).eval();
    if (inverse_drift() > kMaxDrift) {
      throw Error(Errc::numerical_degeneracy, "ridge inverse drift persists after refactorization");
    }
  }

 private:
  Matrix sigma_;
  Matrix sigma_inv_;
  Vector b_;
  Vector theta_hat_;
  long n_updates_ = 0;
};

template <typename Scalar = double>
RidgeState<Scalar> ridge_init(Eigen::Index dim) {
  return RidgeState<Scalar>(dim);
}

template <typename Scalar, typename Derived>
RidgeState<Scalar> rank_one_update(RidgeState<Scalar> state, const Eigen::MatrixBase<Derived>& phi,
                                   Scalar y) {
  state.update(phi, y);
  return state;
}

template <typename Scalar = double>
struct Radius {
  Scalar beta_sqrt = Scalar(0);
  Scalar p = Scalar(0);
};

/// sqrt(beta_t) = m + sqrt(2 log(1/p) + d log((d + t) / d)); t counts completed updates.
template <typename Scalar = double>
Radius<Scalar> radius(long t, Eigen::Index d, Scalar m, Scalar p) {
  using std::log;
  using std::sqrt;
  const Scalar dd = static_cast<Scalar>(d);
  const Scalar growth = dd * log((dd + static_cast<Scalar>(t)) / dd);
  return {m + sqrt(Scalar(2) * log(Scalar(1) / p) + growth), p};
}

/// ||x||_{A} = sqrt(x^T A x).
template <typename Scalar, typename Derived>
Scalar weighted_norm(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
                     const Eigen::MatrixBase<Derived>& x) {
  return std::sqrt(std::max(Scalar(0), x.dot(a * x)));
}

/// min(1, max over the ellipsoid of <theta, phi>) in closed form.
template <typename Scalar, typename Derived>
Scalar optimistic_reward(const RidgeState<Scalar>& state, const Radius<Scalar>& r,
                         const Eigen::MatrixBase<Derived>& phi) {
  const Scalar ucb = state.theta_hat().dot(phi) + r.beta_sqrt * weighted_norm(state.sigma_inv(), phi);
  return std::min(Scalar(1), ucb);
}

/// Lower-confidence cost clipped to [-1, 1].
template <typename Scalar, typename Derived>
Scalar pessimistic_cost(const RidgeState<Scalar>& state, const Radius<Scalar>& r,
                        const Eigen::MatrixBase<Derived>& psi) {
  const Scalar lcb = state.theta_hat().dot(psi) - r.beta_sqrt * weighted_norm(state.sigma_inv(), psi);
  return std::clamp(lcb, Scalar(-1), Scalar(1));
}

/// ||theta - theta_hat||_sigma. Used for coverage tracing.
template <typename Scalar, typename Derived>
Scalar confidence_distance(const RidgeState<Scalar>& state, const Eigen::MatrixBase<Derived>& theta) {
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> diff = theta - state.theta_hat();
  return weighted_norm(state.sigma(), diff);
}

/// Boundary-inclusive radius test (relative slack of a few ulps).
template <typename Scalar>
bool within_radius(Scalar distance, Scalar beta_sqrt) {
  const Scalar slack = Scalar(8) * std::numeric_limits<Scalar>::epsilon() * std::max(Scalar(1), beta_sqrt);
  return distance <= beta_sqrt + slack;
}

template <typename Scalar, typename Derived>
bool contains(const RidgeState<Scalar>& state, const Radius<Scalar>& r,
              const Eigen::MatrixBase<Derived>& theta) {
  return within_radius(confidence_distance(state, theta), r.beta_sqrt);
}

}  // namespace cqb

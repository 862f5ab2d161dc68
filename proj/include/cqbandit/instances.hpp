#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cqbandit/rng.hpp"

namespace cqb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dense (context, action) -> R^d table. Column `c * J + j` holds phi(c, j).
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int num_contexts, int num_actions, int dim)
      : contexts_(num_contexts), actions_(num_actions), table_(Mat::Zero(dim, num_contexts * num_actions)) {}

  /// phi(c, j) = e_{c*J + j}; d = |C| * J. With one context this is the MAB embedding.
  static FeatureMap one_hot(int num_contexts, int num_actions) {
    FeatureMap map(num_contexts, num_actions, num_contexts * num_actions);
    map.table_.setIdentity();
    return map;
  }

  int num_contexts() const { return contexts_; }
  int num_actions() const { return actions_; }
  int dim() const { return static_cast<int>(table_.rows()); }

  auto operator()(int c, int j) const { return table_.col(c * actions_ + j); }
  auto operator()(int c, int j) { return table_.col(c * actions_ + j); }

  const Mat& table() const { return table_; }

  bool is_one_hot() const {
    return table_.rows() == table_.cols() && table_.isIdentity(0.0);
  }

 private:
  int contexts_ = 0;
  int actions_ = 0;
  Mat table_;
};

enum class NoiseKind {
  gaussian,   // additive N(0, sigma^2), sigma <= 1
  bernoulli,  // the realization itself is a Bernoulli/Rademacher draw with the right mean
};

struct RewardModel {
  Vec theta_star;
  double m = 1.0;
  NoiseKind noise = NoiseKind::gaussian;
  double sigma = 1.0;
};

enum class TabularKind {
  deterministic,      // W = mean
  shifted_bernoulli,  // W = Bernoulli(mean + shift) - shift
};

/// One constraint's cost table over (context, action).
struct TabularCost {
  TabularKind kind = TabularKind::deterministic;
  Mat mean;   // |C| x J
  Mat shift;  // |C| x J; only read for shifted_bernoulli
};

/// One constraint's linear cost w(c,j) = <mu_star, psi(c,j)> observed after acting.
struct LinearCost {
  Vec mu_star;
  FeatureMap psi;
};

enum class CostVariant { tabular, linear };

struct CostModel {
  CostVariant variant = CostVariant::tabular;
  std::vector<TabularCost> tabular;  // size K when tabular
  std::vector<LinearCost> linear;    // size K when linear
  NoiseKind noise = NoiseKind::gaussian;  // linear only
  double sigma = 1.0;                     // linear only
};

struct ContextDistribution {
  Vec p;
};

struct Instance {
  std::string name;
  ContextDistribution contexts;
  FeatureMap features;
  RewardModel reward;
  CostModel cost;
  int K = 1;
  int J = 1;
  long T = 1;
  double delta = 1.0;

  int num_contexts() const { return static_cast<int>(contexts.p.size()); }
  int dim() const { return features.dim(); }
};

/// Throws Error(invalid_config) on any violated instance invariant, including
/// the exhaustive range scan of mean rewards and costs.
void validate(const Instance& instance);

/// Identifies one replication; every random draw of a run is keyed off this
/// together with the round index and a Purpose.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint32_t replication = 0;

  RngStream stream(long t, Purpose purpose) const {
    return RngStream(seed, replication, static_cast<std::uint32_t>(t), purpose);
  }
};

struct Observation {
  long t = 0;
  int c = 0;
  /// K x J realized costs, revealed before acting. Absent for linear costs.
  std::optional<Mat> costs;
};

Observation sample_round(const Instance& instance, const StreamKey& key, long t);

double mean_reward(const Instance& instance, int c, int j);
double mean_cost(const Instance& instance, int c, int j, int k);
/// K x J matrix of mean costs for context c.
Mat mean_cost_matrix(const Instance& instance, int c);

double realize_reward(const Instance& instance, RngStream& rng, int c, int j);
/// Length-K realized cost for a linear-cost instance, drawn after acting.
Vec realize_linear_cost(const Instance& instance, RngStream& rng, int c, int j);

namespace mab_defaults {
inline const Vec& rewards() {
  static const Vec r = (Vec(4) << 0.1, 0.2, 0.4, 0.7).finished();
  return r;
}
inline const Vec& costs() {
  static const Vec c = (Vec(4) << 0.0, 0.4, 0.5, 0.2).finished();
  return c;
}
inline constexpr double budget = 0.5;
}  // namespace mab_defaults

/// Single-context Bernoulli bandit with one budget constraint recentred to
/// the "<= 0" form: W(0, j) = Bernoulli(c_bar[j]) - budget. delta defaults to
/// the instance's Slater margin.
Instance mab_instance(const Vec& r_bar, const Vec& c_bar, double budget, long horizon = 10000,
                      std::optional<double> delta = std::nullopt);

struct WardConfig {
  Vec capacity = (Vec(6) << 0.2, 0.2, 0.175, 0.175, 0.175, 0.175).finished();
  Vec fairness = (Vec(6) << 0.175, 0.175, 0.15, 0.15, 0.125, 0.125).finished();
  Vec resource = Vec::Constant(6, 0.1875);
  int num_contexts = 8;
  int dim = 6;
  bool noisy_costs = true;
  long horizon = 10000;
};

/// Synthetic ward-routing instance (K = 3, J = 6). Assigning a patient to ward
/// j consumes one unit against each normalized share vector v_k, encoded as
/// mean cost w_k(c, j) = 1 - J * v_k[j]. Features and theta_star are seeded
/// random stand-ins for patient data.
Instance ward_instance(const WardConfig& config, std::uint64_t seed);

struct LinearConfig {
  int num_contexts = 4;
  int num_actions = 4;
  int dim = 4;
  CostVariant cost_variant = CostVariant::linear;
  NoiseKind noise = NoiseKind::gaussian;
  double sigma = 0.5;
  long horizon = 1000;
  double min_margin = 0.1;     // reject draws with a smaller Slater margin
  bool require_binding = true;  // reject draws where the constraint does not cost reward
  double min_binding_gap = 0.02;
};

/// Random linear-reward instance with one constraint. Reward and cost
/// parameters are seeded; theta_star is rejection-sampled until every mean
/// reward lies in [0, 1], and whole draws are rejected until the Slater margin
/// and binding-gap requirements hold. delta is set to the Slater margin. With
/// tabular costs the cost means come from the linear model, realized without noise.
Instance linear_instance(const LinearConfig& config, std::uint64_t seed);

/// One-hot instance over (c, j) built from explicit mean tables; costs are
/// deterministic. Used for LP checks on tiny problems.
Instance tabular_instance(const Vec& p, const Mat& reward_means, const std::vector<Mat>& cost_means,
                          long horizon = 1, std::optional<double> delta = std::nullopt);

}  // namespace cqb

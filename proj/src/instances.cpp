#include "cqbandit/instances.hpp"

#include <cmath>
#include <sstream>

#include "cqbandit/error.hpp"
#include "cqbandit/oracle.hpp"

namespace cqb {
namespace {

constexpr double kTol = 1e-12;

[[noreturn]] void fail(const std::string& what) { throw Error(Errc::invalid_config, what); }

void check_features(const FeatureMap& map, int contexts, int actions, const char* name) {
  if (map.num_contexts() != contexts || map.num_actions() != actions) {
    fail(std::string(name) + " table does not cover every (context, action) pair");
  }
  if (map.dim() < 1) fail(std::string(name) + " dimension must be positive");
  for (int c = 0; c < contexts; ++c) {
    for (int j = 0; j < actions; ++j) {
      if (!(map(c, j).norm() <= 1.0 + kTol)) {
        std::ostringstream os;
        os << name << "(" << c << "," << j << ") has norm " << map(c, j).norm() << " > 1";
        fail(os.str());
      }
    }
  }
}

void check_noise(NoiseKind kind, double sigma, const char* what) {
  if (kind == NoiseKind::gaussian && !(sigma >= 0.0 && sigma <= 1.0)) {
    fail(std::string(what) + " gaussian sigma must lie in [0, 1]");
  }
}

/// Uniform direction scaled to a radius drawn so the point is uniform in the ball.
Vec uniform_in_ball(RngStream& rng, int dim, double radius) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.normal();
  const double n = v.norm();
  if (n == 0.0) return Vec::Zero(dim);
  return v / n * radius * std::pow(rng.uniform(), 1.0 / dim);
}

}  // namespace

void validate(const Instance& inst) {
  const int C = inst.num_contexts();
  if (C < 1) fail("instance needs at least one context");
  if (inst.J < 1) fail("J must be positive");
  if (inst.K < 1) fail("K must be positive");
  if (inst.T < 1) fail("T must be positive");
  if (!(inst.delta > 0.0 && inst.delta <= 1.0)) fail("delta must lie in (0, 1]");

  if ((inst.contexts.p.array() < 0.0).any()) fail("context probabilities must be nonnegative");
  if (std::abs(inst.contexts.p.sum() - 1.0) > kTol) fail("context probabilities must sum to 1");

  check_features(inst.features, C, inst.J, "phi");
  const int d = inst.dim();
  if (inst.reward.theta_star.size() != d) fail("theta_star dimension does not match features");
  if (!(inst.reward.m >= 0.0)) fail("norm bound m must be nonnegative");
  if (inst.reward.theta_star.norm() > inst.reward.m + kTol) fail("||theta_star|| exceeds m");
  check_noise(inst.reward.noise, inst.reward.sigma, "reward");
  for (int c = 0; c < C; ++c) {
    for (int j = 0; j < inst.J; ++j) {
      const double r = mean_reward(inst, c, j);
      if (r < -kTol || r > 1.0 + kTol) {
        std::ostringstream os;
        os << "mean reward r(" << c << "," << j << ") = " << r << " outside [0, 1]";
        fail(os.str());
      }
    }
  }

  const auto& cost = inst.cost;
  if (cost.variant == CostVariant::tabular) {
    if (static_cast<int>(cost.tabular.size()) != inst.K) fail("expected one cost table per constraint");
    for (int k = 0; k < inst.K; ++k) {
      const auto& tab = cost.tabular[k];
      if (tab.mean.rows() != C || tab.mean.cols() != inst.J) fail("cost table has wrong shape");
      if ((tab.mean.array().abs() > 1.0 + kTol).any()) fail("mean costs must lie in [-1, 1]");
      if (tab.kind == TabularKind::shifted_bernoulli) {
        if (tab.shift.rows() != C || tab.shift.cols() != inst.J) fail("cost shift table has wrong shape");
        if ((tab.shift.array() < -kTol).any() || (tab.shift.array() > 1.0 + kTol).any()) {
          fail("shifted-Bernoulli shift must lie in [0, 1]");
        }
        const Eigen::ArrayXXd prob = tab.mean.array() + tab.shift.array();
        if ((prob < -kTol).any() || (prob > 1.0 + kTol).any()) fail("shifted-Bernoulli probability outside [0, 1]");
      }
    }
  } else {
    if (static_cast<int>(cost.linear.size()) != inst.K) fail("expected one linear cost model per constraint");
    check_noise(cost.noise, cost.sigma, "cost");
    for (int k = 0; k < inst.K; ++k) {
      const auto& lin = cost.linear[k];
      check_features(lin.psi, C, inst.J, "psi");
      if (lin.mu_star.size() != lin.psi.dim()) fail("mu_star dimension does not match psi");
      if (lin.mu_star.norm() > 1.0 + kTol) fail("||mu_star|| exceeds 1");
    }
    for (int c = 0; c < C; ++c) {
      for (int j = 0; j < inst.J; ++j) {
        for (int k = 0; k < inst.K; ++k) {
          if (std::abs(mean_cost(inst, c, j, k)) > 1.0 + kTol) fail("linear mean cost outside [-1, 1]");
        }
      }
    }
  }
}

double mean_reward(const Instance& inst, int c, int j) { return inst.reward.theta_star.dot(inst.features(c, j)); }

double mean_cost(const Instance& inst, int c, int j, int k) {
  if (inst.cost.variant == CostVariant::tabular) return inst.cost.tabular[k].mean(c, j);
  const auto& lin = inst.cost.linear[k];
  return lin.mu_star.dot(lin.psi(c, j));
}

Mat mean_cost_matrix(const Instance& inst, int c) {
  Mat w(inst.K, inst.J);
  for (int k = 0; k < inst.K; ++k) {
    for (int j = 0; j < inst.J; ++j) w(k, j) = mean_cost(inst, c, j, k);
  }
  return w;
}

Observation sample_round(const Instance& inst, const StreamKey& key, long t) {
  Observation obs;
  obs.t = t;

  RngStream ctx = key.stream(t, Purpose::context);
  const double u = ctx.uniform();
  const int C = inst.num_contexts();
  double acc = 0.0;
  obs.c = C - 1;
  for (int c = 0; c < C; ++c) {
    acc += inst.contexts.p(c);
    if (u < acc) {
      obs.c = c;
      break;
    }
  }

  if (inst.cost.variant == CostVariant::tabular) {
    RngStream rng = key.stream(t, Purpose::cost);
    Mat w(inst.K, inst.J);
    for (int k = 0; k < inst.K; ++k) {
      const auto& tab = inst.cost.tabular[k];
      for (int j = 0; j < inst.J; ++j) {
        const double mean = tab.mean(obs.c, j);
        if (tab.kind == TabularKind::deterministic) {
          w(k, j) = mean;
        } else {
          const double shift = tab.shift(obs.c, j);
          w(k, j) = (rng.bernoulli(mean + shift) ? 1.0 : 0.0) - shift;
        }
      }
    }
    obs.costs = std::move(w);
  }
  return obs;
}

double realize_reward(const Instance& inst, RngStream& rng, int c, int j) {
  const double r = mean_reward(inst, c, j);
  if (inst.reward.noise == NoiseKind::bernoulli) return rng.bernoulli(r) ? 1.0 : 0.0;
  return r + inst.reward.sigma * rng.normal();
}

Vec realize_linear_cost(const Instance& inst, RngStream& rng, int c, int j) {
  Vec w(inst.K);
  for (int k = 0; k < inst.K; ++k) {
    const double mean = mean_cost(inst, c, j, k);
    if (inst.cost.noise == NoiseKind::bernoulli) {
      w(k) = rng.bernoulli((1.0 + mean) / 2.0) ? 1.0 : -1.0;
    } else {
      w(k) = mean + inst.cost.sigma * rng.normal();
    }
  }
  return w;
}

Instance mab_instance(const Vec& r_bar, const Vec& c_bar, double budget, long horizon, std::optional<double> delta) {
  const auto bad = [](const std::string& what) { throw Error(Errc::invalid_means, what); };
  if (r_bar.size() < 1 || r_bar.size() != c_bar.size()) bad("reward and cost mean vectors must have equal positive length");
  if ((r_bar.array() < 0.0).any() || (r_bar.array() > 1.0).any()) bad("reward means must lie in [0, 1]");
  if ((c_bar.array() < 0.0).any() || (c_bar.array() > 1.0).any()) bad("cost means must lie in [0, 1]");
  if (!(budget >= 0.0 && budget <= 1.0)) bad("budget must lie in [0, 1]");

  const int J = static_cast<int>(r_bar.size());
  Instance inst;
  inst.name = "mab";
  inst.contexts.p = Vec::Ones(1);
  inst.features = FeatureMap::one_hot(1, J);
  inst.reward.theta_star = r_bar;
  inst.reward.m = r_bar.norm();
  inst.reward.noise = NoiseKind::bernoulli;
  inst.K = 1;
  inst.J = J;
  inst.T = horizon;
  TabularCost cost;
  cost.kind = TabularKind::shifted_bernoulli;
  cost.mean = (c_bar.array() - budget).matrix().transpose();
  cost.shift = Mat::Constant(1, J, budget);
  inst.cost.tabular = {cost};

  if (delta) {
    inst.delta = *delta;
  } else {
    inst.delta = 1.0;  // placeholder so the LP sees a structurally valid instance
    const double margin = slater_margin(inst);
    if (!(margin > 0.0)) bad("instance does not satisfy Slater's condition");
    inst.delta = margin;
  }
  validate(inst);
  return inst;
}

Instance ward_instance(const WardConfig& cfg, std::uint64_t seed) {
  constexpr int J = 6;
  if (cfg.capacity.size() != J || cfg.fairness.size() != J || cfg.resource.size() != J) {
    throw Error(Errc::invalid_config, "ward constraint vectors must have length 6");
  }
  if (cfg.num_contexts < 1 || cfg.dim < 1) throw Error(Errc::invalid_config, "ward instance needs contexts and dim >= 1");

  RngStream rng(seed, 0, 0, Purpose::instance);
  Instance inst;
  inst.name = "ward";
  inst.J = J;
  inst.K = 3;
  inst.T = cfg.horizon;
  inst.contexts.p = Vec::Constant(cfg.num_contexts, 1.0 / cfg.num_contexts);
  inst.contexts.p(cfg.num_contexts - 1) = 1.0 - inst.contexts.p.head(cfg.num_contexts - 1).sum();

  inst.features = FeatureMap(cfg.num_contexts, J, cfg.dim);
  for (int c = 0; c < cfg.num_contexts; ++c) {
    for (int j = 0; j < J; ++j) {
      Vec v(cfg.dim);
      for (int i = 0; i < cfg.dim; ++i) v(i) = std::abs(rng.normal());
      inst.features(c, j) = v / v.norm() * (0.5 + 0.5 * rng.uniform());
    }
  }

  inst.reward.m = 1.0;
  inst.reward.noise = NoiseKind::bernoulli;
  bool accepted = false;
  for (int attempt = 0; attempt < 100000 && !accepted; ++attempt) {
    inst.reward.theta_star = uniform_in_ball(rng, cfg.dim, 1.0);
    accepted = true;
    for (int c = 0; c < cfg.num_contexts && accepted; ++c) {
      for (int j = 0; j < J && accepted; ++j) accepted = mean_reward(inst, c, j) >= 0.0;
    }
  }
  if (!accepted) throw Error(Errc::invalid_config, "could not sample theta_star with rewards in [0, 1]");

  for (const Vec* share : {&cfg.capacity, &cfg.fairness, &cfg.resource}) {
    TabularCost cost;
    const Eigen::RowVectorXd w = (1.0 - J * share->array()).matrix().transpose();
    cost.mean = w.replicate(cfg.num_contexts, 1);
    if (cfg.noisy_costs) {
      cost.kind = TabularKind::shifted_bernoulli;
      cost.shift = ((1.0 - cost.mean.array()) / 2.0).matrix();
    } else {
      cost.kind = TabularKind::deterministic;
    }
    inst.cost.tabular.push_back(cost);
  }

  inst.delta = 1.0;
  const double margin = slater_margin(inst);
  if (!(margin > 0.0)) throw Error(Errc::invalid_config, "ward constraint vectors leave no Slater margin");
  inst.delta = margin;
  validate(inst);
  return inst;
}

Instance linear_instance(const LinearConfig& cfg, std::uint64_t seed) {
  if (cfg.num_contexts < 1 || cfg.num_actions < 1 || cfg.dim < 2) {
    throw Error(Errc::invalid_config, "linear instance needs contexts, actions >= 1 and dim >= 2");
  }
  RngStream rng(seed, 1, 0, Purpose::instance);
  const int C = cfg.num_contexts, J = cfg.num_actions, d = cfg.dim;

  // Features share a constant leading coordinate so that a parameter with a
  // positive lead keeps every mean reward in range.
  const auto draw_map = [&] {
    FeatureMap map(C, J, d);
    for (int c = 0; c < C; ++c) {
      for (int j = 0; j < J; ++j) {
        map(c, j)(0) = 0.6;
        map(c, j).tail(d - 1) = 0.8 * uniform_in_ball(rng, d - 1, 1.0);
      }
    }
    return map;
  };

  for (int attempt = 0; attempt < 1000; ++attempt) {
    Instance inst;
    inst.name = "linear";
    inst.J = J;
    inst.K = 1;
    inst.T = cfg.horizon;
    inst.contexts.p = Vec::Constant(C, 1.0 / C);
    inst.contexts.p(C - 1) = 1.0 - inst.contexts.p.head(C - 1).sum();
    inst.features = draw_map();
    inst.reward.m = 1.0;
    inst.reward.noise = cfg.noise;
    inst.reward.sigma = cfg.sigma;

    bool accepted = false;
    for (int tries = 0; tries < 100000 && !accepted; ++tries) {
      inst.reward.theta_star = uniform_in_ball(rng, d, 1.0);
      accepted = true;
      for (int c = 0; c < C && accepted; ++c) {
        for (int j = 0; j < J && accepted; ++j) {
          const double r = mean_reward(inst, c, j);
          accepted = r >= 0.0 && r <= 1.0;
        }
      }
    }
    if (!accepted) continue;

    LinearCost lin;
    lin.psi = draw_map();
    lin.mu_star = uniform_in_ball(rng, d, 1.0);
    inst.cost.noise = cfg.noise;
    inst.cost.sigma = cfg.sigma;
    if (cfg.cost_variant == CostVariant::linear) {
      inst.cost.variant = CostVariant::linear;
      inst.cost.linear = {lin};
    } else {
      inst.cost.variant = CostVariant::tabular;
      TabularCost tab;
      tab.mean.resize(C, J);
      for (int c = 0; c < C; ++c) {
        for (int j = 0; j < J; ++j) tab.mean(c, j) = lin.mu_star.dot(lin.psi(c, j));
      }
      inst.cost.tabular = {tab};
    }

    // Keep instances whose constraint binds and whose Slater margin is usable.
    inst.delta = 1.0;
    const LpSolution constrained = solve_baseline(inst);
    if (!constrained.optimal()) continue;
    const double margin = slater_margin(inst);
    if (margin < cfg.min_margin) continue;
    double unconstrained = 0.0;
    for (int c = 0; c < C; ++c) {
      double best = 0.0;
      for (int j = 0; j < J; ++j) best = std::max(best, mean_reward(inst, c, j));
      unconstrained += inst.contexts.p(c) * best;
    }
    if (cfg.require_binding && unconstrained - constrained.objective < cfg.min_binding_gap) continue;
    inst.delta = margin;
    validate(inst);
    return inst;
  }
  throw Error(Errc::invalid_config, "could not sample a linear instance meeting the margin requirements");
}

Instance tabular_instance(const Vec& p, const Mat& reward_means, const std::vector<Mat>& cost_means, long horizon,
                          std::optional<double> delta) {
  const int C = static_cast<int>(p.size());
  const int J = static_cast<int>(reward_means.cols());
  if (reward_means.rows() != C) throw Error(Errc::invalid_config, "reward table must have one row per context");
  Instance inst;
  inst.name = "tabular";
  inst.contexts.p = p;
  inst.J = J;
  inst.K = static_cast<int>(cost_means.size());
  inst.T = horizon;
  inst.features = FeatureMap::one_hot(C, J);
  inst.reward.theta_star.resize(C * J);
  for (int c = 0; c < C; ++c) {
    for (int j = 0; j < J; ++j) inst.reward.theta_star(c * J + j) = reward_means(c, j);
  }
  inst.reward.m = inst.reward.theta_star.norm();
  inst.reward.noise = NoiseKind::gaussian;
  inst.reward.sigma = 0.0;
  for (const Mat& w : cost_means) {
    TabularCost tab;
    tab.mean = w;
    inst.cost.tabular.push_back(tab);
  }
  inst.delta = delta.value_or(1.0);
  validate(inst);
  return inst;
}

}  // namespace cqb

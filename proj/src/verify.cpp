#include "cqbandit/verify.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cqbandit/confidence.hpp"
#include "cqbandit/error.hpp"
#include "cqbandit/experiment.hpp"
#include "cqbandit/oracle.hpp"

namespace cqb {
namespace {

constexpr std::uint64_t kSeed = 20240611;
constexpr std::uint64_t kLinearInstanceSeed = 0;

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::vector<Replication> reps(std::uint32_t n, std::uint64_t seed = kSeed) {
  std::vector<Replication> out;
  for (std::uint32_t r = 0; r < n; ++r) out.push_back({seed, r});
  return out;
}

Instance mab(long T) { return mab_instance(mab_defaults::rewards(), mab_defaults::costs(), mab_defaults::budget, T); }

Instance linear_k1(long T) {
  LinearConfig cfg;
  cfg.horizon = T;
  return linear_instance(cfg, kLinearInstanceSeed);
}

bool is_full(const VerifyOptions& o) { return o.suite == Suite::full; }

/// Criteria 1 and 2 share one batch.
const AggregateCurves& mab_batch(const VerifyOptions& o) {
  static std::optional<AggregateCurves> full, quick;
  auto& slot = is_full(o) ? full : quick;
  if (!slot) {
    const Instance inst = mab(is_full(o) ? 100000 : 20000);
    BatchOptions bo;
    bo.workers = o.workers;
    slot = run_batch(inst, Policy::pessimistic_optimistic, make_schedule(ScheduleKind::experiment_mab, inst),
                     reps(is_full(o) ? 50 : 10), bo);
  }
  return *slot;
}

CriterionResult regret_rate(const VerifyOptions& o) {
  CriterionResult r{1, "regret rate", false, ""};
  const auto& a = mab_batch(o);
  try {
    const double slope = loglog_slope(a.regret, 1000, a.horizon);
    r.passed = slope >= 0.40 && slope <= 0.65;
    r.detail = "slope " + fmt("%.3f", slope) + " over [1e3, " + std::to_string(a.horizon) + "], want [0.40, 0.65]";
  } catch (const Error& e) {
    r.detail = e.what();
  }
  r.detail += "; R(T) = " + fmt("%.1f", a.regret(a.horizon - 1));
  return r;
}

CriterionResult zero_violation(const VerifyOptions& o) {
  CriterionResult r{2, "zero violation", false, ""};
  const auto& a = mab_batch(o);
  const auto z = zero_violation_from(a.violation);
  r.passed = z && *z <= 2000;
  r.detail = z ? "V(tau) = 0 from tau = " + std::to_string(*z) + ", want <= 2000" : "violation positive at T";
  return r;
}

CriterionResult pathwise_tail(const VerifyOptions& o) {
  CriterionResult r{3, "pathwise tail", false, ""};
  const Instance inst = mab(10000);
  BatchOptions bo;
  bo.workers = o.workers;
  const auto a = run_batch(inst, Policy::pessimistic_optimistic, make_schedule(ScheduleKind::experiment_mab, inst),
                           reps(is_full(o) ? 200 : 50, kSeed + 1), bo);
  const double f2 = a.viol_freq(99, 0), f3 = a.viol_freq(999, 0), f4 = a.viol_freq(9999, 0);
  r.passed = f4 <= 0.05 && f4 <= f3 && f3 <= f2;
  r.detail = "freq at 1e2, 1e3, 1e4 = " + fmt("%.3f", f2) + ", " + fmt("%.3f", f3) + ", " + fmt("%.3f", f4);
  return r;
}

CriterionResult queue_bounded(const VerifyOptions& o) {
  CriterionResult r{4, "queue boundedness", false, ""};
  double stat[2];
  long t_min = 1;
  for (int i = 0; i < 2; ++i) {
    const Instance inst = mab(i == 0 ? 10000 : 20000);
    const Schedule s = make_schedule(ScheduleKind::theory_main, inst);
    BatchOptions bo;
    bo.workers = o.workers;
    bo.t_min = t_min = tau_prime(s, inst.T).value_or(1);
    stat[i] = run_batch(inst, Policy::pessimistic_optimistic, s, reps(is_full(o) ? 20 : 5, kSeed + 2), bo)
                  .queue_over_sqrt_t(0);
  }
  const double lo = std::min(stat[0], stat[1]), hi = std::max(stat[0], stat[1]);
  r.passed = hi == lo || hi < 2.0 * lo;
  r.detail = "max Q/sqrt(t) over t >= " + std::to_string(t_min) + ": " + fmt("%.4g", stat[0]) + " (T=1e4), " +
             fmt("%.4g", stat[1]) + " (T=2e4)";
  return r;
}

CriterionResult coverage(const VerifyOptions& o) {
  CriterionResult r{5, "confidence coverage", false, ""};
  const Instance inst = linear_k1(1000);
  const Schedule s = make_schedule(ScheduleKind::theory_linear_cost, inst);
  BatchOptions bo;
  bo.workers = o.workers;
  bo.trace_confidence = true;
  const std::uint32_t n = is_full(o) ? 1000 : 200;
  std::uint32_t covered = 0;
  run_batch(inst, Policy::pessimistic_optimistic, s, reps(n, kSeed + 3), bo, [&](std::size_t, const Trajectory& t) {
    bool ok = true;
    for (long i = 0; i < t.rounds && ok; ++i) ok = within_radius(t.conf_dist(i), t.beta_sqrt(i));
    covered += ok ? 1 : 0;
  });
  const double frac = static_cast<double>(covered) / n;
  r.passed = frac >= 0.99;
  r.detail = std::to_string(covered) + "/" + std::to_string(n) + " runs covered at every round, want >= 99%";
  return r;
}

CriterionResult lp_equivalence(const VerifyOptions&) {
  CriterionResult r{6, "LP oracle equivalence", true, ""};
  double worst = 0.0;
  int infeasible = 0;
  for (std::uint32_t i = 0; i < 100; ++i) {
    const Instance inst = random_tabular_instance(kSeed, i, 2, 3, 2, i % 4 != 0);
    const LpSolution sol = solve_baseline(inst);
    const double brute = brute_force_value(inst, 0.0);
    if (!sol.optimal() || std::isnan(brute)) {
      if (sol.optimal() != !std::isnan(brute)) r.passed = false;
      ++infeasible;
      continue;
    }
    worst = std::max(worst, std::abs(sol.objective - brute));
  }
  if (worst > 1e-7) r.passed = false;
  const Instance m = mab(10000);
  const double value = solve_baseline(m).objective, margin = slater_margin(m);
  const bool mab_ok = std::abs(value - 0.7) <= 1e-12 && std::abs(margin - 0.5) <= 1e-12;
  r.passed = r.passed && mab_ok;
  r.detail = "max |simplex - enumeration| = " + fmt("%.2e", worst) + " (" + std::to_string(infeasible) +
             " infeasible agreed); MAB value " + fmt("%.15g", value) + ", margin " + fmt("%.15g", margin);
  return r;
}

CriterionResult tightening_gap(const VerifyOptions&) {
  CriterionResult r{7, "tightening gap", true, ""};
  double worst = -1.0;
  int checked = 0;
  for (std::uint32_t i = 0; i < 100; ++i) {
    const Instance inst = random_tabular_instance(kSeed, i, 2, 3, 2, true);
    const double delta = slater_margin(inst);
    const double base = solve_baseline(inst).objective;
    for (int g = 0; g < 10; ++g) {
      const double eps = delta * g / 9.0;
      const LpSolution tight = solve_tightened(inst, eps);
      if (!tight.optimal()) {
        r.passed = false;
        continue;
      }
      const double excess = (base - tight.objective) - eps / delta;
      worst = std::max(worst, excess);
      if (excess > 1e-9) r.passed = false;
      ++checked;
    }
  }
  r.detail = std::to_string(checked) + " (instance, eps) pairs; max gap - eps/delta = " + fmt("%.3e", worst);
  return r;
}

CriterionResult policy_bound(const VerifyOptions&) {
  CriterionResult r{8, "policy search bound", true, ""};
  int checked = 0;
  double worst = -1e300;
  for (std::uint32_t i = 0; i < 40; ++i) {
    const Instance inst = random_tabular_instance(kSeed + 8, i, 1, 3, 2, i % 5 != 0);
    const LpSolution sol = solve_baseline(inst);
    for (long T = 1; T <= 6; ++T) {
      const double seq = best_sequence_value(inst, T);
      const double mixed = best_randomized_policy_value(inst, T);
      if (!sol.optimal()) {
        if (!std::isnan(seq) || !std::isnan(mixed)) r.passed = false;
        continue;
      }
      const double bound = static_cast<double>(T) * sol.objective;
      for (double v : {seq, mixed}) {
        if (std::isnan(v)) continue;
        worst = std::max(worst, v - bound);
        if (v > bound + 1e-9) r.passed = false;
      }
      ++checked;
    }
  }
  r.detail = std::to_string(checked) + " (instance, T) pairs; max value - T * LP = " + fmt("%.3e", worst);
  return r;
}

CriterionResult linear_cost_variant(const VerifyOptions& o) {
  CriterionResult r{9, "linear-cost variant", false, ""};
  const long T = is_full(o) ? 100000 : 20000;
  const Instance inst = linear_k1(T);
  BatchOptions bo;
  bo.workers = o.workers;
  const auto a = run_batch(inst, Policy::pessimistic_optimistic, make_schedule(ScheduleKind::theory_linear_cost, inst),
                           reps(is_full(o) ? 50 : 10, kSeed + 9), bo);
  const auto z = zero_violation_from(a.violation);
  std::string slope_text;
  bool slope_ok = false;
  try {
    const double slope = loglog_slope(a.regret, 1000, T);
    slope_ok = slope >= 0.40 && slope <= 0.70;
    slope_text = "slope " + fmt("%.3f", slope) + ", want [0.40, 0.70]";
  } catch (const Error& e) {
    slope_text = e.what();
  }
  r.passed = slope_ok && z && *z <= 20000;
  r.detail = slope_text + "; delta " + fmt("%.3f", inst.delta) + "; V(tau) = 0 from " +
             (z ? std::to_string(*z) : std::string("never")) + ", want <= 20000";
  return r;
}

CriterionResult determinism(const VerifyOptions& o) {
  CriterionResult r{10, "determinism", false, ""};
  namespace fs = std::filesystem;
  const fs::path root = o.scratch.empty() ? fs::temp_directory_path() / "cqbandit-verify" : o.scratch;
  std::string bytes[2];
  for (int i = 0; i < 2; ++i) {
    ExperimentConfig cfg;
    cfg.instance = "mab";
    cfg.T = 3000;
    cfg.replications = 6;
    cfg.base_seed = kSeed;
    cfg.workers = o.workers;
    cfg.write_trajectories = false;
    cfg.output_dir = (root / ("run" + std::to_string(i))).string();
    run_experiment(cfg);
    std::ifstream in(fs::path(cfg.output_dir) / "aggregate.csv", std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    bytes[i] = buf.str();
  }
  r.passed = !bytes[0].empty() && bytes[0] == bytes[1];
  r.detail = "aggregate.csv " + std::to_string(bytes[0].size()) + " bytes, " +
             (bytes[0] == bytes[1] ? "identical" : "different");
  std::error_code ec;
  fs::remove_all(root, ec);
  return r;
}

}  // namespace

std::optional<Suite> parse_suite(std::string_view name) {
  if (name == "quick") return Suite::quick;
  if (name == "full") return Suite::full;
  return std::nullopt;
}

Instance random_tabular_instance(std::uint64_t seed, std::uint32_t index, int max_contexts, int max_actions,
                                 int max_constraints, bool feasible) {
  RngStream rng(seed, index, 0, Purpose::instance);
  const int C = 1 + static_cast<int>(rng.below(max_contexts));
  const int J = 1 + static_cast<int>(rng.below(max_actions));
  const int K = 1 + static_cast<int>(rng.below(max_constraints));
  Vec p(C);
  for (int c = 0; c < C; ++c) p(c) = 0.1 + rng.uniform();
  p /= p.sum();
  Mat rewards(C, J);
  for (int c = 0; c < C; ++c) {
    for (int j = 0; j < J; ++j) rewards(c, j) = rng.uniform();
  }
  std::vector<Mat> costs(K, Mat(C, J));
  for (auto& w : costs) {
    for (int c = 0; c < C; ++c) {
      for (int j = 0; j < J; ++j) w(c, j) = 2.0 * rng.uniform() - 1.0;
    }
  }
  if (feasible) {
    for (int c = 0; c < C; ++c) {
      const int safe = static_cast<int>(rng.below(J));
      for (auto& w : costs) w(c, safe) = -rng.uniform();
    }
  }
  Instance inst = tabular_instance(p, rewards, costs, 1);
  inst.name = "random-" + std::to_string(seed) + "-" + std::to_string(index);
  return inst;
}

CriterionResult run_criterion(int id, const VerifyOptions& o) {
  switch (id) {
    case 1: return regret_rate(o);
    case 2: return zero_violation(o);
    case 3: return pathwise_tail(o);
    case 4: return queue_bounded(o);
    case 5: return coverage(o);
    case 6: return lp_equivalence(o);
    case 7: return tightening_gap(o);
    case 8: return policy_bound(o);
    case 9: return linear_cost_variant(o);
    case 10: return determinism(o);
    default: throw Error(Errc::invalid_config, "unknown criterion " + std::to_string(id));
  }
}

std::string format_result(const CriterionResult& r) {
  char head[64];
  std::snprintf(head, sizeof head, "[%s] %2d %-22s ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str());
  return head + r.detail;
}

std::vector<CriterionResult> run_acceptance(const VerifyOptions& o, std::ostream& log) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 10; ++id) {
    CriterionResult res;
    try {
      res = run_criterion(id, o);
    } catch (const std::exception& e) {
      res = {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what()};
    }
    log << format_result(res) << std::endl;
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace cqb

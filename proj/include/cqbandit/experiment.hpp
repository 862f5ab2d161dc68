#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cqbandit/algorithm.hpp"
#include "cqbandit/metrics.hpp"

namespace cqb {

/// Flat key = value experiment definition; see README for the key list.
struct ExperimentConfig {
  std::string instance = "mab";  // mab | ward | linear | path to an instance file
  std::uint64_t instance_seed = 0;  // generator seed for ward / linear
  Policy policy = Policy::pessimistic_optimistic;
  ScheduleKind schedule = ScheduleKind::experiment_mab;
  // custom schedule: V_t = v_coef t^v_exp, eps_t = eps_coef t^-eps_exp
  double v_coef = 1.0, v_exp = 0.5, eps_coef = 1.0, eps_exp = 0.5;
  std::optional<long> T;  // defaults to the instance horizon
  std::uint64_t base_seed = 0;
  std::uint32_t replications = 1;
  std::vector<std::uint64_t> seeds;  // when nonempty, one run per listed seed
  std::string output_dir = "out";
  bool trace_confidence = false;
  bool realized_regret = false;
  bool write_trajectories = true;
  int workers = 0;  // 0: one per hardware thread
  std::optional<double> delta;  // overrides the instance's Slater constant
  std::optional<double> p;      // confidence parameter, defaults to 1/T
  std::optional<long> t_min;    // queue statistic start, defaults to tau'

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws invalid_config on unknown keys or malformed values.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Applies one "key=value" override on top of `config`.
void apply_override(ExperimentConfig& config, std::string_view assignment);
std::string serialize_config(const ExperimentConfig& config);
/// Checks ranges and consistency with the resolved instance.
void validate_config(const ExperimentConfig& config);

/// Resolves the preset or file named by the config, with T and delta applied.
Instance resolve_instance(const ExperimentConfig& config);
Schedule resolve_schedule(const ExperimentConfig& config, const Instance& instance);

struct Replication {
  std::uint64_t seed = 0;
  std::uint32_t replication = 0;
};

std::vector<Replication> replications_of(const ExperimentConfig& config);

struct BatchOptions {
  std::optional<double> p;
  bool trace_confidence = false;
  int workers = 0;
  long t_min = 1;
};

/// Runs every replication on a worker pool and folds the results in
/// replication order. `on_run(index, trajectory)` is called in that order
/// from the calling thread before the trajectory is released.
AggregateCurves run_batch(const Instance& instance, Policy policy, const Schedule& schedule,
                          std::span<const Replication> reps, const BatchOptions& options,
                          const std::function<void(std::size_t, const Trajectory&)>& on_run = {});

struct ExperimentResult {
  AggregateCurves curves;
  nlohmann::ordered_json summary;
};

nlohmann::ordered_json summarize(const ExperimentConfig& config, const Instance& instance, const Schedule& schedule,
                                 double opt_per_round, long t_min, const AggregateCurves& curves);

/// Writes runs/run_NNNN.csv (optional), aggregate.csv, summary.json and the
/// resolved config and instance to config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

int hardware_workers();

}  // namespace cqb

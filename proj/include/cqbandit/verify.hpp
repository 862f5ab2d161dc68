#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cqbandit/instances.hpp"

namespace cqb {

enum class Suite { quick, full };

std::optional<Suite> parse_suite(std::string_view name);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Random one-hot tabular instance with |C| <= max_contexts, J <= max_actions,
/// K <= max_constraints; rewards in [0, 1], deterministic costs in [-1, 1].
/// With `feasible`, one action per context gets costs <= 0 everywhere.
Instance random_tabular_instance(std::uint64_t seed, std::uint32_t index, int max_contexts, int max_actions,
                                 int max_constraints, bool feasible);

struct VerifyOptions {
  Suite suite = Suite::full;
  int workers = 0;
  std::filesystem::path scratch;  // for the determinism check; defaults to the system temp dir
};

/// Runs one criterion (1..10). Throws invalid_config for an unknown id.
CriterionResult run_criterion(int id, const VerifyOptions& options);

/// Runs criteria 1..10, printing one line per criterion to `log` as each finishes.
std::vector<CriterionResult> run_acceptance(const VerifyOptions& options, std::ostream& log);

std::string format_result(const CriterionResult& result);

}  // namespace cqb

// cqbandit: run experiments, solve baselines, validate instances, verify.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "cqbandit/error.hpp"
#include "cqbandit/experiment.hpp"
#include "cqbandit/instance_io.hpp"
#include "cqbandit/oracle.hpp"
#include "cqbandit/verify.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kIo = 1;
constexpr int kInvalid = 2;
constexpr int kUsage = 64;

int exit_code(const cqb::Error& e) { return e.code() == cqb::Errc::io ? kIo : kInvalid; }

std::string g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", std::abs(x) < 1e-12 ? 0.0 : x);
  return buf;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides) {
  cqb::ExperimentConfig cfg = config_path.empty() ? cqb::ExperimentConfig{} : cqb::load_config(config_path);
  for (const auto& o : overrides) cqb::apply_override(cfg, o);
  const auto res = cqb::run_experiment(cfg);
  std::cout << res.summary.dump(2) << '\n';
  return kOk;
}

int cmd_baseline(const std::string& source, double eps, std::uint64_t instance_seed) {
  cqb::ExperimentConfig cfg;
  cfg.instance = source;
  cfg.instance_seed = instance_seed;
  const cqb::Instance inst = cqb::resolve_instance(cfg);
  const cqb::LpSolution sol = cqb::solve_tightened(inst, eps);
  if (!sol.optimal()) {
    std::cout << "infeasible\n";
    return kInvalid;
  }
  std::cout << "objective " << g(sol.objective) << '\n';
  std::cout << "context";
  for (int j = 0; j < inst.J; ++j) std::cout << ",x_" << j;
  std::cout << '\n';
  for (int c = 0; c < inst.num_contexts(); ++c) {
    std::cout << c;
    for (int j = 0; j < inst.J; ++j) std::cout << ',' << g(sol.x(c, j));
    std::cout << '\n';
  }
  std::cout << "margin";
  for (int k = 0; k < inst.K; ++k) std::cout << ' ' << g(sol.active_margin(k));
  std::cout << "\ndelta_star " << g(cqb::slater_margin(inst)) << '\n';
  return kOk;
}

int cmd_validate(const std::string& path) {
  const cqb::Instance inst = cqb::load_instance(path);
  std::cout << "ok " << inst.name << ": C=" << inst.num_contexts() << " J=" << inst.J << " K=" << inst.K
            << " d=" << inst.dim() << " T=" << inst.T << " delta=" << g(inst.delta) << '\n';
  return kOk;
}

int cmd_verify(const std::string& suite_name, int workers) {
  const auto suite = cqb::parse_suite(suite_name);
  if (!suite) {
    std::cerr << "unknown suite '" << suite_name << "' (expected quick or full)\n";
    return kUsage;
  }
  cqb::VerifyOptions opt;
  opt.suite = *suite;
  opt.workers = workers;
  const auto results = cqb::run_acceptance(opt, std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? kOk : kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained linear bandit simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  int workers = -1;
  auto* run = app.add_subcommand("run", "Run an experiment from a key = value config");
  run->add_option("config", config_path, "Config file (optional; defaults apply)");
  run->add_option("-s,--set", overrides, "Override a config key, e.g. --set T=20000");
  run->add_option("-o,--output-dir", output_dir, "Same as --set output_dir=...");
  run->add_option("-w,--workers", workers, "Same as --set workers=...");

  std::string source;
  double eps = 0.0;
  std::uint64_t instance_seed = 0;
  auto* baseline = app.add_subcommand("baseline", "Solve the (tightened) fluid LP");
  baseline->add_option("instance", source, "Instance file or preset (mab, ward, linear)")->required();
  baseline->add_option("--eps", eps, "Tightening margin")->check(CLI::NonNegativeNumber);
  baseline->add_option("--instance-seed", instance_seed, "Generator seed for ward / linear presets");

  std::string validate_path;
  auto* instance = app.add_subcommand("instance", "Instance file utilities");
  instance->require_subcommand(1);
  auto* validate = instance->add_subcommand("validate", "Check an instance file");
  validate->add_option("file", validate_path, "Instance file")->required();

  std::string suite;
  int verify_workers = 0;
  auto* verify = app.add_subcommand("verify", "Run the acceptance battery");
  verify->add_option("suite", suite, "quick or full")->required();
  verify->add_option("-w,--workers", verify_workers, "Worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) {
      if (!output_dir.empty()) overrides.push_back("output_dir=" + output_dir);
      if (workers >= 0) overrides.push_back("workers=" + std::to_string(workers));
      return cmd_run(config_path, overrides);
    }
    if (*baseline) return cmd_baseline(source, eps, instance_seed);
    if (*validate) return cmd_validate(validate_path);
    if (*verify) return cmd_verify(suite, verify_workers);
  } catch (const cqb::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}

#include "cqbandit/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "cqbandit/error.hpp"
#include "cqbandit/instance_io.hpp"
#include "cqbandit/oracle.hpp"

namespace cqb {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(Errc::invalid_config, "invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true") return true;
  if (value == "false") return false;
  bad_value(key, value);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void set_key(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  const bool unset = value == "auto" || value.empty();
  if (key == "instance") {
    cfg.instance = std::string(value);
  } else if (key == "instance_seed") {
    cfg.instance_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "policy") {
    const auto p = parse_policy(value);
    if (!p) bad_value(key, value);
    cfg.policy = *p;
  } else if (key == "schedule") {
    const auto s = parse_schedule_kind(value);
    if (!s) bad_value(key, value);
    cfg.schedule = *s;
  } else if (key == "v_coef") {
    cfg.v_coef = parse_number<double>(key, value);
  } else if (key == "v_exp") {
    cfg.v_exp = parse_number<double>(key, value);
  } else if (key == "eps_coef") {
    cfg.eps_coef = parse_number<double>(key, value);
  } else if (key == "eps_exp") {
    cfg.eps_exp = parse_number<double>(key, value);
  } else if (key == "T") {
    cfg.T = unset ? std::nullopt : std::optional<long>(parse_number<long>(key, value));
  } else if (key == "base_seed") {
    cfg.base_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "replications") {
    cfg.replications = parse_number<std::uint32_t>(key, value);
  } else if (key == "seeds") {
    cfg.seeds.clear();
    std::size_t i = 0;
    while (i < value.size()) {
      while (i < value.size() && (value[i] == ' ' || value[i] == ',')) ++i;
      std::size_t j = i;
      while (j < value.size() && value[j] != ' ' && value[j] != ',') ++j;
      if (j > i) cfg.seeds.push_back(parse_number<std::uint64_t>(key, value.substr(i, j - i)));
      i = j;
    }
  } else if (key == "output_dir") {
    cfg.output_dir = std::string(value);
  } else if (key == "trace_confidence") {
    cfg.trace_confidence = parse_bool(key, value);
  } else if (key == "realized_regret") {
    cfg.realized_regret = parse_bool(key, value);
  } else if (key == "write_trajectories") {
    cfg.write_trajectories = parse_bool(key, value);
  } else if (key == "workers") {
    cfg.workers = parse_number<int>(key, value);
  } else if (key == "delta") {
    cfg.delta = unset ? std::nullopt : std::optional<double>(parse_number<double>(key, value));
  } else if (key == "p") {
    cfg.p = unset ? std::nullopt : std::optional<double>(parse_number<double>(key, value));
  } else if (key == "t_min") {
    cfg.t_min = unset ? std::nullopt : std::optional<long>(parse_number<long>(key, value));
  } else {
    throw Error(Errc::invalid_config, "unknown config key '" + std::string(key) + "'");
  }
}

}  // namespace

void apply_override(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw Error(Errc::invalid_config, "expected key=value, got '" + std::string(assignment) + "'");
  set_key(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      apply_override(cfg, line);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "instance = " << c.instance << '\n';
  os << "instance_seed = " << c.instance_seed << '\n';
  os << "policy = " << to_string(c.policy) << '\n';
  os << "schedule = " << to_string(c.schedule) << '\n';
  os << "v_coef = " << fmt(c.v_coef) << '\n';
  os << "v_exp = " << fmt(c.v_exp) << '\n';
  os << "eps_coef = " << fmt(c.eps_coef) << '\n';
  os << "eps_exp = " << fmt(c.eps_exp) << '\n';
  os << "T = " << (c.T ? std::to_string(*c.T) : "auto") << '\n';
  os << "base_seed = " << c.base_seed << '\n';
  os << "replications = " << c.replications << '\n';
  os << "seeds =";
  for (auto s : c.seeds) os << ' ' << s;
  os << '\n';
  os << "output_dir = " << c.output_dir << '\n';
  os << "trace_confidence = " << (c.trace_confidence ? "true" : "false") << '\n';
  os << "realized_regret = " << (c.realized_regret ? "true" : "false") << '\n';
  os << "write_trajectories = " << (c.write_trajectories ? "true" : "false") << '\n';
  os << "workers = " << c.workers << '\n';
  os << "delta = " << (c.delta ? fmt(*c.delta) : "auto") << '\n';
  os << "p = " << (c.p ? fmt(*c.p) : "auto") << '\n';
  os << "t_min = " << (c.t_min ? std::to_string(*c.t_min) : "auto") << '\n';
  return os.str();
}

void validate_config(const ExperimentConfig& c) {
  const auto bad = [](const std::string& msg) { throw Error(Errc::invalid_config, msg); };
  if (c.instance.empty()) bad("instance must be set");
  if (c.T && *c.T < 1) bad("T must be at least 1");
  if (c.seeds.empty() && c.replications < 1) bad("replications must be at least 1");
  if (c.workers < 0) bad("workers must be nonnegative");
  if (c.delta && !(*c.delta > 0.0 && *c.delta <= 1.0)) bad("delta must lie in (0, 1]");
  if (c.p && !(*c.p > 0.0 && *c.p < 1.0)) bad("p must lie in (0, 1)");
  if (c.t_min && *c.t_min < 1) bad("t_min must be at least 1");
  if (c.schedule == ScheduleKind::custom && !(c.v_coef > 0.0 && c.eps_coef >= 0.0)) {
    bad("custom schedule needs v_coef > 0 and eps_coef >= 0");
  }
}

Instance resolve_instance(const ExperimentConfig& c) {
  Instance inst;
  if (c.instance == "mab") {
    inst = mab_instance(mab_defaults::rewards(), mab_defaults::costs(), mab_defaults::budget, c.T.value_or(10000));
  } else if (c.instance == "ward") {
    WardConfig wc;
    if (c.T) wc.horizon = *c.T;
    inst = ward_instance(wc, c.instance_seed);
  } else if (c.instance == "linear") {
    LinearConfig lc;
    if (c.T) lc.horizon = *c.T;
    inst = linear_instance(lc, c.instance_seed);
  } else {
    inst = load_instance(c.instance);
  }
  if (c.T) inst.T = *c.T;
  if (c.delta) inst.delta = *c.delta;
  validate(inst);
  return inst;
}

Schedule resolve_schedule(const ExperimentConfig& c, const Instance& inst) {
  if (c.schedule == ScheduleKind::custom) {
    return power_law_schedule(c.v_coef, c.v_exp, c.eps_coef, c.eps_exp, inst.delta);
  }
  return make_schedule(c.schedule, inst);
}

std::vector<Replication> replications_of(const ExperimentConfig& c) {
  std::vector<Replication> reps;
  if (!c.seeds.empty()) {
    for (auto s : c.seeds) reps.push_back({s, 0});
  } else {
    for (std::uint32_t r = 0; r < c.replications; ++r) reps.push_back({c.base_seed, r});
  }
  return reps;
}

int hardware_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

AggregateCurves run_batch(const Instance& inst, Policy policy, const Schedule& schedule,
                          std::span<const Replication> reps, const BatchOptions& opt,
                          const std::function<void(std::size_t, const Trajectory&)>& on_run) {
  if (reps.empty()) throw Error(Errc::invalid_config, "no replications to run");
  const LpSolution base = solve_baseline(inst);
  if (!base.optimal()) throw Error(Errc::lp_infeasible, "baseline LP is infeasible");

  const int workers = opt.workers > 0 ? opt.workers : hardware_workers();
  const std::size_t chunk = 2 * static_cast<std::size_t>(workers);
  CurveAccumulator acc(inst.T, inst.K, base.objective, opt.t_min);

  for (std::size_t start = 0; start < reps.size(); start += chunk) {
    const std::size_t m = std::min(chunk, reps.size() - start);
    std::vector<Trajectory> slots(m);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    const auto work = [&] {
      for (std::size_t i = next++; i < m; i = next++) {
        try {
          RunOptions ro;
          ro.seed = reps[start + i].seed;
          ro.replication = reps[start + i].replication;
          ro.p = opt.p;
          ro.trace_confidence = opt.trace_confidence;
          slots[i] = run(inst, policy, schedule, ro);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    if (workers == 1 || m == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < std::min<std::size_t>(workers, m); ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    for (std::size_t i = 0; i < m; ++i) {
      acc.add(slots[i]);
      if (on_run) on_run(start + i, slots[i]);
    }
  }
  return acc.finish();
}

nlohmann::ordered_json summarize(const ExperimentConfig& c, const Instance& inst, const Schedule& schedule,
                                 double opt, long t_min, const AggregateCurves& a) {
  using nlohmann::ordered_json;
  const long T = a.horizon;
  ordered_json s;
  s["instance"] = inst.name;
  s["policy"] = std::string(to_string(c.policy));
  s["schedule"] = std::string(to_string(schedule.kind()));
  s["T"] = T;
  s["n_runs"] = a.n_runs;
  s["delta"] = inst.delta;
  s["opt_per_round"] = opt;
  const auto tp = tau_prime(schedule, T);
  s["tau_prime"] = tp ? ordered_json(*tp) : ordered_json(nullptr);
  s["t_min"] = t_min;
  s["final_regret"] = a.regret(T - 1);
  s["final_regret_stderr"] = a.regret_stderr(T - 1);
  if (c.realized_regret) {
    s["final_regret_realized"] = a.regret_realized(T - 1);
    s["final_regret_realized_stderr"] = a.regret_realized_stderr(T - 1);
  }
  s["final_violation"] = a.violation(T - 1);
  const long lo = std::max(1L, T / 100);
  ordered_json slope = nullptr;
  if (T >= 2 && lo < T) {
    try {
      slope = loglog_slope(a.regret, lo, T);
    } catch (const Error&) {
    }
  }
  s["regret_slope"] = slope;
  s["regret_slope_range"] = {lo, T};
  const auto z = zero_violation_from(a.violation);
  s["zero_violation_from"] = z ? ordered_json(*z) : ordered_json(nullptr);
  ordered_json freq = ordered_json::array(), queue = ordered_json::array();
  for (int k = 0; k < a.K; ++k) {
    freq.push_back(a.viol_freq(T - 1, k));
    queue.push_back(a.queue_over_sqrt_t(k));
  }
  s["final_viol_freq"] = freq;
  s["queue_over_sqrt_t"] = queue;
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  validate_config(c);
  const Instance inst = resolve_instance(c);
  const Schedule schedule = resolve_schedule(c, inst);
  const long t_min = c.t_min.value_or(tau_prime(schedule, inst.T).value_or(1));
  const auto reps = replications_of(c);

  namespace fs = std::filesystem;
  const fs::path out(c.output_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (c.write_trajectories) fs::create_directories(out / "runs", ec);
  if (ec) throw Error(Errc::io, "cannot create output directory " + out.string() + ": " + ec.message());

  const auto open = [](const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::io, "cannot write " + path.string());
    return f;
  };
  {
    auto f = open(out / "config.txt");
    f << serialize_config(c);
    auto g = open(out / "instance.txt");
    write_instance(g, inst);
  }

  BatchOptions bo;
  bo.p = c.p;
  bo.trace_confidence = c.trace_confidence;
  bo.workers = c.workers;
  bo.t_min = t_min;
  std::function<void(std::size_t, const Trajectory&)> on_run;
  if (c.write_trajectories) {
    on_run = [&](std::size_t i, const Trajectory& traj) {
      char name[32];
      std::snprintf(name, sizeof name, "run_%04zu.csv", i);
      auto f = open(out / "runs" / name);
      write_trajectory_csv(f, traj);
    };
  }

  ExperimentResult res;
  res.curves = run_batch(inst, c.policy, schedule, reps, bo, on_run);
  res.summary = summarize(c, inst, schedule, solve_baseline(inst).objective, t_min, res.curves);
  {
    auto f = open(out / "aggregate.csv");
    write_aggregate_csv(f, res.curves, c.realized_regret);
    auto g = open(out / "summary.json");
    g << res.summary.dump(2) << '\n';
  }
  return res;
}

}  // namespace cqb

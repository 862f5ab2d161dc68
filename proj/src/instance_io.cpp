#include "cqbandit/instance_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "cqbandit/error.hpp"
#include "cqbandit/oracle.hpp"

namespace cqb {
namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct Section {
  int line = 0;
  std::map<std::string, Entry> entries;
};

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error(Errc::invalid_config, "line " + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::map<std::string, Section> tokenize(std::string_view text) {
  std::map<std::string, Section> sections;
  Section* current = nullptr;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (sections.count(name)) fail(line_no, "duplicate section [" + name + "]");
      current = &sections[name];
      current->line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    if (!current) fail(line_no, "key outside of any section");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) fail(line_no, "empty key");
    if (current->entries.count(key)) fail(line_no, "duplicate key '" + key + "'");
    current->entries[key] = {std::string(trim(line.substr(eq + 1))), line_no, false};
  }
  return sections;
}

std::vector<double> parse_numbers(const Entry& e) {
  std::vector<double> out;
  std::string_view s = e.value;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
    if (i == s.size()) break;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != ',') ++j;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + j, v);
    if (ec != std::errc() || ptr != s.data() + j) fail(e.line, "not a number: '" + std::string(s.substr(i, j - i)) + "'");
    out.push_back(v);
    i = j;
  }
  return out;
}

class Reader {
 public:
  Reader(Section& sec, std::string name) : sec_(sec), name_(std::move(name)) {}

  bool has(const std::string& key) const { return sec_.entries.count(key) > 0; }

  Entry& entry(const std::string& key) {
    auto it = sec_.entries.find(key);
    if (it == sec_.entries.end()) fail(sec_.line, "[" + name_ + "] is missing '" + key + "'");
    it->second.used = true;
    return it->second;
  }

  std::string text(const std::string& key) { return entry(key).value; }

  double number(const std::string& key) {
    const Entry& e = entry(key);
    const auto v = parse_numbers(e);
    if (v.size() != 1) fail(e.line, "'" + key + "' must be a single number");
    return v[0];
  }

  long integer(const std::string& key) {
    const Entry& e = entry(key);
    const double v = number(key);
    if (v != static_cast<double>(static_cast<long>(v))) fail(e.line, "'" + key + "' must be an integer");
    return static_cast<long>(v);
  }

  Vec vector(const std::string& key, Eigen::Index expected) {
    const Entry& e = entry(key);
    const auto v = parse_numbers(e);
    if (static_cast<Eigen::Index>(v.size()) != expected) {
      fail(e.line, "'" + key + "' needs " + std::to_string(expected) + " values, got " + std::to_string(v.size()));
    }
    return Eigen::Map<const Vec>(v.data(), expected);
  }

  NoiseKind noise(const std::string& key) {
    const Entry& e = entry(key);
    if (e.value == "gaussian") return NoiseKind::gaussian;
    if (e.value == "bernoulli") return NoiseKind::bernoulli;
    fail(e.line, "noise must be gaussian or bernoulli");
  }

  void check_all_used() const {
    for (const auto& [key, e] : sec_.entries) {
      if (!e.used) fail(e.line, "unknown key '" + key + "' in [" + name_ + "]");
    }
  }

 private:
  Section& sec_;
  std::string name_;
};

FeatureMap read_feature_table(Reader& r, const std::string& prefix, int C, int J, int d) {
  FeatureMap map(C, J, d);
  for (int c = 0; c < C; ++c) {
    for (int j = 0; j < J; ++j) map(c, j) = r.vector(prefix + "." + std::to_string(c) + "." + std::to_string(j), d);
  }
  return map;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_vector(std::ostream& os, const std::string& key, const Eigen::Ref<const Vec>& v) {
  os << key << " =";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << num(v(i));
  os << '\n';
}

void write_feature_table(std::ostream& os, const std::string& prefix, const FeatureMap& map) {
  for (int c = 0; c < map.num_contexts(); ++c) {
    for (int j = 0; j < map.num_actions(); ++j) {
      write_vector(os, prefix + "." + std::to_string(c) + "." + std::to_string(j), map(c, j));
    }
  }
}

std::string_view noise_name(NoiseKind n) { return n == NoiseKind::gaussian ? "gaussian" : "bernoulli"; }

}  // namespace

Instance parse_instance(std::string_view text) {
  auto sections = tokenize(text);
  const auto section = [&](const std::string& name) -> Section& {
    auto it = sections.find(name);
    if (it == sections.end()) throw Error(Errc::invalid_config, "missing section [" + name + "]");
    return it->second;
  };

  Instance inst;
  Reader meta(section("meta"), "meta");
  inst.name = meta.has("name") ? meta.text("name") : "custom";
  const long K = meta.integer("K"), J = meta.integer("J"), d = meta.integer("d");
  inst.T = meta.integer("T");
  if (K < 1 || J < 1 || d < 1 || inst.T < 1) throw Error(Errc::invalid_config, "K, J, d and T must be positive");
  inst.K = static_cast<int>(K);
  inst.J = static_cast<int>(J);
  const std::string delta_text = meta.text("delta");
  const bool auto_delta = delta_text == "auto";
  if (!auto_delta) inst.delta = meta.number("delta");
  meta.check_all_used();

  Reader ctx(section("contexts"), "contexts");
  const Entry& p_entry = ctx.entry("p");
  const auto p = parse_numbers(p_entry);
  if (p.empty()) fail(p_entry.line, "at least one context is required");
  inst.contexts.p = Eigen::Map<const Vec>(p.data(), static_cast<Eigen::Index>(p.size()));
  ctx.check_all_used();
  const int C = inst.num_contexts();

  const bool onehot = sections.count("onehot") > 0;
  if (onehot == (sections.count("features") > 0)) {
    throw Error(Errc::invalid_config, "exactly one of [onehot] and [features] is required");
  }
  if (onehot) {
    Reader oh(section("onehot"), "onehot");
    oh.check_all_used();
    if (d != static_cast<long>(C) * J) throw Error(Errc::invalid_config, "[onehot] requires d = C * J");
    inst.features = FeatureMap::one_hot(C, inst.J);
  } else {
    Reader feat(section("features"), "features");
    inst.features = read_feature_table(feat, "phi", C, inst.J, static_cast<int>(d));
    feat.check_all_used();
  }

  Reader rew(section("reward"), "reward");
  inst.reward.theta_star = rew.vector("theta", d);
  inst.reward.m = rew.number("m");
  inst.reward.noise = rew.noise("noise");
  inst.reward.sigma = rew.has("sigma") ? rew.number("sigma") : 0.0;
  rew.check_all_used();

  std::optional<CostVariant> variant;
  for (int k = 1; k <= inst.K; ++k) {
    const std::string name = "cost." + std::to_string(k);
    Reader rc(section(name), name);
    const Entry& kind_entry = rc.entry("kind");
    const std::string kind = kind_entry.value;
    const CostVariant v = kind == "linear" ? CostVariant::linear : CostVariant::tabular;
    if (variant && *variant != v) fail(kind_entry.line, "all constraints must be either tabular or linear");
    variant = v;
    if (v == CostVariant::linear) {
      LinearCost lin;
      const Entry& psi_entry = rc.has("psi") ? rc.entry("psi") : kind_entry;
      if (rc.has("psi")) {
        if (psi_entry.value != "onehot") fail(psi_entry.line, "psi must be 'onehot' or given as psi.c.j lines");
        lin.psi = FeatureMap::one_hot(C, inst.J);
      } else {
        const Entry& first = rc.entry("psi.0.0");
        lin.psi = read_feature_table(rc, "psi", C, inst.J, static_cast<int>(parse_numbers(first).size()));
      }
      lin.mu_star = rc.vector("mu", lin.psi.dim());
      const NoiseKind noise = rc.noise("noise");
      const double sigma = rc.has("sigma") ? rc.number("sigma") : 0.0;
      if (k > 1 && (noise != inst.cost.noise || sigma != inst.cost.sigma)) {
        fail(kind_entry.line, "linear cost noise must match across constraints");
      }
      inst.cost.noise = noise;
      inst.cost.sigma = sigma;
      inst.cost.linear.push_back(std::move(lin));
    } else {
      TabularCost tab;
      if (kind == "deterministic") {
        tab.kind = TabularKind::deterministic;
      } else if (kind == "shifted-bernoulli") {
        tab.kind = TabularKind::shifted_bernoulli;
      } else {
        fail(kind_entry.line, "kind must be deterministic, shifted-bernoulli or linear");
      }
      tab.mean.resize(C, inst.J);
      tab.shift = Mat::Zero(C, inst.J);
      for (int c = 0; c < C; ++c) {
        tab.mean.row(c) = rc.vector("mean." + std::to_string(c), inst.J).transpose();
        if (tab.kind == TabularKind::shifted_bernoulli) {
          tab.shift.row(c) = rc.vector("shift." + std::to_string(c), inst.J).transpose();
        }
      }
      inst.cost.tabular.push_back(std::move(tab));
    }
    rc.check_all_used();
  }
  inst.cost.variant = *variant;

  for (const auto& [name, sec] : sections) {
    const bool known = name == "meta" || name == "contexts" || name == "onehot" || name == "features" ||
                       name == "reward" || name.rfind("cost.", 0) == 0;
    if (!known) fail(sec.line, "unknown section [" + name + "]");
    if (name.rfind("cost.", 0) == 0) {
      const std::string idx = name.substr(5);
      int k = 0;
      const auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), k);
      if (ec != std::errc() || ptr != idx.data() + idx.size() || k < 1 || k > inst.K) {
        fail(sec.line, "constraint section [" + name + "] outside 1..K");
      }
    }
  }

  if (auto_delta) {
    inst.delta = 1.0;  // placeholder so validate() accepts the rest
    validate(inst);
    inst.delta = slater_margin(inst);
    if (!(inst.delta > 0.0)) throw Error(Errc::invalid_config, "instance has no strictly feasible point (Slater margin 0)");
  }
  validate(inst);
  return inst;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read instance file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

void write_instance(std::ostream& os, const Instance& inst) {
  const int C = inst.num_contexts();
  os << "[meta]\n";
  os << "name = " << inst.name << '\n';
  os << "K = " << inst.K << "\nJ = " << inst.J << "\nd = " << inst.dim() << "\nT = " << inst.T << '\n';
  os << "delta = " << num(inst.delta) << "\n\n";

  os << "[contexts]\n";
  write_vector(os, "p", inst.contexts.p);
  os << '\n';

  if (inst.features.is_one_hot()) {
    os << "[onehot]\n\n";
  } else {
    os << "[features]\n";
    write_feature_table(os, "phi", inst.features);
    os << '\n';
  }

  os << "[reward]\n";
  write_vector(os, "theta", inst.reward.theta_star);
  os << "m = " << num(inst.reward.m) << "\nnoise = " << noise_name(inst.reward.noise);
  os << "\nsigma = " << num(inst.reward.sigma) << "\n";

  for (int k = 0; k < inst.K; ++k) {
    os << "\n[cost." << (k + 1) << "]\n";
    if (inst.cost.variant == CostVariant::linear) {
      const LinearCost& lin = inst.cost.linear[k];
      os << "kind = linear\n";
      write_vector(os, "mu", lin.mu_star);
      if (lin.psi.is_one_hot()) {
        os << "psi = onehot\n";
      } else {
        write_feature_table(os, "psi", lin.psi);
      }
      os << "noise = " << noise_name(inst.cost.noise) << "\nsigma = " << num(inst.cost.sigma) << '\n';
    } else {
      const TabularCost& tab = inst.cost.tabular[k];
      const bool shifted = tab.kind == TabularKind::shifted_bernoulli;
      os << "kind = " << (shifted ? "shifted-bernoulli" : "deterministic") << '\n';
      for (int c = 0; c < C; ++c) write_vector(os, "mean." + std::to_string(c), tab.mean.row(c).transpose());
      if (shifted) {
        for (int c = 0; c < C; ++c) write_vector(os, "shift." + std::to_string(c), tab.shift.row(c).transpose());
      }
    }
  }
}

}  // namespace cqb

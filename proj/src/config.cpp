#include <nnlif/config.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace nnlif {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"a", "b", "V_R", "V_F"}},
      {"grid", {"v_min", "v_max", "dv"}},
      {"run",
       {"mode", "eps", "eps_list", "t_end", "tau_end", "dt", "dtau", "sample_every", "seed", "n_particles",
        "threads", "only", "auxiliaries", "snapshots"}},
      {"init", {"kind", "mean", "sd", "lo", "hi", "path"}},
      {"output", {"directory"}},
  };
  return keys;
}

/// [run] keys each mode accepts besides mode, seed and threads.
const std::set<std::string>& mode_keys(RunMode m) {
  static const std::map<RunMode, std::set<std::string>> keys{
      {RunMode::tau, {"eps", "tau_end", "dtau", "sample_every", "snapshots"}},
      {RunMode::t, {"eps", "t_end", "dt", "sample_every", "auxiliaries", "snapshots"}},
      {RunMode::sweep, {"eps_list", "tau_end", "dtau", "sample_every"}},
      {RunMode::blowup, {"eps", "tau_end", "sample_every"}},
      {RunMode::particles, {"eps", "t_end", "dt", "n_particles"}},
      {RunMode::validate, {"only"}},
  };
  return keys.at(m);
}

class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  std::optional<std::string> text(const std::string& section, const std::string& key) {
    return raw_.find(section, key);
  }

  std::optional<double> number(const std::string& section, const std::string& key) {
    const auto s = raw_.find(section, key);
    if (!s) return std::nullopt;
    return parse_number(section, key, *s);
  }

  /// NaN when the key is missing or malformed; both are already reported.
  double required(const std::string& section, const std::string& key) {
    const auto v = number(section, key);
    if (!v) {
      fail("missing required key [" + section + "] " + key);
      return std::numeric_limits<double>::quiet_NaN();
    }
    return *v;
  }

  std::optional<bool> flag(const std::string& section, const std::string& key) {
    const auto s = raw_.find(section, key);
    if (!s) return std::nullopt;
    if (*s == "true" || *s == "1" || *s == "yes") return true;
    if (*s == "false" || *s == "0" || *s == "no") return false;
    fail("[" + section + "] " + key + ": expected true or false, got '" + *s + "'");
    return std::nullopt;
  }

  std::optional<std::uint64_t> integer(const std::string& section, const std::string& key) {
    const auto s = raw_.find(section, key);
    if (!s) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s->c_str(), &end, 10);
    if (s->empty() || *end != '\0' || errno != 0 || s->front() == '-') {
      fail("[" + section + "] " + key + ": expected a non-negative integer, got '" + *s + "'");
      return std::nullopt;
    }
    return v;
  }

  double parse_number(const std::string& section, const std::string& key, const std::string& s) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || errno != 0 || !std::isfinite(v)) {
      fail("[" + section + "] " + key + ": expected a number, got '" + s + "'");
      return std::numeric_limits<double>::quiet_NaN();
    }
    return v;
  }

  void check(bool ok, const std::string& message) {
    if (!ok) fail(message);
  }
  /// Range check that is skipped when an operand was already reported.
  void check_known(std::initializer_list<double> operands, bool ok, const std::string& message) {
    for (double x : operands)
      if (std::isnan(x)) return;
    check(ok, message);
  }
  void fail(const std::string& message) { errors_.push_back(message); }

  void finish() const {
    if (errors_.empty()) return;
    std::string msg = "invalid configuration:";
    for (const auto& e : errors_) msg += "\n  " + e;
    throw ConfigError(msg);
  }

 private:
  const RawConfig& raw_;
  std::vector<std::string> errors_;
};

std::optional<RunMode> parse_mode(const std::string& s) {
  for (RunMode m : {RunMode::tau, RunMode::t, RunMode::sweep, RunMode::blowup, RunMode::particles,
                    RunMode::validate})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

}  // namespace

std::optional<std::string> RawConfig::find(const std::string& section, const std::string& key) const {
  for (const auto& e : entries)
    if (e.section == section && e.key == key) return e.value;
  return std::nullopt;
}

bool RawConfig::has_section(const std::string& section) const {
  return std::any_of(entries.begin(), entries.end(), [&](const ConfigEntry& e) { return e.section == section; });
}

RawConfig parse_config(std::istream& in, const std::string& source) {
  RawConfig cfg;
  std::string section;
  std::string line;
  int number = 0;
  auto error = [&](const std::string& what) {
    std::ostringstream msg;
    msg << source << ":" << number << ": " << what;
    throw ConfigError(msg.str());
  };
  while (std::getline(in, line)) {
    ++number;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') error("unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) error("empty section name");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) error("expected key = value");
    if (section.empty()) error("key outside of any section");
    ConfigEntry e{section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), number};
    if (e.key.empty()) error("empty key");
    if (cfg.find(e.section, e.key)) error("duplicate key [" + e.section + "] " + e.key);
    cfg.entries.push_back(std::move(e));
  }
  return cfg;
}

RawConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read configuration file " + path.string());
  return parse_config(f, path.string());
}

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::tau: return "tau";
    case RunMode::t: return "t";
    case RunMode::sweep: return "sweep";
    case RunMode::blowup: return "blowup";
    case RunMode::particles: return "particles";
    case RunMode::validate: return "validate";
  }
  return "?";
}

ModelParams ExperimentConfig::params() const {
  ModelParams p = model;
  if (!eps_list.empty()) p.eps = eps_list.front();
  return p;
}

VoltageGrid ExperimentConfig::grid() const { return make_grid(model, v_min, v_max, dv); }

ExperimentConfig parse_experiment_config(const RawConfig& raw, const std::filesystem::path& base_dir) {
  Reader r(raw);
  ExperimentConfig cfg;
  cfg.raw = raw;

  for (const auto& e : raw.entries) {
    const auto it = known_keys().find(e.section);
    if (it == known_keys().end()) {
      r.fail("unknown section [" + e.section + "] (line " + std::to_string(e.line) + ")");
    } else if (!it->second.count(e.key)) {
      r.fail("unknown key [" + e.section + "] " + e.key + " (line " + std::to_string(e.line) + ")");
    }
  }

  // Every later check depends on the mode, so an unusable mode ends here.
  const auto mode_text = r.text("run", "mode");
  if (!mode_text) {
    r.fail("missing required key [run] mode");
    r.finish();
  }
  if (const auto m = parse_mode(*mode_text)) {
    cfg.mode = *m;
  } else {
    r.fail("[run] mode: unknown mode '" + *mode_text + "'");
    r.finish();
  }

  for (const auto& e : raw.entries) {
    if (e.section != "run" || e.key == "mode" || e.key == "seed" || e.key == "threads") continue;
    if (!mode_keys(cfg.mode).count(e.key))
      r.fail("[run] " + e.key + " is not used by mode " + to_string(cfg.mode));
  }

  cfg.model.a = r.required("model", "a");
  cfg.model.b = r.required("model", "b");
  cfg.model.v_reset = r.required("model", "V_R");
  cfg.model.v_fire = r.required("model", "V_F");
  r.check_known({cfg.model.a}, cfg.model.a > 0, "[model] a must be positive");
  r.check_known({cfg.model.v_reset, cfg.model.v_fire}, cfg.model.v_reset < cfg.model.v_fire, "[model] V_R must be below V_F");

  cfg.v_min = r.number("grid", "v_min").value_or(cfg.v_min);
  cfg.v_max = r.number("grid", "v_max").value_or(cfg.v_max);
  cfg.dv = r.number("grid", "dv").value_or(cfg.dv);
  r.check_known({cfg.dv}, cfg.dv > 0, "[grid] dv must be positive");
  r.check_known({cfg.v_min, cfg.v_max, cfg.model.v_reset, cfg.model.v_fire},
                cfg.v_min < cfg.model.v_reset && cfg.model.v_fire < cfg.v_max,
          "[grid] need v_min < V_R and V_F < v_max");

  if (const auto s = r.integer("run", "seed")) cfg.seed = *s;
  if (const auto t = r.integer("run", "threads")) {
    r.check(*t >= 1 && *t <= 1024, "[run] threads must lie in 1..1024");
    cfg.threads = static_cast<unsigned>(*t);
  }
  const bool uses = cfg.mode != RunMode::validate;

  if (cfg.mode == RunMode::sweep) {
    const auto list = r.text("run", "eps_list");
    if (!list) {
      r.fail("missing required key [run] eps_list");
    } else {
      for (const auto& item : split_list(*list)) cfg.eps_list.push_back(r.parse_number("run", "eps_list", item));
      r.check(cfg.eps_list.size() >= 2, "[run] eps_list needs at least two values");
      for (std::size_t k = 0; k < cfg.eps_list.size(); ++k) {
        r.check_known({cfg.eps_list[k]}, cfg.eps_list[k] > 0, "[run] eps_list values must be positive");
        if (k > 0)
          r.check_known({cfg.eps_list[k], cfg.eps_list[k - 1]}, cfg.eps_list[k] < cfg.eps_list[k - 1],
                        "[run] eps_list must be strictly decreasing");
      }
    }
  } else if (uses) {
    const double eps = r.required("run", "eps");
    r.check_known({eps}, eps > 0, "[run] eps must be positive");
    cfg.eps_list = {eps};
  }

  const bool t_mode = cfg.mode == RunMode::t || cfg.mode == RunMode::particles;
  if (uses) {
    const std::string end_key = t_mode ? "t_end" : "tau_end";
    const std::string step_key = t_mode ? "dt" : "dtau";
    cfg.end = r.required("run", end_key);
    r.check_known({cfg.end}, cfg.end > 0, "[run] " + end_key + " must be positive");
    cfg.step = r.number("run", step_key);
    if (cfg.step) r.check_known({*cfg.step}, *cfg.step > 0, "[run] " + step_key + " must be positive");
  }
  if (cfg.mode == RunMode::particles) {
    r.check(cfg.step.has_value(), "missing required key [run] dt");
    const auto n = r.integer("run", "n_particles");
    if (!n) r.fail("missing required key [run] n_particles");
    else {
      r.check(*n >= 1, "[run] n_particles must be at least 1");
      cfg.n_particles = static_cast<std::size_t>(*n);
    }
  }
  if (mode_keys(cfg.mode).count("sample_every")) {
    cfg.sample_every = r.number("run", "sample_every").value_or(cfg.sample_every);
    r.check_known({cfg.sample_every}, cfg.sample_every > 0, "[run] sample_every must be positive");
  }
  if (const auto o = r.text("run", "only")) cfg.only = split_list(*o);
  cfg.auxiliaries = r.flag("run", "auxiliaries").value_or(false);
  cfg.snapshots = r.flag("run", "snapshots").value_or(false);
  if (cfg.mode == RunMode::blowup)
    r.check_known({cfg.model.b}, cfg.model.b > 0, "[model] b must be positive for blow-up analytics (mode blowup)");

  if (uses) {
    const auto kind = r.text("init", "kind");
    if (!kind) {
      r.fail("missing required key [init] kind");
    } else {
      cfg.init.kind = *kind;
      std::set<std::string> allowed{"kind"};
      if (*kind == "gaussian") {
        allowed.insert({"mean", "sd"});
        cfg.init.mean = r.number("init", "mean").value_or(0.0);
        cfg.init.sd = r.required("init", "sd");
        r.check_known({cfg.init.sd}, cfg.init.sd > 0, "[init] sd must be positive");
      } else if (*kind == "uniform") {
        allowed.insert({"lo", "hi"});
        cfg.init.lo = r.required("init", "lo");
        cfg.init.hi = r.required("init", "hi");
        r.check_known({cfg.init.lo, cfg.init.hi}, cfg.init.lo < cfg.init.hi, "[init] need lo < hi");
      } else if (*kind == "plateau") {
        r.check_known({cfg.model.b, cfg.model.v_fire, cfg.model.v_reset},
                      cfg.model.b >= cfg.model.v_fire - cfg.model.v_reset,
                "[init] kind plateau requires b >= V_F - V_R");
      } else if (*kind == "file") {
        allowed.insert("path");
        if (const auto p = r.text("init", "path")) {
          cfg.init.file = std::filesystem::path(*p).is_absolute() ? std::filesystem::path(*p) : base_dir / *p;
          r.check(std::filesystem::is_regular_file(cfg.init.file),
                  "[init] path: file " + cfg.init.file.string() + " does not exist");
        } else {
          r.fail("missing required key [init] path");
        }
      } else {
        r.fail("[init] kind: unknown kind '" + *kind + "'");
      }
      for (const auto& e : raw.entries)
        if (e.section == "init" && !allowed.count(e.key))
          r.fail("[init] " + e.key + " is not used by kind " + *kind);
    }
  }
  if (const auto d = r.text("output", "directory")) cfg.output_dir = std::filesystem::path(*d);
  r.finish();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(load_config(path), path.parent_path());
}

DensityField read_density_csv(const std::filesystem::path& path, const VoltageGrid& grid) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read density file " + path.string());
  std::string line;
  std::getline(f, line);
  std::vector<double> xs, ys;
  int number = 1;
  while (std::getline(f, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto cols = split_list(line);
    char* e1 = nullptr;
    char* e2 = nullptr;
    const double x = cols.size() == 2 ? std::strtod(cols[0].c_str(), &e1) : 0;
    const double y = cols.size() == 2 ? std::strtod(cols[1].c_str(), &e2) : 0;
    if (cols.size() != 2 || *e1 != '\0' || *e2 != '\0')
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected two numeric columns v,n");
    if (!xs.empty() && !(x > xs.back()))
      throw ConfigError(path.string() + ": v must be strictly increasing");
    xs.push_back(x);
    ys.push_back(y);
  }
  if (xs.size() < 2) throw ConfigError(path.string() + ": need at least two rows");
  return project_density<double>(grid, [&](double v) {
           if (v < xs.front() || v > xs.back()) return 0.0;
           const auto it = std::upper_bound(xs.begin(), xs.end(), v);
           const std::size_t k = it == xs.end() ? xs.size() - 1 : static_cast<std::size_t>(it - xs.begin());
           const double w = (v - xs[k - 1]) / (xs[k] - xs[k - 1]);
           return (1 - w) * ys[k - 1] + w * ys[k];
         })
      .density;
}

DensityField build_initial_density(const ExperimentConfig& cfg) {
  const VoltageGrid g = cfg.grid();
  const auto& in = cfg.init;
  if (in.kind == "gaussian")
    return project_density<double>(g, [&](double v) {
             const double z = (v - in.mean) / in.sd;
             return std::exp(-0.5 * z * z);
           })
        .density;
  if (in.kind == "uniform")
    return project_density<double>(g, [&](double v) { return v >= in.lo && v < in.hi ? 1.0 : 0.0; }).density;
  if (in.kind == "plateau") return plateau_steady_state(cfg.model, g).normalized();
  if (in.kind == "file") return read_density_csv(in.file, g);
  throw ConfigError("unknown initial density kind '" + in.kind + "'");
}

}  // namespace nnlif

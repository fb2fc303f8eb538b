#include <nnlif/run_config.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <utility>
#include <vector>

#include <nnlif/blowup.hpp>
#include <nnlif/csv.hpp>
#include <nnlif/experiments.hpp>
#include <nnlif/particles.hpp>
#include <nnlif/solver_t.hpp>
#include <nnlif/solver_tau.hpp>

namespace nnlif {

namespace fs = std::filesystem;

namespace {

class Summary {
 public:
  Summary& add(const std::string& key, double value) { return text(key, csv::format_double(value)); }
  Summary& text(const std::string& key, const std::string& value) {
    lines_.push_back(key + " = " + value);
    return *this;
  }
  Summary& verdict(const std::string& name, bool passed, const std::string& measured) {
    lines_.push_back(std::string(passed ? "PASS " : "FAIL ") + name + " " + measured);
    return *this;
  }
  void write(std::ostream& out) const {
    for (const auto& l : lines_) out << l << '\n';
  }

 private:
  std::vector<std::string> lines_;
};

std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

void save_density(const fs::path& path, const DensityField& d) {
  csv::save(path, [&](std::ostream& o) { csv::write_density(o, d); });
}

template <typename Snapshots>
void save_snapshots(const fs::path& dir, const Snapshots& snaps) {
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "density_%05zu.csv", k);
    save_density(dir / "snapshots" / name, snaps[k]);
  }
}

/// Inverse-CDF sampler over the cells of a density, uniform inside a cell.
InitSampler density_sampler(const DensityField& d) {
  auto cdf = std::make_shared<std::vector<double>>();
  double acc = 0;
  for (Eigen::Index i = 0; i < d.grid.n_cells; ++i) {
    acc += d.values[i] * d.grid.dv;
    cdf->push_back(acc);
  }
  const VoltageGrid g = d.grid;
  return [cdf, g](CounterRng& rng) {
    const double u = rng.uniform() * cdf->back();
    const auto it = std::upper_bound(cdf->begin(), cdf->end(), u);
    const auto i = std::min<std::ptrdiff_t>(it - cdf->begin(), static_cast<std::ptrdiff_t>(cdf->size()) - 1);
    return g.interface(i) + rng.uniform() * g.dv;
  };
}

void run_tau_mode(const ExperimentConfig& cfg, const fs::path& dir, Summary& s) {
  TauRunOptions o;
  o.dtau = cfg.step;
  o.store_snapshots = cfg.snapshots;
  const auto tr = run_tau(cfg.params(), build_initial_density(cfg), cfg.end, cfg.sample_every, o);
  csv::save(dir / "trajectory.csv", [&](std::ostream& out) { csv::write_tau_trajectory(out, tr); });
  save_density(dir / "final_density.csv", tr.final_state.density);
  if (cfg.snapshots) save_snapshots(dir, tr.snapshots);
  s.add("steps", static_cast<double>(tr.steps))
      .add("max_mass_error", tr.max_mass_error)
      .add("min_density", tr.min_density)
      .add("max_qm_error", tr.max_qm_error)
      .add("lifespan_estimate", tr.samples.back().int_q - tr.samples.front().int_q)
      .add("final_M", tr.samples.back().moments.tail_mass)
      .add("clock_deficit", tr.final_state.clock_deficit);
}

void run_t_mode(const ExperimentConfig& cfg, const fs::path& dir, Summary& s) {
  TRunOptions o;
  o.dt = cfg.step;
  o.with_auxiliaries = cfg.auxiliaries;
  o.store_snapshots = cfg.snapshots;
  const auto tr = run_t(cfg.params(), build_initial_density(cfg), cfg.end, cfg.sample_every, o);
  csv::save(dir / "trajectory.csv", [&](std::ostream& out) { csv::write_t_trajectory(out, tr); });
  save_density(dir / "final_density.csv", tr.final_state.density);
  if (cfg.snapshots) save_snapshots(dir, tr.snapshots);
  if (tr.final_aux) {
    csv::save(dir / "auxiliaries.csv", [&](std::ostream& out) { csv::write_auxiliaries(out, tr); });
    save_density(dir / "final_p_not.csv", tr.final_aux->p_not);
    save_density(dir / "final_p_spike.csv", tr.final_aux->p_spike);
    save_density(dir / "final_p_bar.csv", tr.final_aux->p_bar);
  }
  s.add("steps", static_cast<double>(tr.steps))
      .add("max_mass_error", tr.max_mass_error)
      .add("min_density", tr.min_density)
      .add("max_rate", tr.max_rate)
      .add("fired_mass", tr.samples.back().int_n);
}

void run_sweep_mode(const ExperimentConfig& cfg, const fs::path& dir, Summary& s) {
  SweepOptions so;
  so.sample_every = cfg.sample_every;
  so.threads = cfg.threads;
  so.run.dtau = cfg.step;
  const auto rep = eps_sweep(cfg.model, build_initial_density(cfg), cfg.eps_list, cfg.end, so);
  std::vector<double> m2, l2;
  for (const auto& m : rep.members) {
    const std::string tag = eps_tag(m.eps);
    csv::save(dir / ("trajectory_eps_" + tag + ".csv"),
              [&](std::ostream& out) { csv::write_tau_trajectory(out, m.traj); });
    csv::save(dir / ("segments_eps_" + tag + ".csv"), [&](std::ostream& out) { csv::write_segments(out, m.segments); });
    m2.push_back(m.sup_second_moment);
    l2.push_back(m.sup_l2);
  }
  csv::save(dir / "sweep_summary.csv", [&](std::ostream& out) { csv::write_sweep_summary(out, rep); });
  const auto ratio = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
  };
  bool decreasing = true;
  for (std::size_t k = 1; k < rep.cauchy.size(); ++k) decreasing = decreasing && rep.cauchy[k] < rep.cauchy[k - 1];
  std::string cauchy;
  for (double c : rep.cauchy) cauchy += (cauchy.empty() ? "" : "/") + csv::format_double(c);
  s.text("segments", "half-open [start, end), boundary at the first sample of the new class");
  s.verdict("qm_identity", rep.max_qm_error <= 1e-12, "max_qm_error=" + csv::format_double(rep.max_qm_error));
  s.verdict("uniform_second_moment", ratio(m2) <= 2, "max_over_min=" + csv::format_double(ratio(m2)));
  s.verdict("uniform_l2", ratio(l2) <= 2, "max_over_min=" + csv::format_double(ratio(l2)));
  s.verdict("cauchy_decreasing", decreasing, "differences=" + cauchy);
}

void run_blowup_mode(const ExperimentConfig& cfg, const fs::path& dir, Summary& s) {
  ChainOptions co;
  co.eps = cfg.eps_list.front();
  co.sample_every = cfg.sample_every;
  const auto ch = chain_blowups(build_initial_density(cfg), cfg.model, cfg.end, co);
  csv::save(dir / "events.csv", [&](std::ostream& out) { csv::write_events(out, ch.events); });
  for (std::size_t k = 0; k < ch.events.size(); ++k) {
    const auto& e = ch.events[k];
    save_density(dir / ("event_" + std::to_string(k) + "_pre.csv"), e.n_pre);
    if (e.n_post) save_density(dir / ("event_" + std::to_string(k) + "_post.csv"), *e.n_post);
  }
  s.add("events", static_cast<double>(ch.events.size()))
      .add("lifespan_estimate", ch.lifespan_estimate)
      .add("tau_reached", ch.tau_reached)
      .text("ended_eternal", ch.ended_eternal ? "true" : "false");
}

void run_particles_mode(const ExperimentConfig& cfg, const fs::path& dir, Summary& s) {
  ParticleOptions o;
  o.n_particles = cfg.n_particles;
  o.dt = *cfg.step;
  o.t_end = cfg.end;
  o.seed = cfg.seed;
  o.threads = cfg.threads;
  o.hist_v_min = cfg.v_min;
  o.hist_v_max = cfg.v_max;
  InitSampler sampler;
  if (cfg.init.kind == "gaussian") sampler = gaussian_sampler(cfg.init.mean, cfg.init.sd);
  else if (cfg.init.kind == "uniform") sampler = uniform_sampler(cfg.init.lo, cfg.init.hi);
  else sampler = density_sampler(build_initial_density(cfg));
  const auto r = simulate_particles(cfg.params(), sampler, o);
  csv::save(dir / "particle_rate.csv", [&](std::ostream& out) { csv::write_particle_rate(out, r); });
  csv::save(dir / "histogram.csv", [&](std::ostream& out) { csv::write_histogram(out, r); });
  s.add("fired_total", static_cast<double>(r.fired_total)).add("time_integral_rate", r.time_integral_rate);
}

bool run_validate_mode(const ExperimentConfig& cfg, const fs::path& dir, Summary& s, std::ostream* log) {
  AcceptanceOptions o;
  o.only = cfg.only;
  o.threads = cfg.threads;
  const auto results = run_acceptance(o, log);
  bool all = true;
  for (const auto& r : results) {
    s.verdict(std::to_string(r.number) + ":" + r.name, r.passed, r.details);
    all = all && r.passed;
  }
  csv::save(dir / "acceptance.txt", [&](std::ostream& out) { s.write(out); });
  return all;
}

void write_manifest(const ExperimentConfig& cfg, const fs::path& config_path, const fs::path& dir) {
  csv::save(dir / "manifest.txt", [&](std::ostream& out) {
    out << "version = " << version() << '\n';
    out << "config = " << config_path.filename().string() << '\n';
    out << "mode = " << to_string(cfg.mode) << '\n';
    out << "seed = " << cfg.seed << '\n';
    std::string section;
    for (const auto& e : cfg.raw.entries) {
      if (e.section != section) {
        section = e.section;
        out << '[' << section << "]\n";
      }
      out << e.key << " = " << e.value << '\n';
    }
  });
}

}  // namespace

std::string version() { return "0.1.0"; }

fs::path resolve_output_dir(const ExperimentConfig& cfg, const fs::path& config_path, const RunOverrides& overrides) {
  if (overrides.output_dir) return *overrides.output_dir;
  if (cfg.output_dir) return *cfg.output_dir;
  const char* root = std::getenv(output_root_env);
  const fs::path base = root && *root ? fs::path(root) : fs::path("nnlif-output");
  return base / config_path.stem();
}

RunOutcome run_config(const fs::path& config_path, const RunOverrides& overrides, std::ostream* log) {
  RunOutcome outcome;
  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(config_path);
    if (overrides.threads) {
      if (*overrides.threads < 1) throw ConfigError("--threads must be at least 1");
      cfg.threads = *overrides.threads;
    }
    if (overrides.seed) cfg.seed = *overrides.seed;
    // Module preconditions that depend on the grid surface here, before any output.
    if (cfg.mode != RunMode::validate) {
      cfg.params().validate();
      build_initial_density(cfg);
    }
    outcome.directory = resolve_output_dir(cfg, config_path, overrides);
  } catch (const std::invalid_argument& e) {
    outcome.exit_code = exit_validation;
    outcome.message = e.what();
    if (log) *log << "validation failed: " << e.what() << '\n';
    return outcome;
  } catch (const std::exception& e) {
    outcome.exit_code = exit_runtime;
    outcome.message = e.what();
    if (log) *log << "error: " << e.what() << '\n';
    return outcome;
  }

  try {
    const fs::path& dir = outcome.directory;
    fs::create_directories(dir);
    write_manifest(cfg, config_path, dir);
    Summary s;
    s.text("mode", to_string(cfg.mode));
    bool passed = true;
    switch (cfg.mode) {
      case RunMode::tau: run_tau_mode(cfg, dir, s); break;
      case RunMode::t: run_t_mode(cfg, dir, s); break;
      case RunMode::sweep: run_sweep_mode(cfg, dir, s); break;
      case RunMode::blowup: run_blowup_mode(cfg, dir, s); break;
      case RunMode::particles: run_particles_mode(cfg, dir, s); break;
      case RunMode::validate: passed = run_validate_mode(cfg, dir, s, log); break;
    }
    csv::save(dir / "summary.txt", [&](std::ostream& out) { s.write(out); });
    if (!passed) {
      outcome.exit_code = exit_criteria_failed;
      outcome.message = "acceptance criteria failed";
    }
    if (log) *log << "wrote " << dir.string() << '\n';
  } catch (const std::invalid_argument& e) {
    outcome.exit_code = exit_validation;
    outcome.message = e.what();
    if (log) *log << "validation failed: " << e.what() << '\n';
  } catch (const std::exception& e) {
    outcome.exit_code = exit_runtime;
    outcome.message = e.what();
    if (log) *log << "error: " << e.what() << '\n';
  }
  return outcome;
}

int run_validate(const AcceptanceOptions& options, std::ostream& out) {
  const auto results = run_acceptance(options, &out);
  const bool all = std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.passed; });
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed ? 1 : 0;
  out << passed << "/" << results.size() << " criteria passed\n";
  return all ? exit_ok : exit_criteria_failed;
}

}  // namespace nnlif

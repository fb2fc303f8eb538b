#pragma once

// Sectioned key = value experiment configuration.
//
//   [model]  a, b, V_R, V_F                      (all required)
//   [grid]   v_min, v_max, dv                    (optional, default -4, 3, 0.005)
//   [run]    mode = tau | t | sweep | blowup | particles | validate
//            eps, eps_list, t_end, tau_end, dt, dtau, sample_every, seed,
//            n_particles, threads, only, auxiliaries, snapshots
//   [init]   kind = gaussian (mean, sd) | uniform (lo, hi) | plateau | file (path)
//   [output] directory
//
// Lines starting with '#' or ';' are comments. Unknown keys, keys the
// selected mode does not use, and missing required keys are all reported in
// one ConfigError.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <nnlif/model.hpp>

namespace nnlif {

class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  int line{0};
};

/// Entries in file order.
struct RawConfig {
  std::vector<ConfigEntry> entries;

  std::optional<std::string> find(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;
};

/// Throws ConfigError on malformed lines, keys outside a section and
/// duplicate keys.
RawConfig parse_config(std::istream& in, const std::string& source = "<config>");
RawConfig load_config(const std::filesystem::path& path);

enum class RunMode { tau, t, sweep, blowup, particles, validate };
std::string to_string(RunMode m);

struct InitSpec {
  std::string kind;
  double mean{0};
  double sd{0.5};
  double lo{0};
  double hi{0};
  std::filesystem::path file;
};

struct ExperimentConfig {
  ModelParams model;  // eps left empty; see eps_list
  double v_min{-4.0};
  double v_max{3.0};
  double dv{0.005};
  RunMode mode{RunMode::tau};
  std::vector<double> eps_list;  // one entry except in sweep mode
  double end{0};                 // t_end or tau_end, by mode
  std::optional<double> step;    // dt or dtau, by mode
  double sample_every{0.01};
  std::uint64_t seed{1};
  std::size_t n_particles{10000};
  unsigned threads{1};
  std::vector<std::string> only;
  bool auxiliaries{false};
  bool snapshots{false};
  InitSpec init;
  std::optional<std::filesystem::path> output_dir;
  RawConfig raw;

  ModelParams params() const;  // model with the first eps when present
  VoltageGrid grid() const;
};

/// Validates keys and ranges against the selected mode. Relative file paths
/// are resolved against base_dir.
ExperimentConfig parse_experiment_config(const RawConfig& raw, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Initial density on cfg.grid() with unit mass.
DensityField build_initial_density(const ExperimentConfig& cfg);

/// Reads a two-column `v,n` CSV (header line first) and returns the
/// piecewise-linear interpolant projected onto the grid, zero outside the
/// tabulated range.
DensityField read_density_csv(const std::filesystem::path& path, const VoltageGrid& grid);

}  // namespace nnlif

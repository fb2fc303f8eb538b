#pragma once

// Dispatch of an experiment configuration to the solvers, with CSV output,
// a manifest (config echo, code version, seed) and a plain-text summary.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include <nnlif/acceptance.hpp>
#include <nnlif/config.hpp>

namespace nnlif {

inline constexpr int exit_ok = 0;
inline constexpr int exit_criteria_failed = 1;
inline constexpr int exit_validation = 2;
inline constexpr int exit_runtime = 3;

/// Environment variable naming the default output root.
inline constexpr const char* output_root_env = "NNLIF_OUTPUT_ROOT";

std::string version();

struct RunOverrides {
  std::optional<std::filesystem::path> output_dir;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
};

struct RunOutcome {
  int exit_code{exit_ok};
  std::filesystem::path directory;
  std::string message;
};

/// Output directory: override, then [output] directory, then
/// $NNLIF_OUTPUT_ROOT/<config stem>, then nnlif-output/<config stem>.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg, const std::filesystem::path& config_path,
                                         const RunOverrides& overrides);

/// Loads, validates and runs a configuration. Never throws: errors become
/// exit codes (2 for invalid input, 3 for solver or I/O failures) with the
/// message in the outcome. Progress and errors go to `log` when given.
RunOutcome run_config(const std::filesystem::path& config_path, const RunOverrides& overrides = {},
                      std::ostream* log = nullptr);

/// Runs the acceptance suite, printing one line per criterion to `out`.
/// Returns exit_ok when every selected criterion passes.
int run_validate(const AcceptanceOptions& options, std::ostream& out);

}  // namespace nnlif

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nnlif/run_config.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Random-discharge integrate-and-fire solvers and experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", nnlif::version());

  std::optional<std::string> output_dir;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  app.add_option("--output-dir", output_dir, "Directory for run artifacts");
  app.add_option("--threads", threads, "Worker threads for sweeps and particle runs")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Overrides [run] seed");

  auto* run = app.add_subcommand("run", "Run an experiment configuration");
  std::string config;
  run->add_option("config", config, "Configuration file")->required();

  auto* validate = app.add_subcommand("validate", "Run the acceptance suite");
  std::vector<std::string> only;
  double tolerance_scale = 1.0;
  validate->add_option("--only", only, "Criterion names or numbers")->delimiter(',');
  validate->add_option("--tolerance-scale", tolerance_scale)->group("")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nnlif::exit_validation;
  }

  if (*run) {
    nnlif::RunOverrides ov;
    if (output_dir) ov.output_dir = *output_dir;
    ov.threads = threads;
    ov.seed = seed;
    const auto outcome = nnlif::run_config(config, ov, &std::cerr);
    return outcome.exit_code;
  }
  nnlif::AcceptanceOptions opt;
  opt.only = only;
  opt.tolerance_scale = tolerance_scale;
  opt.threads = threads.value_or(1);
  try {
    return nnlif::run_validate(opt, std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation failed: " << e.what() << '\n';
    return nnlif::exit_validation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return nnlif::exit_runtime;
  }
}

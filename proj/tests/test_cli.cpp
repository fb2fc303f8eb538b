#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nnlif/run_config.hpp>

using namespace nnlif;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nnlif_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + NNLIF_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string sweep_config =
    "[model]\na = 1\nb = 0.3\nV_R = 0\nV_F = 1\n"
    "[grid]\ndv = 0.02\n"
    "[run]\nmode = sweep\neps_list = 1e-1, 5e-2\ntau_end = 0.2\nsample_every = 0.05\n"
    "[init]\nkind = gaussian\nmean = 0\nsd = 0.5\n";

}  // namespace

TEST_CASE("run: a sweep writes per-eps artifacts, a manifest and a summary") {
  const auto dir = scratch("sweep");
  write(dir / "sweep.ini", sweep_config);
  std::ostringstream log;
  RunOverrides ov;
  ov.output_dir = dir / "out";
  const auto r = run_config(dir / "sweep.ini", ov, &log);
  CHECK(r.exit_code == exit_ok);
  CHECK(r.directory == dir / "out");
  for (const char* f : {"trajectory_eps_0.1.csv", "trajectory_eps_0.05.csv", "segments_eps_0.1.csv",
                        "segments_eps_0.05.csv", "sweep_summary.csv", "manifest.txt", "summary.txt"})
    CHECK_MESSAGE(fs::exists(dir / "out" / f), f);
  const auto manifest = slurp(dir / "out" / "manifest.txt");
  CHECK(manifest.find("version = 0.1.0") != std::string::npos);
  CHECK(manifest.find("mode = sweep") != std::string::npos);
  CHECK(manifest.find("eps_list = 1e-1, 5e-2") != std::string::npos);
  const auto traj = slurp(dir / "out" / "trajectory_eps_0.1.csv");
  CHECK(traj.rfind("tau,Q,mass,mean,second_moment,l2,M,int_Q\n", 0) == 0);
}

TEST_CASE("run: output directory from the environment") {
  const auto dir = scratch("env");
  write(dir / "envrun.ini", sweep_config);
  ::setenv(output_root_env, (dir / "root").c_str(), 1);
  const auto r = run_config(dir / "envrun.ini");
  ::unsetenv(output_root_env);
  CHECK(r.exit_code == exit_ok);
  CHECK(r.directory == dir / "root" / "envrun");
  CHECK(fs::exists(dir / "root" / "envrun" / "summary.txt"));
}

TEST_CASE("cli: reruns are byte-identical, also across thread counts") {
  const auto dir = scratch("determinism");
  write(dir / "sweep.ini", sweep_config);
  const auto cfg = (dir / "sweep.ini").string();
  REQUIRE(cli("--output-dir \"" + (dir / "a").string() + "\" run \"" + cfg + "\"", dir / "a.log") == 0);
  REQUIRE(cli("--output-dir \"" + (dir / "b").string() + "\" run \"" + cfg + "\"", dir / "b.log") == 0);
  REQUIRE(cli("--threads 2 --output-dir \"" + (dir / "c").string() + "\" run \"" + cfg + "\"", dir / "c.log") == 0);
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    CHECK_MESSAGE(slurp(entry.path()) == slurp(dir / "b" / name), name.string());
    CHECK_MESSAGE(slurp(entry.path()) == slurp(dir / "c" / name), name.string());
  }
}

TEST_CASE("cli: particle runs are reproducible for a fixed seed") {
  const auto dir = scratch("particles");
  write(dir / "p.ini",
        "[model]\na = 1\nb = 0.5\nV_R = 0\nV_F = 1\n[run]\nmode = particles\neps = 0.05\nt_end = 0.1\ndt = 1e-3\n"
        "n_particles = 2000\nseed = 4\n[init]\nkind = gaussian\nmean = 0.5\nsd = 0.3\n");
  const auto cfg = (dir / "p.ini").string();
  REQUIRE(cli("--output-dir \"" + (dir / "a").string() + "\" run \"" + cfg + "\"", dir / "a.log") == 0);
  REQUIRE(cli("--threads 3 --output-dir \"" + (dir / "b").string() + "\" run \"" + cfg + "\"", dir / "b.log") == 0);
  REQUIRE(cli("--seed 5 --output-dir \"" + (dir / "c").string() + "\" run \"" + cfg + "\"", dir / "c.log") == 0);
  const auto a = slurp(dir / "a" / "particle_rate.csv");
  CHECK(a == slurp(dir / "b" / "particle_rate.csv"));
  CHECK(slurp(dir / "a" / "histogram.csv") == slurp(dir / "b" / "histogram.csv"));
  CHECK(a != slurp(dir / "c" / "particle_rate.csv"));
}

TEST_CASE("cli: exit codes") {
  const auto dir = scratch("exit");
  write(dir / "bad.ini", "[model]\na = 1\nb = -1\nV_R = 0\nV_F = 1\n[run]\nmode = blowup\neps = 1e-3\ntau_end = 1\n"
                         "[init]\nkind = uniform\nlo = 0.5\nhi = 1\n");
  CHECK(cli("run \"" + (dir / "bad.ini").string() + "\"", dir / "bad.log") == exit_validation);
  CHECK(slurp(dir / "bad.log").find("b must be positive") != std::string::npos);
  CHECK(cli("run \"" + (dir / "missing.ini").string() + "\"", dir / "missing.log") == exit_validation);
  CHECK(cli("frobnicate", dir / "usage.log") == exit_validation);
  CHECK(cli("--version", dir / "version.log") == exit_ok);
  CHECK(slurp(dir / "version.log").find("0.1.0") != std::string::npos);

  // A fixed step far beyond the advective limit fails inside the solver.
  write(dir / "cfl.ini", "[model]\na = 1\nb = 0.3\nV_R = 0\nV_F = 1\n[run]\nmode = tau\neps = 1e-3\ntau_end = 1\n"
                         "dtau = 0.5\n[init]\nkind = gaussian\nmean = 0\nsd = 0.5\n");
  CHECK(cli("--output-dir \"" + (dir / "cfl").string() + "\" run \"" + (dir / "cfl.ini").string() + "\"",
            dir / "cfl.log") == exit_runtime);

  // An output path below a regular file cannot be created.
  write(dir / "blocker", "x");
  write(dir / "ok.ini", sweep_config);
  CHECK(cli("--output-dir \"" + (dir / "blocker" / "out").string() + "\" run \"" + (dir / "ok.ini").string() + "\"",
            dir / "io.log") == exit_runtime);
}

TEST_CASE("cli: validate runs only the selected criteria") {
  const auto dir = scratch("validate");
  CHECK(cli("validate --only conservation", dir / "one.log") == exit_ok);
  const auto out = slurp(dir / "one.log");
  CHECK(out.find("PASS  1 conservation") != std::string::npos);
  CHECK(out.find("steady-state") == std::string::npos);
  CHECK(out.find("1/1 criteria passed") != std::string::npos);

  CHECK(cli("validate --only 1 --tolerance-scale 1e-30", dir / "strict.log") == exit_criteria_failed);
  CHECK(slurp(dir / "strict.log").find("FAIL  1 conservation") != std::string::npos);
  CHECK(cli("validate --only warp-drive", dir / "unknown.log") == exit_validation);
}

TEST_CASE("run: validate mode writes the acceptance report") {
  const auto dir = scratch("validate_mode");
  write(dir / "v.ini", "[model]\na = 1\nb = 1\nV_R = 0\nV_F = 1\n[run]\nmode = validate\nonly = roundtrip\n");
  RunOverrides ov;
  ov.output_dir = dir / "out";
  const auto r = run_config(dir / "v.ini", ov);
  CHECK(r.exit_code == exit_ok);
  CHECK(slurp(dir / "out" / "acceptance.txt").find("roundtrip") != std::string::npos);
}

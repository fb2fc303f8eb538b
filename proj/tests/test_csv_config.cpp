#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nnlif/config.hpp>
#include <nnlif/csv.hpp>

#include "support.hpp"

using namespace nnlif;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text, const fs::path& base = ".") {
  std::istringstream in(text);
  return parse_experiment_config(parse_config(in), base);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const std::string model = "[model]\na = 1\nb = 0.3\nV_R = 0\nV_F = 1\n";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nnlif_test_csv_config_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double x : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, 1e-300})
    CHECK(std::strtod(csv::format_double(x).c_str(), nullptr) == x);
  CHECK(csv::format_double(0.1) == "0.10000000000000001");
  CHECK(csv::format_double(2.0) == "2");
}

TEST_CASE("CSV headers and rows") {
  const auto g = make_grid(nnlif::testing::params(0), -1.0, 2.0, 0.5);
  const auto d = project_density<double>(g, [](double v) { return v >= 0 && v < 1 ? 1.0 : 0.0; }).density;
  std::ostringstream out;
  csv::write_density(out, d);
  std::istringstream lines(out.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "v,n");
  CHECK(first == "-0.75,0");

  std::ostringstream segs;
  csv::write_segments(segs, {{0.0, 0.5, false}, {0.5, 1.0, true}});
  CHECK(segs.str() == "start,end,blowup\n0,0.5,0\n0.5,1,1\n");

  std::ostringstream rates;
  csv::write_rate_table(rates, {0.0, 0.5}, {1.0, 2.0});
  CHECK(rates.str() == "t,N\n0,1\n0.5,2\n");
}

TEST_CASE("csv::save creates parent directories") {
  const auto dir = scratch("save");
  const auto path = dir / "a" / "b" / "x.csv";
  csv::save(path, [](std::ostream& out) { out << "t,N\n"; });
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  CHECK(line == "t,N");
  CHECK_THROWS_AS(csv::save(path / "below_a_file.csv", [](std::ostream&) {}), std::runtime_error);
}

TEST_CASE("raw parser: comments, sections and duplicates") {
  std::istringstream in("# comment\n; other\n[model]\n a = 1 \n\n[run]\nmode=tau\n");
  const auto raw = parse_config(in);
  REQUIRE(raw.entries.size() == 2);
  CHECK(raw.find("model", "a") == "1");
  CHECK(raw.entries[1].line == 7);
  CHECK(raw.has_section("run"));
  CHECK_FALSE(raw.has_section("grid"));
  std::istringstream dup("[model]\na = 1\na = 2\n");
  CHECK_THROWS_AS(parse_config(dup), ConfigError);
  std::istringstream outside("a = 1\n");
  CHECK_THROWS_AS(parse_config(outside), ConfigError);
  std::istringstream header("[model\n");
  CHECK_THROWS_AS(parse_config(header), ConfigError);
  std::istringstream noeq("[model]\na\n");
  CHECK_THROWS_AS(parse_config(noeq), ConfigError);
}

TEST_CASE("experiment config: a complete tau run") {
  const auto c = parse(model + "[grid]\ndv = 0.01\n[run]\nmode = tau\neps = 1e-3\ntau_end = 2\nsample_every = 0.05\nseed = 9\n"
                               "[init]\nkind = gaussian\nmean = 0.1\nsd = 0.4\n");
  CHECK(c.mode == RunMode::tau);
  CHECK(c.model.b == 0.3);
  CHECK(c.eps_list == std::vector<double>{1e-3});
  CHECK(c.params().require_eps() == 1e-3);
  CHECK(c.end == 2);
  CHECK_FALSE(c.step.has_value());
  CHECK(c.sample_every == 0.05);
  CHECK(c.seed == 9);
  CHECK(c.init.kind == "gaussian");
  CHECK(c.init.sd == 0.4);
  CHECK(c.grid().n_cells == 700);
  CHECK(build_initial_density(c).mass() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("experiment config: errors are collected") {
  const auto msg = error_of("[model]\na = 1\nV_R = 0\nV_F = 1\nfoo = 2\n[run]\nmode = tau\ntau_end = 1\ndt = 0.1\n"
                            "[init]\nkind = gaussian\n");
  CHECK(msg.find("missing required key [model] b") != std::string::npos);
  CHECK(msg.find("unknown key [model] foo") != std::string::npos);
  CHECK(msg.find("missing required key [run] eps") != std::string::npos);
  CHECK(msg.find("[run] dt is not used by mode tau") != std::string::npos);

  CHECK(error_of(model + "[run]\nmode = warp\n").find("unknown mode 'warp'") != std::string::npos);
  CHECK(error_of(model + "[run]\nmode = tau\neps = -1\ntau_end = 1\n[init]\nkind = plateau\n").find("eps must be positive") !=
        std::string::npos);
  CHECK(error_of(model + "[run]\nmode = sweep\neps_list = 1e-2, 1e-1\ntau_end = 1\n[init]\nkind = gaussian\n")
            .find("strictly decreasing") != std::string::npos);
  CHECK(error_of(model + "[run]\nmode = tau\neps = 0.1\ntau_end = x\n[init]\nkind = gaussian\n").find("expected a number") !=
        std::string::npos);
  CHECK(error_of(model + "[run]\nmode = tau\neps = 0.1\ntau_end = 1\n[init]\nkind = blob\n").find("unknown kind 'blob'") !=
        std::string::npos);
}

TEST_CASE("experiment config: blow-up mode rejects non-positive b") {
  const auto msg = error_of("[model]\na = 1\nb = -1\nV_R = 0\nV_F = 1\n[run]\nmode = blowup\neps = 1e-3\ntau_end = 1\n"
                            "[init]\nkind = uniform\nlo = 0.5\nhi = 1\n");
  CHECK(msg.find("b must be positive") != std::string::npos);
}

TEST_CASE("experiment config: validate mode needs no model run keys") {
  const auto c = parse(model + "[run]\nmode = validate\nonly = conservation, 7\n");
  CHECK(c.mode == RunMode::validate);
  CHECK(c.only == std::vector<std::string>{"conservation", "7"});
}

TEST_CASE("initial densities: uniform, plateau and file") {
  const auto u = parse(model + "[run]\nmode = tau\neps = 0.1\ntau_end = 1\n[init]\nkind = uniform\nlo = 0.25\nhi = 0.75\n");
  const auto du = build_initial_density(u);
  CHECK(du.integrate(0.25, 0.75) == doctest::Approx(1.0).epsilon(1e-12));

  const std::string plateau_model = "[model]\na = 1\nb = 2\nV_R = 0\nV_F = 1\n";
  const auto pl = parse(plateau_model + "[grid]\nv_min = -14\nv_max = 16\n[run]\nmode = tau\neps = 0.1\ntau_end = 1\n"
                                        "[init]\nkind = plateau\n");
  CHECK(build_initial_density(pl).tail_mass() == doctest::Approx(0.5).epsilon(1e-6));

  const auto dir = scratch("file");
  {
    std::ofstream f(dir / "init.csv");
    f << "v,n\n-1,0\n0,1\n1,0\n";
  }
  const auto fc = parse(model + "[run]\nmode = tau\neps = 0.1\ntau_end = 1\n[init]\nkind = file\npath = init.csv\n", dir);
  CHECK(fc.init.file == dir / "init.csv");
  const auto df = build_initial_density(fc);
  CHECK(df.mass() == doctest::Approx(1.0).epsilon(1e-13));
  // Hat function on [-1, 1]: half the mass on each side of 0.
  CHECK(df.integrate(-1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-10));
  {
    std::ofstream f(dir / "bad.csv");
    f << "v,n\n0,1\n0,2\n";
  }
  CHECK_THROWS_AS(read_density_csv(dir / "bad.csv", fc.grid()), ConfigError);
  CHECK_THROWS_AS(read_density_csv(dir / "missing.csv", fc.grid()), ConfigError);
}

TEST_CASE("config file loading") {
  const auto dir = scratch("load");
  CHECK_THROWS_AS(load_experiment_config(dir / "missing.ini"), ConfigError);
  {
    std::ofstream f(dir / "run.ini");
    f << model << "[run]\nmode = tau\neps = 0.1\ntau_end = 1\n[init]\nkind = gaussian\nmean = 0\nsd = 0.5\n";
  }
  CHECK(load_experiment_config(dir / "run.ini").mode == RunMode::tau);
}

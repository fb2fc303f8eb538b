#include <doctest.h>

#include <cmath>

#include <nnlif/experiments.hpp>

#include "support.hpp"

using namespace nnlif;
using nnlif::testing::params;

namespace {

TauTrajectory synthetic(const std::vector<double>& m) {
  TauTrajectory t;
  for (std::size_t k = 0; k < m.size(); ++k) {
    TauSample s;
    s.tau = static_cast<double>(k);
    s.moments.tail_mass = m[k];
    t.samples.push_back(s);
  }
  return t;
}

}  // namespace

TEST_CASE("blow-up threshold") {
  CHECK(blowup_threshold(1e-3) == doctest::Approx(1e-2));
  CHECK(blowup_threshold(1e-9) == 1e-6);
}

TEST_CASE("segment classification on a synthetic trajectory") {
  const auto segs = classify_segments(synthetic({0.0, 0.0, 0.5, 0.6, 0.0, 0.0}), 0.1);
  REQUIRE(segs.size() == 3);
  CHECK_FALSE(segs[0].blowup);
  CHECK(segs[0].start == 0);
  CHECK(segs[0].end == 2);
  CHECK(segs[1].blowup);
  CHECK(segs[1].end == 4);
  CHECK_FALSE(segs[2].blowup);
  CHECK(segs[2].end == 5);
  CHECK(classify_segments(synthetic({}), 0.1).empty());
}

TEST_CASE("blow-up measurement between the minima around the peak") {
  const auto r = measure_blowup(synthetic({0.01, 0.005, 0.3, 0.6, 0.4, 0.1, 0.05, 0.2}), 0.25);
  REQUIRE(r.found);
  CHECK(r.tau_start == 1);
  CHECK(r.tau_peak == 3);
  CHECK(r.m_peak == 0.6);
  CHECK(r.end_index == 6);
  // Vertex of the parabola through (5, 0.1), (6, 0.05), (7, 0.2).
  CHECK(r.tau_end == doctest::Approx(5.75).epsilon(1e-12));
  CHECK(r.delta_tau == doctest::Approx(4.75).epsilon(1e-12));
  CHECK_FALSE(measure_blowup(synthetic({0.01, 0.02}), 0.25).found);
}

TEST_CASE("S window mass and refinement boundedness") {
  const auto g = make_grid(params(0), -4.0, 3.0, 0.01);
  const auto d = project_density<double>(g, [](double v) { return (v >= 0 && v < 1 ? 1.0 : 0.0) + (v >= 1 && v < 2 ? 1.0 : 0.0); }).density;
  CHECK(s_window_mass(d, 1.0, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s_window_mass(d, 1.0, 5.0) == doctest::Approx(1.0).epsilon(1e-12));
  const auto none = project_density<double>(g, [](double v) { return v >= 0 && v < 1 ? 1.0 : 0.0; }).density;
  CHECK(std::isnan(s_window_mass(none, 1.0, 0.5)));

  CHECK(bounded_under_refinement({1.0, 1.05, 0.9}));
  CHECK_FALSE(bounded_under_refinement({1.0, 1.2}));
  CHECK(bounded_under_refinement({1.0, 1.2}, 0.25));
  CHECK_FALSE(bounded_under_refinement({}));
  CHECK_FALSE(bounded_under_refinement({1.0, NAN}));
}

TEST_CASE("eps sweep: common samples, determinism across threads") {
  const auto p = params(0.3);
  const auto g = make_grid(p, -4.0, 3.0, 0.02);
  const auto init = nnlif::testing::gaussian(g, 0.0, 0.5);
  SweepOptions o;
  o.sample_every = 0.05;
  const auto one = eps_sweep(p, init, {0.1, 0.05, 0.02}, 0.3, o);
  o.threads = 3;
  const auto three = eps_sweep(p, init, {0.1, 0.05, 0.02}, 0.3, o);
  REQUIRE(one.members.size() == 3);
  CHECK(one.tau.size() == 7);
  CHECK(one.cauchy.size() == 2);
  CHECK(one.max_qm_error < 1e-8);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(one.members[k].eps == three.members[k].eps);
    for (std::size_t j = 0; j < one.tau.size(); ++j)
      CHECK(one.members[k].traj.samples[j].moments.tail_mass == three.members[k].traj.samples[j].moments.tail_mass);
  }
  for (std::size_t j = 0; j < one.tau.size(); ++j) {
    double lo = 1, hi = 0;
    for (const auto& m : one.members) {
      lo = std::min(lo, m.traj.samples[j].moments.tail_mass);
      hi = std::max(hi, m.traj.samples[j].moments.tail_mass);
    }
    CHECK(one.m_spread[j] == doctest::Approx(hi - lo).epsilon(1e-14));
  }
}

TEST_CASE("eps sweep: preconditions") {
  const auto p = params(0.3);
  const auto g = make_grid(p, -4.0, 3.0, 0.02);
  const auto init = nnlif::testing::gaussian(g, 0.0, 0.5);
  CHECK_THROWS_AS(eps_sweep(p, init, {0.1}, 0.3), ParameterError);
  CHECK_THROWS_AS(eps_sweep(p, init, {0.05, 0.1}, 0.3), ParameterError);
  CHECK_THROWS_AS(eps_sweep(p, init, {0.1, -0.1}, 0.3), ParameterError);
}

TEST_CASE("chain: smooth data without excitation has no events") {
  const auto p = params(0);
  const auto g = make_grid(p, -4.0, 3.0, 0.02);
  ChainOptions o;
  o.eps = 1e-2;
  o.sample_every = 0.05;
  const auto r = chain_blowups(nnlif::testing::gaussian(g, 0.0, 0.5), p, 0.5, o);
  CHECK(r.events.empty());
  CHECK_FALSE(r.ended_eternal);
  CHECK(r.tau_reached == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.lifespan_estimate > 0);
  auto half = nnlif::testing::gaussian(g, 0.0, 0.5);
  half.values *= 0.5;
  CHECK_THROWS_AS(chain_blowups(half, p, 0.5, o), ParameterError);
}

TEST_CASE("chain: a near-threshold block triggers a finite event") {
  const auto p = params(1);
  const auto g = make_grid(p, -4.0, 3.0, 0.005);
  ChainOptions o;
  o.eps = 1e-3;
  o.sample_every = 0.01;
  const auto r = chain_blowups(nnlif::testing::block_near_threshold(g), p, 0.5, o);
  REQUIRE_FALSE(r.events.empty());
  CHECK(r.events.front().classification == BlowupClass::finite);
  CHECK(r.events.front().tau1 <= 0.02);
  CHECK(r.events.front().delta_tau == doctest::Approx(0.2).epsilon(0.1));
}

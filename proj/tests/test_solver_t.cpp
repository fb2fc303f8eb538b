#include <doctest.h>

#include <cmath>

#include <nnlif/green.hpp>
#include <nnlif/solver_t.hpp>

#include "support.hpp"

using namespace nnlif;
using nnlif::testing::params;

TEST_CASE("firing rate from the tail mass") {
  const auto g = make_grid(params(0), -4.0, 3.0, 0.01);
  const auto p = params(0).with_eps(0.01);
  const auto half = project_density<double>(g, [](double v) { return v >= 0.5 && v < 1.5 ? 1.0 : 0.0; }).density;
  CHECK(compute_N(half, p) == doctest::Approx(50.0).epsilon(1e-12));
  const auto all = project_density<double>(g, [](double v) { return v >= 1.0 && v < 2.0 ? 1.0 : 0.0; }).density;
  CHECK(compute_N(all, p) == doctest::Approx(100.0).epsilon(1e-12));
  const auto none = project_density<double>(g, [](double v) { return v >= 0 && v < 1 ? 1.0 : 0.0; }).density;
  CHECK(compute_N(none, p) == 0.0);
}

TEST_CASE("linear run: bounded rate and conserved mass") {
  const auto p = params(0).with_eps(0.1);
  const auto g = make_grid(p, -4.0, 3.0, 0.01);
  const double t_end = 2.0;
  const auto tr = run_t(p, nnlif::testing::gaussian(g, 0.0, 0.5), t_end, 0.05);
  CHECK(tr.max_mass_error <= 1e-10);
  CHECK(tr.min_density >= 0);
  CHECK(tr.max_rate <= 1 / 0.1);
  const double fired = tr.samples.back().int_n;
  CHECK(fired >= 0);
  CHECK(fired <= t_end / 0.1);
  CHECK(tr.samples.back().t == doctest::Approx(t_end).epsilon(1e-14));
  for (std::size_t k = 1; k < tr.samples.size(); ++k) CHECK(tr.samples[k].int_n >= tr.samples[k - 1].int_n);
}

TEST_CASE("auxiliary split: p_not + p_spike = p and the pointwise orderings") {
  const auto p = params(0.5).with_eps(0.05);
  const auto g = make_grid(p, -4.0, 3.0, 0.01);
  TRunOptions o;
  o.with_auxiliaries = true;
  const auto tr = run_t(p, nnlif::testing::gaussian(g, 0.3, 0.4), 1.0, 0.05, o);
  REQUIRE(tr.final_aux.has_value());
  double prev_not = 2.0;
  for (const auto& s : tr.samples) {
    REQUIRE(s.aux.has_value());
    CHECK(s.aux->split_l1 <= 1e-8);
    CHECK(s.aux->not_excess <= 1e-12);
    CHECK(s.aux->spike_excess <= 1e-12);
    CHECK(s.aux->not_mass <= prev_not + 1e-14);
    CHECK(s.aux->spike_mass == doctest::Approx(1.0 - s.aux->not_mass).epsilon(1e-9));
    prev_not = s.aux->not_mass;
  }
}

TEST_CASE("p_bar driven by a prescribed rate matches the Duhamel formula") {
  const auto p = params(1);
  const auto g = make_grid(p, -4.0, 3.0, 0.01);
  const auto rate = RateInput::constant(1.0);
  const auto fv = run_pbar(p, g, rate, 1.0);
  const auto exact = duhamel_pbar(rate, 1.0, g, p);
  CHECK(fv.injected == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fv.density.mass() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK((fv.density.values - exact.values).norm() / exact.values.norm() < 0.02);
}

TEST_CASE("roundtrip: linear run inverts the clock change") {
  const auto p = params(0).with_eps(0.1);
  const auto g = make_grid(p, -4.0, 3.0, 0.01);
  const auto init = nnlif::testing::gaussian(g, 0.0, 0.5);
  const auto tt = run_t(p, init, 2.0, 1e-3);
  const auto ta = run_tau(p, init, 0.5, 0.01);
  const auto r = timescale_roundtrip(tt, ta);
  CHECK(r.tau_range == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.max_identity_error <= 0.01 * r.tau_range);
  CHECK(r.max_rate_rel_error <= 0.05);
}

TEST_CASE("roundtrip: the plateau compresses tau into an eps-short t interval") {
  const auto p = params(2).with_eps(1e-3);
  const auto g = make_default_grid(p, 0.01);
  const auto tr = run_tau(p, plateau_steady_state(p, g).normalized(), 2.0, 0.1);
  // Oracle: t(tau) = eps tau / M with M = 1/2.
  CHECK(tr.samples.back().int_q == doctest::Approx(2 * 1e-3 * 2.0).epsilon(0.01));
}

TEST_CASE("roundtrip: mismatched parameters are rejected") {
  const auto p = params(0).with_eps(0.1);
  const auto g = make_grid(p, -4.0, 3.0, 0.02);
  const auto init = nnlif::testing::gaussian(g, 0.0, 0.5);
  const auto tt = run_t(p, init, 0.2, 0.05);
  const auto ta = run_tau(p.with_eps(0.2), init, 0.2, 0.05);
  CHECK_THROWS_AS(timescale_roundtrip(tt, ta), ParameterError);
}

TEST_CASE("integrated firing lower bound is finite for a firing run") {
  const auto p = params(0).with_eps(0.1);
  const auto g = make_grid(p, -4.0, 3.0, 0.02);
  const auto tr = run_t(p, nnlif::testing::gaussian(g, 0.0, 0.5), 1.5, 0.01);
  const double c = firing_lower_bound_constant(tr, {0.05, 0.1, 0.2, 0.4});
  CHECK(std::isfinite(c));
  CHECK(c > 0);
  CHECK_THROWS_AS(firing_lower_bound_constant(tr, {0.5}), ParameterError);
  CHECK_THROWS_AS(firing_lower_bound_constant(tr, {0.0}), ParameterError);
}

TEST_CASE("run_t: preconditions") {
  const auto p = params(0).with_eps(0.1);
  const auto g = make_grid(p, -4.0, 3.0, 0.02);
  auto d = nnlif::testing::gaussian(g, 0.0, 0.5);
  CHECK_THROWS_AS(run_t(params(0), d, 1.0, 0.1), ParameterError);
  d.values *= 0.5;
  CHECK_THROWS_AS(run_t(p, d, 1.0, 0.1), ParameterError);
}

#include <doctest.h>

#include <cmath>
#include <sstream>

#include <nnlif/errors.hpp>
#include <nnlif/quadrature.hpp>
#include <nnlif/rate_input.hpp>

using namespace nnlif;

TEST_CASE("quadrature: smooth, endpoint-singular and kinked integrands") {
  const auto r1 = quad::integrate([](double x) { return std::exp(x); }, 0.0, 1.0);
  CHECK(r1.converged);
  CHECK(r1.value == doctest::Approx(std::exp(1.0) - 1).epsilon(1e-14));
  const auto r2 = quad::integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0);
  CHECK(r2.value == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  const auto r3 = quad::integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, {}, {0.3});
  CHECK(r3.value == doctest::Approx(0.29).epsilon(1e-14));
  CHECK(r3.intervals <= 3);
  const auto kinks = [](double x) { return std::abs(x - 0.3) + std::abs(x - 0.7); };
  const auto sorted = quad::integrate(kinks, 0.0, 1.0, {}, {0.3, 0.7});
  const auto unsorted = quad::integrate(kinks, 0.0, 1.0, {}, {0.7, 0.3});
  CHECK(sorted.value == doctest::Approx(0.58).epsilon(1e-14));
  CHECK(unsorted.value == sorted.value);
}

TEST_CASE("quadrature: vector-valued integrand") {
  const auto r = quad::integrate(
      [](double x) {
        Eigen::Vector3d v(1.0, x, x * x);
        return v;
      },
      0.0, 1.0);
  CHECK(r.value[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.value[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.value[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("rate: constant closed forms") {
  const auto r = RateInput::constant(2.5);
  CHECK(r(0.7) == 2.5);
  CHECK(r.integral(0.2, 1.7) == doctest::Approx(3.75).epsilon(1e-14));
  CHECK(r.exp_weighted(0.2, 1.7) == doctest::Approx(2.5 * (1 - std::exp(-1.5))).epsilon(1e-14));
  CHECK(r.integral(1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(r.integral(1.0, 0.5), ParameterError);
}

TEST_CASE("rate: piecewise-linear closed forms against quadrature") {
  const auto r = RateInput::piecewise_linear({0.0, 0.3, 0.3, 0.6, 1.2}, {0.5, 1.0, 2.0, 0.2, 1.4});
  CHECK(r(0.15) == doctest::Approx(0.75));
  CHECK(r(0.3) == 2.0);
  CHECK(r(-1.0) == 0.5);
  CHECK(r(5.0) == 1.4);
  const std::vector<std::pair<double, double>> windows{{0.0, 1.0}, {0.1, 0.45}, {0.3, 2.0}, {-0.5, 0.2}};
  for (auto [s, t] : windows) {
    const auto cuts = r.breakpoints(s, t);
    const double plain = quad::integrate([&](double u) { return r(u); }, s, t, {}, cuts).value;
    const double weighted = quad::integrate([&](double u) { return std::exp(u - t) * r(u); }, s, t, {}, cuts).value;
    CHECK(r.integral(s, t) == doctest::Approx(plain).epsilon(1e-12));
    CHECK(r.exp_weighted(s, t) == doctest::Approx(weighted).epsilon(1e-12));
  }
}

TEST_CASE("rate: inverse square root profile") {
  const double c = 2.0, T = 1.0;
  const auto r = RateInput::inverse_sqrt(c, T);
  CHECK(r.is_singular());
  CHECK(r(0.75) == doctest::Approx(4.0));
  CHECK(r.integral(0.0, 0.75) == doctest::Approx(2 * c * (1.0 - 0.5)).epsilon(1e-14));
  const double weighted =
      quad::integrate([&](double u) { return std::exp(u - 0.99) * r(u); }, 0.0, 0.99).value;
  CHECK(r.exp_weighted(0.0, 0.99) == doctest::Approx(weighted).epsilon(1e-10));
  CHECK_THROWS_AS(r(1.0), ParameterError);
  CHECK_THROWS_AS(r.integral(0.0, 1.5), ParameterError);
}

TEST_CASE("rate: scaling and validation") {
  const auto r = RateInput::piecewise_linear({0, 1}, {0, 2}).scaled(10);
  CHECK(r.integral(0, 1) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK_THROWS_AS(RateInput::piecewise_linear({0, 1}, {1, -1}), ParameterError);
  CHECK_THROWS_AS(RateInput::piecewise_linear({1, 0}, {1, 1}), ParameterError);
  CHECK_THROWS_AS(RateInput::piecewise_linear({}, {}), ParameterError);
  CHECK_THROWS_AS(RateInput::constant(1).scaled(-1), ParameterError);
}

TEST_CASE("rate table: two-column CSV") {
  std::istringstream in("t,N\n0,1\n0.5,3\n1,0\n");
  const auto r = read_rate_table(in);
  CHECK(r.times().size() == 3);
  CHECK(r(0.25) == doctest::Approx(2.0));
  CHECK(r.integral(0, 1) == doctest::Approx(1.75).epsilon(1e-14));
  std::istringstream bad("t,N\n0,1\nx,2\n");
  CHECK_THROWS_AS(read_rate_table(bad), ParameterError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_rate_table(empty), ParameterError);
  CHECK_THROWS_AS(read_rate_table(std::string("/nonexistent/rates.csv")), ParameterError);
}

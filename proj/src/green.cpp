#include <nnlif/green.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nnlif/quadrature.hpp>

namespace nnlif {

double ou_mean(double s, double t, double x0, const RateInput& rate, const ModelParams& params) {
  return std::exp(s - t) * x0 + params.b * rate.exp_weighted(s, t);
}

double ou_variance(double s, double t, double a) { return -a * std::expm1(-2.0 * (t - s)); }

GreenValue ou_green(double s, double t, double v, const RateInput& rate, const ModelParams& params) {
  params.validate();
  if (!(s >= 0 && t > s)) throw ParameterError("ou_green: need t > s >= 0");
  GreenValue g;
  g.mean = ou_mean(s, t, params.v_reset, rate, params);
  g.variance = ou_variance(s, t, params.a);
  const double z = v - g.mean;
  g.density = std::exp(-z * z / (2.0 * g.variance)) / std::sqrt(2.0 * std::numbers::pi * g.variance);
  return g;
}

namespace {

// Mean difference V(s1, t) - V(s2, t) without cancellation for s1 close to s2.
double mean_gap(double s1, double s2, double t, const RateInput& rate, const ModelParams& params) {
  if (s1 > s2) return -mean_gap(s2, s1, t, rate, params);
  const double e2 = std::exp(s2 - t);
  return e2 * (std::expm1(s1 - s2) * params.v_reset + params.b * rate.exp_weighted(s1, s2));
}

double overlap_unchecked(double s1, double s2, double t, const RateInput& rate,
                         const ModelParams& params) {
  const double var = ou_variance(s1, t, params.a) + ou_variance(s2, t, params.a);
  const double d = mean_gap(s1, s2, t, rate, params);
  return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

// The substitution s = t - u^2 removes the endpoint behavior at s = t; the
// rate knots map to u = sqrt(t - s_k).
std::vector<double> u_cuts(const RateInput& rate, double t) {
  std::vector<double> cuts;
  for (double sk : rate.breakpoints(0.0, t)) cuts.push_back(std::sqrt(t - sk));
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

quad::Options to_options(const GreenTolerance& tol, double abs_scale = 1.0) {
  quad::Options o;
  o.abs_tol = tol.abs_tol * abs_scale;
  o.rel_tol = tol.rel_tol;
  o.max_intervals = 20000;
  return o;
}

void check_time(double t) {
  if (!(t > 0)) throw ParameterError("green oracle: t must be positive");
}

}  // namespace

double pair_overlap(double s1, double s2, double t, const RateInput& rate, const ModelParams& params) {
  params.validate();
  if (!(s1 >= 0 && s2 >= 0 && t > std::max(s1, s2)))
    throw ParameterError("pair_overlap: need t > max(s1, s2) and s1, s2 >= 0");
  return overlap_unchecked(s1, s2, t, rate, params);
}

DensityField duhamel_pbar(const RateInput& rate, double t, const VoltageGrid& grid,
                          const ModelParams& params, const GreenTolerance& tol) {
  params.validate();
  check_time(t);
  const Eigen::Index n = grid.n_cells;
  Eigen::VectorXd edges(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) edges[i] = grid.interface(i);
  auto f = [&](double u) -> Eigen::VectorXd {
    const double s = t - u * u;
    const double mean = ou_mean(s, t, params.v_reset, rate, params);
    const double sd = std::sqrt(ou_variance(s, t, params.a));
    Eigen::VectorXd cdf(n + 1);
    for (Eigen::Index i = 0; i <= n; ++i)
      cdf[i] = 0.5 * std::erfc(-(edges[i] - mean) / (sd * std::numbers::sqrt2));
    return (2.0 * u * rate(s) / grid.dv) * (cdf.tail(n) - cdf.head(n));
  };
  const auto r = quad::integrate(f, 0.0, std::sqrt(t), to_options(tol, 1.0 / grid.dv), u_cuts(rate, t));
  return DensityField(grid, r.value.cwiseMax(0.0));
}

double duhamel_pbar_at(const RateInput& rate, double t, double v, const ModelParams& params,
                       const GreenTolerance& tol) {
  params.validate();
  check_time(t);
  auto f = [&](double u) {
    const double s = t - u * u;
    const double mean = ou_mean(s, t, params.v_reset, rate, params);
    const double var = ou_variance(s, t, params.a);
    const double z = v - mean;
    return 2.0 * u * rate(s) * std::exp(-z * z / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
  };
  return quad::integrate(f, 0.0, std::sqrt(t), to_options(tol), u_cuts(rate, t)).value;
}

double duhamel_l2_norm_sq(const RateInput& rate, double t, const ModelParams& params,
                          const GreenTolerance& tol) {
  params.validate();
  check_time(t);
  const double vr = params.v_reset;
  const double shift = params.b * rate.exp_weighted(0.0, t);
  const double spread = 12.0 * std::sqrt(params.a);
  const double lo = std::min({vr, vr * std::exp(-t)}) + std::min(0.0, shift) - spread;
  const double hi = std::max({vr, vr * std::exp(-t)}) + std::max(0.0, shift) + spread;
  GreenTolerance inner = tol;
  inner.rel_tol = tol.rel_tol * 0.1;
  inner.abs_tol = tol.abs_tol * 0.1;
  auto f = [&](double v) {
    const double p = duhamel_pbar_at(rate, t, v, params, inner);
    return p * p;
  };
  return quad::integrate(f, lo, hi, to_options(tol), {vr}).value;
}

double l2_identity(const RateInput& rate, double t, const ModelParams& params,
                   const GreenTolerance& tol) {
  params.validate();
  check_time(t);
  const double top = std::sqrt(t);
  const std::vector<double> cuts = u_cuts(rate, t);
  GreenTolerance inner_tol = tol;
  inner_tol.rel_tol = tol.rel_tol * 0.1;
  inner_tol.abs_tol = tol.abs_tol * 0.1;
  // u1 >= u2 is s1 <= s2.
  auto outer = [&](double u2) {
    const double s2 = t - u2 * u2;
    const double n2 = rate(s2);
    if (n2 == 0.0) return 0.0;
    auto inner = [&](double u1) {
      const double s1 = t - u1 * u1;
      return 4.0 * u1 * u2 * rate(s1) * n2 * overlap_unchecked(s1, s2, t, rate, params);
    };
    return quad::integrate(inner, u2, top, to_options(inner_tol), cuts).value;
  };
  return 2.0 * quad::integrate(outer, 0.0, top, to_options(tol), cuts).value;
}

DensityField toy_m1(const ModelParams& params, double tau, const VoltageGrid& grid) {
  if (!(params.b > 0)) throw ParameterError("toy m1: requires b > 0");
  if (!(tau >= 0)) throw ParameterError("toy m1: tau must be non-negative");
  const double lo = params.v_reset, hi = params.v_reset + params.b * tau;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(grid.n_cells);
  for (Eigen::Index i = 0; i < grid.n_cells; ++i) {
    const double a = std::max(lo, grid.interface(i)), b = std::min(hi, grid.interface(i + 1));
    if (b > a) v[i] = (b - a) / (params.b * grid.dv);
  }
  return DensityField(grid, std::move(v));
}

double toy_q3_value(const RateInput& rate, double t, double v, const ModelParams& params,
                    const GreenTolerance& tol) {
  check_time(t);
  auto f = [&](double u) {
    const double s = t - u * u;
    const double z = v - (params.v_reset + params.b * rate.integral(s, t));
    // ds = 2u du and the Gaussian normalization 1/sqrt(4 pi a u^2) cancel the u.
    return 2.0 * rate(s) * std::exp(-z * z / (4.0 * params.a * u * u)) /
           std::sqrt(4.0 * std::numbers::pi * params.a);
  };
  return quad::integrate(f, 0.0, std::sqrt(t), to_options(tol), u_cuts(rate, t)).value;
}

ToyReport toy_solutions(ToyKind kind, const ModelParams& params, double t_or_tau,
                        const ToyOptions& options) {
  ToyReport r;
  r.kind = kind;
  switch (kind) {
    case ToyKind::m1: {
      if (!options.grid) throw ParameterError("toy m1: a grid is required");
      r.profile = toy_m1(params, t_or_tau, *options.grid);
      r.sup_norm = r.profile->values.maxCoeff();
      return r;
    }
    case ToyKind::q2_dirac: {
      if (!(params.v_reset > 0)) throw ParameterError("toy q2: requires V_R > 0");
      if (!(params.b > 0)) throw ParameterError("toy q2: requires b > 0");
      if (!(t_or_tau >= 0)) throw ParameterError("toy q2: t must be non-negative");
      // With b N = V_R the drift -v + b N vanishes at V_R, so every reset stays put.
      const RateInput rate = RateInput::constant(params.v_reset / params.b);
      r.dirac_coefficient = rate.integral(0.0, t_or_tau);
      r.degenerate = -params.v_reset + params.b * rate(0.0) == 0.0;
      return r;
    }
    case ToyKind::q3_blowup: {
      if (params.a != 0.5) throw ParameterError("toy q3: requires a = 1/2");
      if (!(t_or_tau > 0)) throw ParameterError("toy q3: T must be positive");
      if (!(options.eta0 > 0 && options.eta0 < t_or_tau))
        throw ParameterError("toy q3: eta0 must lie in (0, T)");
      if (options.halvings < 1) throw ParameterError("toy q3: need at least one halving");
      const RateInput rate = RateInput::inverse_sqrt(2.0, t_or_tau);
      GreenTolerance tol;
      tol.rel_tol = 1e-11;
      double eta = options.eta0;
      for (int k = 0; k <= options.halvings; ++k, eta *= 0.5) {
        r.etas.push_back(eta);
        r.values.push_back(toy_q3_value(rate, t_or_tau - eta, params.v_reset, params, tol));
      }
      for (std::size_t k = 0; k + 1 < r.values.size(); ++k) r.growth.push_back(r.values[k + 1] / r.values[k] - 1.0);
      return r;
    }
  }
  throw ParameterError("toy_solutions: unknown kind");
}

}  // namespace nnlif

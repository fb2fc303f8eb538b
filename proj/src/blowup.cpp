#include <nnlif/blowup.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nnlif {

std::string to_string(BlowupClass c) {
  switch (c) {
    case BlowupClass::none: return "none";
    case BlowupClass::finite: return "finite";
    case BlowupClass::eternal: return "eternal";
  }
  return "unknown";
}

namespace {

constexpr double kTailTolerance = 1e-12;

void check_start(const DensityField& n_pre, const ModelParams& params, double initial_tail) {
  params.validate();
  if (!(params.b > 0)) throw ParameterError("blow-up analytics requires b > 0");
  if (n_pre.tail_mass() > kTailTolerance)
    throw ParameterError("blow-up analytics: n_pre has mass above V_F");
  if (!(initial_tail >= 0)) throw ParameterError("blow-up analytics: initial tail mass must be >= 0");
  const double vf = n_pre.grid.interface(n_pre.grid.idx_vf);
  if (std::abs(vf - params.v_fire) > 1e-9 * std::max(1.0, std::abs(vf)))
    throw ParameterError("blow-up analytics: grid threshold does not match V_F");
}

double reset_span(const ModelParams& params) { return params.gap() / params.b; }

double m_unchecked(const DensityField& n_pre, double delta, const ModelParams& params,
                   double initial_tail) {
  const double vf = params.v_fire;
  return initial_tail + n_pre.integrate(vf - params.b * delta, vf) -
         std::min(delta, reset_span(params));
}

}  // namespace

double m_of_delta(const DensityField& n_pre, double delta, const ModelParams& params,
                  double initial_tail) {
  check_start(n_pre, params, initial_tail);
  if (!(delta >= 0)) throw ParameterError("m_of_delta: delta must be non-negative");
  return m_unchecked(n_pre, delta, params, initial_tail);
}

double blowup_interval(const DensityField& n_pre, const ModelParams& params, double initial_tail) {
  check_start(n_pre, params, initial_tail);
  const double span = reset_span(params);
  const double h = n_pre.grid.dv / params.b;
  const double tol = 1e-15 * std::max(1.0, span);
  auto m = [&](double d) { return m_unchecked(n_pre, d, params, initial_tail); };

  // M must become positive immediately; otherwise nothing leaves through V_F.
  const double first = std::min(h, span);
  if (!(m(0.5 * first) > kTailTolerance) && !(initial_tail > kTailTolerance)) return 0.0;

  double lo = 0.0;
  const auto steps = static_cast<long long>(std::ceil(span / h - 1e-9));
  for (long long k = 1; k <= steps; ++k) {
    const double hi = std::min(static_cast<double>(k) * h, span);
    if (m(hi) <= kTailTolerance) {
      double a = lo, b = hi;
      while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        if (m(mid) > kTailTolerance) a = mid;
        else b = mid;
      }
      return b;
    }
    lo = hi;
  }
  return std::numeric_limits<double>::infinity();
}

DensityField post_profile(const DensityField& n_pre, double delta_tau, const ModelParams& params,
                          double mass_tolerance) {
  params.validate();
  if (!(params.b > 0)) throw ParameterError("post_profile: requires b > 0");
  if (!std::isfinite(delta_tau) || delta_tau < 0)
    throw ParameterError("post_profile: delta_tau must be finite and non-negative");
  const VoltageGrid& g = n_pre.grid;
  const double shift = params.b * delta_tau;
  const double ramp_hi = params.v_reset + shift;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(g.n_cells);
  for (Eigen::Index i = 0; i < g.idx_vf; ++i) {
    const double x0 = g.interface(i), x1 = g.interface(i + 1);
    double s = n_pre.integrate(x0 - shift, x1 - shift);
    const double lo = std::max(x0, params.v_reset), hi = std::min(x1, ramp_hi);
    if (hi > lo) s += (hi - lo) / params.b;
    v[i] = s / g.dv;
  }
  DensityField out(g, std::move(v));
  const double mass = out.mass();
  if (std::abs(mass - 1.0) > mass_tolerance) {
    std::ostringstream msg;
    msg << "post_profile: mass " << mass << " differs from 1 by more than " << mass_tolerance;
    throw ConsistencyError(msg.str());
  }
  return out;
}

BlowupEvent analyze_blowup(const DensityField& n_pre, const ModelParams& params, double tau1,
                           double initial_tail) {
  BlowupEvent e;
  e.tau1 = tau1;
  e.n_pre = n_pre;
  e.initial_tail_mass = initial_tail;
  e.delta_tau = blowup_interval(n_pre, params, initial_tail);
  if (std::isinf(e.delta_tau)) {
    e.classification = BlowupClass::eternal;
    return e;
  }
  e.classification = e.delta_tau > 0 ? BlowupClass::finite : BlowupClass::none;
  // A plateau-type start carries extra mass above V_F, so the unit-mass check
  // only applies to genuine starts.
  const double tol = initial_tail > 0 ? std::numeric_limits<double>::infinity() : 1e-10;
  e.n_post = post_profile(n_pre, e.delta_tau, params, tol);
  e.post_mass = e.n_post->mass();
  return e;
}

EffectiveSeries effective_evolve(const DensityField& n_pre, double tau_span,
                                 const ModelParams& params, int n_samples, double initial_tail) {
  check_start(n_pre, params, initial_tail);
  if (n_samples < 2) throw ParameterError("effective_evolve: need at least two samples");
  if (!(tau_span > 0)) throw ParameterError("effective_evolve: tau_span must be positive");
  const double vf = params.v_fire;
  auto trace = [&](double d) {
    // Left limit at V_F of the transported profile plus the ramp.
    const double x = vf - params.b * d;
    const Eigen::Index i = n_pre.grid.cell_of(x - 1e-12 * n_pre.grid.dv);
    double tr = (x > n_pre.grid.v_min) ? n_pre.values[i] : 0.0;
    if (params.v_reset + params.b * d >= vf) tr += 1.0 / params.b;
    return tr;
  };
  EffectiveSeries s;
  const double h = tau_span / (n_samples - 1);
  for (int k = 0; k < n_samples; ++k) {
    const double d = k * h;
    s.delta.push_back(d);
    s.below.push_back(post_profile(n_pre, d, params, std::numeric_limits<double>::infinity()));
    s.tail_mass.push_back(m_unchecked(n_pre, d, params, initial_tail));
    s.trace.push_back(trace(d));
  }
  double sum = 0;
  for (int k = 0; k + 1 < n_samples; ++k) {
    const double fd = (s.tail_mass[k + 1] - s.tail_mass[k]) / h;
    const double r = std::abs(fd - (params.b * trace((k + 0.5) * h) - 1.0));
    s.max_dm_residual = std::max(s.max_dm_residual, r);
    sum += r * h;
  }
  s.mean_dm_residual = sum / tau_span;
  return s;
}

DirichletLossReport dirichlet_loss_check(const DensityField& n_pre, const ModelParams& params,
                                         const std::vector<double>& deltas, double tolerance) {
  check_start(n_pre, params, 0.0);
  DirichletLossReport r;
  r.deltas = deltas;
  r.tolerance = tolerance;
  r.passed = true;
  for (double d : deltas) {
    if (!(d > 0)) throw ParameterError("dirichlet_loss_check: deltas must be positive");
    const double ratio = params.b * n_pre.integrate(params.v_fire - d, params.v_fire) / d;
    r.ratios.push_back(ratio);
    if (ratio < 1.0 - tolerance) r.passed = false;
  }
  return r;
}

DensityField below_threshold(const DensityField& d) {
  DensityField out = d;
  out.values.tail(d.grid.n_cells - d.grid.idx_vf).setZero();
  return out;
}

}  // namespace nnlif

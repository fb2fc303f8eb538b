#include <nnlif/solver_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nnlif/fv_operators.hpp>

namespace nnlif {

double compute_N(const DensityField& d, const ModelParams& params) {
  return d.tail_mass() / params.require_eps();
}

double step_linear(Eigen::Ref<Eigen::VectorXd> values, const VoltageGrid& grid,
                   const ModelParams& params, double drift, double dt, bool absorb) {
  advect_upwind(values, grid, 1.0, drift, dt);
  diffuse_implicit(values, grid, params.a, dt);
  if (!absorb) return 0.0;
  return absorb_above_threshold(values, grid, std::exp(-dt / params.require_eps()));
}

namespace {

double l1_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double dv) {
  return (x - y).cwiseAbs().sum() * dv;
}

double max_excess(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return std::max(0.0, (x - y).maxCoeff());
}

double adaptive_dt(const VoltageGrid& g, double drift, const TRunOptions& o) {
  if (o.dt) return *o.dt;
  const double speed = max_interface_speed(g, 1.0, drift);
  return speed > 0 ? std::min(o.cfl * g.dv / speed, o.dt_max) : o.dt_max;
}

// Linear interpolation of y(x) on sorted x; clamps outside.
template <typename Get>
double interp(const std::vector<double>& xs, double x, Get y) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (x <= xs.front()) return y(0);
  if (x >= xs.back()) return y(xs.size() - 1);
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return y(k - 1) + w * (y(k) - y(k - 1));
}

}  // namespace

TTrajectory run_t(const ModelParams& params, const DensityField& init, double t_end,
                  double sample_every, const TRunOptions& options) {
  params.validate();
  const double eps = params.require_eps();
  if (std::abs(init.mass() - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "run_t: initial mass must be 1, got " << init.mass();
    throw ParameterError(msg.str());
  }
  if (!(sample_every > 0)) throw ParameterError("run_t: sample_every must be positive");
  if (!(t_end >= 0)) throw ParameterError("run_t: t_end must be non-negative");
  const VoltageGrid& g = init.grid;

  TTrajectory traj;
  traj.params = params;
  Eigen::VectorXd p = init.values;
  Eigen::VectorXd p_not, p_spike, p_bar;
  if (options.with_auxiliaries) {
    p_not = p;
    p_spike = Eigen::VectorXd::Zero(g.n_cells);
    p_bar = Eigen::VectorXd::Zero(g.n_cells);
  }
  double t = 0;
  double int_n = 0;
  double rate = compute_N(init, params);
  traj.min_density = init.min_value();
  traj.max_mass_error = std::abs(init.mass() - 1.0);
  traj.max_rate = rate;

  auto record = [&]() {
    TSample s;
    s.t = t;
    DensityField d(g, p);
    s.n_rate = rate;
    s.moments = moments(d);
    s.int_n = int_n;
    if (options.with_auxiliaries) {
      AuxiliarySample a;
      a.not_mass = p_not.sum() * g.dv;
      a.spike_mass = p_spike.sum() * g.dv;
      a.bar_mass = p_bar.sum() * g.dv;
      a.bar_l2 = p_bar.squaredNorm() * g.dv;
      a.split_l1 = l1_distance(p_not + p_spike, p, g.dv);
      a.not_excess = max_excess(p_not, p);
      a.spike_excess = max_excess(p_spike, p_bar);
      s.aux = a;
    }
    traj.samples.push_back(s);
    if (options.store_snapshots) traj.snapshots.push_back(d);
  };

  record();
  long long next_index = 1;
  const double tol = 1e-12 * std::max(1.0, t_end);
  while (t < t_end - tol) {
    const double next_sample = std::min(static_cast<double>(next_index) * sample_every, t_end);
    const double drift = params.b * rate;
    double dt = adaptive_dt(g, drift, options);
    if (!options.dt) dt = std::min(dt, options.eps_fraction * eps);
    bool lands = false;
    if (t + dt >= next_sample - tol) {
      dt = next_sample - t;
      lands = true;
    }
    const double removed = step_linear(p, g, params, drift, dt, true);
    deposit_at_reset(p, g, removed);
    if (options.with_auxiliaries) {
      step_linear(p_not, g, params, drift, dt, true);
      step_linear(p_spike, g, params, drift, dt, true);
      deposit_at_reset(p_spike, g, removed);
      step_linear(p_bar, g, params, drift, dt, false);
      deposit_at_reset(p_bar, g, removed);
    }
    check_nonnegative(p, "run_t");
    int_n += removed;
    t = lands ? next_sample : t + dt;
    rate = p.tail(g.n_cells - g.idx_vf).sum() * g.dv / eps;
    ++traj.steps;
    traj.max_mass_error = std::max(traj.max_mass_error, std::abs(p.sum() * g.dv - 1.0));
    traj.min_density = std::min(traj.min_density, p.minCoeff());
    traj.max_rate = std::max(traj.max_rate, rate);
    if (lands) {
      record();
      ++next_index;
    }
  }
  traj.final_state = TState{t, DensityField(g, p), rate};
  if (options.with_auxiliaries)
    traj.final_aux = AuxiliaryBundle{DensityField(g, p_not), DensityField(g, p_spike), DensityField(g, p_bar)};
  return traj;
}

PbarResult run_pbar(const ModelParams& params, const VoltageGrid& grid, const RateInput& rate,
                    double t_end, const TRunOptions& options) {
  params.validate();
  if (!(t_end > 0)) throw ParameterError("run_pbar: t_end must be positive");
  PbarResult out;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(grid.n_cells);
  double t = 0;
  const double tol = 1e-12 * std::max(1.0, t_end);
  while (t < t_end - tol) {
    // Speed bound from the rate at the current time, refined at the midpoint.
    double dt = adaptive_dt(grid, params.b * rate(t), options);
    dt = std::min(dt, t_end - t);
    double drift = params.b * rate(t + 0.5 * dt);
    const double dt_mid = adaptive_dt(grid, drift, options);
    if (dt_mid < dt) {
      dt = dt_mid;
      drift = params.b * rate(t + 0.5 * dt);
    }
    if (t + dt > t_end - tol) dt = t_end - t;
    step_linear(p, grid, params, drift, dt, false);
    const double injected = rate.integral(t, t + dt);
    deposit_at_reset(p, grid, injected);
    out.injected += injected;
    t += dt;
    ++out.steps;
  }
  check_nonnegative(p, "run_pbar");
  out.density = DensityField(grid, std::move(p));
  return out;
}

RoundtripReport timescale_roundtrip(const TTrajectory& traj_t, const TauTrajectory& traj_tau) {
  if (!traj_t.params.same_physics(traj_tau.params))
    throw ParameterError("timescale_roundtrip: trajectories use different parameters");
  if (traj_t.samples.size() < 2 || traj_tau.samples.size() < 2)
    throw ParameterError("timescale_roundtrip: need at least two samples per trajectory");
  const auto& ts = traj_t.samples;
  std::vector<double> t_axis;
  t_axis.reserve(ts.size());
  for (const auto& s : ts) t_axis.push_back(s.t);

  RoundtripReport r;
  const double tau0 = traj_tau.samples.front().tau;
  for (const auto& s : traj_tau.samples) {
    const double t_of_tau = s.int_q;
    if (t_of_tau > t_axis.back()) break;
    const double tau_back = interp(t_axis, t_of_tau, [&](std::size_t k) { return ts[k].int_n; });
    r.max_identity_error = std::max(r.max_identity_error, std::abs(tau_back - (s.tau - tau0)));
    r.tau_range = s.tau - tau0;
    const double m_t = interp(t_axis, t_of_tau, [&](std::size_t k) { return ts[k].moments.tail_mass; });
    r.max_tail_mismatch = std::max(r.max_tail_mismatch, std::abs(m_t - s.moments.tail_mass));
    if (!s.q_floored && s.q > 0) {
      const double n = interp(t_axis, t_of_tau, [&](std::size_t k) { return ts[k].n_rate; });
      if (n > 0) r.max_rate_rel_error = std::max(r.max_rate_rel_error, std::abs(n - 1.0 / s.q) / n);
    }
  }
  return r;
}

double firing_lower_bound_constant(const TTrajectory& traj, const std::vector<double>& windows) {
  const auto& s = traj.samples;
  if (s.size() < 2) throw ParameterError("firing_lower_bound_constant: need at least two samples");
  std::vector<double> t_axis;
  for (const auto& x : s) t_axis.push_back(x.t);
  double worst = 0;
  for (double w : windows) {
    if (!(w > 0 && w < 0.5)) throw ParameterError("firing_lower_bound_constant: windows must lie in (0, 1/2)");
    for (const auto& x : s) {
      if (x.t + w > t_axis.back() + 1e-12) break;
      const double fired = interp(t_axis, x.t + w, [&](std::size_t k) { return s[k].int_n; }) - x.int_n;
      if (!(fired > 0)) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, -w * std::log(fired));
    }
  }
  return worst;
}

}  // namespace nnlif

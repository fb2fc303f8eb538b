#include <nnlif/solver_tau.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nnlif/fv_operators.hpp>

namespace nnlif {

QValue compute_Q(const DensityField& d, const ModelParams& params, double m_floor) {
  const double eps = params.require_eps();
  const double m = d.tail_mass();
  if (m < m_floor) return {eps / m_floor, true};
  return {eps / m, false};
}

DensityField TauState::discharge_measure() const {
  const double m = density.tail_mass();
  if (!(m > 0)) throw DegenerateInputError("discharge_measure: no mass above V_F");
  DensityField s = DensityField::zeros(density.grid);
  const Eigen::Index n_tail = density.grid.n_cells - density.grid.idx_vf;
  s.values.tail(n_tail) = density.values.tail(n_tail) / m;
  return s;
}

TauState make_tau_state(const DensityField& init, const ModelParams& params, double m_floor) {
  params.validate();
  TauState s;
  s.density = init;
  const QValue q = compute_Q(init, params, m_floor);
  s.q = q.q;
  s.q_floored = q.floored;
  return s;
}

double advective_step_limit(const VoltageGrid& grid, const ModelParams& params, double q,
                            double cfl) {
  const double speed = max_interface_speed(grid, q, params.b);
  if (speed <= 0) return std::numeric_limits<double>::infinity();
  return cfl * grid.dv / speed;
}

namespace {

struct StepOutcome {
  Eigen::VectorXd values;
  double deficit{0};
};

StepOutcome advance(const TauState& state, double dtau, const ModelParams& params, double q,
                    const TauStepOptions& options) {
  const VoltageGrid& g = state.density.grid;
  StepOutcome out{state.density.values, 0.0};
  advect_upwind(out.values, g, q, params.b, dtau);
  diffuse_implicit(out.values, g, params.a * q, dtau);
  if (options.forced_q) {
    // Q is forced, absorption is switched off; the unit-rate reset remains.
    deposit_at_reset(out.values, g, dtau);
    return out;
  }
  const double m = out.values.tail(g.n_cells - g.idx_vf).sum() * g.dv;
  double removed = 0;
  if (m > dtau) {
    // exp(-Q_abs dtau / eps) with Q_abs chosen so exactly dtau leaves.
    removed = absorb_above_threshold(out.values, g, 1.0 - dtau / m);
  } else {
    removed = absorb_above_threshold(out.values, g, std::exp(-dtau / std::max(m, options.m_floor)));
    out.deficit = dtau - removed;
  }
  deposit_at_reset(out.values, g, removed);
  return out;
}

}  // namespace

TauState step_tau(const TauState& state, double dtau, const ModelParams& params,
                  const TauStepOptions& options) {
  const double eps = params.require_eps();
  if (!(dtau > 0)) throw StepError("step_tau: dtau must be positive");
  double q = options.forced_q ? *options.forced_q : state.q;
  StepOutcome out = advance(state, dtau, params, q, options);
  if (!options.forced_q) {
    for (int it = 0; it < options.picard_iterations; ++it) {
      const double m = out.values.tail(state.density.grid.n_cells - state.density.grid.idx_vf).sum() *
                       state.density.grid.dv;
      const double q_next = eps / std::max(m, options.m_floor);
      if (std::abs(q_next - q) <= options.picard_tolerance * q) break;
      q = q_next;
      out = advance(state, dtau, params, q, options);
    }
  }
  check_nonnegative(out.values, "step_tau");

  TauState next;
  next.tau = state.tau + dtau;
  next.density = DensityField(state.density.grid, std::move(out.values));
  next.clock_deficit = state.clock_deficit + out.deficit;
  if (options.forced_q) {
    next.q = *options.forced_q;
  } else {
    const QValue qv = compute_Q(next.density, params, options.m_floor);
    next.q = qv.q;
    next.q_floored = qv.floored;
  }
  return next;
}

std::array<double, 3> weak_form_rhs(const DensityField& d, const ModelParams& params, double q) {
  const double eps = params.require_eps();
  const VoltageGrid& g = d.grid;
  double m0 = 0, m1 = 0, m2 = 0, t0 = 0, t1 = 0, t2 = 0;
  for (Eigen::Index i = 0; i < g.n_cells; ++i) {
    const double v = g.center(i);
    const double w = d.values[i] * g.dv;
    m0 += w;
    m1 += v * w;
    m2 += v * v * w;
    if (i >= g.idx_vf) {
      t0 += w;
      t1 += v * w;
      t2 += v * v * w;
    }
  }
  const double vr = params.v_reset;
  return {1.0 - q * t0 / eps,
          params.b * m0 + vr + q * (-m1 - t1 / eps),
          2.0 * params.b * m1 + vr * vr + q * (2.0 * params.a * m0 - 2.0 * m2 - t2 / eps)};
}

namespace {

std::array<double, 3> psi_moments(const DensityField& d) {
  const Moments m = moments(d);
  return {m.mass, m.mean, m.second_moment};
}

double excess_second_moment(const DensityField& d, double v_fire) {
  const VoltageGrid& g = d.grid;
  double s = 0;
  for (Eigen::Index i = g.idx_vf; i < g.n_cells; ++i) {
    const double x = g.center(i) - v_fire;
    s += x * x * d.values[i];
  }
  return s * g.dv;
}

}  // namespace

TauTrajectory continue_tau(const ModelParams& params, const TauState& start, double tau_end,
                           double sample_every, const TauRunOptions& options) {
  params.validate();
  const double eps = params.require_eps();
  if (!(sample_every > 0)) throw ParameterError("run_tau: sample_every must be positive");
  if (!(tau_end >= start.tau)) throw ParameterError("run_tau: tau_end before start");
  const VoltageGrid& g = start.density.grid;

  TauTrajectory traj;
  traj.params = params;
  traj.min_density = start.density.min_value();
  traj.max_mass_error = std::abs(start.density.mass() - 1.0);

  TauState state = start;
  double int_q = 0;
  double tightness = 0;

  auto record = [&](const TauState& s) {
    TauSample smp;
    smp.tau = s.tau;
    smp.q = s.q;
    smp.q_floored = s.q_floored;
    smp.moments = moments(s.density);
    smp.int_q = int_q;
    smp.tightness = tightness;
    if (!s.q_floored && !options.step.forced_q)
      traj.max_qm_error = std::max(traj.max_qm_error, std::abs(s.q * smp.moments.tail_mass - eps) / eps);
    traj.samples.push_back(smp);
    if (options.store_snapshots) traj.snapshots.push_back(s.density);
    if (options.on_sample) options.on_sample(s);
  };

  record(state);
  const double t0 = start.tau;
  long long next_index = 1;
  const double span_tol = 1e-12 * std::max(1.0, std::abs(tau_end));
  bool at_sample = true;
  while (state.tau < tau_end - span_tol) {
    const double next_sample = std::min(t0 + static_cast<double>(next_index) * sample_every, tau_end);
    double dt;
    if (options.dtau) {
      dt = *options.dtau;
    } else {
      dt = std::min(advective_step_limit(g, params, options.step.forced_q ? *options.step.forced_q : state.q,
                                         options.cfl),
                    options.dtau_max);
      if (!options.step.forced_q) {
        const double m = std::max(state.density.tail_mass(), options.step.m_floor);
        dt = std::min(dt, options.tail_fraction * m);
      }
    }
    bool lands = false;
    if (state.tau + dt >= next_sample - span_tol) {
      dt = next_sample - state.tau;
      lands = true;
    }

    std::array<double, 3> before{}, rhs{};
    if (at_sample) {
      before = psi_moments(state.density);
      rhs = weak_form_rhs(state.density, params, options.step.forced_q ? *options.step.forced_q : state.q);
    }
    const double m_pre = state.density.tail_mass();
    if (m_pre > 0 && !state.q_floored)
      tightness += dt * excess_second_moment(state.density, params.v_fire) / m_pre;

    TauState next = step_tau(state, dt, params, options.step);
    int_q += 0.5 * (state.q + next.q) * dt;
    if (lands) next.tau = next_sample;
    ++traj.steps;
    traj.max_mass_error = std::max(traj.max_mass_error, std::abs(next.density.mass() - 1.0));
    traj.min_density = std::min(traj.min_density, next.density.min_value());

    if (at_sample) {
      const auto after = psi_moments(next.density);
      for (int k = 0; k < 3; ++k) traj.samples.back().weak_residual[k] = (after[k] - before[k]) / dt - rhs[k];
    }
    state = std::move(next);
    at_sample = false;
    if (lands) {
      record(state);
      at_sample = true;
      ++next_index;
    }
  }
  traj.final_state = state;
  return traj;
}

TauTrajectory run_tau(const ModelParams& params, const DensityField& init, double tau_end,
                      double sample_every, const TauRunOptions& options) {
  if (std::abs(init.mass() - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "run_tau: initial mass must be 1, got " << init.mass();
    throw ParameterError(msg.str());
  }
  TauState s = make_tau_state(init, params, options.step.m_floor);
  if (options.step.forced_q) s.q = *options.step.forced_q;
  return continue_tau(params, s, tau_end, sample_every, options);
}

QDiagnostics q_diagnostics(const TauTrajectory& traj, double delta) {
  if (traj.samples.empty()) throw ParameterError("q_diagnostics: empty trajectory");
  if (!(delta > 0 && delta <= 0.5)) throw ParameterError("q_diagnostics: delta must lie in (0, 1/2]");
  const auto& s = traj.samples;
  QDiagnostics out;
  out.lifespan_estimate = s.back().int_q - s.front().int_q;

  // Piecewise-linear interpolation of the cumulative integral.
  auto cumulative = [&](double tau) {
    auto it = std::lower_bound(s.begin(), s.end(), tau,
                               [](const TauSample& x, double t) { return x.tau < t; });
    if (it == s.begin()) return it->int_q;
    if (it == s.end()) return s.back().int_q;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (tau - lo.tau) / (hi.tau - lo.tau);
    return lo.int_q + w * (hi.int_q - lo.int_q);
  };
  const double tau_end = s.back().tau;
  if (tau_end - s.front().tau <= delta) {
    out.q_modulus = out.lifespan_estimate;
    return out;
  }
  for (const auto& x : s) {
    if (x.tau + delta > tau_end + 1e-12) break;
    out.q_modulus = std::max(out.q_modulus, cumulative(x.tau + delta) - x.int_q);
  }
  return out;
}

}  // namespace nnlif

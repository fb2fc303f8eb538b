#include <nnlif/experiments.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

namespace nnlif {

double blowup_threshold(double eps) { return std::max(10.0 * eps, 1e-6); }

std::vector<Segment> classify_segments(const TauTrajectory& traj, double threshold) {
  std::vector<Segment> out;
  for (const auto& s : traj.samples) {
    const bool bl = s.moments.tail_mass > threshold;
    if (out.empty() || out.back().blowup != bl) {
      if (!out.empty()) out.back().end = s.tau;
      out.push_back({s.tau, s.tau, bl});
    }
    out.back().end = s.tau;
  }
  return out;
}

double s_window_mass(const DensityField& d, double v_fire, double w) {
  const double m = d.tail_mass();
  if (!(m > 0)) return std::numeric_limits<double>::quiet_NaN();
  return d.integrate(v_fire, v_fire + w) / m;
}

bool bounded_under_refinement(const std::vector<double>& values, double growth_tol) {
  if (values.empty()) return false;
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return *std::max_element(values.begin(), values.end()) <= (1.0 + growth_tol) * values.front();
}

namespace {

[[noreturn]] void rethrow_tagged(std::exception_ptr ep, double eps) {
  std::ostringstream tag;
  tag << "eps=" << eps << ": ";
  try {
    std::rethrow_exception(ep);
  } catch (const StepError& e) {
    throw StepError(tag.str() + e.what());
  } catch (const SchemeError& e) {
    throw SchemeError(tag.str() + e.what());
  } catch (const ParameterError& e) {
    throw ParameterError(tag.str() + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(tag.str() + e.what());
  }
}

SweepMember run_member(const ModelParams& base, const DensityField& init, double eps, double tau_end,
                       const SweepOptions& options) {
  SweepMember m;
  m.eps = eps;
  const ModelParams p = base.with_eps(eps);
  TauRunOptions run = options.run;
  const double w = std::sqrt(eps);
  run.on_sample = [&](const TauState& s) {
    m.s_window_mass.push_back(s.density.tail_mass() > 0 ? s_window_mass(s.density, p.v_fire, w)
                                                        : std::numeric_limits<double>::quiet_NaN());
  };
  m.traj = run_tau(p, init, tau_end, options.sample_every, run);
  const double thr = blowup_threshold(eps);
  m.segments = classify_segments(m.traj, thr);
  double s_sum = 0;
  int s_count = 0;
  m.all_blowup = m.all_classical = true;
  for (std::size_t k = 0; k < m.traj.samples.size(); ++k) {
    const auto& s = m.traj.samples[k];
    m.sup_second_moment = std::max(m.sup_second_moment, s.moments.second_moment);
    m.sup_l2 = std::max(m.sup_l2, s.moments.l2);
    if (s.moments.tail_mass > thr) {
      m.all_classical = false;
      m.max_q_blowup = std::max(m.max_q_blowup, s.q);
    } else {
      m.all_blowup = false;
      if (std::isfinite(m.s_window_mass[k])) {
        s_sum += m.s_window_mass[k];
        ++s_count;
      }
    }
  }
  m.s_concentration = s_count ? s_sum / s_count : std::numeric_limits<double>::quiet_NaN();
  return m;
}

}  // namespace

SweepReport eps_sweep(const ModelParams& base, const DensityField& init, const std::vector<double>& eps_list,
                      double tau_end, const SweepOptions& options) {
  if (eps_list.size() < 2) throw ParameterError("eps_sweep: need at least two eps values");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0)) throw ParameterError("eps_sweep: eps must be positive");
    if (k > 0 && !(eps_list[k] < eps_list[k - 1])) throw ParameterError("eps_sweep: eps list must be decreasing");
  }
  const std::size_t n = eps_list.size();
  std::vector<SweepMember> members(n);
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::size_t k) {
    try {
      members[k] = run_member(base, init, eps_list[k], tau_end, options);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const unsigned threads = std::max(1u, options.threads);
  for (std::size_t first = 0; first < n; first += threads) {
    const std::size_t last = std::min(n, first + threads);
    if (threads == 1) {
      work(first);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t k = first; k < last; ++k) pool.emplace_back(work, k);
      for (auto& t : pool) t.join();
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    if (errors[k]) rethrow_tagged(errors[k], eps_list[k]);

  SweepReport r;
  const std::size_t ns = members.front().traj.samples.size();
  for (const auto& m : members) {
    if (m.traj.samples.size() != ns) throw ConsistencyError("eps_sweep: members have different sample counts");
    r.max_qm_error = std::max(r.max_qm_error, m.traj.max_qm_error);
  }
  for (std::size_t j = 0; j < ns; ++j) {
    r.tau.push_back(members.front().traj.samples[j].tau);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& m : members) {
      lo = std::min(lo, m.traj.samples[j].moments.tail_mass);
      hi = std::max(hi, m.traj.samples[j].moments.tail_mass);
    }
    r.m_spread.push_back(hi - lo);
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    double sup = 0;
    for (std::size_t j = 0; j < ns; ++j)
      sup = std::max(sup, std::abs(members[k].traj.samples[j].moments.tail_mass -
                                   members[k + 1].traj.samples[j].moments.tail_mass));
    r.cauchy.push_back(sup);
  }
  r.members = std::move(members);
  return r;
}

ChainResult chain_blowups(const DensityField& init, const ModelParams& params, double tau_end,
                          const ChainOptions& options) {
  if (std::abs(init.mass() - 1.0) > 1e-9) throw ParameterError("chain_blowups: initial mass must be 1");
  if (!(tau_end > 0)) throw ParameterError("chain_blowups: tau_end must be positive");
  const ModelParams p = params.with_eps(options.eps);
  p.validate();
  const double thr = blowup_threshold(options.eps);
  std::vector<double> deltas = options.dirichlet_deltas;
  if (deltas.empty())
    for (double k : {1.0, 2.0, 4.0, 8.0}) deltas.push_back(k * init.grid.dv);
  const double tol = 1e-12 * std::max(1.0, tau_end);

  ChainResult out;
  DensityField n = init;
  double tau = 0;

  // Returns true when the run has to stop.
  auto apply_event = [&](const DensityField& state, double tau1) {
    const double m0 = state.tail_mass();
    BlowupEvent e = analyze_blowup(below_threshold(state), p, tau1, m0);
    if (e.classification == BlowupClass::none) return false;
    out.events.push_back(e);
    if (static_cast<int>(out.events.size()) > options.max_events) {
      std::ostringstream msg;
      msg << "chain_blowups: more than " << options.max_events << " events before tau=" << tau1
          << " (M=" << m0 << ", last delta_tau=" << e.delta_tau << ")";
      throw ConsistencyError(msg.str());
    }
    if (e.classification == BlowupClass::eternal) {
      out.ended_eternal = true;
      out.tau_reached = tau_end;
      return true;
    }
    tau = tau1 + e.delta_tau;
    n = e.n_post->normalized();
    return false;
  };

  if (p.b > 0 && n.tail_mass() > thr && apply_event(n, 0.0)) return out;

  bool above = n.tail_mass() > thr;
  TauState state = make_tau_state(n, p, options.run.step.m_floor);
  state.tau = tau;
  while (tau < tau_end - tol) {
    const double next = std::min(tau + options.sample_every, tau_end);
    TauTrajectory seg = continue_tau(p, state, next, next - tau, options.run);
    out.lifespan_estimate += seg.samples.back().int_q;
    const TauState prev = state;
    state = seg.final_state;
    tau = state.tau;
    const double m = state.density.tail_mass();
    const bool now_above = m > thr;
    if (p.b > 0 && now_above && !above) {
      const DensityField pre = below_threshold(prev.density);
      if (dirichlet_loss_check(pre, p, deltas).passed) {
        const std::size_t before = out.events.size();
        if (apply_event(prev.density, prev.tau)) return out;
        if (out.events.size() > before) {
          state = make_tau_state(n, p, options.run.step.m_floor);
          state.tau = tau;
          above = false;
          continue;
        }
      }
    }
    above = now_above;
  }
  out.tau_reached = tau;
  return out;
}

BlowupMeasurement measure_blowup(const TauTrajectory& traj, double threshold) {
  BlowupMeasurement r;
  const auto& s = traj.samples;
  auto m = [&](std::size_t j) { return s[j].moments.tail_mass; };
  std::size_t first = 0;
  while (first < s.size() && !(m(first) > threshold)) ++first;
  if (first == s.size()) return r;
  std::size_t peak = first;
  while (peak + 1 < s.size() && m(peak + 1) >= m(peak)) ++peak;
  std::size_t end = peak;
  while (end + 1 < s.size() && m(end + 1) <= m(end)) ++end;
  std::size_t start = first;
  while (start > 0 && m(start - 1) <= m(start)) --start;
  r.found = true;
  r.tau_start = s[start].tau;
  r.tau_peak = s[peak].tau;
  r.m_peak = m(peak);
  r.end_index = end;
  r.tau_end = s[end].tau;
  if (end > 0 && end + 1 < s.size()) {
    // Vertex of the parabola through the three samples around the minimum.
    const double t0 = s[end - 1].tau, t1 = s[end].tau, t2 = s[end + 1].tau;
    const double y0 = m(end - 1), y1 = m(end), y2 = m(end + 1);
    const double den = (t0 - t1) * (t0 - t2) * (t1 - t2);
    const double A = (t2 * (y1 - y0) + t1 * (y0 - y2) + t0 * (y2 - y1)) / den;
    const double B = (t2 * t2 * (y0 - y1) + t1 * t1 * (y2 - y0) + t0 * t0 * (y1 - y2)) / den;
    if (A > 0) r.tau_end = std::clamp(-B / (2 * A), t0, t2);
  }
  r.delta_tau = r.tau_end - r.tau_start;
  return r;
}

}  // namespace nnlif

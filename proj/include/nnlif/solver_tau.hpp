#pragma once

// IMEX finite-volume solver for the random-discharge system in the dilated
// timescale tau:
//
//   d_tau n + d_v[(-v Q + b) n] - a Q d_vv n = delta_{V_R} - (Q/eps) 1_{v>=V_F} n,
//   Q = eps / int_{V_F}^inf n.
//
// One step = upwind advection -> implicit diffusion -> exact absorption above
// V_F -> reset deposit. The absorption removes exactly dtau of mass (the loss
// measure S has unit mass per unit tau) and the same amount is deposited at
// V_R, so mass is conserved to round-off.

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include <nnlif/model.hpp>

namespace nnlif {

struct QValue {
  double q{0};
  bool floored{false};  // tail mass was below the floor; q = eps / floor
};

/// Q = eps / int_{V_F}^inf d, with the tail mass floored at m_floor.
QValue compute_Q(const DensityField& d, const ModelParams& params, double m_floor = 1e-14);

struct TauState {
  double tau{0};
  DensityField density;
  double q{0};
  bool q_floored{false};
  /// Accumulated tau for which the absorption could not remove the full
  /// unit-rate mass (only happens when the tail is smaller than the step).
  double clock_deficit{0};

  /// The discharge measure S = n 1_{v>=V_F} / M as a density on the same grid.
  DensityField discharge_measure() const;
};

TauState make_tau_state(const DensityField& init, const ModelParams& params, double m_floor = 1e-14);

struct TauStepOptions {
  double m_floor{1e-14};
  /// 0 = lagged Q (one evaluation per step); otherwise fixed-point passes.
  int picard_iterations{0};
  double picard_tolerance{1e-12};
  /// Replaces Q in transport, diffusion and absorption; used for the Q = 0
  /// transport toy problem. Absorption is switched off when this is set.
  std::optional<double> forced_q;
};

/// One IMEX step. Throws StepError on CFL violation and SchemeError if a
/// cell turns negative.
TauState step_tau(const TauState& state, double dtau, const ModelParams& params,
                  const TauStepOptions& options = {});

/// Stable step for the current Q: cfl * dv / max|(-vQ + b)|.
double advective_step_limit(const VoltageGrid& grid, const ModelParams& params, double q,
                            double cfl);

struct TauRunOptions {
  TauStepOptions step;
  /// Fixed step; when empty the step is chosen adaptively from the current Q.
  std::optional<double> dtau;
  double cfl{0.4};
  /// Adaptive steps also satisfy dtau <= tail_fraction * M so the absorption
  /// can remove exactly dtau.
  double tail_fraction{0.5};
  double dtau_max{1e-2};
  bool store_snapshots{false};
  /// Called on every sample, including tau = 0.
  std::function<void(const TauState&)> on_sample;
};

struct TauSample {
  double tau{0};
  double q{0};
  bool q_floored{false};
  Moments moments;
  double int_q{0};      // trapezoid int_0^tau Q
  double tightness{0};  // int_0^tau int (v - V_F)_+^2 S dv dtau
  /// One-step residual of the weak form for psi = 1, v, v^2.
  std::array<double, 3> weak_residual{0, 0, 0};
};

struct TauTrajectory {
  ModelParams params;
  std::vector<TauSample> samples;
  std::vector<DensityField> snapshots;  // aligned with samples when stored
  std::size_t steps{0};
  double max_mass_error{0};  // max |mass - 1| over all steps
  double min_density{0};     // min cell value over all steps
  double max_qm_error{0};    // max |Q M - eps| / eps over samples (unfloored)
  TauState final_state;
};

/// Runs from init to tau_end, sampling at every multiple of sample_every
/// (steps are shortened to land on sample times exactly).
TauTrajectory run_tau(const ModelParams& params, const DensityField& init, double tau_end,
                      double sample_every, const TauRunOptions& options = {});

/// Continues a run from an existing state; tau in the samples is absolute.
TauTrajectory continue_tau(const ModelParams& params, const TauState& start, double tau_end,
                           double sample_every, const TauRunOptions& options = {});

struct QDiagnostics {
  double lifespan_estimate{0};  // int_0^tau_end Q
  double q_modulus{0};          // sup_tau int_tau^{tau+delta} Q
};

/// Throws ParameterError unless 0 < delta <= 1/2 and the trajectory is non-empty.
QDiagnostics q_diagnostics(const TauTrajectory& traj, double delta);

/// Right-hand side of the weak form d/dtau int psi n for psi in {1, v, v^2}.
std::array<double, 3> weak_form_rhs(const DensityField& d, const ModelParams& params, double q);

}  // namespace nnlif

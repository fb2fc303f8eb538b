#pragma once

// Finite-volume solver for the random-discharge system in the original
// timescale,
//
//   d_t p + d_v[(-v + b N) p] - a d_vv p = N delta_{V_R} - (1/eps) 1_{v>=V_F} p,
//   N = (1/eps) int_{V_F}^inf p,
//
// together with the linear auxiliary problems driven by the same N(t):
//   p_not   no reset source, data p(0)        (p_not <= p)
//   p_spike reset source, zero data           (p_not + p_spike = p)
//   p_bar   reset source, zero data, no loss  (p_spike <= p_bar)
// All four share one stepper so their differences are modeling differences.

#include <array>
#include <optional>
#include <vector>

#include <nnlif/model.hpp>
#include <nnlif/rate_input.hpp>
#include <nnlif/solver_tau.hpp>

namespace nnlif {

/// (1/eps) int_{V_F}^inf d.
double compute_N(const DensityField& d, const ModelParams& params);

struct TState {
  double t{0};
  DensityField density;
  double n_rate{0};
};

/// One step of advection at speed (-v + drift), implicit diffusion a and,
/// when `absorb` is set, exact absorption exp(-dt/eps) above V_F. The reset
/// deposit is left to the caller. Returns the mass removed by absorption.
double step_linear(Eigen::Ref<Eigen::VectorXd> values, const VoltageGrid& grid,
                   const ModelParams& params, double drift, double dt, bool absorb);

struct AuxiliarySample {
  double not_mass{0};
  double spike_mass{0};
  double bar_mass{0};
  double bar_l2{0};
  double split_l1{0};      // || p_not + p_spike - p ||_L1
  double not_excess{0};    // max (p_not - p)_+
  double spike_excess{0};  // max (p_spike - p_bar)_+
};

struct TSample {
  double t{0};
  double n_rate{0};
  Moments moments;
  double int_n{0};  // fired mass int_0^t N
  std::optional<AuxiliarySample> aux;
};

struct AuxiliaryBundle {
  DensityField p_not;
  DensityField p_spike;
  DensityField p_bar;
};

struct TRunOptions {
  std::optional<double> dt;  // fixed step; adaptive when empty
  double cfl{0.4};
  double dt_max{1e-3};
  /// Adaptive steps also satisfy dt <= eps_fraction * eps so the absorption
  /// layer above V_F is resolved in time.
  double eps_fraction{0.5};
  bool with_auxiliaries{false};
  bool store_snapshots{false};
};

struct TTrajectory {
  ModelParams params;
  std::vector<TSample> samples;
  std::vector<DensityField> snapshots;
  std::size_t steps{0};
  double max_mass_error{0};
  double min_density{0};
  double max_rate{0};
  TState final_state;
  std::optional<AuxiliaryBundle> final_aux;
};

TTrajectory run_t(const ModelParams& params, const DensityField& init, double t_end,
                  double sample_every, const TRunOptions& options = {});

struct PbarResult {
  DensityField density;
  std::size_t steps{0};
  double injected{0};  // int_0^t N
};

/// p_bar driven by a prescribed rate: zero data, no loss, deposit int N over
/// each step and drift b N at the step midpoint.
PbarResult run_pbar(const ModelParams& params, const VoltageGrid& grid, const RateInput& rate,
                    double t_end, const TRunOptions& options = {});

struct RoundtripReport {
  double max_identity_error{0};   // sup |tau(t(tau)) - tau|
  double tau_range{0};            // common tau range that was compared
  double max_tail_mismatch{0};    // sup |M_t(tau) - M_tau(tau)|
  double max_rate_rel_error{0};   // sup |N - 1/Q| / N where both are resolved
};

/// Compares the t- and tau-solvers through tau(t) = int N and t(tau) = int Q.
RoundtripReport timescale_roundtrip(const TTrajectory& traj_t, const TauTrajectory& traj_tau);

/// sup over sample windows [t0, t0 + w] with 0 < w < 1/2 of -w ln int N;
/// finite exactly when the integrated rate has the exp(-C/w) lower bound.
double firing_lower_bound_constant(const TTrajectory& traj, const std::vector<double>& windows);

}  // namespace nnlif

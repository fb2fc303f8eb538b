#pragma once

// eps-sweeps of the dilated-time solver, blow-up/classical segment
// classification, and chaining of limit blow-up events with solver runs.

#include <optional>
#include <string>
#include <vector>

#include <nnlif/blowup.hpp>
#include <nnlif/model.hpp>
#include <nnlif/solver_tau.hpp>

namespace nnlif {

/// M above which a sample counts as blow-up: max(10 eps, 1e-6).
double blowup_threshold(double eps);

struct Segment {
  double start{0};
  double end{0};
  bool blowup{false};
};

/// Half-open segments [start, end) of constant classification covering the
/// sampled range; a segment boundary sits at the first sample of the new class.
std::vector<Segment> classify_segments(const TauTrajectory& traj, double threshold);

struct SweepMember {
  double eps{0};
  TauTrajectory traj;
  std::vector<Segment> segments;
  std::vector<double> s_window_mass;  // per sample: int_{V_F}^{V_F+sqrt(eps)} S
  double s_concentration{0};          // mean of s_window_mass over classical samples (NaN if none)
  double max_q_blowup{0};             // max Q over blow-up samples (0 if none)
  double sup_second_moment{0};
  double sup_l2{0};
  bool all_blowup{false};
  bool all_classical{false};
};

struct SweepReport {
  std::vector<SweepMember> members;   // in the order of the eps list
  std::vector<double> tau;            // common sample times
  std::vector<double> m_spread;       // per sample: max - min of M across eps
  std::vector<double> cauchy;         // sup_tau |M_k - M_{k+1}|, k = 0 .. n-2
  double max_qm_error{0};             // over all members
};

struct SweepOptions {
  double sample_every{0.01};
  unsigned threads{1};
  TauRunOptions run;
};

/// Runs solver-tau for each eps (decreasing, at least two) concurrently.
SweepReport eps_sweep(const ModelParams& base, const DensityField& init, const std::vector<double>& eps_list,
                      double tau_end, const SweepOptions& options = {});

struct ChainOptions {
  double eps{1e-3};
  double sample_every{0.01};
  std::vector<double> dirichlet_deltas;  // defaults to {dv, 2dv, 4dv, 8dv}
  int max_events{1000};
  TauRunOptions run;
};

struct ChainResult {
  std::vector<BlowupEvent> events;
  double lifespan_estimate{0};  // int Q over the classical segments
  double tau_reached{0};
  bool ended_eternal{false};
};

/// Alternates solver-tau on classical stretches with the limit blow-up
/// analytics whenever M crosses the threshold upward and the Dirichlet-loss
/// check passes. Stops at tau_end or at an eternal event.
ChainResult chain_blowups(const DensityField& init, const ModelParams& params, double tau_end,
                          const ChainOptions& options = {});

struct BlowupMeasurement {
  bool found{false};
  double tau_start{0};  // last local minimum of M before the peak (or the first sample)
  double tau_peak{0};
  double m_peak{0};
  double tau_end{0};    // first local minimum of M after the peak
  double delta_tau{0};
  std::size_t end_index{0};
};

/// Locates the first blow-up episode of a trajectory as the excursion of M
/// above the threshold, bounded by the local minima of M around it.
BlowupMeasurement measure_blowup(const TauTrajectory& traj, double threshold);

/// int_{V_F}^{V_F + w} S for the discharge measure of d.
double s_window_mass(const DensityField& d, double v_fire, double w);

/// max(values) <= (1 + growth_tol) * values.front(); values ordered from the
/// coarsest to the finest scale. Non-finite values fail.
bool bounded_under_refinement(const std::vector<double>& values, double growth_tol = 0.1);

}  // namespace nnlif

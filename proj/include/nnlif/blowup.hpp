#pragma once

// Limit (eps = 0) dynamics across a blow-up interval in the dilated timescale.
//
// During blow-up Q = 0, so the sub-threshold density is transported rigidly
// at speed b while the reset source builds the ramp (1/b) 1_[V_R, V_R + b d)
// and the super-threshold mass evolves as
//
//   M(d) = M_0 + int_{V_F - b d}^{V_F} n_pre - min(d, (V_F - V_R)/b),
//
// where d is the time since the interval began and M_0 the mass already above
// V_F (zero for a genuine start). The interval ends at the first zero of M.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nnlif/model.hpp>

namespace nnlif {

enum class BlowupClass { none, finite, eternal };

std::string to_string(BlowupClass c);

struct BlowupEvent {
  double tau1{0};
  DensityField n_pre;            // sub-threshold profile at tau1
  double initial_tail_mass{0};   // M_0
  double delta_tau{0};           // +inf when eternal
  std::optional<DensityField> n_post;
  BlowupClass classification{BlowupClass::none};
  double post_mass{0};
};

/// M after time delta from n_pre. Throws ParameterError if n_pre has mass
/// above V_F or delta < 0.
double m_of_delta(const DensityField& n_pre, double delta, const ModelParams& params,
                  double initial_tail = 0.0);

/// Infimum delta > 0 with M(delta) = 0; 0 when M does not become positive
/// right after the start, +inf when M((V_F - V_R)/b) > 0 with no earlier root.
double blowup_interval(const DensityField& n_pre, const ModelParams& params,
                       double initial_tail = 0.0);

/// [n_pre(v - b d) + (1/b) 1_[V_R, V_R + b d)(v)] 1_{v <= V_F} as exact cell
/// averages. Throws ConsistencyError if the result does not have unit mass.
DensityField post_profile(const DensityField& n_pre, double delta_tau, const ModelParams& params,
                          double mass_tolerance = 1e-10);

/// Interval length, classification and post profile in one call.
BlowupEvent analyze_blowup(const DensityField& n_pre, const ModelParams& params, double tau1 = 0.0,
                           double initial_tail = 0.0);

struct EffectiveSeries {
  std::vector<double> delta;
  std::vector<DensityField> below;  // n 1_{v < V_F}
  std::vector<double> tail_mass;    // M
  std::vector<double> trace;        // n(V_F-) on the sub-threshold side
  double max_dm_residual{0};        // max over sample gaps of |dM/dd - (b trace - 1)|
  double mean_dm_residual{0};       // same, averaged over the span
};

/// Samples the effective pair evolution at n_samples equispaced times in
/// [0, tau_span] and checks dM/dd = b n(V_F) - 1 by finite differences
/// (trace at the gap midpoint).
EffectiveSeries effective_evolve(const DensityField& n_pre, double tau_span,
                                 const ModelParams& params, int n_samples,
                                 double initial_tail = 0.0);

struct DirichletLossReport {
  std::vector<double> deltas;
  std::vector<double> ratios;  // b int_{V_F - d}^{V_F} n_pre / d
  double tolerance{0};
  bool passed{false};          // every ratio >= 1 - tolerance
};

DirichletLossReport dirichlet_loss_check(const DensityField& n_pre, const ModelParams& params,
                                         const std::vector<double>& deltas, double tolerance = 1e-9);

/// d with every cell at or above V_F set to zero.
DensityField below_threshold(const DensityField& d);

}  // namespace nnlif

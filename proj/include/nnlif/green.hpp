#pragma once

// Closed-form Ornstein-Uhlenbeck Green function for
//
//   d_t G + d_v[(-v + b N(t)) G] - a d_vv G = 0,  G(s, s, .) = delta_{V_R},
//
// and the Duhamel representation p_bar(t, v) = int_0^t N(s) G(s, t, v) ds of
// the zero-data, loss-free problem with reset source N(t) delta_{V_R}.

#include <optional>
#include <vector>

#include <nnlif/model.hpp>
#include <nnlif/rate_input.hpp>

namespace nnlif {

struct GreenValue {
  double mean{0};
  double variance{0};
  double density{0};
};

/// V(s, t) = e^{s-t} x0 + b int_s^t e^{u-t} N(u) du.
double ou_mean(double s, double t, double x0, const RateInput& rate, const ModelParams& params);

/// sigma^2(s, t) = a (1 - e^{-2(t-s)}).
double ou_variance(double s, double t, double a);

/// Throws ParameterError unless t > s >= 0.
GreenValue ou_green(double s, double t, double v, const RateInput& rate, const ModelParams& params);

/// int G(s1, t, v) G(s2, t, v) dv in closed form.
double pair_overlap(double s1, double s2, double t, const RateInput& rate, const ModelParams& params);

struct GreenTolerance {
  double abs_tol{1e-10};
  double rel_tol{1e-10};
};

/// Cell averages of p_bar(t, .) on the grid; the L1 quadrature error is
/// bounded by tol.abs_tol.
DensityField duhamel_pbar(const RateInput& rate, double t, const VoltageGrid& grid,
                          const ModelParams& params, const GreenTolerance& tol = {});

/// Pointwise p_bar(t, v).
double duhamel_pbar_at(const RateInput& rate, double t, double v, const ModelParams& params,
                       const GreenTolerance& tol = {});

/// int p_bar(t, v)^2 dv by adaptive quadrature in v of the pointwise value.
double duhamel_l2_norm_sq(const RateInput& rate, double t, const ModelParams& params,
                          const GreenTolerance& tol = {});

/// int_0^t int_0^t N(s1) N(s2) pair_overlap(s1, s2, t) ds1 ds2, computed on
/// the triangle s1 <= s2 and doubled.
double l2_identity(const RateInput& rate, double t, const ModelParams& params,
                   const GreenTolerance& tol = {});

enum class ToyKind { m1, q2_dirac, q3_blowup };

struct ToyReport {
  ToyKind kind{ToyKind::m1};
  std::optional<DensityField> profile;  // m1
  double sup_norm{0};                   // m1
  double dirac_coefficient{0};          // q2: int_0^t N = t V_R / b
  bool degenerate{false};               // q2: drift vanishes at V_R
  std::vector<double> etas;             // q3: distances to the singular time
  std::vector<double> values;           // q3: q3(T - eta, V_R)
  std::vector<double> growth;           // q3: values[k+1] / values[k] - 1
};

/// Exact cell averages of m1(tau) = (1/b) 1_(V_R, V_R + b tau).
DensityField toy_m1(const ModelParams& params, double tau, const VoltageGrid& grid);

struct ToyOptions {
  std::optional<VoltageGrid> grid;  // m1
  double eta0{0.1};                 // q3: first distance to T
  int halvings{4};                  // q3
};

/// m1: t_or_tau is tau and a grid is required. q2_dirac: requires V_R > 0,
/// b > 0 (N = V_R / b). q3_blowup: requires a = 1/2, uses N = 2/sqrt(T - t)
/// with T = t_or_tau and evaluates at T - eta for eta = eta0 / 2^k.
ToyReport toy_solutions(ToyKind kind, const ModelParams& params, double t_or_tau,
                        const ToyOptions& options = {});

/// q3(t, v) = int_0^t N(s) g(s, t, v) ds with g Gaussian of mean
/// V_R + b int_s^t N and variance 2a (t - s).
double toy_q3_value(const RateInput& rate, double t, double v, const ModelParams& params,
                    const GreenTolerance& tol = {});

}  // namespace nnlif

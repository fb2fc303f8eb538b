#pragma once

// Finite-volume building blocks shared by the tau- and t-timescale solvers.
//
// Both solvers discretize
//   d_s n + d_v[(-v*alpha + beta) n] - D d_vv n = source - absorption
// with (alpha, beta, D) = (Q, b, aQ) in the dilated timescale and
// (1, bN, a) in the original one. All operators act in place on the cell
// averages and keep no-flux conditions at the truncation boundaries.

#include <Eigen/Dense>

#include <nnlif/model.hpp>

namespace nnlif {

/// Solves the symmetric tridiagonal system (I - r L) x = rhs where L is the
/// no-flux second difference. Thomas algorithm; the matrix is an M-matrix so
/// positive data stays positive and column sums (mass) are preserved.
template <typename Derived>
void solve_implicit_diffusion(Eigen::MatrixBase<Derived>& x, typename Derived::Scalar r) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  if (n == 0 || r == Scalar(0)) return;
  if (n == 1) return;
  VectorX<Scalar> c_prime(n);
  // Row i: -r x_{i-1} + (1 + r*k_i) x_i - r x_{i+1}, k_i = number of neighbours.
  Scalar diag = 1 + r;
  c_prime[0] = -r / diag;
  x[0] = x[0] / diag;
  for (Eigen::Index i = 1; i < n; ++i) {
    diag = (i == n - 1 ? 1 + r : 1 + 2 * r);
    const Scalar denom = diag + r * c_prime[i - 1];
    c_prime[i] = -r / denom;
    x[i] = (x[i] + r * x[i - 1]) / denom;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= c_prime[i] * x[i + 1];
}

/// Largest |(-v*alpha + beta)| over interior interfaces.
double max_interface_speed(const VoltageGrid& grid, double alpha, double beta);

/// Explicit first-order upwind step for the flux (-v*alpha + beta) n.
/// Throws StepError when dt exceeds the monotonicity bound dv / max speed.
void advect_upwind(Eigen::Ref<Eigen::VectorXd> values, const VoltageGrid& grid, double alpha,
                   double beta, double dt);

/// Backward-Euler step of D d_vv with no-flux boundaries.
inline void diffuse_implicit(Eigen::Ref<Eigen::VectorXd> values, const VoltageGrid& grid,
                             double diffusion, double dt) {
  Eigen::VectorXd x = values;
  solve_implicit_diffusion(x, diffusion * dt / (grid.dv * grid.dv));
  values = x;
}

/// Multiplies every cell at or above V_F by factor; returns the mass removed.
double absorb_above_threshold(Eigen::Ref<Eigen::VectorXd> values, const VoltageGrid& grid,
                              double factor);

/// Adds `mass` to the cell whose left interface is V_R.
inline void deposit_at_reset(Eigen::Ref<Eigen::VectorXd> values, const VoltageGrid& grid,
                             double mass) {
  values[grid.idx_vr] += mass / grid.dv;
}

/// Throws SchemeError if any cell is negative beyond round-off.
void check_nonnegative(const Eigen::Ref<const Eigen::VectorXd>& values, const char* where);

}  // namespace nnlif

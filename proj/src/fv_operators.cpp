#include <nnlif/fv_operators.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nnlif {

double max_interface_speed(const VoltageGrid& grid, double alpha, double beta) {
  // Speed is affine in v, so the extremes sit at the outermost interior interfaces.
  const double lo = grid.interface(1);
  const double hi = grid.interface(grid.n_cells - 1);
  return std::max(std::abs(-lo * alpha + beta), std::abs(-hi * alpha + beta));
}

void advect_upwind(Eigen::Ref<Eigen::VectorXd> values, const VoltageGrid& grid, double alpha,
                   double beta, double dt) {
  const Eigen::Index n = grid.n_cells;
  // alpha >= 0 makes the velocity non-increasing in v, so no cell ever has
  // outflow through both faces and speed * dt <= dv keeps the update monotone.
  if (alpha < 0) throw StepError("advect_upwind: relaxation coefficient must be non-negative");
  const double speed = max_interface_speed(grid, alpha, beta);
  if (speed * dt > grid.dv * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "advect_upwind: CFL violated, dt=" << dt << " > dv/speed=" << grid.dv / speed;
    throw StepError(msg.str());
  }
  const double lambda = dt / grid.dv;
  // flux[i] is the flux through interface i+1 (between cells i and i+1).
  Eigen::VectorXd flux(n - 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double u = -grid.interface(i + 1) * alpha + beta;
    flux[i] = u > 0 ? u * values[i] : u * values[i + 1];
  }
  values[0] -= lambda * flux[0];
  for (Eigen::Index i = 1; i + 1 < n; ++i) values[i] -= lambda * (flux[i] - flux[i - 1]);
  values[n - 1] += lambda * flux[n - 2];
}

double absorb_above_threshold(Eigen::Ref<Eigen::VectorXd> values, const VoltageGrid& grid,
                              double factor) {
  auto tail = values.tail(grid.n_cells - grid.idx_vf);
  const double before = tail.sum();
  tail *= factor;
  return (before - tail.sum()) * grid.dv;
}

void check_nonnegative(const Eigen::Ref<const Eigen::VectorXd>& values, const char* where) {
  const double lo = values.minCoeff();
  // Cancellation in the upwind update can leave -1e-300 style residue.
  const double scale = std::max(1.0, values.maxCoeff());
  if (lo < -1e-13 * scale) {
    std::ostringstream msg;
    msg << where << ": negative density " << lo;
    throw SchemeError(msg.str());
  }
}

}  // namespace nnlif

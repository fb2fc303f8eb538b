#pragma once

#include <cmath>
#include <functional>

#include <nnlif/model.hpp>
#include <nnlif/philox.hpp>

namespace nnlif::testing {

inline ModelParams params(double b, double a = 1.0, double v_reset = 0.0, double v_fire = 1.0) {
  ModelParams p;
  p.a = a;
  p.b = b;
  p.v_reset = v_reset;
  p.v_fire = v_fire;
  return p;
}

inline VoltageGrid canonical_grid(const ModelParams& p, double dv = 0.005) {
  return make_grid(p, -4.0, 3.0, dv);
}

inline DensityField gaussian(const VoltageGrid& g, double mean, double sd) {
  return project_density<double>(g, [=](double v) {
           const double z = (v - mean) / sd;
           return std::exp(-0.5 * z * z);
         })
      .density;
}

/// Density 2 on [V_F - 0.1, V_F) plus mass 0.8 spread far below threshold.
inline DensityField block_near_threshold(const VoltageGrid& g) {
  return project_density<double>(g, [](double v) {
           const double z = (v + 1.5) / 0.3;
           return (v >= 0.9 && v < 1.0 ? 2.0 : 0.0) + 0.8 * std::exp(-0.5 * z * z) / (0.3 * std::sqrt(2 * M_PI));
         })
      .density;
}

/// Nonnegative random field with unit mass, drawn from a counter stream.
inline DensityField random_density(const VoltageGrid& g, std::uint64_t stream) {
  CounterRng rng(99, stream, 0);
  DensityField d = DensityField::zeros(g);
  for (Eigen::Index i = 0; i < g.n_cells; ++i) d.values[i] = rng.uniform();
  return d.normalized();
}

inline double l1_distance(const DensityField& x, const DensityField& y) {
  return (x.values - y.values).cwiseAbs().sum() * x.grid.dv;
}

}  // namespace nnlif::testing

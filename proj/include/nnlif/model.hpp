#pragma once

// Shared domain types for the noisy leaky integrate-and-fire Fokker-Planck
// model: physical parameters, the truncated voltage mesh, cell-averaged
// densities and their moments.
//
// Everything here is a value type templated on the scalar; the solvers use
// the double aliases at the bottom of the file.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include <nnlif/errors.hpp>

namespace nnlif {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Physical constants of the model plus the absorption scale of the
/// random-discharge regularization.
///
/// `eps` is absent when the parameters feed limit analytics that do not
/// depend on the regularization.
template <typename Scalar>
struct ModelParamsT {
  Scalar a{1};        // diffusion coefficient
  Scalar b{0};        // connectivity
  Scalar v_reset{0};  // V_R
  Scalar v_fire{1};   // V_F
  std::optional<Scalar> eps;

  /// Throws ParameterError unless V_R < V_F, a > 0 and eps > 0 when present.
  void validate() const {
    if (!(v_reset < v_fire)) throw ParameterError("model: V_R must be below V_F");
    if (!(a > 0)) throw ParameterError("model: diffusion a must be positive");
    if (eps && !(*eps > 0)) throw ParameterError("model: eps must be positive");
  }

  Scalar require_eps() const {
    if (!eps) throw ParameterError("model: eps is required for this operation");
    return *eps;
  }

  /// V_F - V_R, the distance a reset neuron has to travel before firing again.
  Scalar gap() const { return v_fire - v_reset; }

  ModelParamsT with_eps(Scalar e) const {
    ModelParamsT p = *this;
    p.eps = e;
    return p;
  }

  bool same_physics(const ModelParamsT& o) const {
    return a == o.a && b == o.b && v_reset == o.v_reset && v_fire == o.v_fire && eps == o.eps;
  }
};

/// Uniform mesh on [v_min, v_max] with V_R and V_F sitting on cell interfaces.
///
/// Interface i is at v_min + i * dv; cell i spans [interface(i), interface(i+1)).
template <typename Scalar>
struct VoltageGridT {
  Scalar v_min{0};
  Scalar v_max{0};
  Eigen::Index n_cells{0};
  Scalar dv{0};
  Eigen::Index idx_vf{0};
  Eigen::Index idx_vr{0};

  Scalar interface(Eigen::Index i) const { return v_min + static_cast<Scalar>(i) * dv; }
  Scalar center(Eigen::Index i) const { return v_min + (static_cast<Scalar>(i) + Scalar(0.5)) * dv; }

  VectorX<Scalar> centers() const {
    VectorX<Scalar> c(n_cells);
    for (Eigen::Index i = 0; i < n_cells; ++i) c[i] = center(i);
    return c;
  }

  /// Index of the cell containing v, clamped to the mesh.
  Eigen::Index cell_of(Scalar v) const {
    auto i = static_cast<Eigen::Index>(std::floor((v - v_min) / dv));
    if (i < 0) return 0;
    if (i >= n_cells) return n_cells - 1;
    return i;
  }

  bool operator==(const VoltageGridT& o) const {
    return v_min == o.v_min && n_cells == o.n_cells && dv == o.dv && idx_vf == o.idx_vf &&
           idx_vr == o.idx_vr;
  }
};

/// Summary integrals of a density, all by midpoint quadrature on the mesh.
template <typename Scalar>
struct MomentsT {
  Scalar mass{0};
  Scalar mean{0};           // first moment, not normalized by mass
  Scalar second_moment{0};  // int v^2 n
  Scalar l2{0};             // int n^2
  Scalar tail_mass{0};      // int_{V_F}^inf n, i.e. M
};

/// Cell-averaged density on a VoltageGrid.
template <typename Scalar>
struct DensityFieldT {
  VoltageGridT<Scalar> grid;
  VectorX<Scalar> values;

  DensityFieldT() = default;
  DensityFieldT(const VoltageGridT<Scalar>& g, VectorX<Scalar> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.n_cells) throw ParameterError("density: value count does not match grid");
  }
  static DensityFieldT zeros(const VoltageGridT<Scalar>& g) {
    return DensityFieldT(g, VectorX<Scalar>::Zero(g.n_cells));
  }

  Scalar mass() const { return values.sum() * grid.dv; }

  Scalar tail_mass() const {
    return values.tail(grid.n_cells - grid.idx_vf).sum() * grid.dv;
  }

  Scalar min_value() const { return values.size() ? values.minCoeff() : Scalar(0); }

  /// Pointwise value of the piecewise-constant reconstruction; zero outside the mesh.
  /// At an interface the cell to the right is used.
  Scalar at(Scalar v) const {
    if (v < grid.v_min || v >= grid.interface(grid.n_cells)) return Scalar(0);
    return values[grid.cell_of(v)];
  }

  /// Exact integral of the piecewise-constant reconstruction over [lo, hi].
  Scalar integrate(Scalar lo, Scalar hi) const {
    if (hi <= lo) return Scalar(0);
    lo = std::max(lo, grid.v_min);
    hi = std::min(hi, grid.interface(grid.n_cells));
    if (hi <= lo) return Scalar(0);
    const Eigen::Index i0 = grid.cell_of(lo);
    const Eigen::Index i1 = grid.cell_of(hi);
    if (i0 == i1) return values[i0] * (hi - lo);
    Scalar s = values[i0] * (grid.interface(i0 + 1) - lo);
    for (Eigen::Index i = i0 + 1; i < i1; ++i) s += values[i] * grid.dv;
    s += values[i1] * (hi - grid.interface(i1));
    return s;
  }

  DensityFieldT normalized() const {
    const Scalar m = mass();
    if (!(m > 0) || !std::isfinite(static_cast<double>(m)))
      throw DegenerateInputError("density: cannot normalize a field with zero mass");
    return DensityFieldT(grid, values / m);
  }
};

/// Builds a mesh with dv <= dv_target covering [v_min, v_max] such that V_R
/// and V_F fall exactly on interfaces. The covered range is widened outward by
/// less than one cell when the requested bounds are not aligned.
template <typename Scalar>
VoltageGridT<Scalar> make_grid(const ModelParamsT<Scalar>& params, Scalar v_min, Scalar v_max,
                               Scalar dv_target) {
  params.validate();
  if (!(dv_target > 0)) throw ParameterError("grid: dv_target must be positive");
  if (!(v_min < params.v_reset && params.v_reset < params.v_fire && params.v_fire < v_max)) {
    std::ostringstream msg;
    msg << "grid: need v_min < V_R < V_F < v_max, got v_min=" << v_min << " V_R=" << params.v_reset
        << " V_F=" << params.v_fire << " v_max=" << v_max;
    throw ParameterError(msg.str());
  }
  // Relative slack so that e.g. 1/0.01 does not round up to 101 cells.
  constexpr double slack = 1e-9;
  const Scalar gap = params.gap();
  const auto per_gap = static_cast<Eigen::Index>(std::ceil(static_cast<double>(gap / dv_target) - slack));
  VoltageGridT<Scalar> g;
  g.dv = gap / static_cast<Scalar>(per_gap);
  const auto below = static_cast<Eigen::Index>(
      std::ceil(static_cast<double>((params.v_reset - v_min) / g.dv) - slack));
  const auto above = static_cast<Eigen::Index>(
      std::ceil(static_cast<double>((v_max - params.v_fire) / g.dv) - slack));
  g.idx_vr = below;
  g.idx_vf = below + per_gap;
  g.n_cells = g.idx_vf + above;
  g.v_min = params.v_reset - static_cast<Scalar>(below) * g.dv;
  g.v_max = g.interface(g.n_cells);
  return g;
}

/// Default truncation [V_F - 5 max(1, sqrt(a)+|V_R|+b), V_F + 5 max(1, sqrt(a)+b)].
template <typename Scalar>
VoltageGridT<Scalar> make_default_grid(const ModelParamsT<Scalar>& params, Scalar dv_target) {
  using std::abs;
  using std::max;
  using std::sqrt;
  const Scalar lo = params.v_fire - 5 * max(Scalar(1), sqrt(params.a) + abs(params.v_reset) + params.b);
  const Scalar hi = params.v_fire + 5 * max(Scalar(1), sqrt(params.a) + params.b);
  return make_grid(params, lo, hi, dv_target);
}

template <typename Scalar>
struct ProjectionT {
  DensityFieldT<Scalar> density;
  Scalar raw_mass{0};      // mass captured on the mesh before renormalization
  Scalar clipped_mass{0};  // 1 - raw_mass, assuming f is a probability density
};

/// Cell averages of f by midpoint rule, renormalized to unit mass.
template <typename Scalar>
ProjectionT<Scalar> project_density(const VoltageGridT<Scalar>& grid,
                                    const std::function<Scalar(Scalar)>& f) {
  VectorX<Scalar> v(grid.n_cells);
  for (Eigen::Index i = 0; i < grid.n_cells; ++i) {
    const Scalar x = f(grid.center(i));
    if (!(x >= 0)) throw DegenerateInputError("project_density: f must be non-negative and finite");
    v[i] = x;
  }
  ProjectionT<Scalar> out;
  out.raw_mass = v.sum() * grid.dv;
  if (!(out.raw_mass > 0) || !std::isfinite(static_cast<double>(out.raw_mass)))
    throw DegenerateInputError("project_density: f has no mass on the grid");
  out.clipped_mass = std::max(Scalar(0), Scalar(1) - out.raw_mass);
  out.density = DensityFieldT<Scalar>(grid, v / out.raw_mass);
  return out;
}

template <typename Scalar>
MomentsT<Scalar> moments(const DensityFieldT<Scalar>& d) {
  const auto& g = d.grid;
  const VectorX<Scalar> c = g.centers();
  MomentsT<Scalar> m;
  m.mass = d.values.sum() * g.dv;
  m.mean = c.dot(d.values) * g.dv;
  m.second_moment = c.cwiseProduct(c).dot(d.values) * g.dv;
  m.l2 = d.values.squaredNorm() * g.dv;
  m.tail_mass = d.tail_mass();
  return m;
}

/// Moments; params are accepted for symmetry with the other operations and
/// checked against the grid's threshold index.
template <typename Scalar>
MomentsT<Scalar> moments(const DensityFieldT<Scalar>& d, const ModelParamsT<Scalar>& params) {
  const Scalar vf = d.grid.interface(d.grid.idx_vf);
  if (std::abs(static_cast<double>(vf - params.v_fire)) > 1e-9 * std::max(1.0, std::abs(static_cast<double>(vf))))
    throw ParameterError("moments: grid threshold interface does not match V_F");
  return moments(d);
}

/// The plateau state (1/b) 1_[V_R,V_F] with exponential tail above V_F,
/// M = 1 - (V_F - V_R)/b. Cell averages are exact; the result is not
/// renormalized, so its mass is 1 minus the tail beyond v_max.
template <typename Scalar>
DensityFieldT<Scalar> plateau_steady_state(const ModelParamsT<Scalar>& params,
                                           const VoltageGridT<Scalar>& grid) {
  params.validate();
  if (!(params.b >= params.gap()))
    throw ParameterError("plateau_steady_state: requires b >= V_F - V_R");
  const Scalar height = 1 / params.b;
  const Scalar tail_m = 1 - params.gap() / params.b;
  VectorX<Scalar> v = VectorX<Scalar>::Zero(grid.n_cells);
  for (Eigen::Index i = grid.idx_vr; i < grid.idx_vf; ++i) v[i] = height;
  if (tail_m > 0) {
    const Scalar scale = params.b * tail_m;  // decay length
    for (Eigen::Index i = grid.idx_vf; i < grid.n_cells; ++i) {
      const Scalar x0 = grid.interface(i) - params.v_fire;
      const Scalar x1 = x0 + grid.dv;
      v[i] = height * scale * (std::exp(-x0 / scale) - std::exp(-x1 / scale)) / grid.dv;
    }
  }
  return DensityFieldT<Scalar>(grid, std::move(v));
}

using ModelParams = ModelParamsT<double>;
using VoltageGrid = VoltageGridT<double>;
using DensityField = DensityFieldT<double>;
using Moments = MomentsT<double>;
using Projection = ProjectionT<double>;

}  // namespace nnlif

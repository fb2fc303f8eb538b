#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature for scalar and Eigen-vector valued
// integrands. Intervals are bisected globally, largest error first, until the
// summed error estimate meets max(abs_tol, rel_tol * |I|).

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>
#include <utility>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace nnlif::quad {

namespace detail {

inline constexpr double kronrod_nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kronrod_weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gauss_weights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double norm_of(double x) { return std::abs(x); }
template <typename Derived>
double norm_of(const Eigen::MatrixBase<Derived>& x) {
  return x.template lpNorm<1>();
}

template <typename T>
T zero_like(const T& x) {
  if constexpr (std::is_arithmetic_v<T>) return T(0);
  else return T::Zero(x.rows(), x.cols());
}

template <typename T>
struct Piece {
  double a, b;
  T value;
  double error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

template <typename T, typename F>
Piece<T> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const T fc = f(c);
  T kronrod = fc * kronrod_weights[7];
  T gauss = fc * gauss_weights[3];
  for (int j = 0; j < 7; ++j) {
    const double x = h * kronrod_nodes[j];
    const T f1 = f(c - x);
    const T f2 = f(c + x);
    const T s = f1 + f2;
    kronrod = kronrod + s * kronrod_weights[j];
    if (j % 2 == 1) gauss = gauss + s * gauss_weights[j / 2];
  }
  Piece<T> p{a, b, kronrod * h, 0.0};
  p.error = norm_of(T((kronrod - gauss) * h));
  return p;
}

}  // namespace detail

struct Options {
  double abs_tol{1e-12};
  double rel_tol{1e-10};
  int max_intervals{4000};
};

template <typename T>
struct Result {
  T value;
  double error{0};
  int intervals{0};
  bool converged{false};
};

/// Integrates f over [a, b]; `cuts` (any order) are interior points where f is not smooth.
template <typename F>
auto integrate(F f, double a, double b, const Options& opt = {}, const std::vector<double>& cuts = {})
    -> Result<std::decay_t<decltype(f(a))>> {
  using T = std::decay_t<decltype(f(a))>;
  std::priority_queue<detail::Piece<T>> heap;
  std::vector<double> edges{a};
  for (double x : cuts)
    if (x > a && x < b) edges.push_back(x);
  std::sort(edges.begin() + 1, edges.end());
  edges.push_back(b);
  for (std::size_t k = 0; k + 1 < edges.size(); ++k)
    if (edges[k + 1] > edges[k]) heap.push(detail::gk15<T>(f, edges[k], edges[k + 1]));

  Result<T> r;
  if (heap.empty()) {
    r.value = detail::zero_like(f(a));
    r.converged = true;
    return r;
  }
  auto totals = [&]() {
    auto copy = heap;
    T v = copy.top().value;
    double e = copy.top().error;
    copy.pop();
    while (!copy.empty()) {
      v = v + copy.top().value;
      e += copy.top().error;
      copy.pop();
    }
    return std::pair<T, double>(v, e);
  };
  auto [value, error] = totals();
  while (true) {
    const double target = std::max(opt.abs_tol, opt.rel_tol * detail::norm_of(value));
    if (error <= target) {
      r.converged = true;
      break;
    }
    if (static_cast<int>(heap.size()) >= opt.max_intervals) break;
    const detail::Piece<T> worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    auto left = detail::gk15<T>(f, worst.a, mid);
    auto right = detail::gk15<T>(f, mid, worst.b);
    value = value - worst.value + left.value + right.value;
    error += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    // Refresh the running sums now and then to shed accumulated round-off.
    if (heap.size() % 64 == 0) std::tie(value, error) = totals();
  }
  std::tie(value, error) = totals();
  r.value = value;
  r.error = error;
  r.intervals = static_cast<int>(heap.size());
  return r;
}

}  // namespace nnlif::quad

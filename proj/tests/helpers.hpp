#pragma once

#include "pilekit/kernels.hpp"
#include "pilekit/rng.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace pilekit::testing {

// Central 4th-order stencils composed per coordinate, evaluated on the plain
// kernel. Used as the independent oracle for the closed-form derivatives.
inline double fd_partial_once(const Kernel& k, const MultiIndex& a, const MultiIndex& b,
                              const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y, double h) {
  struct Axis {
    bool on_y;
    int coord;
    int order;
  };
  std::vector<Axis> axes;
  for (int i = 0; i < a.dim(); ++i)
    if (a[i] > 0) axes.push_back({false, i, a[i]});
  for (int i = 0; i < b.dim(); ++i)
    if (b[i] > 0) axes.push_back({true, i, b[i]});
  if (axes.empty()) return k.eval(x, y);

  static const double c1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
  static const double c2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
  static const int off[5] = {-2, -1, 0, 1, 2};

  double val = 0.0;
  std::vector<int> idx(axes.size(), 0);
  for (;;) {
    double coef = 1.0;
    Eigen::RowVectorXd xx = x, yy = y;
    for (std::size_t t = 0; t < axes.size(); ++t) {
      const Axis& ax = axes[t];
      coef *= ax.order == 1 ? c1[idx[t]] : c2[idx[t]];
      (ax.on_y ? yy : xx)[ax.coord] += off[idx[t]] * h;
    }
    val += coef * k.eval(xx, yy);
    std::size_t t = 0;
    while (t < axes.size() && ++idx[t] == 5) idx[t++] = 0;
    if (t == axes.size()) break;
  }
  double denom = 1.0;
  for (const Axis& ax : axes) denom *= std::pow(h, ax.order);
  return val / denom;
}

// Richardson pair (h, h/2) lifts the stencils to 6th order.
inline double fd_partial(const Kernel& k, const MultiIndex& a, const MultiIndex& b,
                         const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y,
                         double h = 0.04) {
  return (16.0 * fd_partial_once(k, a, b, x, y, 0.5 * h) - fd_partial_once(k, a, b, x, y, h)) /
         15.0;
}

// |got - want| / max(|want|, floor); kernel values are O(1) so the floor
// keeps near-zero derivatives from blowing up the ratio.
inline double rel_err(double got, double want, double floor = 1e-3) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

inline MultiIndex random_multi_index(CounterRng& rng, int dim, int max_order) {
  std::vector<int> e(dim, 0);
  int order = static_cast<int>(rng.uniform() * (max_order + 1));
  for (int i = 0; i < order; ++i) e[static_cast<int>(rng.uniform() * dim) % dim] += 1;
  return MultiIndex(e);
}

inline KernelSpec random_kernel(CounterRng& rng, int dim) {
  if (dim == 2 && rng.uniform() < 0.5)
    return KernelSpec::anisotropic(rng.uniform(-3.14159265358979, 3.14159265358979),
                                   rng.uniform(0.5, 1.5));
  return KernelSpec::rbf(rng.uniform(0.6, 1.6), dim);
}

inline Eigen::RowVectorXd random_point(CounterRng& rng, int dim, double lo = -1.0,
                                       double hi = 1.0) {
  Eigen::RowVectorXd p(dim);
  for (int i = 0; i < dim; ++i) p[i] = rng.uniform(lo, hi);
  return p;
}

inline Matrix random_points(CounterRng& rng, int n, int dim, double lo = -1.0, double hi = 1.0) {
  Matrix X(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) X(i, j) = rng.uniform(lo, hi);
  return X;
}

// Random symmetric PSD matrix A^T A / m.
inline Matrix random_psd(CounterRng& rng, int m) {
  Matrix A(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) A(i, j) = rng.normal();
  return A.transpose() * A / m;
}

}  // namespace pilekit::testing

#include "pilekit/kernels.hpp"

#include <cmath>

namespace pilekit {

KernelSpec KernelSpec::rbf(double h, int dim) {
  KernelSpec k;
  k.family = KernelFamily::Rbf;
  k.h = h;
  k.dim = dim;
  k.validate();
  return k;
}

KernelSpec KernelSpec::anisotropic(double theta, double s) {
  KernelSpec k;
  k.family = KernelFamily::AnisotropicRbf;
  k.theta = theta;
  k.s = s;
  k.dim = 2;
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  if (dim < 1) throw SpecError("kernel dimension must be >= 1");
  if (family == KernelFamily::Rbf) {
    if (!(h > 0.0)) throw SpecError("rbf bandwidth h must be positive");
  } else {
    if (!(s > 0.0)) throw SpecError("anisotropic shape s must be positive");
    if (dim != 2) throw SpecError("anisotropic kernel requires dimension 2");
  }
}

std::string KernelSpec::serialize() const {
  char buf[128];
  if (family == KernelFamily::Rbf) {
    std::snprintf(buf, sizeof(buf), "kernel rbf h=%.17g", h);
  } else {
    std::snprintf(buf, sizeof(buf), "kernel aniso theta=%.17g s=%.17g", theta, s);
  }
  return buf;
}

Matrix build_precision(double theta, double s) {
  if (!(s > 0.0)) throw SpecError("anisotropic shape s must be positive");
  Matrix R(2, 2);
  R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = s * s;
  D(1, 1) = 1.0 / (s * s);
  return R * D * R.transpose();
}

double Kernel::Poly::eval(const double* u, int d) const {
  double acc = 0.0;
  for (const auto& t : terms) {
    double v = t.coef;
    for (int i = 0; i < d; ++i) {
      for (int e = 0; e < t.exp[i]; ++e) v *= u[i];
    }
    acc += v;
  }
  return acc;
}

namespace {

using PolyMap = std::map<std::vector<int>, double>;

PolyMap subtract(PolyMap a, const PolyMap& b) {
  for (const auto& [e, c] : b) a[e] -= c;
  return a;
}

PolyMap derivative(const PolyMap& p, int i) {
  PolyMap out;
  for (const auto& [e, c] : p) {
    if (e[i] == 0) continue;
    std::vector<int> ee = e;
    ee[i] -= 1;
    out[ee] += c * e[i];
  }
  return out;
}

PolyMap times_linear(const PolyMap& p, const Matrix& P, int i) {
  // multiply by (P u)_i = sum_j P(i,j) u_j
  PolyMap out;
  const int d = static_cast<int>(P.rows());
  for (const auto& [e, c] : p) {
    for (int j = 0; j < d; ++j) {
      if (P(i, j) == 0.0) continue;
      std::vector<int> ee = e;
      ee[j] += 1;
      out[ee] += c * P(i, j);
    }
  }
  return out;
}

}  // namespace

Kernel::Kernel(const KernelSpec& spec, int max_order) : spec_(spec), max_order_(max_order) {
  spec_.validate();
  dim_ = spec_.dim;
  if (spec_.family == KernelFamily::Rbf) {
    precision_ = Matrix::Identity(dim_, dim_) / (spec_.h * spec_.h);
  } else {
    precision_ = build_precision(spec_.theta, spec_.s);
  }

  // Graded breadth-first generation of all prefactor polynomials with total
  // derivative order up to 2*max_order (one factor per argument side).
  const int total = 2 * max_order_;
  std::vector<int> zero(dim_, 0);
  std::map<std::vector<int>, PolyMap> maps;
  maps[zero] = PolyMap{{zero, 1.0}};
  std::vector<std::vector<int>> frontier = {zero};
  while (!frontier.empty()) {
    std::vector<std::vector<int>> next;
    for (const auto& g : frontier) {
      int ord = 0;
      for (int e : g) ord += e;
      if (ord >= total) continue;
      for (int i = 0; i < dim_; ++i) {
        std::vector<int> gi = g;
        gi[i] += 1;
        if (maps.count(gi)) continue;
        maps[gi] = subtract(derivative(maps[g], i), times_linear(maps[g], precision_, i));
        next.push_back(gi);
      }
    }
    frontier = std::move(next);
  }
  for (auto& [g, pm] : maps) {
    Poly poly;
    for (auto& [e, c] : pm) {
      if (c != 0.0) poly.terms.push_back({e, c});
    }
    polys_.emplace(g, std::move(poly));
  }
}

double Kernel::exponent(const double* u) const {
  double q = 0.0;
  for (int i = 0; i < dim_; ++i) {
    double row = 0.0;
    for (int j = 0; j < dim_; ++j) row += precision_(i, j) * u[j];
    q += u[i] * row;
  }
  return std::exp(-0.5 * q);
}

const Kernel::Poly& Kernel::poly_for(const MultiIndex& total) const {
  auto it = polys_.find(total.entries());
  if (it == polys_.end())
    throw SpecError("unsupported derivative order " + std::to_string(total.order()) +
                    " for kernel with max_order " + std::to_string(max_order_));
  return it->second;
}

double Kernel::eval(PointRef x, PointRef y) const {
  if (x.size() != dim_ || y.size() != dim_) throw SpecError("kernel point dimension mismatch");
  Eigen::RowVectorXd u = x - y;
  return exponent(u.data());
}

double Kernel::eval_partial(const MultiIndex& a, const MultiIndex& b, PointRef x, PointRef y) const {
  if (x.size() != dim_ || y.size() != dim_ || a.dim() != dim_ || b.dim() != dim_)
    throw SpecError("kernel point dimension mismatch");
  if (a.order() > max_order_ || b.order() > max_order_)
    throw SpecError("derivative order exceeds kernel max_order");
  Eigen::RowVectorXd u = x - y;
  const Poly& p = poly_for(a + b);
  double sign = (b.order() % 2 == 0) ? 1.0 : -1.0;
  return sign * p.eval(u.data(), dim_) * exponent(u.data());
}

double Kernel::op_left(const TermList& terms, PointRef z, PointRef x) const {
  Eigen::RowVectorXd u = z - x;
  const double e = exponent(u.data());
  double acc = 0.0;
  for (const auto& t : terms) {
    if (t.index.order() > max_order_) throw SpecError("operator order exceeds kernel max_order");
    acc += t.coefficient.eval(z) * poly_for(t.index).eval(u.data(), dim_) * e;
  }
  return acc;
}

double Kernel::op_right(const TermList& terms, PointRef x, PointRef z) const {
  Eigen::RowVectorXd u = x - z;
  const double e = exponent(u.data());
  double acc = 0.0;
  for (const auto& t : terms) {
    if (t.index.order() > max_order_) throw SpecError("operator order exceeds kernel max_order");
    double sign = (t.index.order() % 2 == 0) ? 1.0 : -1.0;
    acc += t.coefficient.eval(z) * sign * poly_for(t.index).eval(u.data(), dim_) * e;
  }
  return acc;
}

double Kernel::op_both(const TermList& row, const TermList& col, PointRef z, PointRef zp) const {
  Eigen::RowVectorXd u = z - zp;
  const double e = exponent(u.data());
  double acc = 0.0;
  for (const auto& tr : row) {
    const double cr = tr.coefficient.eval(z);
    if (cr == 0.0) continue;
    for (const auto& tc : col) {
      if (tr.index.order() > max_order_ || tc.index.order() > max_order_)
        throw SpecError("operator order exceeds kernel max_order");
      double sign = (tc.index.order() % 2 == 0) ? 1.0 : -1.0;
      acc += cr * tc.coefficient.eval(zp) * sign * poly_for(tr.index + tc.index).eval(u.data(), dim_) * e;
    }
  }
  return acc;
}

double eval(const KernelSpec& k, PointRef x, PointRef y) { return Kernel(k).eval(x, y); }

double eval_partial(const KernelSpec& k, const MultiIndex& a, const MultiIndex& b, PointRef x,
                    PointRef y) {
  return Kernel(k).eval_partial(a, b, x, y);
}

double op_kernel_left(const KernelSpec& k, const TermList& terms, PointRef z, PointRef x) {
  return Kernel(k).op_left(terms, z, x);
}

double op_kernel_both(const KernelSpec& k, const TermList& row, const TermList& col, PointRef z,
                      PointRef zp) {
  return Kernel(k).op_both(row, col, z, zp);
}

}  // namespace pilekit

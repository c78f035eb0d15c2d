#pragma once

#include "pilekit/operators.hpp"

#include <map>
#include <string>
#include <vector>

namespace pilekit {

enum class KernelFamily { Rbf, AnisotropicRbf };

// Kernel family instance: isotropic RBF with bandwidth h in any dimension,
// or the 2-D anisotropic RBF with rotation theta and shape s. Both have unit
// amplitude, k(x, x) = 1; the overall prior scale lives in eta.
struct KernelSpec {
  KernelFamily family = KernelFamily::Rbf;
  double h = 1.0;       // rbf only
  double theta = 0.0;   // anisotropic only
  double s = 1.0;       // anisotropic only
  int dim = 1;

  static KernelSpec rbf(double h, int dim);
  static KernelSpec anisotropic(double theta, double s);

  void validate() const;
  std::string serialize() const;  // "kernel rbf h=..." / "kernel aniso theta=... s=..."
};

// Symmetric positive-definite precision of the anisotropic kernel:
// R_theta diag(s^2, s^-2) R_theta^T. Eigenvalues {s^2, s^-2}, determinant 1.
Matrix build_precision(double theta, double s);

// Evaluates a Gaussian kernel exp(-1/2 (x-y)^T P (x-y)) and its iterated
// partial derivatives in closed form. Derivatives are polynomial prefactors
// of the exponential, generated once per instance by the recurrence
//   p_{g+e_i}(u) = d_i p_g(u) - p_g(u) * (P u)_i,
// so any mixed derivative up to 2*max_order per argument pair is exact.
class Kernel {
 public:
  explicit Kernel(const KernelSpec& spec, int max_order = kDefaultMaxOrder);

  const KernelSpec& spec() const { return spec_; }
  int dim() const { return dim_; }
  int max_order() const { return max_order_; }
  const Matrix& precision() const { return precision_; }

  double eval(PointRef x, PointRef y) const;

  // d_x^a d_y^b k(x, y)
  double eval_partial(const MultiIndex& a, const MultiIndex& b, PointRef x, PointRef y) const;

  // (A (x) Id) k(z, x): operator terms applied to the first argument at z.
  double op_left(const TermList& terms, PointRef z, PointRef x) const;
  // (Id (x) A) k(x, z): operator terms applied to the second argument at z.
  double op_right(const TermList& terms, PointRef x, PointRef z) const;
  // (A (x) A) k(z, z'): row terms on the first argument, column terms on the second.
  double op_both(const TermList& row, const TermList& col, PointRef z, PointRef zp) const;

 private:
  struct Poly {
    struct Term {
      std::vector<int> exp;
      double coef;
    };
    std::vector<Term> terms;
    double eval(const double* u, int d) const;
  };

  const Poly& poly_for(const MultiIndex& total) const;
  double exponent(const double* u) const;

  KernelSpec spec_;
  int dim_ = 1;
  int max_order_ = kDefaultMaxOrder;
  Matrix precision_;
  std::map<std::vector<int>, Poly> polys_;  // derivative multi-index -> prefactor
};

// Free functions mirroring the kernel operations on a spec.
double eval(const KernelSpec& k, PointRef x, PointRef y);
double eval_partial(const KernelSpec& k, const MultiIndex& a, const MultiIndex& b, PointRef x,
                    PointRef y);
double op_kernel_left(const KernelSpec& k, const TermList& terms, PointRef z, PointRef x);
double op_kernel_both(const KernelSpec& k, const TermList& row, const TermList& col, PointRef z,
                      PointRef zp);

}  // namespace pilekit

#pragma once

#include "pilekit/gram.hpp"

#include <functional>

namespace pilekit {

// Score components: pile = quad_term + logdet_term + const_term with
//   quad_term   = ytilde^T Sigma^-1 ytilde / (m+n)
//   logdet_term = log det Sigma / (m+n)
//   const_term  = log(2 pi eta).
// Lower is better.
struct PileReport {
  double pile = 0.0;
  double quad_term = 0.0;
  double logdet_term = 0.0;
  double const_term = 0.0;
  int n = 0, m = 0;
  Temperatures temps;
  double jitter = 0.0;
};

PileReport pile(const SigmaMatrix& S, const Vector& ytilde, const Temperatures& t);

// Bayes free energy (m+n) * pile / 2.
double free_energy(const PileReport& report);

// Normalization constant of the data-free score. The derivation gives
// m log(eta rho); the linear variant m*eta*rho is kept only so its failure
// can be demonstrated.
enum class CmConvention { LogProduct, LinearProduct };
double data_free_cm(int m, const Vector& W, double eta, double rho,
                    CmConvention convention = CmConvention::LogProduct);

// Normalized data-free score log det(I + (eta rho)^-1 W^{1/2} G W^{1/2}),
// equal to m * pile(data-free Sigma, 0) - C_m.
struct DataFreeReport {
  double normalized_score = 0.0;
  double c_m = 0.0;
  int m = 0;
  double jitter = 0.0;
};

DataFreeReport data_free_pile(const Matrix& G, const Vector& W, double eta, double rho);

// Nystrom estimate log det(I + scale * W^{1/2} K_zz W^{1/2}) for a symmetric
// positive semi-definite kernel sampled on the rule's nodes. Throws when the
// discretization has an eigenvalue below -1e-8.
double fredholm_logdet(const std::function<double(PointRef, PointRef)>& op_kernel,
                       const QuadratureRule& rule, double scale);

}  // namespace pilekit

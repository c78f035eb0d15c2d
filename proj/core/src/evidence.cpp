#include "pilekit/evidence.hpp"

#include <cmath>

namespace pilekit {

namespace {
constexpr double kTwoPi = 6.28318530717958647692528676655900577;
}

PileReport pile(const SigmaMatrix& S, const Vector& ytilde, const Temperatures& t) {
  t.validate();
  const int mn = static_cast<int>(S.S.rows());
  if (mn < 1) throw SpecError("pile needs at least one observation or quadrature node");
  if (ytilde.size() != mn) throw SpecError("ytilde does not match Sigma");
  CholFactor f = chol_logdet(S.S);
  Vector u = f.L.triangularView<Eigen::Lower>().solve(ytilde);
  PileReport rep;
  rep.n = S.n;
  rep.m = S.m;
  rep.temps = t;
  rep.jitter = f.jitter;
  rep.quad_term = u.squaredNorm() / mn;
  rep.logdet_term = f.logdet / mn;
  rep.const_term = std::log(kTwoPi * t.eta);
  rep.pile = rep.quad_term + rep.logdet_term + rep.const_term;
  return rep;
}

double free_energy(const PileReport& report) {
  return 0.5 * (report.m + report.n) * report.pile;
}

double data_free_cm(int m, const Vector& W, double eta, double rho, CmConvention convention) {
  double scale = convention == CmConvention::LogProduct ? std::log(eta * rho) : eta * rho;
  return m * scale - W.array().log().sum() + m * std::log(kTwoPi * eta);
}

DataFreeReport data_free_pile(const Matrix& G, const Vector& W, double eta, double rho) {
  const int m = static_cast<int>(G.rows());
  if (m < 1) throw SpecError("data-free pile needs m >= 1");
  if (W.size() != m) throw SpecError("weight vector does not match G");
  if ((W.array() <= 0.0).any()) throw SpecError("quadrature weights must be positive");
  Vector sw = W.array().sqrt();
  Matrix B = sw.asDiagonal() * G * sw.asDiagonal();
  Matrix A = Matrix::Identity(m, m) + B / (eta * rho);
  CholFactor f = chol_logdet(A);
  DataFreeReport rep;
  rep.m = m;
  rep.jitter = f.jitter;
  rep.normalized_score = f.logdet;
  rep.c_m = data_free_cm(m, W, eta, rho);
  return rep;
}

double fredholm_logdet(const std::function<double(PointRef, PointRef)>& op_kernel,
                       const QuadratureRule& rule, double scale) {
  const int m = rule.count();
  Matrix K(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) {
      double v = op_kernel(rule.points.row(i), rule.points.row(j));
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  Vector sw = rule.weights.array().sqrt();
  Matrix B = sw.asDiagonal() * K * sw.asDiagonal();
  B = 0.5 * (B + B.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(B, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -1e-8)
    throw NumericalError("discretized operator is not PSD (min eigenvalue " +
                         std::to_string(min_eig) + ")");
  Matrix A = Matrix::Identity(m, m) + scale * B;
  return chol_logdet(A).logdet;
}

}  // namespace pilekit

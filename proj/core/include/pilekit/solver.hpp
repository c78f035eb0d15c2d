#pragma once

#include "pilekit/gram.hpp"

#include <atomic>
#include <functional>
#include <memory>

namespace pilekit {

// Pointwise observations (x_i, y_i) of f.
struct ObservationSet {
  Matrix X;  // n x d
  Vector Y;  // n

  void validate() const;
};

// Target values r_j for the operator channel at the quadrature nodes, on the
// residual level: zero enforces the constraint, nonzero carries noisy
// observations of the forcing or boundary data.
struct PhysicsTargets {
  Vector R;

  static PhysicsTargets zeros(int m) { return PhysicsTargets{Vector::Zero(m)}; }
};

enum class FitRoute { Krr, Gp };

enum class Channel { F, Af };

struct FitCoefficients {
  Vector alpha;  // n
  Vector beta;   // m
  FitRoute route = FitRoute::Krr;
  Temperatures temps;
  double jitter = 0.0;
  std::shared_ptr<const GramSystem> gram;
};

// Stacks (Y, R) and adds the per-node affine shifts (absorbed forcing or
// boundary data), producing the target vector of the linear model.
Vector stacked_targets(const GramSystem& g, const ObservationSet& obs, const PhysicsTargets& r);

// Minimizes the quadratic objective
//   (1/(gamma n)) |Y - K a - H b|^2 + (1/rho) |W^{1/2}(H^T a + G b - R)|^2
//   + (1/eta) [a;b]^T M [a;b]
// whose normal equations reduce to (M + diag(gamma n/eta I, (rho/eta) W^-1)) c = [Y;R].
FitCoefficients fit_krr(const std::shared_ptr<const GramSystem>& g, const ObservationSet& obs,
                        const PhysicsTargets& targets, const Temperatures& t);

// GP route: coefficients Sigma^-1 ytilde under the scoring convention
// Sigma = [[K + eta*gamma I, H], [H^T, G + eta*rho W^-1]].
FitCoefficients fit_gp(const std::shared_ptr<const GramSystem>& g, const ObservationSet& obs,
                       const PhysicsTargets& targets, const Temperatures& t);

// Temperatures that make the GP route solve the same linear system as the
// ridge route with temperatures t and n data points (eta is fixed to 1; only
// the products eta*gamma and eta*rho enter the system).
Temperatures gp_equivalent(const Temperatures& t, int n);

// f_hat(x') (channel F) or the interior operator applied to the expansion
// (channel Af), both evaluated analytically from the kernel derivatives.
double predict(const FitCoefficients& c, PointRef x, Channel channel);

// Values of the quadratic objective above; the physics sign convention is
// switchable so tests can rule out the minus variant.
enum class PhysicsSign { Plus, Minus };
double quadratic_objective(const GramSystem& g, const Temperatures& t, const Vector& y,
                           const Vector& r, const Vector& alpha, const Vector& beta,
                           PhysicsSign sign = PhysicsSign::Plus);

// Same loss evaluated functionally: the expansion is evaluated pointwise at
// the data sites and quadrature nodes instead of through the block matrices.
double pointwise_objective(const GramSystem& g, const Temperatures& t, const Vector& y,
                           const Vector& r, const Vector& alpha, const Vector& beta);

// Posterior of the joint (f, Af) GP conditioned through Sigma. Mean, pointwise
// variance (clamped at zero with a counter), and cross-covariances.
class PosteriorPredictive {
 public:
  PosteriorPredictive(std::shared_ptr<const GramSystem> gram, const Temperatures& t,
                      const Vector& ytilde);

  double mean(PointRef x, Channel channel) const;
  double variance(PointRef x, Channel channel) const;
  double cov(PointRef p, Channel cp, PointRef q, Channel cq) const;

  // Cross-covariance vector of channel(x) against the conditioning set.
  Vector cross_vector(PointRef x, Channel channel) const;
  double prior_cov(PointRef p, Channel cp, PointRef q, Channel cq) const;

  const FitCoefficients& coefficients() const { return coef_; }
  const GramSystem& gram() const { return *gram_; }
  const Temperatures& temps() const { return temps_; }
  const CholFactor& factor() const { return factor_; }
  long negative_variance_count() const { return clamped_.load(); }

 private:
  std::shared_ptr<const GramSystem> gram_;
  Temperatures temps_;
  CholFactor factor_;
  Vector solved_;  // Sigma^-1 ytilde
  FitCoefficients coef_;
  mutable std::atomic<long> clamped_{0};
};

inline double posterior_cov(const PosteriorPredictive& post, PointRef p, Channel cp, PointRef q,
                            Channel cq) {
  return post.cov(p, cp, q, cq);
}

}  // namespace pilekit

#include "pilekit/quadrature.hpp"

#include "pilekit/rng.hpp"

#include <cmath>

namespace pilekit {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

QuadratureRule chebyshev1_1d(int m, double a, double b, ChebyshevWeights mode) {
  if (m < 1) throw SpecError("chebyshev rule needs m >= 1");
  if (!(a < b)) throw SpecError("chebyshev rule needs a < b");
  QuadratureRule rule;
  rule.points.resize(m, 1);
  rule.weights.resize(m);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int k = 0; k < m; ++k) {
    const double phi = (2.0 * k + 1.0) * kPi / (2.0 * m);
    rule.points(k, 0) = mid + half * std::cos(phi);
    if (mode == ChebyshevWeights::Paper) {
      rule.weights[k] = (b - a) / m;
    } else {
      // Fejer first-rule weight: interpolatory on type-1 nodes, positive,
      // sums to the interval length for every m.
      double w = 1.0;
      for (int j = 1; j <= m / 2; ++j) w -= 2.0 * std::cos(2.0 * j * phi) / (4.0 * j * j - 1.0);
      rule.weights[k] = half * 2.0 * w / m;
    }
  }
  rule.kind = mode == ChebyshevWeights::Paper ? "chebyshev1/paper" : "chebyshev1/corrected";
  return rule;
}

QuadratureRule tensor2d(const QuadratureRule& rx, const QuadratureRule& ry) {
  if (rx.dim() != 1 || ry.dim() != 1) throw SpecError("tensor2d requires two 1-D rules");
  QuadratureRule rule;
  const int mx = rx.count(), my = ry.count();
  rule.points.resize(mx * my, 2);
  rule.weights.resize(mx * my);
  for (int i = 0; i < mx; ++i) {
    for (int j = 0; j < my; ++j) {
      const int idx = i * my + j;
      rule.points(idx, 0) = rx.points(i, 0);
      rule.points(idx, 1) = ry.points(j, 0);
      rule.weights[idx] = rx.weights[i] * ry.weights[j];
    }
  }
  rule.kind = rx.kind + "*" + ry.kind;
  return rule;
}

QuadratureRule monte_carlo(int n, const DomainSpec& domain, std::uint64_t seed, bool normalized) {
  if (n < 1) throw SpecError("monte carlo rule needs n >= 1");
  QuadratureRule rule;
  const int d = domain.dim();
  rule.points.resize(n, d);
  CounterRng rng(seed, /*stream=*/0x6d63727565ull);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      rule.points(i, j) = rng.uniform(domain.lower()[j], domain.upper()[j]);
  const double w = (normalized ? 1.0 : domain.volume()) / n;
  rule.weights = Vector::Constant(n, w);
  rule.kind = normalized ? "monte-carlo/normalized" : "monte-carlo";
  return rule;
}

QuadratureRule boundary_rule(const SegmentId& segment, int m, const DomainSpec& domain,
                             ChebyshevWeights mode) {
  domain.validate_segment(segment);
  const int d = domain.dim();
  const double pinned = domain.face_coordinate(segment);
  QuadratureRule rule;
  if (d == 1) {
    rule.points = Matrix::Constant(1, 1, pinned);
    rule.weights = Vector::Constant(1, 1.0);  // counting measure on a point
  } else if (d == 2) {
    const int free_axis = 1 - segment.axis;
    QuadratureRule line =
        chebyshev1_1d(m, domain.lower()[free_axis], domain.upper()[free_axis], mode);
    rule.points.resize(m, 2);
    rule.weights = line.weights;
    for (int i = 0; i < m; ++i) {
      rule.points(i, segment.axis) = pinned;
      rule.points(i, free_axis) = line.points(i, 0);
    }
  } else if (d == 3) {
    int f1 = -1, f2 = -1;
    for (int i = 0; i < 3; ++i) {
      if (i == segment.axis) continue;
      (f1 < 0 ? f1 : f2) = i;
    }
    QuadratureRule face = tensor2d(chebyshev1_1d(m, domain.lower()[f1], domain.upper()[f1], mode),
                                   chebyshev1_1d(m, domain.lower()[f2], domain.upper()[f2], mode));
    rule.points.resize(face.count(), 3);
    rule.weights = face.weights;
    for (int i = 0; i < face.count(); ++i) {
      rule.points(i, segment.axis) = pinned;
      rule.points(i, f1) = face.points(i, 0);
      rule.points(i, f2) = face.points(i, 1);
    }
  } else {
    throw SpecError("boundary rules support d <= 3");
  }
  rule.segment = segment;
  rule.kind = "boundary/" + segment.name();
  return rule;
}

QuadratureRule scaled(const QuadratureRule& rule, double weight_factor) {
  QuadratureRule out = rule;
  out.weights *= weight_factor;
  return out;
}

}  // namespace pilekit

#pragma once

#include "pilekit/domain.hpp"

#include <optional>
#include <string>

namespace pilekit {

// Node weighting of the 1-D type-1 Chebyshev rule.
//   Paper:     uniform (b-a)/m, which discretizes the arcsine measure and is
//              kept for figure reproduction.
//   Corrected: interpolatory (Fejer-first) weights targeting Lebesgue;
//              exact for polynomials of degree < m.
enum class ChebyshevWeights { Paper, Corrected };

inline constexpr ChebyshevWeights kDefaultChebyshevWeights = ChebyshevWeights::Corrected;

// Points and positive weights discretizing the measure on the interior or on
// one boundary segment.
struct QuadratureRule {
  Matrix points;                    // m x d
  Vector weights;                   // m
  std::optional<SegmentId> segment; // nullopt = interior
  std::string kind;

  int count() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  double weight_sum() const { return weights.sum(); }
};

// Type-1 Chebyshev nodes cos((2k+1)pi/(2m)) mapped affinely from (-1,1) to (a,b).
QuadratureRule chebyshev1_1d(int m, double a, double b,
                             ChebyshevWeights mode = kDefaultChebyshevWeights);

// Product of two 1-D rules; weights multiply.
QuadratureRule tensor2d(const QuadratureRule& rx, const QuadratureRule& ry);

// n i.i.d. uniform points in the box. Weights vol(domain)/n by default so the
// rule targets the unnormalized Lebesgue integral; `normalized` gives 1/n.
QuadratureRule monte_carlo(int n, const DomainSpec& domain, std::uint64_t seed,
                           bool normalized = false);

// Rule of m points laid on a box face, with Hausdorff-measure weights. For
// d = 2 this is a 1-D rule along the free coordinate; for d = 1 the single
// endpoint with unit weight.
QuadratureRule boundary_rule(const SegmentId& segment, int m, const DomainSpec& domain,
                             ChebyshevWeights mode = kDefaultChebyshevWeights);

// Same nodes with weights multiplied by a factor (used when Cauchy duplicate
// segments split the Hausdorff mass).
QuadratureRule scaled(const QuadratureRule& rule, double weight_factor);

}  // namespace pilekit

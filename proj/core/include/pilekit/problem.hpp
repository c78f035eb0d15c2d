#pragma once

#include "pilekit/gram.hpp"

#include <string>
#include <utility>
#include <vector>

namespace pilekit {

struct QuadSettings {
  int m = 13;                // interior nodes per axis
  ChebyshevWeights mode = kDefaultChebyshevWeights;
  int boundary_m = 0;        // nodes per boundary segment; 0 = no boundary rules
  bool split_cauchy = false; // share Hausdorff mass across duplicated segments
};

struct ObsSettings {
  int n = 0;
  double sigma = 1.0;
  std::uint64_t seed = 0;
};

struct BcDecl {
  SegmentId segment;
  BoundaryKind kind = BoundaryKind::Dirichlet;
  std::vector<double> params;
};

// A full problem statement: domain, operator with boundary conditions,
// forcing and boundary data, kernel, temperatures, quadrature and
// observation settings. Parsed from the line-oriented text format
// documented in the README (stanzas: domain, op, forcing, bc, bcdata,
// kernel, temps, quad, obs; '#' comments).
struct ProblemSpec {
  DomainSpec domain;
  OperatorSpec op;  // forcing already absorbed when present
  std::vector<BcDecl> bc;
  BoundaryData boundary_data;
  KernelSpec kernel;
  Temperatures temps;
  QuadSettings quad;
  ObsSettings obs;

  bool has_forcing = false;
  CoefficientFn forcing_expr;

  // Interior tensor rule plus one boundary rule per distinct bc segment.
  std::vector<QuadratureRule> build_rules() const;
};

ProblemSpec parse_problem(const std::string& text);
std::string serialize(const ProblemSpec& spec);

// Interior tensor-product Chebyshev rule on a box, d <= 3.
QuadratureRule tensor_box(const DomainSpec& domain, int m_per_axis, ChebyshevWeights mode);

}  // namespace pilekit

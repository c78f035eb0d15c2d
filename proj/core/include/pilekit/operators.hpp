#pragma once

#include "pilekit/domain.hpp"
#include "pilekit/expr.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pilekit {

// Per-coordinate derivative orders; ||alpha||_1 is the total order.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries);
  static MultiIndex zero(int dim) { return MultiIndex(std::vector<int>(dim, 0)); }

  int dim() const { return static_cast<int>(entries_.size()); }
  int order() const;
  int operator[](int i) const { return entries_[i]; }
  const std::vector<int>& entries() const { return entries_; }

  MultiIndex operator+(const MultiIndex& rhs) const;
  bool operator==(const MultiIndex&) const = default;
  bool operator<(const MultiIndex& rhs) const { return entries_ < rhs.entries_; }

  std::string str() const;

 private:
  std::vector<int> entries_;
};

// One c_alpha(x) * d^alpha term of a linear differential operator.
struct OperatorTerm {
  MultiIndex index;
  CoefficientFn coefficient;
};

using TermList = std::vector<OperatorTerm>;

enum class BoundaryKind { Dirichlet, Neumann, Robin, Cauchy };

BoundaryKind boundary_kind_from(const std::string& name);
std::string to_string(BoundaryKind kind);

struct BoundaryOperator {
  SegmentId segment;
  TermList terms;
};

// A linear differential operator D on the interior plus boundary operators
// B_i on segments, with an optional absorbed forcing so that the residual of
// the interior operator at f is D f - g.
class OperatorSpec {
 public:
  OperatorSpec() = default;
  OperatorSpec(TermList interior, std::vector<BoundaryOperator> boundary,
               int max_order = kDefaultMaxOrder);

  const TermList& interior() const { return interior_; }
  const std::vector<BoundaryOperator>& boundary() const { return boundary_; }
  int order() const { return order_; }
  int max_order() const { return max_order_; }

  bool forcing_absorbed() const { return forcing_.has_value(); }
  const CoefficientFn& forcing() const;

  friend OperatorSpec absorb_forcing(const OperatorSpec& op, const CoefficientFn& g);

 private:
  TermList interior_;
  std::vector<BoundaryOperator> boundary_;
  int order_ = 0;
  int max_order_ = kDefaultMaxOrder;
  std::optional<CoefficientFn> forcing_;
};

// Field probe used by apply_operator: partial(alpha, x) returns d^alpha f(x).
using PartialFn = std::function<double(const MultiIndex&, PointRef)>;

// Boundary operator construction for box faces. Dirichlet needs no params;
// robin takes (a, b); neumann and cauchy derive the outward normal from the
// domain. Cauchy returns two entries on the same geometric segment.
std::vector<BoundaryOperator> make_boundary_operator(BoundaryKind kind,
                                                     std::span<const double> params,
                                                     const SegmentId& segment,
                                                     const DomainSpec& domain);

// Sum of c_alpha(x) d^alpha f(x) over the given terms.
double apply_operator(const TermList& terms, const PartialFn& f, PointRef x);

// Interior residual of op at f: D f(x), minus the forcing when absorbed.
double apply_operator(const OperatorSpec& op, const PartialFn& f, PointRef x);

// Rewrites D as the affine residual D f - g; targets of zero then enforce
// D f = g. The fitted function is identical to keeping D and setting
// targets r_j = g(z_j).
OperatorSpec absorb_forcing(const OperatorSpec& op, const CoefficientFn& g);

}  // namespace pilekit

#include "pilekit/operators.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace pilekit {

SegmentId SegmentId::parse(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos || text.empty() || text[0] != 'x')
    throw SpecError("bad segment id '" + text + "' (expected e.g. x1=lo)");
  int axis = 0;
  try {
    axis = std::stoi(text.substr(1, eq - 1));
  } catch (const std::exception&) {
    throw SpecError("bad segment axis in '" + text + "'");
  }
  std::string side = text.substr(eq + 1);
  if (axis < 1 || (side != "lo" && side != "hi"))
    throw SpecError("bad segment id '" + text + "' (expected e.g. x1=lo)");
  return SegmentId{axis - 1, side == "hi"};
}

DomainSpec::DomainSpec(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.size() == 0)
    throw SpecError("domain bounds must be non-empty and of equal dimension");
  for (int i = 0; i < lower_.size(); ++i)
    if (!(lower_[i] < upper_[i]))
      throw SpecError("domain requires lower < upper in coordinate " + std::to_string(i + 1));
}

double DomainSpec::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= upper_[i] - lower_[i];
  return v;
}

double DomainSpec::segment_measure(const SegmentId& seg) const {
  validate_segment(seg);
  double v = 1.0;
  for (int i = 0; i < dim(); ++i)
    if (i != seg.axis) v *= upper_[i] - lower_[i];
  return v;
}

Vector DomainSpec::normal(const SegmentId& seg) const {
  validate_segment(seg);
  Vector n = Vector::Zero(dim());
  n[seg.axis] = seg.high ? 1.0 : -1.0;
  return n;
}

double DomainSpec::face_coordinate(const SegmentId& seg) const {
  validate_segment(seg);
  return seg.high ? upper_[seg.axis] : lower_[seg.axis];
}

bool DomainSpec::contains(PointRef x, double tol) const {
  if (x.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
  return true;
}

void DomainSpec::validate_segment(const SegmentId& seg) const {
  if (seg.axis < 0 || seg.axis >= dim())
    throw SpecError("segment " + seg.name() + " does not lie on a face of a " +
                    std::to_string(dim()) + "-dimensional box");
}

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  for (int e : entries_)
    if (e < 0) throw SpecError("multi-index entries must be non-negative");
}

int MultiIndex::order() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }

MultiIndex MultiIndex::operator+(const MultiIndex& rhs) const {
  if (dim() != rhs.dim()) throw SpecError("multi-index dimension mismatch");
  std::vector<int> out(entries_);
  for (int i = 0; i < rhs.dim(); ++i) out[i] += rhs[i];
  return MultiIndex(out);
}

std::string MultiIndex::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim(); ++i) os << (i ? " " : "") << entries_[i];
  os << ')';
  return os.str();
}

BoundaryKind boundary_kind_from(const std::string& name) {
  if (name == "dirichlet") return BoundaryKind::Dirichlet;
  if (name == "neumann") return BoundaryKind::Neumann;
  if (name == "robin") return BoundaryKind::Robin;
  if (name == "cauchy") return BoundaryKind::Cauchy;
  throw SpecError("unknown boundary kind '" + name + "'");
}

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::Dirichlet: return "dirichlet";
    case BoundaryKind::Neumann: return "neumann";
    case BoundaryKind::Robin: return "robin";
    case BoundaryKind::Cauchy: return "cauchy";
  }
  return "?";
}

OperatorSpec::OperatorSpec(TermList interior, std::vector<BoundaryOperator> boundary, int max_order)
    : interior_(std::move(interior)), boundary_(std::move(boundary)), max_order_(max_order) {
  int s = 0;
  auto scan = [&](const TermList& terms) {
    for (const auto& t : terms) {
      if (t.index.order() > max_order_)
        throw SpecError("operator term of order " + std::to_string(t.index.order()) +
                        " exceeds the configured maximum " + std::to_string(max_order_));
      s = std::max(s, t.index.order());
    }
  };
  scan(interior_);
  for (const auto& b : boundary_) scan(b.terms);
  order_ = s;
}

const CoefficientFn& OperatorSpec::forcing() const {
  if (!forcing_) throw SpecError("operator has no absorbed forcing");
  return *forcing_;
}

std::vector<BoundaryOperator> make_boundary_operator(BoundaryKind kind,
                                                     std::span<const double> params,
                                                     const SegmentId& segment,
                                                     const DomainSpec& domain) {
  domain.validate_segment(segment);
  const int d = domain.dim();
  const Vector nu = domain.normal(segment);

  auto identity_term = [&](double c) {
    return OperatorTerm{MultiIndex::zero(d), CoefficientFn::constant(c)};
  };
  auto normal_terms = [&](double c) {
    TermList out;
    for (int i = 0; i < d; ++i) {
      if (nu[i] == 0.0) continue;
      std::vector<int> e(d, 0);
      e[i] = 1;
      out.push_back({MultiIndex(std::move(e)), CoefficientFn::constant(c * nu[i])});
    }
    return out;
  };

  switch (kind) {
    case BoundaryKind::Dirichlet:
      return {{segment, {identity_term(1.0)}}};
    case BoundaryKind::Neumann:
      return {{segment, normal_terms(1.0)}};
    case BoundaryKind::Robin: {
      if (params.size() != 2) throw SpecError("robin boundary requires coefficients (a, b)");
      TermList terms = {identity_term(params[0])};
      for (auto& t : normal_terms(params[1])) terms.push_back(std::move(t));
      return {{segment, std::move(terms)}};
    }
    case BoundaryKind::Cauchy:
      // p = 2: restriction and normal derivative on duplicated segments.
      return {{segment, {identity_term(1.0)}}, {segment, normal_terms(1.0)}};
  }
  throw SpecError("unknown boundary kind");
}

double apply_operator(const TermList& terms, const PartialFn& f, PointRef x) {
  double acc = 0.0;
  for (const auto& t : terms) acc += t.coefficient.eval(x) * f(t.index, x);
  return acc;
}

double apply_operator(const OperatorSpec& op, const PartialFn& f, PointRef x) {
  double v = apply_operator(op.interior(), f, x);
  if (op.forcing_absorbed()) v -= op.forcing().eval(x);
  return v;
}

OperatorSpec absorb_forcing(const OperatorSpec& op, const CoefficientFn& g) {
  OperatorSpec out = op;
  if (g.is_constant() && g.eval(std::span<const double>{}) == 0.0 && !op.forcing_absorbed())
    return out;  // g == 0 leaves the operator unchanged
  out.forcing_ = op.forcing_absorbed() ? (op.forcing() + g) : g;
  return out;
}

}  // namespace pilekit

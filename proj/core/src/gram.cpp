#include "pilekit/gram.hpp"

#include "pilekit/parallel.hpp"

#include <cmath>

namespace pilekit {

void Temperatures::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw SpecError("gamma must be positive and finite");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw SpecError("rho must be positive and finite");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw SpecError("eta must be positive and finite");
}

namespace {

// Kernel evaluations over the stored points; symmetric blocks filled once.
void fill_blocks(const Kernel& k, const Matrix& X, const Matrix& Z,
                 const std::vector<NodeOperator>& nodes, const std::vector<TermList>& term_sets,
                 Matrix& K, Matrix& H, Matrix& G) {
  const int n = static_cast<int>(X.rows());
  const int m = static_cast<int>(Z.rows());
  K.resize(n, n);
  H.resize(n, m);
  G.resize(m, m);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    for (int j = 0; j <= static_cast<int>(i); ++j) {
      double v = k.eval(X.row(i), X.row(j));
      K(i, j) = v;
      K(j, i) = v;
    }
    for (int j = 0; j < m; ++j)
      H(i, j) = k.op_right(term_sets[nodes[j].term_set], X.row(i), Z.row(j));
  });
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t i) {
    const TermList& row_terms = term_sets[nodes[i].term_set];
    for (int j = 0; j <= static_cast<int>(i); ++j) {
      double v = k.op_both(row_terms, term_sets[nodes[j].term_set], Z.row(i), Z.row(j));
      G(i, j) = v;
      G(j, i) = v;
    }
  });
}

}  // namespace

Matrix GramSystem::joint() const {
  const int nn = n(), mm = m();
  Matrix J(nn + mm, nn + mm);
  if (nn) {
    J.topLeftCorner(nn, nn) = K_;
    J.topRightCorner(nn, mm) = H_;
    J.bottomLeftCorner(mm, nn) = H_.transpose();
  }
  J.bottomRightCorner(mm, mm) = G_;
  return J;
}

GramSystem assemble(const KernelSpec& kernel, const OperatorSpec& op, const Matrix& X,
                    const std::vector<QuadratureRule>& rules, bool split_cauchy_mass,
                    const BoundaryData* boundary_data) {
  GramSystem g;
  g.kernel_ = std::make_shared<Kernel>(kernel, op.max_order());
  const Kernel& k = *g.kernel_;
  const int d = k.dim();
  if (X.rows() > 0 && X.cols() != d) throw SpecError("observation points have wrong dimension");

  // Term set 0 is always the interior operator (also the query channel).
  g.term_sets_.push_back(op.interior());

  // Expand rules into nodes. A boundary rule matches every boundary operator
  // on its segment; Cauchy-style duplicates each get the full weight unless
  // the split flag is set.
  std::vector<int> node_set;
  std::vector<double> node_shift;
  std::vector<Eigen::RowVectorXd> pts;
  std::vector<double> wts;
  for (const auto& rule : rules) {
    if (rule.dim() != d) throw SpecError("quadrature rule has wrong dimension");
    if ((rule.weights.array() <= 0.0).any()) throw SpecError("quadrature weights must be positive");
    if (!rule.segment) {
      for (int i = 0; i < rule.count(); ++i) {
        pts.push_back(rule.points.row(i));
        wts.push_back(rule.weights[i]);
        node_set.push_back(0);
        node_shift.push_back(op.forcing_absorbed() ? op.forcing().eval(rule.points.row(i)) : 0.0);
      }
      continue;
    }
    int matches = 0;
    for (const auto& b : op.boundary())
      if (b.segment == *rule.segment) ++matches;
    if (matches == 0)
      throw SpecError("no boundary operator for segment " + rule.segment->name());
    const double mass = (split_cauchy_mass && matches > 1) ? 1.0 / matches : 1.0;
    const CoefficientFn* data_fn = nullptr;
    if (boundary_data) {
      for (const auto& [seg, fn] : *boundary_data)
        if (seg == *rule.segment) data_fn = &fn;
    }
    for (const auto& b : op.boundary()) {
      if (!(b.segment == *rule.segment)) continue;
      g.term_sets_.push_back(b.terms);
      const int set_idx = static_cast<int>(g.term_sets_.size()) - 1;
      for (int i = 0; i < rule.count(); ++i) {
        pts.push_back(rule.points.row(i));
        wts.push_back(rule.weights[i] * mass);
        node_set.push_back(set_idx);
        node_shift.push_back(data_fn ? data_fn->eval(rule.points.row(i)) : 0.0);
      }
    }
  }

  const int n = static_cast<int>(X.rows());
  const int m = static_cast<int>(pts.size());
  g.X_ = X;
  g.Z_.resize(m, d);
  g.W_.resize(m);
  g.nodes_.resize(m);
  for (int j = 0; j < m; ++j) {
    g.Z_.row(j) = pts[j];
    g.W_[j] = wts[j];
    g.nodes_[j] = NodeOperator{node_set[j], node_shift[j]};
  }
  fill_blocks(k, g.X_, g.Z_, g.nodes_, g.term_sets_, g.K_, g.H_, g.G_);
  return g;
}

GramSystem assemble_from_nodes(const KernelSpec& kernel, int max_order, const Matrix& X,
                               const Matrix& Z, const Vector& W, std::vector<NodeOperator> nodes,
                               std::vector<TermList> term_sets) {
  GramSystem g;
  g.kernel_ = std::make_shared<Kernel>(kernel, max_order);
  if (Z.rows() != W.size() || Z.rows() != static_cast<Eigen::Index>(nodes.size()))
    throw SpecError("node arrays disagree in size");
  if (term_sets.empty()) throw SpecError("at least one term set is required");
  for (const auto& node : nodes)
    if (node.term_set < 0 || node.term_set >= static_cast<int>(term_sets.size()))
      throw SpecError("node references a missing term set");
  g.X_ = X;
  g.Z_ = Z;
  g.W_ = W;
  g.nodes_ = std::move(nodes);
  g.term_sets_ = std::move(term_sets);
  fill_blocks(*g.kernel_, g.X_, g.Z_, g.nodes_, g.term_sets_, g.K_, g.H_, g.G_);
  return g;
}

SigmaMatrix assemble_sigma(const GramSystem& g, const Temperatures& t) {
  t.validate();
  if ((g.W().array() <= 0.0).any()) throw SpecError("quadrature weights must be positive");
  const int n = g.n(), m = g.m();
  SigmaMatrix sig;
  sig.n = n;
  sig.m = m;
  sig.temps = t;
  sig.S = g.joint();
  for (int i = 0; i < n; ++i) sig.S(i, i) += t.eta * t.gamma;
  for (int j = 0; j < m; ++j) sig.S(n + j, n + j) += t.eta * t.rho / g.W()[j];
  return sig;
}

Vector CholFactor::solve(const Vector& b) const {
  Vector y = L.triangularView<Eigen::Lower>().solve(b);
  return L.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix CholFactor::solve_lower(const Matrix& B) const {
  return L.triangularView<Eigen::Lower>().solve(B);
}

CholFactor chol_logdet(const Matrix& S) {
  const int n = static_cast<int>(S.rows());
  if (S.cols() != n) throw SpecError("chol_logdet requires a square matrix");
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  const double asym = (S - S.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    throw NumericalError("matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  Matrix sym = 0.5 * (S + S.transpose());
  const double base = sym.trace() / n;

  static const double ladder[] = {0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4};
  for (double lvl : ladder) {
    Matrix trial = sym;
    const double jit = lvl * base;
    if (jit != 0.0) trial.diagonal().array() += jit;
    Eigen::LLT<Matrix> llt(trial);
    if (llt.info() == Eigen::Success) {
      CholFactor f;
      f.L = llt.matrixL();
      f.jitter = jit;
      f.logdet = 2.0 * f.L.diagonal().array().log().sum();
      if (std::isfinite(f.logdet)) return f;
    }
  }
  throw NumericalError("matrix is singular at maximum jitter");
}

}  // namespace pilekit

#pragma once

#include "pilekit/kernels.hpp"
#include "pilekit/quadrature.hpp"

#include <memory>
#include <vector>

namespace pilekit {

// Per-segment boundary data h_i, entering as affine node shifts.
using BoundaryData = std::vector<std::pair<SegmentId, CoefficientFn>>;

// Data noise, physics, and prior-scale temperatures. All strictly positive.
struct Temperatures {
  double gamma = 1.0;
  double rho = 1.0;
  double eta = 1.0;

  void validate() const;
};

// One quadrature node of the stacked operator A: its operator terms are D on
// the interior and B_i on the segment it came from. `shift` carries the
// affine offset at the node (absorbed forcing g(z) or boundary data h(z));
// the linear target seen by solvers is r_j + shift_j.
struct NodeOperator {
  int term_set = 0;     // index into GramSystem::term_sets()
  double shift = 0.0;
};

// Block Gram matrices of the joint kernel: K_xx = k(x_i, x_j),
// H_xz = (Id (x) A) k(x_i, z_j), G_zz = (A (x) A) k(z_i, z_j), and the
// quadrature weights W. Immutable after assembly; carries what prediction
// needs (points, node operators, kernel).
class GramSystem {
 public:
  GramSystem() = default;

  const Matrix& K() const { return K_; }
  const Matrix& H() const { return H_; }
  const Matrix& G() const { return G_; }
  const Vector& W() const { return W_; }
  int n() const { return static_cast<int>(K_.rows()); }
  int m() const { return static_cast<int>(G_.rows()); }

  const Matrix& X() const { return X_; }
  const Matrix& Z() const { return Z_; }
  const std::vector<NodeOperator>& nodes() const { return nodes_; }
  const std::vector<TermList>& term_sets() const { return term_sets_; }
  const Kernel& kernel() const { return *kernel_; }
  // Interior operator terms, used as the A-channel for prediction queries.
  const TermList& query_terms() const { return term_sets_.front(); }

  // Joint (n+m) x (n+m) Gram [[K, H], [H^T, G]].
  Matrix joint() const;

  friend GramSystem assemble(const KernelSpec& kernel, const OperatorSpec& op, const Matrix& X,
                             const std::vector<QuadratureRule>& rules, bool split_cauchy_mass,
                             const BoundaryData* boundary_data);
  friend GramSystem assemble_from_nodes(const KernelSpec& kernel, int max_order, const Matrix& X,
                                        const Matrix& Z, const Vector& W,
                                        std::vector<NodeOperator> nodes,
                                        std::vector<TermList> term_sets);

 private:
  Matrix K_, H_, G_, X_, Z_;
  Vector W_;
  std::vector<NodeOperator> nodes_;
  std::vector<TermList> term_sets_;
  std::shared_ptr<const Kernel> kernel_;
};

// Assembles the blocks. Interior rules use op.interior(); a boundary rule
// tagged with segment S contributes one node block per boundary operator of
// op on S (Cauchy conditions therefore duplicate the nodes). When the
// operator carries absorbed forcing, interior node shifts are g(z_j);
// boundary_data entries set boundary node shifts to h(z_j).
GramSystem assemble(const KernelSpec& kernel, const OperatorSpec& op, const Matrix& X,
                    const std::vector<QuadratureRule>& rules, bool split_cauchy_mass = false,
                    const BoundaryData* boundary_data = nullptr);

// Rebuilds a system from explicit nodes (used when reloading serialized fits).
GramSystem assemble_from_nodes(const KernelSpec& kernel, int max_order, const Matrix& X,
                               const Matrix& Z, const Vector& W, std::vector<NodeOperator> nodes,
                               std::vector<TermList> term_sets);

// The regularized matrix [[K + eta*gamma*I, H], [H^T, G + eta*rho*W^-1]].
struct SigmaMatrix {
  Matrix S;
  int n = 0, m = 0;
  Temperatures temps;
};

SigmaMatrix assemble_sigma(const GramSystem& g, const Temperatures& t);

// Cholesky factor of S (+ jitter*I when needed) with its log determinant.
struct CholFactor {
  Matrix L;  // lower triangular
  double logdet = 0.0;
  double jitter = 0.0;

  Vector solve(const Vector& b) const;        // S^-1 b
  Matrix solve_lower(const Matrix& B) const;  // L^-1 B
};

// Symmetrizes (asserting max asymmetry < 1e-10 * scale) and factors with the
// smallest jitter from {0, 1e-12, ..., 1e-4} * trace/(n+m) that succeeds.
CholFactor chol_logdet(const Matrix& S);
inline CholFactor chol_logdet(const SigmaMatrix& S) { return chol_logdet(S.S); }

}  // namespace pilekit

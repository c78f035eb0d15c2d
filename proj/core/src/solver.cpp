#include "pilekit/solver.hpp"

#include <cmath>

namespace pilekit {

void ObservationSet::validate() const {
  if (X.rows() != Y.size()) throw SpecError("observation points and values disagree in count");
}

Vector stacked_targets(const GramSystem& g, const ObservationSet& obs, const PhysicsTargets& r) {
  obs.validate();
  if (obs.X.rows() != g.n()) throw SpecError("observations do not match the assembled system");
  if (r.R.size() != g.m()) throw SpecError("physics targets do not match the quadrature nodes");
  Vector yt(g.n() + g.m());
  yt.head(g.n()) = obs.Y;
  for (int j = 0; j < g.m(); ++j) yt[g.n() + j] = r.R[j] + g.nodes()[j].shift;
  return yt;
}

namespace {

FitCoefficients solve_regularized(const std::shared_ptr<const GramSystem>& g,
                                  const ObservationSet& obs, const PhysicsTargets& targets,
                                  const Temperatures& t, double data_diag, double phys_scale,
                                  FitRoute route) {
  const GramSystem& gram = *g;
  const int n = gram.n(), m = gram.m();
  Matrix A = gram.joint();
  for (int i = 0; i < n; ++i) A(i, i) += data_diag;
  for (int j = 0; j < m; ++j) A(n + j, n + j) += phys_scale / gram.W()[j];
  CholFactor f = chol_logdet(A);
  Vector yt = stacked_targets(gram, obs, targets);
  Vector c = f.solve(yt);
  FitCoefficients out;
  out.alpha = c.head(n);
  out.beta = c.tail(m);
  out.route = route;
  out.temps = t;
  out.jitter = f.jitter;
  out.gram = g;
  if (!out.alpha.allFinite() || !out.beta.allFinite())
    throw NumericalError("fit produced non-finite coefficients");
  return out;
}

}  // namespace

FitCoefficients fit_krr(const std::shared_ptr<const GramSystem>& g, const ObservationSet& obs,
                        const PhysicsTargets& targets, const Temperatures& t) {
  t.validate();
  const int n = g->n();
  return solve_regularized(g, obs, targets, t, t.gamma * std::max(n, 1) / t.eta, t.rho / t.eta,
                           FitRoute::Krr);
}

FitCoefficients fit_gp(const std::shared_ptr<const GramSystem>& g, const ObservationSet& obs,
                       const PhysicsTargets& targets, const Temperatures& t) {
  t.validate();
  return solve_regularized(g, obs, targets, t, t.eta * t.gamma, t.eta * t.rho, FitRoute::Gp);
}

Temperatures gp_equivalent(const Temperatures& t, int n) {
  Temperatures out;
  out.eta = 1.0;
  out.gamma = t.gamma * std::max(n, 1) / t.eta;
  out.rho = t.rho / t.eta;
  return out;
}

double predict(const FitCoefficients& c, PointRef x, Channel channel) {
  const GramSystem& g = *c.gram;
  const Kernel& k = g.kernel();
  double acc = 0.0;
  if (channel == Channel::F) {
    for (int i = 0; i < g.n(); ++i) acc += c.alpha[i] * k.eval(x, g.X().row(i));
    for (int j = 0; j < g.m(); ++j)
      acc += c.beta[j] * k.op_right(g.term_sets()[g.nodes()[j].term_set], x, g.Z().row(j));
  } else {
    const TermList& q = g.query_terms();
    for (int i = 0; i < g.n(); ++i) acc += c.alpha[i] * k.op_left(q, x, g.X().row(i));
    for (int j = 0; j < g.m(); ++j)
      acc += c.beta[j] * k.op_both(q, g.term_sets()[g.nodes()[j].term_set], x, g.Z().row(j));
  }
  return acc;
}

double quadratic_objective(const GramSystem& g, const Temperatures& t, const Vector& y,
                           const Vector& r, const Vector& alpha, const Vector& beta,
                           PhysicsSign sign) {
  const int n = g.n();
  const double s = sign == PhysicsSign::Plus ? 1.0 : -1.0;
  Vector data_res = y - g.K() * alpha - g.H() * beta;
  Vector phys_res = g.H().transpose() * alpha + s * (g.G() * beta) - r;
  Vector c(n + g.m());
  c << alpha, beta;
  double reg = c.dot(g.joint() * c);
  double out = reg / t.eta + phys_res.dot(g.W().asDiagonal() * phys_res) / t.rho;
  if (n > 0) out += data_res.squaredNorm() / (t.gamma * n);
  return out;
}

double pointwise_objective(const GramSystem& g, const Temperatures& t, const Vector& y,
                           const Vector& r, const Vector& alpha, const Vector& beta) {
  FitCoefficients c;
  c.alpha = alpha;
  c.beta = beta;
  c.temps = t;
  c.gram = std::shared_ptr<const GramSystem>(&g, [](const GramSystem*) {});
  const int n = g.n(), m = g.m();
  double out = 0.0;
  if (n > 0) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = predict(c, g.X().row(i), Channel::F) - y[i];
      acc += d * d;
    }
    out += acc / (t.gamma * n);
  }
  double phys = 0.0;
  for (int j = 0; j < m; ++j) {
    // evaluate the node's own operator applied to the expansion
    const TermList& terms = g.term_sets()[g.nodes()[j].term_set];
    const Kernel& k = g.kernel();
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += alpha[i] * k.op_left(terms, g.Z().row(j), g.X().row(i));
    for (int jj = 0; jj < m; ++jj)
      v += beta[jj] *
           k.op_both(terms, g.term_sets()[g.nodes()[jj].term_set], g.Z().row(j), g.Z().row(jj));
    double dres = v - r[j];
    phys += g.W()[j] * dres * dres;
  }
  out += phys / t.rho;
  Vector cvec(n + m);
  cvec << alpha, beta;
  out += cvec.dot(g.joint() * cvec) / t.eta;
  return out;
}

PosteriorPredictive::PosteriorPredictive(std::shared_ptr<const GramSystem> gram,
                                         const Temperatures& t, const Vector& ytilde)
    : gram_(std::move(gram)), temps_(t), factor_(chol_logdet(assemble_sigma(*gram_, t))) {
  if (ytilde.size() != gram_->n() + gram_->m())
    throw SpecError("target vector does not match the system size");
  solved_ = factor_.solve(ytilde);
  coef_.alpha = solved_.head(gram_->n());
  coef_.beta = solved_.tail(gram_->m());
  coef_.route = FitRoute::Gp;
  coef_.temps = t;
  coef_.jitter = factor_.jitter;
  coef_.gram = gram_;
}

Vector PosteriorPredictive::cross_vector(PointRef x, Channel channel) const {
  const GramSystem& g = *gram_;
  const Kernel& k = g.kernel();
  Vector v(g.n() + g.m());
  if (channel == Channel::F) {
    for (int i = 0; i < g.n(); ++i) v[i] = k.eval(x, g.X().row(i));
    for (int j = 0; j < g.m(); ++j)
      v[g.n() + j] = k.op_right(g.term_sets()[g.nodes()[j].term_set], x, g.Z().row(j));
  } else {
    const TermList& q = g.query_terms();
    for (int i = 0; i < g.n(); ++i) v[i] = k.op_left(q, x, g.X().row(i));
    for (int j = 0; j < g.m(); ++j)
      v[g.n() + j] =
          k.op_both(q, g.term_sets()[g.nodes()[j].term_set], x, g.Z().row(j));
  }
  return v;
}

double PosteriorPredictive::prior_cov(PointRef p, Channel cp, PointRef q, Channel cq) const {
  const Kernel& k = gram_->kernel();
  const TermList& qt = gram_->query_terms();
  if (cp == Channel::F && cq == Channel::F) return k.eval(p, q);
  if (cp == Channel::F && cq == Channel::Af) return k.op_right(qt, p, q);
  if (cp == Channel::Af && cq == Channel::F) return k.op_left(qt, p, q);
  return k.op_both(qt, qt, p, q);
}

double PosteriorPredictive::mean(PointRef x, Channel channel) const {
  return cross_vector(x, channel).dot(solved_);
}

double PosteriorPredictive::cov(PointRef p, Channel cp, PointRef q, Channel cq) const {
  Vector vp = cross_vector(p, cp);
  Vector vq = cross_vector(q, cq);
  Vector lp = factor_.L.triangularView<Eigen::Lower>().solve(vp);
  Vector lq = factor_.L.triangularView<Eigen::Lower>().solve(vq);
  return temps_.eta * (prior_cov(p, cp, q, cq) - lp.dot(lq));
}

double PosteriorPredictive::variance(PointRef x, Channel channel) const {
  double v = cov(x, channel, x, channel);
  if (v < 0.0) {
    clamped_.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  return v;
}

}  // namespace pilekit

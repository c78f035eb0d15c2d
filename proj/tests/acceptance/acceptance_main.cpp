// Acceptance suite: one check per release criterion, each printed as a
// single pass/fail line. Run with no arguments for all criteria or with a
// list of criterion numbers.

#include "pilekit/experiments.hpp"
#include "pilekit/io.hpp"

#include "../helpers.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

using namespace pilekit;
using namespace pilekit::testing;

namespace {

struct Checker {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << (detail.str().empty() ? "" : "; ") << what;
    }
  }
};

// nearest-rank lower quantile: the k-th smallest with k = ceil(q N)
double quantile_nearest(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  std::size_t k = static_cast<std::size_t>(std::ceil(q * values.size()));
  if (k == 0) k = 1;
  return values[k - 1];
}

TermList laplacian2() {
  return {{MultiIndex({2, 0}), CoefficientFn::constant(1.0)},
          {MultiIndex({0, 2}), CoefficientFn::constant(1.0)}};
}

// ---------------------------------------------------------------------------
// 1. ridge equivalence: data-only fits match the closed-form solution
void criterion_1(Checker& c) {
  CounterRng rng(1001);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform() * 2);
    const int n = 2 + static_cast<int>(rng.uniform() * 29);
    Matrix X = random_points(rng, n, d);
    OperatorSpec op({{MultiIndex::zero(d), CoefficientFn::constant(1.0)}}, {});
    auto gram = std::make_shared<GramSystem>(assemble(random_kernel(rng, d), op, X, {}));
    Vector Y(n);
    for (int i = 0; i < n; ++i) Y[i] = rng.normal();
    Temperatures t;
    t.eta = rng.uniform(0.3, 2.0);
    t.gamma = rng.uniform(0.05, 1.5);
    t.rho = 1.0;
    FitCoefficients fit = fit_krr(gram, ObservationSet{X, Y}, PhysicsTargets::zeros(0), t);
    Matrix A = gram->K();
    A.diagonal().array() += t.gamma * n / t.eta;
    Vector want = A.lu().solve(Y);
    double err = (fit.alpha - want).cwiseAbs().maxCoeff();
    c.require(err < 1e-8, "instance " + std::to_string(trial) + " max err " + std::to_string(err));
    if (!c.ok) return;
  }
}

// ---------------------------------------------------------------------------
// 2. representer sign: the pointwise loss equals the quadratic form with the
//    plus convention and differs under the printed minus sign
void criterion_2(Checker& c) {
  CounterRng rng(1002);
  bool minus_refuted = false;
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 14);
    const int m = 2 + static_cast<int>(rng.uniform() * 14);
    Matrix X = random_points(rng, n, 2), Z = random_points(rng, m, 2);
    QuadratureRule r;
    r.points = Z;
    r.weights.resize(m);
    for (int j = 0; j < m; ++j) r.weights[j] = rng.uniform(0.2, 1.0);
    OperatorSpec op(laplacian2(), {});
    auto gram = std::make_shared<GramSystem>(assemble(random_kernel(rng, 2), op, X, {r}));
    Temperatures t;
    t.eta = rng.uniform(0.3, 2.0);
    t.gamma = rng.uniform(0.2, 1.5);
    t.rho = rng.uniform(0.2, 1.5);
    Vector Y(n), R(m), a(n), b(m);
    for (int i = 0; i < n; ++i) Y[i] = rng.normal();
    for (int j = 0; j < m; ++j) R[j] = rng.normal();
    for (int i = 0; i < n; ++i) a[i] = rng.normal();
    for (int j = 0; j < m; ++j) b[j] = rng.normal();

    double functional = pointwise_objective(*gram, t, Y, R, a, b);
    double plus = quadratic_objective(*gram, t, Y, R, a, b, PhysicsSign::Plus);
    double minus = quadratic_objective(*gram, t, Y, R, a, b, PhysicsSign::Minus);
    double rel = std::abs(functional - plus) / (1.0 + std::abs(plus));
    c.require(rel < 1e-10, "plus-sign mismatch " + std::to_string(rel));
    if (std::abs(functional - minus) > 1e-6 * (1.0 + std::abs(minus))) minus_refuted = true;

    // the fitted coefficients satisfy the same identity
    FitCoefficients fit = fit_krr(gram, ObservationSet{X, Y}, PhysicsTargets{R}, t);
    double f2 = pointwise_objective(*gram, t, Y, R, fit.alpha, fit.beta);
    double q2 = quadratic_objective(*gram, t, Y, R, fit.alpha, fit.beta, PhysicsSign::Plus);
    c.require(std::abs(f2 - q2) < 1e-10 * (1.0 + std::abs(q2)), "fitted-point mismatch");
    if (!c.ok) return;
  }
  c.require(minus_refuted, "minus sign was never refuted");
}

// ---------------------------------------------------------------------------
// 3. normalization identity of the data-free score; the linear-product
//    constant fails it
void criterion_3(Checker& c) {
  CounterRng rng(1003);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform() * 10);
    Matrix G = random_psd(rng, m);
    Vector w(m);
    for (int j = 0; j < m; ++j) w[j] = rng.uniform(0.1, 2.0);
    const double eta = rng.uniform(0.3, 2.0), rho = rng.uniform(0.3, 2.0);
    DataFreeReport rep = data_free_pile(G, w, eta, rho);
    Matrix S = G;
    for (int j = 0; j < m; ++j) S(j, j) += eta * rho / w[j];
    SigmaMatrix sig;
    sig.S = S;
    sig.n = 0;
    sig.m = m;
    Temperatures t{1.0, rho, eta};
    sig.temps = t;
    PileReport full = pile(sig, Vector::Zero(m), t);
    double lhs = m * full.pile - data_free_cm(m, w, eta, rho);
    c.require(std::abs(lhs - rep.normalized_score) < 1e-10,
              "identity residual " + std::to_string(std::abs(lhs - rep.normalized_score)));
    double printed = m * full.pile - data_free_cm(m, w, eta, rho, CmConvention::LinearProduct);
    c.require(std::abs(printed - rep.normalized_score) > 1e-8,
              "the linear-product constant unexpectedly satisfied the identity");
    if (!c.ok) return;
  }
}

// ---------------------------------------------------------------------------
// 4. fredholm oracle: min(x,y) on [0,1] converges to log cosh(1)
void criterion_4(Checker& c) {
  const double target = std::log(std::cosh(1.0));
  auto kmin = [](PointRef a, PointRef b) { return std::min(a[0], b[0]); };
  double prev = std::numeric_limits<double>::infinity();
  double final_err = prev;
  for (int m : {50, 100, 200, 400}) {
    auto rule = chebyshev1_1d(m, 0.0, 1.0, ChebyshevWeights::Corrected);
    double err = std::abs(fredholm_logdet(kmin, rule, 1.0) - target);
    c.require(err < prev, "error not decreasing at m=" + std::to_string(m));
    prev = err;
    final_err = err;
  }
  c.require(final_err < 1e-4, "final error " + std::to_string(final_err));
}

// ---------------------------------------------------------------------------
// 5. kernel-derivative oracle: 200 randomized closed-form vs FD comparisons
void criterion_5(Checker& c) {
  CounterRng rng(1005);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform() * 2);
    Kernel k(random_kernel(rng, d));
    auto x = random_point(rng, d), y = random_point(rng, d);
    MultiIndex a = random_multi_index(rng, d, 2), b = random_multi_index(rng, d, 2);
    double closed = k.eval_partial(a, b, x, y);
    worst = std::max(worst, rel_err(fd_partial(k, a, b, x, y), closed));
    if (d == 2) {
      // operator-applied evaluations against composed finite differences
      TermList terms = {{MultiIndex({1, 0}), CoefficientFn::constant(1.0)},
                        {MultiIndex({0, 2}), CoefficientFn::constant(-0.7)}};
      double left = k.op_left(terms, x, y);
      double fd = fd_partial(k, MultiIndex({1, 0}), MultiIndex::zero(2), x, y) -
                  0.7 * fd_partial(k, MultiIndex({0, 2}), MultiIndex::zero(2), x, y);
      worst = std::max(worst, rel_err(left, fd));
    }
  }
  c.require(worst < 1e-6, "worst relative error " + std::to_string(worst));
}

// ---------------------------------------------------------------------------
// 6. poisson reproduction: bandwidth curve shape, error coverage at the
//    selected bandwidth, and divergence at the smallest regularizations
void criterion_6(Checker& c) {
  PoissonConfig cfg;
  PoissonResult res = run_poisson(cfg);
  const SweepResult& hstage = res.selection.stages[0];
  const SweepResult& rstage = res.selection.stages[1];
  const SweepResult& gstage = res.selection.stages[2];

  // (a) unique interior minimum of the mean pile along h
  std::vector<double> piles;
  for (const auto& row : hstage.rows) piles.push_back(row.pile.mean);
  int interior_minima = 0;
  for (std::size_t i = 1; i + 1 < piles.size(); ++i)
    if (piles[i] < piles[i - 1] && piles[i] < piles[i + 1]) ++interior_minima;
  c.require(interior_minima == 1,
            "local minima count " + std::to_string(interior_minima));
  c.require(hstage.argmin > 0 && hstage.argmin + 1 < static_cast<int>(piles.size()),
            "argmin lies on the grid edge");

  // (b) both errors at h* within 2 sigma of their grid minima
  const SweepRow& at_h = hstage.rows[hstage.argmin];
  double dmin = std::numeric_limits<double>::infinity();
  double pmin = dmin;
  for (const auto& row : hstage.rows) {
    dmin = std::min(dmin, row.data_rel.mean);
    pmin = std::min(pmin, row.phys_rel.mean);
  }
  c.require(at_h.data_rel.mean <= dmin + 2.0 * at_h.data_rel.stddev,
            "data error above coverage: " + std::to_string(at_h.data_rel.mean) + " vs min " +
                std::to_string(dmin) + " + 2sd " + std::to_string(2 * at_h.data_rel.stddev));
  c.require(at_h.phys_rel.mean <= pmin + 2.0 * at_h.phys_rel.stddev,
            "physics error above coverage: " + std::to_string(at_h.phys_rel.mean) + " vs min " +
                std::to_string(pmin) + " + 2sd " + std::to_string(2 * at_h.phys_rel.stddev));

  // (c) divergence behavior at the smallest rho and gamma
  c.require(rstage.rows.front().pile.mean > rstage.best().pile.mean,
            "smallest rho does not exceed the selected pile");
  c.require(gstage.rows.front().pile.mean > gstage.best().pile.mean,
            "smallest gamma does not exceed the selected pile");
}

// ---------------------------------------------------------------------------
// 7. convection failure diagnosis with the isotropic kernel
void criterion_7(Checker& c) {
  ConvectionConfig cfg;
  cfg.beta = 30.0;
  cfg.run_datafree = false;
  ConvectionResult res = run_convection(cfg);
  const SweepResult& sw = res.iso_sweep;

  std::vector<double> data, phys;
  for (const auto& row : sw.rows) {
    data.push_back(row.data_rel.mean);
    phys.push_back(row.phys_rel.mean);
  }
  const double qd = quantile_nearest(data, 0.25);
  const double qp = quantile_nearest(phys, 0.25);
  int joint = 0;
  for (const auto& row : sw.rows)
    if (row.data_rel.mean < qd && row.phys_rel.mean < qp) ++joint;
  c.require(joint == 0, std::to_string(joint) + " bandwidths in the best quartile of both errors");

  c.require(sw.argmin >= 0, "no selectable bandwidth");
  if (sw.argmin >= 0) {
    double ratio = sw.best().fit_norm_rel;
    c.require(ratio < 0.2, "selected fit norm ratio " + std::to_string(ratio));
  }
}

// ---------------------------------------------------------------------------
// 8. anisotropic data-free selection: periodic landscape, characteristic
//    alignment, and a healthy winner fit
void criterion_8(Checker& c) {
  ConvectionConfig cfg;
  cfg.beta = std::tan(1.41);  // alignment prediction arctan(beta) = 1.41
  cfg.run_isotropic = false;
  ConvectionResult res = run_convection(cfg);

  // pi-periodicity, checked directly on fresh cells
  {
    Vector lo(2), hi(2);
    lo << 0.0, 0.0;
    hi << 1.0, 2.0 * M_PI;
    DomainSpec dom(lo, hi);
    SegmentId initial{0, false};
    TermList conv = {{MultiIndex({1, 0}), CoefficientFn::constant(1.0)},
                     {MultiIndex({0, 1}), CoefficientFn::constant(cfg.beta)}};
    OperatorSpec op(conv, make_boundary_operator(BoundaryKind::Dirichlet, {}, initial, dom));
    std::vector<QuadratureRule> rules = {
        tensor_box(dom, 10, ChebyshevWeights::Corrected),
        boundary_rule(initial, 10, dom, ChebyshevWeights::Corrected)};
    for (double theta : {-2.3, 0.6, 1.4}) {
      double s1 = datafree_kernel_select({theta}, {0.7}, op, rules, cfg.df_eta, cfg.df_rho)
                      .landscape[0]
                      .score;
      double s2 = datafree_kernel_select({theta + M_PI}, {0.7}, op, rules, cfg.df_eta, cfg.df_rho)
                      .landscape[0]
                      .score;
      c.require(std::abs(s1 - s2) < 1e-8,
                "periodicity gap " + std::to_string(std::abs(s1 - s2)));
    }
  }

  // characteristic alignment within one grid cell, and the figure window
  const double cell = 2.0 * M_PI / (cfg.theta_grid.size() - 1);
  const double predicted = std::atan(cfg.beta);
  double gap = std::abs(res.landscape.theta_canonical - predicted);
  gap = std::min(gap, std::abs(gap - M_PI));  // periodic distance
  c.require(gap <= cell, "alignment gap " + std::to_string(gap) + " > cell " + std::to_string(cell));
  c.require(res.landscape.theta_canonical >= 1.31 && res.landscape.theta_canonical <= 1.51,
            "theta* " + std::to_string(res.landscape.theta_canonical) + " outside [1.31, 1.51]");

  // the winning kernel fits both channels
  c.require(res.winner.data_rel.mean < 0.1,
            "winner data error " + std::to_string(res.winner.data_rel.mean));
  c.require(res.winner.phys_rel.mean < 0.2,
            "winner physics error " + std::to_string(res.winner.phys_rel.mean));
}

// ---------------------------------------------------------------------------
// 9. posterior sanity: conditioning shrinks variance; noise-free conditioning
//    pins it at the data
void criterion_9(Checker& c) {
  CounterRng rng(1009);
  TermList lap1 = {{MultiIndex({2}), CoefficientFn::constant(1.0)}};
  OperatorSpec op(lap1, {});
  Matrix X = random_points(rng, 8, 1);
  Matrix Z = random_points(rng, 10, 1);
  QuadratureRule r;
  r.points = Z;
  r.weights = Vector::Constant(10, 0.2);
  auto gram = std::make_shared<GramSystem>(assemble(KernelSpec::rbf(0.6, 1), op, X, {r}));
  Vector yt(18);
  for (int i = 0; i < 18; ++i) yt[i] = rng.normal();
  Temperatures t{0.4, 0.7, 1.3};
  PosteriorPredictive post(gram, t, yt);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::RowVectorXd p = random_point(rng, 1, -1.2, 1.2);
    for (Channel ch : {Channel::F, Channel::Af}) {
      double prior = t.eta * post.prior_cov(p, ch, p, ch);
      double posterior = post.variance(p, ch);
      c.require(posterior <= prior + 1e-10, "variance exceeds the prior at a query point");
    }
    if (!c.ok) return;
  }

  // gamma -> 0 pins the variance at a conditioned site
  Matrix X1(4, 1);
  X1 << -0.9, -0.2, 0.4, 0.8;
  OperatorSpec ident({{MultiIndex({0}), CoefficientFn::constant(1.0)}}, {});
  auto g2 = std::make_shared<GramSystem>(assemble(KernelSpec::rbf(0.8, 1), ident, X1, {}));
  double prev = std::numeric_limits<double>::infinity();
  for (double gamma : {1e-2, 1e-6, 1e-10}) {
    PosteriorPredictive p2(g2, Temperatures{gamma, 1.0, 1.0}, Vector::Zero(4));
    double v = p2.variance(X1.row(2), Channel::F);
    c.require(v <= prev + 1e-12, "variance not shrinking with gamma");
    prev = v;
  }
  c.require(prev <= 1e-6, "variance at a noise-free site is " + std::to_string(prev));
}

struct Criterion {
  int id;
  const char* label;
  std::function<void(Checker&)> body;
};

const Criterion kCriteria[] = {
    {1, "ridge equivalence of the data-only fit", criterion_1},
    {2, "pointwise loss matches the plus-sign quadratic form", criterion_2},
    {3, "data-free normalization identity", criterion_3},
    {4, "fredholm oracle convergence to log cosh(1)", criterion_4},
    {5, "kernel derivatives match finite differences", criterion_5},
    {6, "poisson bandwidth selection reproduction", criterion_6},
    {7, "convection isotropic failure diagnosis", criterion_7},
    {8, "anisotropic data-free kernel selection", criterion_8},
    {9, "posterior variance sanity", criterion_9},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& crit : kCriteria) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), crit.id) == wanted.end())
      continue;
    Checker c;
    auto t0 = std::chrono::steady_clock::now();
    try {
      crit.body(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << "exception: " << e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << crit.id << " (" << crit.label
              << ") [" << secs << " s]";
    if (!c.ok) std::cout << " -- " << c.detail.str();
    std::cout << std::endl;
    if (!c.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

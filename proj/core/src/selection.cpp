#include "pilekit/selection.hpp"

#include "pilekit/parallel.hpp"

#include <cmath>

namespace pilekit {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

SweepParam sweep_param_from(const std::string& name) {
  if (name == "h") return SweepParam::H;
  if (name == "rho") return SweepParam::Rho;
  if (name == "gamma") return SweepParam::Gamma;
  if (name == "eta") return SweepParam::Eta;
  if (name == "theta") return SweepParam::Theta;
  if (name == "s") return SweepParam::S;
  throw SpecError("unknown sweep parameter '" + name + "'");
}

std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::H: return "h";
    case SweepParam::Rho: return "rho";
    case SweepParam::Gamma: return "gamma";
    case SweepParam::Eta: return "eta";
    case SweepParam::Theta: return "theta";
    case SweepParam::S: return "s";
  }
  return "?";
}

const SweepRow& SweepResult::best() const {
  if (argmin < 0) throw NumericalError("sweep has no non-diverged row");
  return rows[static_cast<std::size_t>(argmin)];
}

namespace {

bool kernel_param(SweepParam p) {
  return p == SweepParam::H || p == SweepParam::Theta || p == SweepParam::S;
}

void apply_param(SweepParam p, double v, KernelSpec& kernel, Temperatures& temps) {
  switch (p) {
    case SweepParam::H:
      kernel = KernelSpec::rbf(v, kernel.dim);
      break;
    case SweepParam::Theta:
      kernel = KernelSpec::anisotropic(
          v, kernel.family == KernelFamily::AnisotropicRbf ? kernel.s : 1.0);
      break;
    case SweepParam::S:
      kernel = KernelSpec::anisotropic(
          kernel.family == KernelFamily::AnisotropicRbf ? kernel.theta : 0.0, v);
      break;
    case SweepParam::Rho: temps.rho = v; break;
    case SweepParam::Gamma: temps.gamma = v; break;
    case SweepParam::Eta: temps.eta = v; break;
  }
}

// Kernel-dependent (seed- and temperature-independent) part of a sweep cell:
// the Gram blocks and the eval-grid cross-covariances.
struct GramCross {
  std::shared_ptr<const GramSystem> gram;
  Matrix Vf, Vg;          // (n+m) x q
  Vector prior_f, prior_g;  // prior diagonal at the eval nodes

  GramCross(const KernelSpec& kspec, const SweepContext& ctx) {
    gram = std::make_shared<GramSystem>(
        assemble(kspec, ctx.op, ctx.X, ctx.rules, ctx.split_cauchy_mass, &ctx.boundary_data));
    const GramSystem& g = *gram;
    const Kernel& k = g.kernel();
    const int q = ctx.eval_rule.count();
    const int nm = g.n() + g.m();
    Vf.resize(nm, q);
    Vg.resize(nm, q);
    prior_f.resize(q);
    prior_g.resize(q);
    const TermList& qt = g.query_terms();
    parallel_for(static_cast<std::size_t>(q), [&](std::size_t ci) {
      const int col = static_cast<int>(ci);
      PointRef z = ctx.eval_rule.points.row(col);
      for (int i = 0; i < g.n(); ++i) {
        Vf(i, col) = k.eval(z, g.X().row(i));
        Vg(i, col) = k.op_left(qt, z, g.X().row(i));
      }
      for (int j = 0; j < g.m(); ++j) {
        const TermList& tj = g.term_sets()[g.nodes()[j].term_set];
        Vf(g.n() + j, col) = k.op_right(tj, z, g.Z().row(j));
        Vg(g.n() + j, col) = k.op_both(qt, tj, z, g.Z().row(j));
      }
      prior_f[col] = k.eval(z, z);
      prior_g[col] = k.op_both(qt, qt, z, z);
    });
  }
};

// Temperature-dependent part: the factorization and posterior variances.
struct Conditioner {
  CholFactor factor;
  double logdet = 0.0;
  Vector var_f, var_g;
  double var_f_int = 0.0, var_g_int = 0.0;
  Matrix Lf, Lg;

  Conditioner(const GramCross& gc, const SweepContext& ctx, const Temperatures& temps) {
    SigmaMatrix sig = assemble_sigma(*gc.gram, temps);
    factor = chol_logdet(sig);
    logdet = factor.logdet;
    Lf = factor.solve_lower(gc.Vf);
    Lg = factor.solve_lower(gc.Vg);
    const int q = static_cast<int>(gc.Vf.cols());
    var_f.resize(q);
    var_g.resize(q);
    for (int col = 0; col < q; ++col) {
      var_f[col] = std::max(0.0, temps.eta * (gc.prior_f[col] - Lf.col(col).squaredNorm()));
      var_g[col] = std::max(0.0, temps.eta * (gc.prior_g[col] - Lg.col(col).squaredNorm()));
      var_f_int += ctx.eval_rule.weights[col] * var_f[col];
      var_g_int += ctx.eval_rule.weights[col] * var_g[col];
    }
  }
};

struct Normalizers {
  double nf = 0.0, ng = 0.0;
  bool phys_fallback = false;
};

Normalizers eval_normalizers(const SweepContext& ctx) {
  Normalizers out;
  out.nf = l2_norm(ctx.truth_f, ctx.eval_rule);
  out.ng = l2_norm(ctx.truth_g, ctx.eval_rule);
  if (!(out.nf > 0.0)) throw SpecError("truth function has zero L2 norm on the eval rule");
  // Homogeneous constraints (||D f|| = 0) fall back to the data normalizer.
  if (!(out.ng > 1e-12 * out.nf)) {
    out.ng = out.nf;
    out.phys_fallback = true;
  }
  return out;
}

SweepRow evaluate_cell(double value, const Temperatures& temps, const SweepContext& ctx,
                       const Normalizers& norms, const GramCross& gc, const Conditioner& cond,
                       const Vector& tf, const Vector& tg) {
  SweepRow row;
  row.value = value;
  const GramSystem& g = *gc.gram;
  const int q = ctx.eval_rule.count();
  const int mn = g.n() + g.m();

  std::vector<double> piles, quads, datas, physs, fitnorms;
  for (std::uint64_t seed : ctx.seeds) {
    auto [Y, R] = ctx.data_for_seed(seed);
    Vector yt = stacked_targets(g, ObservationSet{ctx.X, Y}, PhysicsTargets{R});
    Vector u = cond.factor.L.triangularView<Eigen::Lower>().solve(yt);
    double quad = u.squaredNorm() / mn;
    double pile_val = quad + cond.logdet / mn + std::log(2.0 * kPi * temps.eta);
    Vector c = cond.factor.L.transpose().triangularView<Eigen::Upper>().solve(u);
    Vector mean_f = gc.Vf.transpose() * c;
    Vector mean_g = gc.Vg.transpose() * c;
    double data_raw = cond.var_f_int, phys_raw = cond.var_g_int, fit2 = 0.0;
    for (int col = 0; col < q; ++col) {
      const double w = ctx.eval_rule.weights[col];
      data_raw += w * (mean_f[col] - tf[col]) * (mean_f[col] - tf[col]);
      phys_raw += w * (mean_g[col] - tg[col]) * (mean_g[col] - tg[col]);
      fit2 += w * mean_f[col] * mean_f[col];
    }
    piles.push_back(pile_val);
    quads.push_back(quad);
    datas.push_back(normalize(data_raw, norms.nf, ctx.norm_mode));
    physs.push_back(normalize(phys_raw, norms.ng, ctx.norm_mode));
    fitnorms.push_back(std::sqrt(fit2) / norms.nf);
  }
  row.pile = summarize(piles);
  row.data_rel = summarize(datas);
  row.phys_rel = summarize(physs);
  row.quad_term = summarize(quads).mean;
  row.logdet_term = cond.logdet / mn;
  row.const_term = std::log(2.0 * kPi * temps.eta);
  row.fit_norm_rel = summarize(fitnorms).mean;
  row.diverged = !std::isfinite(row.pile.mean) || row.pile.mean > ctx.divergence_cap;
  return row;
}

}  // namespace

SweepResult sweep(const SweepGrid& grid, const SweepContext& ctx) {
  if (grid.values.empty()) throw SpecError("sweep grid has no values");
  if (!ctx.data_for_seed) throw SpecError("sweep context has no data generator");
  if (ctx.seeds.empty()) throw SpecError("sweep context has no seeds");
  SweepResult result;
  result.param = grid.param;

  Normalizers norms = eval_normalizers(ctx);
  const int q = ctx.eval_rule.count();
  Vector tf(q), tg(q);
  for (int col = 0; col < q; ++col) {
    tf[col] = ctx.truth_f(ctx.eval_rule.points.row(col));
    tg[col] = ctx.truth_g(ctx.eval_rule.points.row(col));
  }

  std::shared_ptr<GramCross> shared_gc;
  if (!kernel_param(grid.param)) shared_gc = std::make_shared<GramCross>(ctx.kernel, ctx);

  for (double v : grid.values) {
    SweepRow row;
    row.value = v;
    try {
      KernelSpec kspec = ctx.kernel;
      Temperatures temps = ctx.temps;
      apply_param(grid.param, v, kspec, temps);
      std::shared_ptr<GramCross> gc =
          kernel_param(grid.param) ? std::make_shared<GramCross>(kspec, ctx) : shared_gc;
      Conditioner cond(*gc, ctx, temps);
      row = evaluate_cell(v, temps, ctx, norms, *gc, cond, tf, tg);
    } catch (const std::exception& e) {
      row.diverged = true;
      row.error = e.what();
    }
    result.rows.push_back(std::move(row));
  }

  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const SweepRow& row = result.rows[i];
    if (row.diverged) continue;
    // <= so exact ties resolve to the later (larger) grid value
    if (result.argmin < 0 || row.pile.mean <= result.rows[result.argmin].pile.mean)
      result.argmin = static_cast<int>(i);
  }
  return result;
}

SelectionOutcome sequential_select(const std::vector<SweepGrid>& stages, SweepContext ctx) {
  if (stages.empty()) throw SpecError("sequential_select needs at least one stage");
  SelectionOutcome out;
  for (const auto& stage : stages) {
    SweepResult res = sweep(stage, ctx);
    if (res.argmin < 0)
      throw NumericalError("all cells diverged in stage '" + to_string(stage.param) + "'");
    apply_param(stage.param, res.best().value, ctx.kernel, ctx.temps);
    out.stages.push_back(std::move(res));
  }
  out.kernel = ctx.kernel;
  out.temps = ctx.temps;
  return out;
}

DatafreeSelection datafree_kernel_select(const std::vector<double>& theta_grid,
                                         const std::vector<double>& s_grid, const OperatorSpec& op,
                                         const std::vector<QuadratureRule>& rules, double eta,
                                         double rho) {
  if (theta_grid.empty() || s_grid.empty()) throw SpecError("empty data-free selection grid");
  if (!(eta > 0.0) || !(rho > 0.0)) throw SpecError("eta and rho must be positive");
  DatafreeSelection sel;
  const std::size_t cells = theta_grid.size() * s_grid.size();
  sel.landscape.resize(cells);
  const Matrix no_data(0, 2);
  parallel_for(cells, [&](std::size_t idx) {
    const double theta = theta_grid[idx / s_grid.size()];
    const double s = s_grid[idx % s_grid.size()];
    DatafreeCell cell;
    cell.theta = theta;
    cell.s = s;
    try {
      GramSystem g = assemble(KernelSpec::anisotropic(theta, s), op, no_data, rules);
      cell.score = data_free_pile(g.G(), g.W(), eta, rho).normalized_score;
    } catch (const std::exception&) {
      cell.failed = true;
    }
    sel.landscape[idx] = cell;
  });
  int best = -1;
  for (std::size_t i = 0; i < cells; ++i) {
    const auto& c = sel.landscape[i];
    if (c.failed) continue;
    if (best < 0 || c.score < sel.landscape[best].score) best = static_cast<int>(i);
  }
  if (best < 0) throw NumericalError("every data-free selection cell failed");
  sel.theta_star = sel.landscape[best].theta;
  sel.s_star = sel.landscape[best].s;
  sel.theta_canonical = sel.theta_star - std::floor(sel.theta_star / kPi) * kPi;
  return sel;
}

}  // namespace pilekit

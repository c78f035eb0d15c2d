#pragma once

#include "pilekit/evidence.hpp"
#include "pilekit/metrics.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pilekit {

enum class SweepParam { H, Rho, Gamma, Eta, Theta, S };

SweepParam sweep_param_from(const std::string& name);
std::string to_string(SweepParam p);

struct SweepGrid {
  SweepParam param = SweepParam::H;
  std::vector<double> values;
};

// Everything a sweep cell needs: the base problem, per-seed data, and the
// evaluation machinery for PPL2-G errors.
struct SweepContext {
  KernelSpec kernel;
  OperatorSpec op;
  Matrix X;
  std::vector<QuadratureRule> rules;
  Temperatures temps;
  bool split_cauchy_mass = false;
  BoundaryData boundary_data;

  // (Y, R) for a seed; R is on the residual level (see stacked_targets).
  std::function<std::pair<Vector, Vector>(std::uint64_t)> data_for_seed;
  std::vector<std::uint64_t> seeds{0};

  QuadratureRule eval_rule;
  TruthFn truth_f, truth_g;
  NormalizerMode norm_mode = NormalizerMode::NormSquared;

  double divergence_cap = 1e6;
};

struct SweepRow {
  double value = 0.0;
  Summary pile, data_rel, phys_rel;
  double quad_term = 0.0, logdet_term = 0.0, const_term = 0.0;  // means over seeds
  double fit_norm_rel = 0.0;  // ||f_hat||_L2 / ||f||_L2, mean over seeds
  bool diverged = false;
  std::string error;
};

struct SweepResult {
  SweepParam param = SweepParam::H;
  std::vector<SweepRow> rows;
  int argmin = -1;  // by mean pile over non-diverged rows; ties to larger value

  const SweepRow& best() const;
};

// One fit + PILE + PPL2-G per grid value. Individual cell failures are
// recorded in the row, not fatal. Deterministic given the context seeds.
SweepResult sweep(const SweepGrid& grid, const SweepContext& ctx);

struct SelectionOutcome {
  KernelSpec kernel;
  Temperatures temps;
  std::vector<SweepResult> stages;
};

// Coordinate-wise argmin in the given order, each stage fixing the winners of
// the earlier ones. Throws naming the stage when every cell diverged.
SelectionOutcome sequential_select(const std::vector<SweepGrid>& stages, SweepContext ctx);

struct DatafreeCell {
  double theta = 0.0, s = 0.0;
  double score = 0.0;
  bool failed = false;
};

struct DatafreeSelection {
  double theta_star = 0.0;      // raw grid argmin
  double s_star = 0.0;
  double theta_canonical = 0.0; // theta_star folded into [0, pi)
  std::vector<DatafreeCell> landscape;  // theta-major order
};

// Data-free kernel choice: evaluates the normalized data-free score of the
// anisotropic kernel on every (theta, s) cell. Consumes no observations.
DatafreeSelection datafree_kernel_select(const std::vector<double>& theta_grid,
                                         const std::vector<double>& s_grid, const OperatorSpec& op,
                                         const std::vector<QuadratureRule>& rules, double eta,
                                         double rho);

}  // namespace pilekit

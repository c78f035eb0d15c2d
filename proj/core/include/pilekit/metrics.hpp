#pragma once

#include "pilekit/solver.hpp"

#include <functional>
#include <vector>

namespace pilekit {

using TruthFn = std::function<double(PointRef)>;

// Posterior-predictive L2 generalization error of one channel:
//   sum_j w_j [ (mean_ch(z_j) - truth_ch(z_j))^2 + var_ch(z_j) ],
// the exact Gaussian expectation of the squared deviation.
double ppl2g(const PosteriorPredictive& post, const TruthFn& truth, const QuadratureRule& eval_rule,
             Channel channel);

// sqrt of the rule-weighted integral of fn^2.
double l2_norm(const TruthFn& fn, const QuadratureRule& rule);

// Denominator convention: Norm divides by ||truth|| (figure reproduction),
// NormSquared by ||truth||^2 (dimensionless; library default).
enum class NormalizerMode { Norm, NormSquared };

double normalize(double raw, double truth_norm, NormalizerMode mode = NormalizerMode::NormSquared);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (ddof = 1), 0 for a single run
};

struct ReplicateSample {
  double pile = 0.0;
  double data_rel = 0.0;
  double phys_rel = 0.0;
};

struct ErrorReport {
  Summary pile, data_rel, phys_rel;
  int count = 0;
};

// Runs the experiment once per seed (in parallel, each on an isolated stream)
// and reports per-field means and sample standard deviations in seed order.
ErrorReport replicate(const std::function<ReplicateSample(std::uint64_t)>& experiment,
                      const std::vector<std::uint64_t>& seeds);

Summary summarize(const std::vector<double>& values);

}  // namespace pilekit

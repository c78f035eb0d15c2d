#include "pilekit/metrics.hpp"

#include "pilekit/parallel.hpp"

#include <cmath>

namespace pilekit {

double ppl2g(const PosteriorPredictive& post, const TruthFn& truth, const QuadratureRule& eval_rule,
             Channel channel) {
  const int q = eval_rule.count();
  std::vector<double> contrib(q, 0.0);
  parallel_for(static_cast<std::size_t>(q), [&](std::size_t i) {
    PointRef z = eval_rule.points.row(static_cast<int>(i));
    double bias = post.mean(z, channel) - truth(z);
    contrib[i] = eval_rule.weights[static_cast<int>(i)] * (bias * bias + post.variance(z, channel));
  });
  double acc = 0.0;
  for (double c : contrib) acc += c;
  return acc;
}

double l2_norm(const TruthFn& fn, const QuadratureRule& rule) {
  double acc = 0.0;
  for (int i = 0; i < rule.count(); ++i) {
    double v = fn(rule.points.row(i));
    acc += rule.weights[i] * v * v;
  }
  return std::sqrt(std::max(acc, 0.0));
}

double normalize(double raw, double truth_norm, NormalizerMode mode) {
  if (!(truth_norm > 0.0)) throw SpecError("normalizer must be positive");
  return mode == NormalizerMode::Norm ? raw / truth_norm : raw / (truth_norm * truth_norm);
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (values.size() - 1));
  }
  return s;
}

ErrorReport replicate(const std::function<ReplicateSample(std::uint64_t)>& experiment,
                      const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() < 2) throw SpecError("replicate needs at least two seeds");
  std::vector<ReplicateSample> samples(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { samples[i] = experiment(seeds[i]); });
  std::vector<double> piles, data, phys;
  for (const auto& s : samples) {
    piles.push_back(s.pile);
    data.push_back(s.data_rel);
    phys.push_back(s.phys_rel);
  }
  ErrorReport rep;
  rep.pile = summarize(piles);
  rep.data_rel = summarize(data);
  rep.phys_rel = summarize(phys);
  rep.count = static_cast<int>(seeds.size());
  return rep;
}

}  // namespace pilekit

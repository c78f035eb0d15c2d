// pile-kit: physics-informed kernel fitting, scoring, and model selection.

#include <CLI11.hpp>

#include "pilekit/experiments.hpp"
#include "pilekit/io.hpp"
#include "pilekit/rng.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace pilekit;

namespace {

// "lo:hi:count[:log|lin]"; log spacing by default for positive ranges.
std::vector<double> parse_grid(const std::string& text, bool default_log) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() < 3 || parts.size() > 4)
    throw SpecError("grid must be lo:hi:count[:log|lin], got '" + text + "'");
  double lo = std::stod(parts[0]), hi = std::stod(parts[1]);
  int count = std::stoi(parts[2]);
  bool log_spacing = default_log;
  if (parts.size() == 4) {
    if (parts[3] == "log") log_spacing = true;
    else if (parts[3] == "lin") log_spacing = false;
    else throw SpecError("grid spacing must be log or lin");
  }
  if (log_spacing) {
    if (!(lo > 0.0) || !(hi > 0.0)) throw SpecError("log grid needs positive endpoints");
    return log_grid(std::log10(lo), std::log10(hi), count);
  }
  return linear_grid(lo, hi, count);
}

ProblemSpec load_spec(const std::string& path) {
  return parse_problem(read_text_file(path));
}

// Observations: --data CSV when given, otherwise the spec's obs stanza is
// only honored by the experiment subcommands; generic fits run data-free.
ObservationSet load_observations(const std::string& data_path, const ProblemSpec& spec) {
  if (!data_path.empty()) {
    auto csv = read_observations_csv(data_path, spec.domain.dim());
    if (csv.rejected > 0)
      std::cerr << "note: rejected " << csv.rejected << " non-finite rows from " << data_path
                << "\n";
    return csv.obs;
  }
  return ObservationSet{Matrix(0, spec.domain.dim()), Vector(0)};
}

std::shared_ptr<const GramSystem> build_system(const ProblemSpec& spec, const ObservationSet& obs) {
  return std::make_shared<GramSystem>(assemble(spec.kernel, spec.op, obs.X, spec.build_rules(),
                                               spec.quad.split_cauchy, &spec.boundary_data));
}

int run(int argc, char** argv) {
  CLI::App app{"physics-informed kernel learning toolkit"};
  app.require_subcommand(1);

  std::string spec_path, data_path, out_dir, model_path, points_path;
  std::string param = "h", grid_text, theta_text = "-3.14159265358979:3.14159265358979:33:lin";
  std::string s_text = "0.5:1.5:11:lin", channel = "f", route = "gp";
  std::uint64_t seed = 0;
  int n_seeds = 20;
  double beta = std::numeric_limits<double>::quiet_NaN();

  auto* fit = app.add_subcommand("fit", "fit a model from a problem spec");
  fit->add_option("--spec", spec_path, "problem spec file")->required();
  fit->add_option("--data", data_path, "observation CSV (x_1..x_d,y)");
  fit->add_option("--out", out_dir, "output directory")->required();
  fit->add_option("--seed", seed, "seed recorded in the manifest");
  fit->add_option("--route", route, "krr or gp");

  auto* score = app.add_subcommand("score", "compute the evidence score of a spec + data");
  score->add_option("--spec", spec_path, "problem spec file")->required();
  score->add_option("--data", data_path, "observation CSV");
  score->add_option("--out", out_dir, "output directory (default: stdout)");
  score->add_option("--seed", seed, "seed recorded in the manifest");

  auto* predict_cmd = app.add_subcommand("predict", "evaluate a saved model at query points");
  predict_cmd->add_option("--model", model_path, "model JSON")->required();
  predict_cmd->add_option("--points", points_path, "query CSV (x_1..x_d)")->required();
  predict_cmd->add_option("--out", out_dir, "output directory")->required();
  predict_cmd->add_option("--channel", channel, "f or Af");

  auto* sweep_cmd = app.add_subcommand("sweep", "hyperparameter sweep scored by PILE");
  sweep_cmd->add_option("--spec", spec_path, "problem spec file")->required();
  sweep_cmd->add_option("--data", data_path, "observation CSV");
  sweep_cmd->add_option("--param", param, "h|rho|gamma|eta|theta|s");
  sweep_cmd->add_option("--grid", grid_text, "lo:hi:count[:log|lin]")->required();
  sweep_cmd->add_option("--out", out_dir, "output directory")->required();
  sweep_cmd->add_option("--seed", seed, "base seed for synthetic noise");

  auto* datafree = app.add_subcommand("datafree", "data-free kernel selection landscape");
  datafree->add_option("--spec", spec_path, "problem spec file")->required();
  datafree->add_option("--theta", theta_text, "theta grid lo:hi:count[:lin]");
  datafree->add_option("--s", s_text, "s grid lo:hi:count[:lin]");
  datafree->add_option("--out", out_dir, "output directory")->required();

  auto* poisson = app.add_subcommand("poisson", "reproduce the Poisson case study");
  poisson->add_option("--out", out_dir, "output directory")->required();
  poisson->add_option("--seed", seed, "base seed");
  poisson->add_option("--seeds", n_seeds, "number of replicate seeds");

  auto* convection = app.add_subcommand("convection", "reproduce the convection case study");
  convection->add_option("--beta", beta, "transport speed (paper value unknown)")->required();
  convection->add_option("--out", out_dir, "output directory")->required();
  convection->add_option("--seed", seed, "seed");

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) {
    ProblemSpec spec = load_spec(spec_path);
    ObservationSet obs = load_observations(data_path, spec);
    auto gram = build_system(spec, obs);
    PhysicsTargets targets = PhysicsTargets::zeros(gram->m());
    FitCoefficients coeffs =
        route == "krr" ? fit_krr(gram, obs, targets, spec.temps)
                       : fit_gp(gram, obs, targets, spec.temps);
    fs::create_directories(out_dir);
    save_model_json(fs::path(out_dir) / "model.json", coeffs);
    SigmaMatrix sig = assemble_sigma(*gram, spec.temps);
    PileReport rep = pile(sig, stacked_targets(*gram, obs, targets), spec.temps);
    write_text_file(fs::path(out_dir) / "score.json", pile_report_json(rep) + "\n");
    write_manifest(out_dir, serialize(spec), {seed}, "fit");
    std::cout << "pile " << rep.pile << "\n";
  } else if (score->parsed()) {
    ProblemSpec spec = load_spec(spec_path);
    ObservationSet obs = load_observations(data_path, spec);
    auto gram = build_system(spec, obs);
    PhysicsTargets targets = PhysicsTargets::zeros(gram->m());
    SigmaMatrix sig = assemble_sigma(*gram, spec.temps);
    PileReport rep = pile(sig, stacked_targets(*gram, obs, targets), spec.temps);
    std::string json = pile_report_json(rep) + "\n";
    if (out_dir.empty()) {
      std::cout << json;
    } else {
      write_text_file(fs::path(out_dir) / "score.json", json);
      write_manifest(out_dir, serialize(spec), {seed}, "score");
    }
  } else if (predict_cmd->parsed()) {
    FitCoefficients coeffs = load_model_json(model_path);
    Matrix P = read_points_csv(points_path, coeffs.gram->kernel().dim());
    Channel ch = channel == "Af" ? Channel::Af : Channel::F;
    // variance depends only on Sigma, so a zero target vector serves
    PosteriorPredictive post(coeffs.gram, coeffs.temps,
                             Vector::Zero(coeffs.gram->n() + coeffs.gram->m()));
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      double mean = predict(coeffs, P.row(i), ch);
      rows.push_back({P.row(i)[0], P.cols() > 1 ? P.row(i)[1] : 0.0, mean,
                      post.variance(P.row(i), ch)});
    }
    fs::create_directories(out_dir);
    write_csv(fs::path(out_dir) / "predictions.csv", {"x_1", "x_2", "mean", "variance"}, rows);
  } else if (sweep_cmd->parsed()) {
    ProblemSpec spec = load_spec(spec_path);
    ObservationSet obs = load_observations(data_path, spec);
    SweepParam p = sweep_param_from(param);
    bool log_default = p != SweepParam::Theta;
    SweepGrid grid{p, parse_grid(grid_text, log_default)};

    SweepContext ctx;
    ctx.kernel = spec.kernel;
    ctx.op = spec.op;
    ctx.X = obs.X;
    ctx.rules = spec.build_rules();
    ctx.boundary_data = spec.boundary_data;
    ctx.split_cauchy_mass = spec.quad.split_cauchy;
    ctx.temps = spec.temps;
    int m_total = 0;
    for (const auto& r : ctx.rules) m_total += r.count();
    // generic sweeps score the observed data against zero-residual targets
    Vector Y = obs.Y;
    Vector R = Vector::Zero(m_total);
    ctx.data_for_seed = [Y, R](std::uint64_t) { return std::make_pair(Y, R); };
    ctx.seeds = {seed};
    ctx.eval_rule = tensor_box(spec.domain, 4, ChebyshevWeights::Corrected);
    // no truth function for generic sweeps; the error columns are omitted
    ctx.truth_f = [](PointRef) { return 1.0; };
    ctx.truth_g = [](PointRef) { return 0.0; };
    SweepResult res = sweep(grid, ctx);
    std::vector<std::vector<double>> rows;
    for (const auto& row : res.rows)
      rows.push_back({row.value, row.pile.mean, row.quad_term, row.logdet_term, row.const_term,
                      row.diverged ? 1.0 : 0.0});
    fs::create_directories(out_dir);
    write_csv(fs::path(out_dir) / "sweep.csv",
              {to_string(p), "pile", "quad_term", "logdet_term", "const_term", "diverged"}, rows);
    write_manifest(out_dir, serialize(spec), {seed}, "sweep");
    if (res.argmin >= 0) std::cout << to_string(p) << "* = " << res.best().value << "\n";
  } else if (datafree->parsed()) {
    ProblemSpec spec = load_spec(spec_path);
    auto thetas = parse_grid(theta_text, false);
    auto ss = parse_grid(s_text, false);
    DatafreeSelection sel = datafree_kernel_select(thetas, ss, spec.op, spec.build_rules(),
                                                   spec.temps.eta, spec.temps.rho);
    std::vector<std::vector<double>> rows;
    for (const auto& cell : sel.landscape)
      rows.push_back({cell.theta, cell.s, cell.score, cell.failed ? 1.0 : 0.0});
    fs::create_directories(out_dir);
    write_csv(fs::path(out_dir) / "landscape.csv", {"theta", "s", "score", "failed"}, rows);
    write_manifest(out_dir, serialize(spec), {}, "datafree");
    std::cout << "theta* = " << sel.theta_star << " (canonical " << sel.theta_canonical
              << "), s* = " << sel.s_star << "\n";
  } else if (poisson->parsed()) {
    PoissonConfig cfg;
    cfg.base_seed = seed;
    cfg.n_seeds = n_seeds;
    cfg.out_dir = out_dir;
    PoissonResult res = run_poisson(cfg);
    std::cout << "h* = " << res.selection.stages[0].best().value
              << ", rho* = " << res.selection.stages[1].best().value
              << ", gamma* = " << res.selection.stages[2].best().value << "\n";
  } else if (convection->parsed()) {
    ConvectionConfig cfg;
    cfg.beta = beta;
    cfg.seed = seed;
    cfg.out_dir = out_dir;
    ConvectionResult res = run_convection(cfg);
    std::cout << "isotropic h* = "
              << (res.iso_sweep.argmin >= 0 ? res.iso_sweep.best().value : -1.0)
              << ", theta* = " << res.landscape.theta_canonical
              << ", s* = " << res.landscape.s_star
              << ", winner data_rel = " << res.winner.data_rel.mean
              << ", phys_rel = " << res.winner.phys_rel.mean << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

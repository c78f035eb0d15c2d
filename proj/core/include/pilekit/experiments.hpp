#pragma once

#include "pilekit/problem.hpp"
#include "pilekit/selection.hpp"

#include <filesystem>
#include <string>

namespace pilekit {

// Reference solution of the Poisson problem with zero boundary values on
// (-1,1)^2 and forcing 10 + 10 sin(2 pi x) sin(2 pi y). The sinusoidal part
// is closed-form; the constant part is a polynomial particular solution
// minus a harmonic single-series closure, so the PDE residual is exact for
// any truncation and only the boundary values carry an O(modes^-2) tail.
class PoissonReference {
 public:
  explicit PoissonReference(int m_modes = 256);

  double value(double x, double y) const;
  double forcing(double x, double y) const;  // equals the Laplacian of value

  TruthFn value_fn() const;
  TruthFn forcing_fn() const;

 private:
  int modes_;
  std::vector<double> coef_;  // series coefficients, odd p = 2i+1
};

std::vector<double> log_grid(double lo_exp, double hi_exp, int count);
std::vector<double> linear_grid(double lo, double hi, int count);

struct PoissonConfig {
  int grid_m = 13;      // observation / physics nodes per axis (paper grid)
  double sigma = 1.0;   // observation noise
  double sigma_phys = 1.0;
  int m_eval = 30;
  int n_seeds = 20;
  std::uint64_t base_seed = 0;
  int m_modes = 256;
  std::vector<double> h_grid = log_grid(-1.5, 0.5, 25);
  std::vector<double> rho_grid = log_grid(-4.0, 3.0, 25);
  std::vector<double> gamma_grid = log_grid(-4.0, 3.0, 25);
  std::string out_dir;  // empty: no artifacts written
};

struct PoissonResult {
  SelectionOutcome selection;  // stages h, rho, gamma
  std::string spec_text;
};

PoissonResult run_poisson(const PoissonConfig& cfg);

struct ConvectionConfig {
  double beta = 0.0;  // transport speed; the paper does not state its value
  int n_obs = 1000;
  int m_axis = 20;       // interior physics nodes per axis
  int boundary_m = 20;   // initial-slice nodes
  double sigma = 0.1;    // observation noise (artifact default; unstated)
  int m_eval = 30;
  std::uint64_t seed = 0;
  // isotropic diagnosis temperatures
  Temperatures iso_temps{1.0, 0.01, 1.0};
  std::vector<double> h_grid = log_grid(-1.5, 0.5, 17);
  // data-free selection and winner-fit settings
  double df_eta = 1.0;
  double df_rho = 3e-4;
  Temperatures fit_temps{0.01, 3e-4, 1.0};
  std::vector<double> theta_grid = linear_grid(-3.14159265358979323846, 3.14159265358979323846, 33);
  std::vector<double> s_grid = linear_grid(0.5, 1.5, 11);
  bool run_isotropic = true;
  bool run_datafree = true;
  std::string out_dir;
};

struct ConvectionResult {
  SweepResult iso_sweep;          // Fig.-4-style bandwidth sweep
  DatafreeSelection landscape;    // Fig.-3-style (theta, s) landscape
  SweepRow winner;                // full fit with the selected kernel
  KernelSpec winner_kernel;
  std::string spec_text;
};

ConvectionResult run_convection(const ConvectionConfig& cfg);

// Shipped problem statements for the two case studies.
std::string poisson_spec_text(const PoissonConfig& cfg = {});
std::string convection_spec_text(const ConvectionConfig& cfg);

}  // namespace pilekit

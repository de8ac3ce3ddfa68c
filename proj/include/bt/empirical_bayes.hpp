#pragma once

#include <string>
#include <string_view>

#include "bt/exec.hpp"
#include "bt/posterior.hpp"

namespace bt {

/// Maximum-likelihood fit of the random-walk hyperparameters from the
/// estimated pre-period increments w_hat = M beta_pre.
struct EbFit {
  double mu_hat = 0.0;
  double sigma2_hat = 0.0;
  double log_likelihood = 0.0;
  bool converged = false;
  bool boundary = false;  // sigma2_hat pinned at 0
  int n_pre = 0;
};

/// Maximizes the likelihood of w_hat ~ N(mu 1, Sigma_w + sigma2 I) with
/// Sigma_w = M Sigma_pre M'. mu is profiled out (GLS mean), leaving a 1-d
/// concentrated objective in sigma2 maximized by golden-section search on
/// log(sigma2 + floor) to 1e-10 absolute in sigma2. Boundary solutions
/// (sigma2 = 0) are reported, never perturbed. Requires T_pre >= 2.
EbFit fit_random_walk_mle(const EventStudy& es);

/// "mu_hat = -0.24, sigma_hat = 0.61"
std::string summary_line(const EbFit& fit);

/// "drift -0.24 p.p./period, innovation s.d. 0.61"
std::string describe(const EbFit& fit, std::string_view unit = "p.p.");

struct EbResult {
  EbFit fit;
  PosteriorSummary posterior;
};

/// Plug-in posterior: fit, build the implied random-walk prior, run the
/// closed form, attach intervals. beta_pre enters both the fit and the
/// update; that double use is inherent to the plug-in procedure.
EbResult eb_posterior(const EventStudy& es, double level);

/// Product grid over (mu, sigma) with prior masses (mu-major layout).
struct HyperPriorGrid {
  std::vector<double> mu_grid;
  std::vector<double> sigma_grid;
  std::vector<double> weights;  // size mu_grid.size() * sigma_grid.size()

  std::size_t size() const { return mu_grid.size() * sigma_grid.size(); }
  double& weight_at(std::size_t i_mu, std::size_t j_sigma) {
    return weights[i_mu * sigma_grid.size() + j_sigma];
  }

  static HyperPriorGrid uniform(double mu_min, double mu_max, int n_mu,
                                double sigma_min, double sigma_max, int n_sigma);

  /// Default 41x41 uniform grid: mu over sample mean(w_hat) +- 5 sd(w_hat),
  /// sigma over [0, 5 sd(w_hat)].
  static HyperPriorGrid default_grid(const EventStudy& es);
};

struct HyperPosterior {
  HyperPriorGrid grid;                // prior masses as supplied
  std::vector<double> post_weights;   // normalized posterior masses
  PosteriorSummary mixture;           // moments + mixture-CDF intervals
};

/// Hierarchical-Bayes alternative: reweights every grid point by the
/// likelihood of w_hat, computes the per-point posterior, and mixes.
/// Mixture credible intervals invert the mixture-of-normals marginal CDF
/// (bisection, 1e-8 in probability). Grid points are evaluated in parallel
/// and reduced in grid order, so results are independent of ExecMode.
HyperPosterior hierarchical_posterior(const EventStudy& es,
                                      const HyperPriorGrid& grid, double level,
                                      ExecMode mode = ExecMode::Parallel);

}  // namespace bt

#pragma once

#include "bt/prior.hpp"

namespace bt {

/// Map from pre-period coefficients to estimated increments
/// w_t = delta_t - delta_{t-1} under the delta_0 = 0 normalization:
/// rows cover w_{-T_pre+1}..w_0, so the last row is w_0 = -delta_{-1}.
Mat differencing_matrix(int t_pre);

/// Random walk with drift over periods -T_pre..-1, 1..T_post:
/// mean_t = mu * t and cov(delta_s, delta_t) = sigma2 * min(|s|, |t|) when
/// s and t share a sign, 0 otherwise.
GaussianPrior random_walk_prior(double mu, double sigma2, int t_pre, int t_post);

/// Stationary AR(1) law with variance v = sigma_eps2 / (1 - rho^2),
/// conditioned on delta_0 = 0:
/// cov(delta_s, delta_t) = v * (rho^|s-t| - rho^(|s|+|t|)), mean 0.
GaussianPrior ar1_prior(double rho, double sigma_eps2, int t_pre, int t_post);

/// Expands any PriorSpec into an explicit GaussianPrior over
/// (delta_pre, delta_post); explicit priors are dimension-checked.
GaussianPrior materialize_prior(const PriorSpec& spec, int t_pre, int t_post);

}  // namespace bt

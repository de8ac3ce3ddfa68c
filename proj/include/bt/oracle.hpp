#pragma once

#include <cstdint>
#include <utility>

#include "bt/event_study.hpp"
#include "bt/exec.hpp"
#include "bt/prior.hpp"

namespace bt::oracle {

/// First two moments of tau_post produced by a brute-force route.
struct TauMoments {
  Vec mean;
  Mat cov;
};

/// Tensor-grid Riemann quadrature of the unnormalized posterior
/// p(delta, tau | beta_hat) ~ l(beta_hat | delta + tau) pi(delta), flat tau
/// represented as uniform over a wide box. Limited to T_pre + 2*T_post <= 4
/// integration dimensions (DimensionTooLarge). Throws GridTooCoarse when
/// the internal half-resolution estimate of the discretization error, or
/// the posterior mass touching the box boundary, exceeds
/// `target_abs_error`.
TauMoments grid_posterior_oracle(const EventStudy& es, const GaussianPrior& prior,
                                 double grid_half_width = 8.0,
                                 int points_per_dim = 600,
                                 double target_abs_error = 1e-3,
                                 ExecMode mode = ExecMode::Parallel);

/// Exact conditioning of (delta, tau) ~ N((mu_delta, 0), blockdiag(V, kappa I))
/// on beta_hat, done in covariance form (Schur complement against the
/// marginal law of beta_hat) -- deliberately a different code path from the
/// information-form solver. Large kappa approximates the flat-tau posterior
/// with O(1/kappa) error. kappa indistinguishable from zero is rejected
/// (SingularCovariance).
TauMoments proper_prior_limit_oracle(const EventStudy& es, const GaussianPrior& prior,
                                     double kappa);

struct MleGridResult {
  double mu_best = 0.0;
  double sigma2_best = 0.0;
  double loglik_best = 0.0;
  double cell_mu = 0.0;     // grid spacing in mu
  double cell_sigma = 0.0;  // grid spacing in sigma (not sigma^2)
};

/// Exhaustive n x n scan of the exact joint log-likelihood of
/// w_hat ~ N(mu 1, Sigma_w + sigma^2 I) over (mu, sigma). Reference
/// maximizer used to bound the profiled optimizer's error.
MleGridResult mle_grid_oracle(const EventStudy& es,
                              std::pair<double, double> mu_range,
                              std::pair<double, double> sigma_range, int n);

struct SampleMoments {
  Vec mean;
  Mat cov;      // Bessel-corrected
  Vec mean_se;  // per-coordinate MC standard error of the mean
  Mat cov_se;   // Gaussian-theory MC standard error per covariance entry
  long n_kept = 0;
};

enum class Ar1Sampling {
  ExactConditional,  // condition the stationary law on delta_0 = 0, then draw
  Rejection,         // simulate stationary paths, keep those with |delta_0| < tol
};

/// Simulates delta paths under `spec` and returns sample moments.
/// RandomWalk paths are built from explicit forward/backward increments;
/// AR(1) uses generic Gaussian conditioning of the stationary covariance
/// (or rejection sampling as a cross-check). Deterministic given
/// (spec, seed) regardless of ExecMode.
SampleMoments mc_prior_moments(const PriorSpec& spec, int t_pre, int t_post,
                               long n_draws, std::uint64_t seed,
                               Ar1Sampling ar1_sampling = Ar1Sampling::ExactConditional,
                               double rejection_tol = 1e-2,
                               ExecMode mode = ExecMode::Parallel);

}  // namespace bt::oracle

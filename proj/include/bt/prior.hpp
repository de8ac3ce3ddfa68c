#pragma once

#include <variant>

#include "bt/event_study.hpp"

namespace bt {

/// Gaussian prior over the stacked trend-violation vector
/// delta = (delta_pre, delta_post), same pre-then-post ordering as sigma.
struct GaussianPrior {
  Vec mean;
  Mat cov;
};

/// delta_t - delta_{t-1} iid N(mu, sigma2), anchored at delta_0 = 0.
/// sigma2 == 0 is a deterministic linear trend.
struct RandomWalkSpec {
  double mu = 0.0;
  double sigma2 = 0.0;
};

/// Stationary AR(1) violations conditioned on delta_0 = 0.
struct Ar1Spec {
  double rho = 0.0;
  double sigma_eps2 = 1.0;
};

using PriorSpec = std::variant<GaussianPrior, RandomWalkSpec, Ar1Spec>;

/// Checks that cov is symmetric PSD (eigenvalues >= -1e-10 * ||cov||) with
/// the right dimension; returns the prior with cov exactly symmetrized.
GaussianPrior validate_prior(GaussianPrior prior, int dim);

}  // namespace bt

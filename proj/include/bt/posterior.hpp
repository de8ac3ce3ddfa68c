#pragma once

#include <vector>

#include "bt/event_study.hpp"
#include "bt/prior.hpp"

namespace bt {

struct CredibleInterval {
  int period = 0;
  double level = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Posterior for the post-treatment effects tau_post under a Gaussian prior
/// on the trend violations and a flat prior on tau_post.
struct PosteriorSummary {
  std::vector<int> post_periods;
  Vec tau_mean;         // E[tau_post | beta_hat]
  Mat tau_cov;          // Var(tau_post | beta_hat)
  Vec delta_post_mean;  // E[delta_post | beta_hat]
  Vec beta_pre_star;    // E[beta_pre | beta_hat], shrunk toward the prior mean
  std::vector<CredibleInterval> intervals;
};

/// Prior on tau_post for the general solver: flat (zero precision) or a
/// proper Gaussian.
struct TauPrior {
  static TauPrior flat() { return TauPrior{}; }
  static TauPrior gaussian(Vec mean, Mat cov) {
    TauPrior p;
    p.is_flat = false;
    p.mean = std::move(mean);
    p.cov = std::move(cov);
    return p;
  }

  bool is_flat = true;
  Vec mean;
  Mat cov;
};

/// Joint Gaussian posterior over the stacked vector
/// (delta_pre, delta_post, tau_post).
struct JointPosterior {
  int n_pre = 0;
  int n_post = 0;
  Vec mean;
  Mat cov;

  Vec delta_pre_mean() const { return mean.head(n_pre); }
  Vec delta_post_mean() const { return mean.segment(n_pre, n_post); }
  Vec tau_mean() const { return mean.tail(n_post); }
  Mat tau_cov() const { return cov.bottomRightCorner(n_post, n_post); }
};

/// Conditional-mean closed forms, flat prior on tau_post:
///
///   Gamma_V   = V_pre^-1 V_pre,post          Gamma_S = S_pre^-1 S_pre,post
///   W         = (S_pre^-1 + V_pre^-1)^-1
///   beta*_pre = W (S_pre^-1 b_pre + V_pre^-1 mu_pre)
///   tau_mean  = b_post - Gamma_S'(b_pre - beta*_pre)
///               - mu_post - Gamma_V'(beta*_pre - mu_pre)
///   tau_cov   = S_post|pre + V_post|pre
///               + (Gamma_S - Gamma_V)' W (Gamma_S - Gamma_V)
///
/// All inverses are Cholesky solves. Requires the prior pre-block to be
/// strictly PD (SingularPrior otherwise). Must agree with
/// posterior_information_form; the two are maintained as independent routes.
PosteriorSummary posterior_closed_form(const EventStudy& es,
                                       const GaussianPrior& prior);

/// Degenerate-prior limit: delta fixed at `delta_mean` (prior cov -> 0).
/// tau_mean = b_post - Gamma_S'(b_pre - mean_pre) - mean_post,
/// tau_cov = S_post|pre.
PosteriorSummary posterior_point_prior(const EventStudy& es, const Vec& delta_mean);

/// Dispatches on the prior: an exactly-zero covariance goes through the
/// point-prior limit, anything else through the closed form.
PosteriorSummary posterior_for_prior(const EventStudy& es,
                                     const GaussianPrior& prior);

/// General Bayes-rule solver in information (precision) form over
/// theta = (delta_pre, delta_post, tau_post), observation map
/// beta_hat = A theta + eps:
///   P = A' Sigma^-1 A + blockdiag(V^-1, tau prior precision)
/// A flat tau prior is a zero precision block. Marginals of the result
/// reproduce posterior_closed_form when tau_prior is flat.
JointPosterior posterior_information_form(const EventStudy& es,
                                          const GaussianPrior& prior,
                                          const TauPrior& tau_prior);

/// PosteriorSummary view of a joint posterior (intervals left empty).
PosteriorSummary summarize(const JointPosterior& joint,
                           const std::vector<int>& post_periods);

/// Equal-tailed marginal interval per post period at `level`.
std::vector<CredibleInterval> credible_set(const PosteriorSummary& ps, double level);

/// Copy of `ps` with intervals attached at `level`.
PosteriorSummary with_intervals(PosteriorSummary ps, double level);

}  // namespace bt

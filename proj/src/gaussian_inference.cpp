#include "bt/posterior.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "bt/errors.hpp"
#include "bt/stats.hpp"

namespace bt {

namespace {

Eigen::LLT<Mat> factor_or_throw(const Mat& m, ErrorKind kind, const char* what) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) throw Error(kind, what);
  return llt;
}

void check_prior_dim(const EventStudy& es, const GaussianPrior& prior) {
  const int d = es.dim();
  if (prior.mean.size() != d || prior.cov.rows() != d || prior.cov.cols() != d)
    throw Error(ErrorKind::DimensionMismatch,
                "prior dimension does not match the event study");
}

}  // namespace

PosteriorSummary posterior_closed_form(const EventStudy& es,
                                       const GaussianPrior& prior) {
  check_prior_dim(es, prior);
  const int p = es.n_pre();
  const int q = es.n_post();
  const SigmaBlocks s = split_covariance(es);

  const Mat v_pre = prior.cov.topLeftCorner(p, p);
  const Mat v_pre_post = prior.cov.topRightCorner(p, q);
  const Mat v_post = prior.cov.bottomRightCorner(q, q);
  const Vec mu_pre = prior.mean.head(p);
  const Vec mu_post = prior.mean.tail(q);

  const auto llt_v = factor_or_throw(v_pre, ErrorKind::SingularPrior,
                                     "prior pre-block is not positive definite");
  const auto llt_s = factor_or_throw(s.pre, ErrorKind::NotPositiveDefinite,
                                     "sigma pre-block is not positive definite");

  const Mat gamma_v = llt_v.solve(v_pre_post);  // V_pre^-1 V_pre,post
  const Mat gamma_s = llt_s.solve(s.pre_post);  // S_pre^-1 S_pre,post

  // W = (S_pre^-1 + V_pre^-1)^-1 via one more Cholesky.
  const Mat prec = llt_s.solve(Mat::Identity(p, p)) + llt_v.solve(Mat::Identity(p, p));
  const auto llt_w = factor_or_throw(prec, ErrorKind::SingularPrior,
                                     "combined pre-period precision is singular");
  const Vec beta_pre_star =
      llt_w.solve(llt_s.solve(es.beta_pre) + llt_v.solve(mu_pre));

  const Vec beta_post_star =
      es.beta_post - gamma_s.transpose() * (es.beta_pre - beta_pre_star);
  const Vec delta_post_mean = mu_post + gamma_v.transpose() * (beta_pre_star - mu_pre);

  const Mat s_post_cond = s.post - s.pre_post.transpose() * gamma_s;
  const Mat v_post_cond = v_post - v_pre_post.transpose() * gamma_v;
  const Mat gap = gamma_s - gamma_v;
  const Mat w = llt_w.solve(Mat::Identity(p, p));
  Mat tau_cov = s_post_cond + v_post_cond + gap.transpose() * w * gap;
  tau_cov = ((tau_cov + tau_cov.transpose()) * 0.5).eval();

  PosteriorSummary ps;
  ps.post_periods = es.post_periods;
  ps.tau_mean = beta_post_star - delta_post_mean;
  ps.tau_cov = std::move(tau_cov);
  ps.delta_post_mean = delta_post_mean;
  ps.beta_pre_star = beta_pre_star;
  return ps;
}

PosteriorSummary posterior_point_prior(const EventStudy& es, const Vec& delta_mean) {
  if (delta_mean.size() != es.dim())
    throw Error(ErrorKind::DimensionMismatch,
                "delta mean dimension does not match the event study");
  const int p = es.n_pre();
  const int q = es.n_post();
  const SigmaBlocks s = split_covariance(es);
  const auto llt_s = factor_or_throw(s.pre, ErrorKind::NotPositiveDefinite,
                                     "sigma pre-block is not positive definite");
  const Mat gamma_s = llt_s.solve(s.pre_post);
  const Vec mu_pre = delta_mean.head(p);
  const Vec mu_post = delta_mean.tail(q);

  PosteriorSummary ps;
  ps.post_periods = es.post_periods;
  ps.tau_mean =
      es.beta_post - gamma_s.transpose() * (es.beta_pre - mu_pre) - mu_post;
  Mat tau_cov = s.post - s.pre_post.transpose() * gamma_s;
  ps.tau_cov = ((tau_cov + tau_cov.transpose()) * 0.5).eval();
  ps.delta_post_mean = mu_post;
  ps.beta_pre_star = mu_pre;
  return ps;
}

PosteriorSummary posterior_for_prior(const EventStudy& es,
                                     const GaussianPrior& prior) {
  check_prior_dim(es, prior);
  if (prior.cov.isZero(0.0)) return posterior_point_prior(es, prior.mean);
  return posterior_closed_form(es, prior);
}

JointPosterior posterior_information_form(const EventStudy& es,
                                          const GaussianPrior& prior,
                                          const TauPrior& tau_prior) {
  check_prior_dim(es, prior);
  const int p = es.n_pre();
  const int q = es.n_post();
  const int n = p + q;      // observations
  const int m = p + 2 * q;  // parameters (delta_pre, delta_post, tau_post)

  if (!tau_prior.is_flat &&
      (tau_prior.mean.size() != q || tau_prior.cov.rows() != q ||
       tau_prior.cov.cols() != q))
    throw Error(ErrorKind::DimensionMismatch, "tau prior dimension mismatch");

  // beta_pre = delta_pre + eps, beta_post = delta_post + tau_post + eps.
  Mat a = Mat::Zero(n, m);
  a.topLeftCorner(p, p).setIdentity();
  a.block(p, p, q, q).setIdentity();
  a.block(p, p + q, q, q).setIdentity();

  const auto llt_sigma = factor_or_throw(es.sigma, ErrorKind::NotPositiveDefinite,
                                         "sigma is not positive definite");
  const Mat sigma_inv_a = llt_sigma.solve(a);

  const auto llt_v = factor_or_throw(prior.cov, ErrorKind::SingularPrior,
                                     "prior covariance is not positive definite");

  Vec beta_hat(n);
  beta_hat.head(p) = es.beta_pre;
  beta_hat.tail(q) = es.beta_post;

  Mat precision = a.transpose() * sigma_inv_a;
  precision.topLeftCorner(n, n) += llt_v.solve(Mat::Identity(n, n));
  Vec shift = sigma_inv_a.transpose() * beta_hat;
  shift.head(n) += llt_v.solve(prior.mean);

  if (!tau_prior.is_flat) {
    const auto llt_k = factor_or_throw(tau_prior.cov, ErrorKind::SingularPrior,
                                       "tau prior covariance is not positive definite");
    precision.bottomRightCorner(q, q) += llt_k.solve(Mat::Identity(q, q));
    shift.tail(q) += llt_k.solve(tau_prior.mean);
  }

  precision = ((precision + precision.transpose()) * 0.5).eval();
  Eigen::LLT<Mat> llt_p(precision);
  if (llt_p.info() != Eigen::Success)
    throw Error(ErrorKind::SingularPosteriorPrecision,
                "posterior precision is not positive definite (improper "
                "prior/flat-tau configuration)");

  JointPosterior joint;
  joint.n_pre = p;
  joint.n_post = q;
  joint.mean = llt_p.solve(shift);
  Mat cov = llt_p.solve(Mat::Identity(m, m));
  joint.cov = ((cov + cov.transpose()) * 0.5).eval();
  return joint;
}

PosteriorSummary summarize(const JointPosterior& joint,
                           const std::vector<int>& post_periods) {
  if (static_cast<int>(post_periods.size()) != joint.n_post)
    throw Error(ErrorKind::DimensionMismatch,
                "post period labels do not match the joint posterior");
  PosteriorSummary ps;
  ps.post_periods = post_periods;
  ps.tau_mean = joint.tau_mean();
  ps.tau_cov = joint.tau_cov();
  ps.delta_post_mean = joint.delta_post_mean();
  ps.beta_pre_star = joint.delta_pre_mean();
  return ps;
}

std::vector<CredibleInterval> credible_set(const PosteriorSummary& ps, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorKind::BadLevel, "credible level must lie in (0, 1)");
  const double z = normal_quantile(0.5 * (1.0 + level));
  std::vector<CredibleInterval> intervals;
  intervals.reserve(ps.post_periods.size());
  for (std::size_t i = 0; i < ps.post_periods.size(); ++i) {
    const double sd = std::sqrt(std::max(0.0, ps.tau_cov(i, i)));
    intervals.push_back({ps.post_periods[i], level, ps.tau_mean[i] - z * sd,
                         ps.tau_mean[i] + z * sd});
  }
  return intervals;
}

PosteriorSummary with_intervals(PosteriorSummary ps, double level) {
  ps.intervals = credible_set(ps, level);
  return ps;
}

}  // namespace bt

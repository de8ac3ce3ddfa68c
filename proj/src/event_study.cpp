#include "bt/event_study.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "bt/errors.hpp"
#include "bt/prior.hpp"

namespace bt {

EventStudy validate_event_study(EventStudy raw) {
  const int t_pre = raw.n_pre();
  const int t_post = raw.n_post();
  if (t_pre < 1) throw Error(ErrorKind::BadPeriods, "need at least one pre period");
  if (t_post < 1) throw Error(ErrorKind::BadPeriods, "need at least one post period");
  for (int i = 0; i < t_pre; ++i) {
    if (raw.pre_periods[i] != -t_pre + i)
      throw Error(ErrorKind::BadPeriods,
                  "pre periods must be the consecutive labels -" +
                      std::to_string(t_pre) + "..-1 (period 0 is the reference)");
  }
  for (int i = 0; i < t_post; ++i) {
    if (raw.post_periods[i] != i + 1)
      throw Error(ErrorKind::BadPeriods,
                  "post periods must be the consecutive labels 1.." +
                      std::to_string(t_post) + " (period 0 is the reference)");
  }
  if (raw.beta_pre.size() != t_pre)
    throw Error(ErrorKind::DimensionMismatch,
                "beta_pre has length " + std::to_string(raw.beta_pre.size()) +
                    ", expected " + std::to_string(t_pre));
  if (raw.beta_post.size() != t_post)
    throw Error(ErrorKind::DimensionMismatch,
                "beta_post has length " + std::to_string(raw.beta_post.size()) +
                    ", expected " + std::to_string(t_post));
  const int d = t_pre + t_post;
  if (raw.sigma.rows() != d || raw.sigma.cols() != d)
    throw Error(ErrorKind::DimensionMismatch,
                "sigma is " + std::to_string(raw.sigma.rows()) + "x" +
                    std::to_string(raw.sigma.cols()) + ", expected " +
                    std::to_string(d) + "x" + std::to_string(d));

  raw.sigma = ((raw.sigma + raw.sigma.transpose()) * 0.5).eval();
  Eigen::LLT<Mat> llt(raw.sigma);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite,
                "sigma failed Cholesky factorization after symmetrization");
  return raw;
}

SigmaBlocks split_covariance(const EventStudy& es) {
  const int p = es.n_pre();
  const int q = es.n_post();
  SigmaBlocks blocks;
  blocks.pre = es.sigma.topLeftCorner(p, p);
  blocks.post = es.sigma.bottomRightCorner(q, q);
  blocks.pre_post = es.sigma.topRightCorner(p, q);
  return blocks;
}

GaussianPrior validate_prior(GaussianPrior prior, int dim) {
  if (prior.mean.size() != dim)
    throw Error(ErrorKind::DimensionMismatch,
                "prior mean has length " + std::to_string(prior.mean.size()) +
                    ", expected " + std::to_string(dim));
  if (prior.cov.rows() != dim || prior.cov.cols() != dim)
    throw Error(ErrorKind::DimensionMismatch,
                "prior cov is " + std::to_string(prior.cov.rows()) + "x" +
                    std::to_string(prior.cov.cols()) + ", expected " +
                    std::to_string(dim) + "x" + std::to_string(dim));
  prior.cov = ((prior.cov + prior.cov.transpose()) * 0.5).eval();
  Eigen::SelfAdjointEigenSolver<Mat> eig(prior.cov, Eigen::EigenvaluesOnly);
  const double scale = std::max(1e-300, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
    throw Error(ErrorKind::NotPositiveDefinite,
                "prior cov has a negative eigenvalue beyond tolerance");
  return prior;
}

}  // namespace bt

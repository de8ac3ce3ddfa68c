#include "bt/empirical_bayes.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "bt/errors.hpp"
#include "bt/prior_builders.hpp"
#include "bt/stats.hpp"

namespace bt {

namespace {

// Likelihood machinery shared by the MLE and the hierarchical weights.
// With Sigma_w = Q diag(lambda) Q', every (mu, sigma2) evaluation is O(T)
// after rotating w_hat and 1 into the eigenbasis.
struct IncrementModel {
  int t = 0;
  Vec lambda;  // eigenvalues of Sigma_w
  Vec w_rot;   // Q' w_hat
  Vec one_rot; // Q' 1
  Vec w_hat;
  double w_mean = 0.0;
  double w_var = 0.0;  // population variance of w_hat

  static IncrementModel build(const EventStudy& es) {
    if (es.n_pre() < 2)
      throw Error(ErrorKind::TooFewPeriods,
                  "empirical Bayes needs at least two pre periods");
    IncrementModel im;
    im.t = es.n_pre();
    const Mat m = differencing_matrix(im.t);
    im.w_hat = m * es.beta_pre;
    const Mat sigma_w =
        m * es.sigma.topLeftCorner(im.t, im.t) * m.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> eig(sigma_w);
    im.lambda = eig.eigenvalues();
    if (im.lambda.minCoeff() <= 1e-14 * std::max(1.0, im.lambda.maxCoeff()))
      throw Error(ErrorKind::SingularOmega,
                  "Sigma_w = M Sigma_pre M' is numerically singular");
    im.w_rot = eig.eigenvectors().transpose() * im.w_hat;
    im.one_rot = eig.eigenvectors().transpose() * Vec::Ones(im.t);
    im.w_mean = im.w_hat.mean();
    im.w_var = (im.w_hat.array() - im.w_mean).square().sum() / im.t;
    return im;
  }

  // GLS mean for fixed sigma2: (1' Omega^-1 1)^-1 1' Omega^-1 w.
  double profiled_mu(double sigma2) const {
    double num = 0.0, den = 0.0;
    for (int k = 0; k < t; ++k) {
      const double om = lambda[k] + sigma2;
      num += one_rot[k] * w_rot[k] / om;
      den += one_rot[k] * one_rot[k] / om;
    }
    return num / den;
  }

  double log_likelihood(double mu, double sigma2) const {
    double logdet = 0.0, quad = 0.0;
    for (int k = 0; k < t; ++k) {
      const double om = lambda[k] + sigma2;
      const double r = w_rot[k] - mu * one_rot[k];
      logdet += std::log(om);
      quad += r * r / om;
    }
    return -0.5 * (logdet + quad + t * std::log(2.0 * M_PI));
  }

  double concentrated(double sigma2) const {
    return log_likelihood(profiled_mu(sigma2), sigma2);
  }
};

constexpr double kSigma2Floor = 1e-12;

}  // namespace

EbFit fit_random_walk_mle(const EventStudy& es) {
  const IncrementModel im = IncrementModel::build(es);
  const double sigma2_max = 100.0 * im.lambda.maxCoeff() + im.w_var;

  // Scan log(sigma2 + floor) to bracket the optimum, then golden-section.
  const double x_lo = std::log(kSigma2Floor);
  const double x_hi = std::log(sigma2_max + kSigma2Floor);
  const auto objective = [&](double x) {
    return im.concentrated(std::max(0.0, std::exp(x) - kSigma2Floor));
  };

  const int n_scan = 64;
  int best_i = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n_scan; ++i) {
    const double x = x_lo + (x_hi - x_lo) * i / n_scan;
    const double val = objective(x);
    if (val > best_val) {
      best_val = val;
      best_i = i;
    }
  }
  double a = x_lo + (x_hi - x_lo) * std::max(0, best_i - 1) / n_scan;
  double b = x_lo + (x_hi - x_lo) * std::min(n_scan, best_i + 1) / n_scan;

  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  bool converged = false;
  for (int iter = 0; iter < 400; ++iter) {
    if (std::exp(b) - std::exp(a) < 1e-10) {  // absolute tolerance in sigma2
      converged = true;
      break;
    }
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }

  const double x_star = fc > fd ? c : d;
  double sigma2 = std::max(0.0, std::exp(x_star) - kSigma2Floor);
  // The floor itself means "boundary": report an exact zero.
  if (sigma2 < kSigma2Floor) sigma2 = 0.0;

  EbFit fit;
  fit.n_pre = im.t;
  fit.sigma2_hat = sigma2;
  fit.mu_hat = im.profiled_mu(sigma2);
  fit.log_likelihood = im.log_likelihood(fit.mu_hat, sigma2);
  fit.converged = converged;
  fit.boundary = sigma2 < kSigma2Floor;
  return fit;
}

std::string summary_line(const EbFit& fit) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "mu_hat = %.4g, sigma_hat = %.4g", fit.mu_hat,
                std::sqrt(fit.sigma2_hat));
  return buf;
}

std::string describe(const EbFit& fit, std::string_view unit) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "drift %.4g %.*s/period, innovation s.d. %.4g",
                fit.mu_hat, static_cast<int>(unit.size()), unit.data(),
                std::sqrt(fit.sigma2_hat));
  return buf;
}

EbResult eb_posterior(const EventStudy& es, double level) {
  EbResult out;
  out.fit = fit_random_walk_mle(es);
  const GaussianPrior prior =
      random_walk_prior(out.fit.mu_hat, out.fit.sigma2_hat, es.n_pre(), es.n_post());
  out.posterior = with_intervals(posterior_for_prior(es, prior), level);
  return out;
}

HyperPriorGrid HyperPriorGrid::uniform(double mu_min, double mu_max, int n_mu,
                                       double sigma_min, double sigma_max,
                                       int n_sigma) {
  if (n_mu < 1 || n_sigma < 1)
    throw Error(ErrorKind::EmptyGrid, "grid needs at least one point per axis");
  if (sigma_min < 0.0)
    throw Error(ErrorKind::NegativeVariance, "sigma grid cannot be negative");
  if (mu_max < mu_min || sigma_max < sigma_min)
    throw Error(ErrorKind::BadConfig, "grid ranges must be ordered");
  HyperPriorGrid grid;
  grid.mu_grid.resize(n_mu);
  grid.sigma_grid.resize(n_sigma);
  for (int i = 0; i < n_mu; ++i)
    grid.mu_grid[i] =
        n_mu == 1 ? mu_min : mu_min + (mu_max - mu_min) * i / (n_mu - 1);
  for (int j = 0; j < n_sigma; ++j)
    grid.sigma_grid[j] = n_sigma == 1
                             ? sigma_min
                             : sigma_min + (sigma_max - sigma_min) * j / (n_sigma - 1);
  grid.weights.assign(static_cast<std::size_t>(n_mu) * n_sigma,
                      1.0 / (static_cast<double>(n_mu) * n_sigma));
  return grid;
}

HyperPriorGrid HyperPriorGrid::default_grid(const EventStudy& es) {
  const IncrementModel im = IncrementModel::build(es);
  double sd = std::sqrt(im.w_var * im.t / std::max(1, im.t - 1));
  if (!(sd > 0.0)) sd = std::max(std::abs(im.w_mean), 1.0) * 1e-3;
  return uniform(im.w_mean - 5.0 * sd, im.w_mean + 5.0 * sd, 41, 0.0, 5.0 * sd, 41);
}

HyperPosterior hierarchical_posterior(const EventStudy& es,
                                      const HyperPriorGrid& grid, double level,
                                      ExecMode mode) {
  if (grid.mu_grid.empty() || grid.sigma_grid.empty() || grid.weights.empty())
    throw Error(ErrorKind::EmptyGrid, "hyper-prior grid is empty");
  if (grid.weights.size() != grid.size())
    throw Error(ErrorKind::DimensionMismatch,
                "hyper-prior weights do not match the grid size");
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorKind::BadLevel, "credible level must lie in (0, 1)");

  const IncrementModel im = IncrementModel::build(es);
  const std::size_t n_sigma = grid.sigma_grid.size();
  const std::size_t n_points = grid.size();
  const int q = es.n_post();

  // Per grid point: log posterior weight and the point posterior for tau.
  std::vector<double> log_w(n_points);
  std::vector<PosteriorSummary> points(n_points);
  for_each_index_checked(
      n_points,
      [&](std::size_t k) {
        const double mu = grid.mu_grid[k / n_sigma];
        const double sigma = grid.sigma_grid[k % n_sigma];
        const double prior_mass = grid.weights[k];
        log_w[k] = (prior_mass > 0.0
                        ? std::log(prior_mass) + im.log_likelihood(mu, sigma * sigma)
                        : -std::numeric_limits<double>::infinity());
        const GaussianPrior prior =
            random_walk_prior(mu, sigma * sigma, es.n_pre(), q);
        points[k] = posterior_for_prior(es, prior);
      },
      mode, "grid point");

  HyperPosterior hp;
  hp.grid = grid;
  hp.post_weights = normalize_log_weights(log_w);

  // Mixture moments, reduced in grid order.
  Vec mean = Vec::Zero(q);
  Mat second = Mat::Zero(q, q);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double w = hp.post_weights[k];
    mean += w * points[k].tau_mean;
    second += w * (points[k].tau_cov +
                   points[k].tau_mean * points[k].tau_mean.transpose());
  }

  PosteriorSummary mix;
  mix.post_periods = es.post_periods;
  mix.tau_mean = mean;
  Mat cov = second - mean * mean.transpose();
  mix.tau_cov = ((cov + cov.transpose()) * 0.5).eval();
  mix.delta_post_mean = Vec::Zero(q);
  mix.beta_pre_star = Vec::Zero(es.n_pre());
  for (std::size_t k = 0; k < n_points; ++k) {
    mix.delta_post_mean += hp.post_weights[k] * points[k].delta_post_mean;
    mix.beta_pre_star += hp.post_weights[k] * points[k].beta_pre_star;
  }

  // Equal-tailed intervals from the mixture-of-normals marginal CDF.
  for (int j = 0; j < q; ++j) {
    NormalMixture marginal;
    marginal.weights = hp.post_weights;
    marginal.means.resize(n_points);
    marginal.sds.resize(n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
      marginal.means[k] = points[k].tau_mean[j];
      marginal.sds[k] = std::sqrt(std::max(0.0, points[k].tau_cov(j, j)));
    }
    const double lo = marginal.quantile(0.5 * (1.0 - level));
    const double hi = marginal.quantile(0.5 * (1.0 + level));
    mix.intervals.push_back({es.post_periods[j], level, lo, hi});
  }

  hp.mixture = std::move(mix);
  return hp;
}

}  // namespace bt

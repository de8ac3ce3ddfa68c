#include "bt/prior_builders.hpp"

#include <cmath>
#include <cstdlib>

#include "bt/errors.hpp"

namespace bt {

Mat differencing_matrix(int t_pre) {
  if (t_pre < 1) throw Error(ErrorKind::BadPeriods, "t_pre must be >= 1");
  Mat m = Mat::Zero(t_pre, t_pre);
  for (int k = 0; k + 1 < t_pre; ++k) {
    m(k, k) = -1.0;
    m(k, k + 1) = 1.0;
  }
  m(t_pre - 1, t_pre - 1) = -1.0;  // w_0 = -delta_{-1}
  return m;
}

namespace {

std::vector<int> stacked_periods(int t_pre, int t_post) {
  std::vector<int> periods;
  periods.reserve(t_pre + t_post);
  for (int t = -t_pre; t <= -1; ++t) periods.push_back(t);
  for (int t = 1; t <= t_post; ++t) periods.push_back(t);
  return periods;
}

}  // namespace

GaussianPrior random_walk_prior(double mu, double sigma2, int t_pre, int t_post) {
  if (sigma2 < 0.0)
    throw Error(ErrorKind::NegativeVariance, "random walk innovation variance < 0");
  if (t_pre < 1 || t_post < 1)
    throw Error(ErrorKind::BadPeriods, "need t_pre >= 1 and t_post >= 1");
  const auto periods = stacked_periods(t_pre, t_post);
  const int d = static_cast<int>(periods.size());
  GaussianPrior prior;
  prior.mean.resize(d);
  prior.cov.resize(d, d);
  for (int i = 0; i < d; ++i) {
    prior.mean[i] = mu * periods[i];
    for (int j = 0; j < d; ++j) {
      const int s = periods[i];
      const int t = periods[j];
      const bool same_sign = (s > 0) == (t > 0);
      prior.cov(i, j) = same_sign ? sigma2 * std::min(std::abs(s), std::abs(t)) : 0.0;
    }
  }
  return prior;
}

GaussianPrior ar1_prior(double rho, double sigma_eps2, int t_pre, int t_post) {
  if (!(std::abs(rho) < 1.0))
    throw Error(ErrorKind::BadRho, "AR(1) requires |rho| < 1");
  if (!(sigma_eps2 > 0.0))
    throw Error(ErrorKind::NegativeVariance, "AR(1) innovation variance must be > 0");
  if (t_pre < 1 || t_post < 1)
    throw Error(ErrorKind::BadPeriods, "need t_pre >= 1 and t_post >= 1");
  const auto periods = stacked_periods(t_pre, t_post);
  const int d = static_cast<int>(periods.size());
  const double v = sigma_eps2 / (1.0 - rho * rho);
  GaussianPrior prior;
  prior.mean = Vec::Zero(d);
  prior.cov.resize(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const int s = std::abs(periods[i]);
      const int t = std::abs(periods[j]);
      const int lag = std::abs(periods[i] - periods[j]);
      prior.cov(i, j) = v * (std::pow(rho, lag) - std::pow(rho, s + t));
    }
  }
  return prior;
}

GaussianPrior materialize_prior(const PriorSpec& spec, int t_pre, int t_post) {
  return std::visit(
      [&](const auto& s) -> GaussianPrior {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianPrior>) {
          return validate_prior(s, t_pre + t_post);
        } else if constexpr (std::is_same_v<T, RandomWalkSpec>) {
          return random_walk_prior(s.mu, s.sigma2, t_pre, t_post);
        } else {
          return ar1_prior(s.rho, s.sigma_eps2, t_pre, t_post);
        }
      },
      spec);
}

}  // namespace bt

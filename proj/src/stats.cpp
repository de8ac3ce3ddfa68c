#include "bt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bt/errors.hpp"

namespace bt {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

namespace {

// Acklam's rational approximation, |error| < 1.2e-9 before refinement.
double quantile_guess(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorKind::BadLevel, "probability must lie strictly in (0, 1)");
  double x = quantile_guess(p);
  // One Halley step against erfc-based CDF.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double NormalMixture::cdf(double x) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (sds[k] > 0.0) {
      acc += weights[k] * normal_cdf((x - means[k]) / sds[k]);
    } else if (x >= means[k]) {
      acc += weights[k];
    }
  }
  return acc;
}

double NormalMixture::quantile(double p, double prob_tol) const {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorKind::BadLevel, "probability must lie strictly in (0, 1)");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    lo = std::min(lo, means[k] - 12.0 * sds[k] - 1.0);
    hi = std::max(hi, means[k] + 12.0 * sds[k] + 1.0);
  }
  while (cdf(lo) > p) lo -= (hi - lo);
  while (cdf(hi) < p) hi += (hi - lo);
  const double x_tol = 1e-14 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  while (hi - lo > x_tol) {
    const double mid = 0.5 * (lo + hi);
    const double c = cdf(mid);
    if (std::abs(c - p) <= prob_tol) return mid;
    (c < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> normalize_log_weights(const std::vector<double>& log_w) {
  if (log_w.empty()) throw Error(ErrorKind::EmptyGrid, "no weights to normalize");
  const double shift = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(shift))
    throw Error(ErrorKind::AllWeightsUnderflow,
                "all log weights are -inf; nothing to normalize");
  std::vector<double> w(log_w.size());
  double total = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    w[i] = std::exp(log_w[i] - shift);
    total += w[i];
  }
  for (double& wi : w) wi /= total;
  return w;
}

}  // namespace bt

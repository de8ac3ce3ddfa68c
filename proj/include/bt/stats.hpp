#pragma once

#include <vector>

namespace bt {

double normal_cdf(double x);

/// Inverse standard-normal CDF. Rational initial guess refined by one
/// Halley step; absolute error well under 1e-9 across (0, 1).
/// Throws BadLevel outside (0, 1).
double normal_quantile(double p);

/// Finite mixture of normal marginals. Components with sd == 0 contribute a
/// step at their mean.
struct NormalMixture {
  std::vector<double> weights;  // nonnegative, summing to 1
  std::vector<double> means;
  std::vector<double> sds;

  double cdf(double x) const;

  /// Equal-tailed quantile by bisection, accurate to `prob_tol` in
  /// probability (falls back to the bracket midpoint if the CDF jumps).
  double quantile(double p, double prob_tol = 1e-8) const;
};

/// Normalizes log weights to probabilities using a max shift.
/// Throws AllWeightsUnderflow when every entry is -inf.
std::vector<double> normalize_log_weights(const std::vector<double>& log_w);

}  // namespace bt

#pragma once

#include <Eigen/Dense>
#include <vector>

namespace bt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Event-study estimates with a joint sampling covariance.
///
/// Coefficients are stored pre-then-post. Pre periods run -T_pre..-1 and
/// post periods 1..T_post; period 0 is the omitted reference period, which
/// pins the trend-violation normalization delta_0 = 0 used everywhere else.
struct EventStudy {
  std::vector<int> pre_periods;
  std::vector<int> post_periods;
  Vec beta_pre;
  Vec beta_post;
  Mat sigma;

  int n_pre() const { return static_cast<int>(pre_periods.size()); }
  int n_post() const { return static_cast<int>(post_periods.size()); }
  int dim() const { return n_pre() + n_post(); }
};

/// Checks dimensions and period labels, symmetrizes sigma as
/// (sigma + sigma^T)/2, and requires the result to Cholesky-factorize.
/// Values are never repaired beyond symmetrization.
EventStudy validate_event_study(EventStudy raw);

struct SigmaBlocks {
  Mat pre;       // T_pre x T_pre
  Mat post;      // T_post x T_post
  Mat pre_post;  // T_pre x T_post
};

/// Blocks of a validated sigma in pre-then-post ordering.
SigmaBlocks split_covariance(const EventStudy& es);

}  // namespace bt

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bt/empirical_bayes.hpp"
#include "bt/event_study.hpp"
#include "bt/exec.hpp"
#include "bt/prior.hpp"

namespace bt {

/// Data-generating process for synthetic event studies: delta drawn from
/// `prior_spec`, beta = (delta_pre, tau_true + delta_post), and
/// beta_hat ~ N(beta, sigma). tau_pre is identically zero.
struct DgpSpec {
  PriorSpec prior_spec;
  Vec tau_post_true;
  Mat sigma;
  int n_pre = 0;
  int n_post = 0;
  std::uint64_t seed = 0;
};

DgpSpec validate_dgp(DgpSpec dgp);

/// Pure function of (dgp.seed, replication_index).
EventStudy simulate_event_study(const DgpSpec& dgp, long replication_index);

enum class Method { BayesKnownPrior, Eb, Hierarchical, Ols };

Method parse_method(const std::string& name);  // BadConfig on unknown names
std::string to_string(Method method);

struct PeriodCoverage {
  int period = 0;
  double coverage = 0.0;
  double mean_length = 0.0;
  double mean_bias = 0.0;
  double se = 0.0;  // MC standard error of the coverage rate
};

struct CoverageReport {
  Method method = Method::Ols;
  double level = 0.0;
  long n_reps = 0;
  std::vector<PeriodCoverage> periods;
};

/// Runs `method` on n_reps simulated studies and tallies per-period
/// interval coverage of tau_post_true. Replications run in parallel with
/// one RNG stream each and are reduced in replication order; a failing
/// replication aborts the experiment with its index.
CoverageReport coverage_experiment(const DgpSpec& dgp, Method method, long n_reps,
                                   double level,
                                   ExecMode mode = ExecMode::Parallel,
                                   const std::optional<HyperPriorGrid>& hyper = {});

struct ConsistencyRow {
  int n_pre = 0;
  double median_abs_err_mu = 0.0;
  double median_abs_err_sigma2 = 0.0;
};

/// Median hyperparameter errors of the random-walk MLE across pre-period
/// counts, under delta ~ RandomWalk(true_mu, true_sigma2) and
/// sigma = sigma_scale * I.
std::vector<ConsistencyRow> mle_consistency_experiment(
    double true_mu, double true_sigma2, double sigma_scale,
    const std::vector<int>& t_pre_list, long n_reps, std::uint64_t seed,
    ExecMode mode = ExecMode::Parallel);

}  // namespace bt

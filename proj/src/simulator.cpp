#include "bt/simulator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "bt/errors.hpp"
#include "bt/posterior.hpp"
#include "bt/prior_builders.hpp"
#include "bt/rng.hpp"
#include "bt/stats.hpp"

namespace bt {

DgpSpec validate_dgp(DgpSpec dgp) {
  if (dgp.n_pre < 1 || dgp.n_post < 1)
    throw Error(ErrorKind::BadPeriods, "need n_pre >= 1 and n_post >= 1");
  if (dgp.tau_post_true.size() != dgp.n_post)
    throw Error(ErrorKind::DimensionMismatch,
                "tau_post_true length does not match n_post");
  const int d = dgp.n_pre + dgp.n_post;
  if (dgp.sigma.rows() != d || dgp.sigma.cols() != d)
    throw Error(ErrorKind::DimensionMismatch, "sigma dimension mismatch");
  dgp.sigma = ((dgp.sigma + dgp.sigma.transpose()) * 0.5).eval();
  if (Eigen::LLT<Mat>(dgp.sigma).info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite, "dgp sigma is not positive definite");
  // Materializing the prior validates its parameters and dimensions.
  (void)materialize_prior(dgp.prior_spec, dgp.n_pre, dgp.n_post);
  return dgp;
}

namespace {

// PSD factor L with L L' = cov.
Mat psd_factor(const Mat& cov) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

struct SimContext {
  GaussianPrior prior;
  Mat prior_factor;
  Mat sigma_chol;

  static SimContext build(const DgpSpec& dgp) {
    SimContext ctx;
    ctx.prior = materialize_prior(dgp.prior_spec, dgp.n_pre, dgp.n_post);
    ctx.prior_factor = psd_factor(ctx.prior.cov);
    ctx.sigma_chol = Eigen::LLT<Mat>(dgp.sigma).matrixL();
    return ctx;
  }
};

EventStudy simulate_with(const SimContext& ctx, const DgpSpec& dgp,
                         long replication_index) {
  const int p = dgp.n_pre;
  const int q = dgp.n_post;
  Rng rng(dgp.seed, static_cast<std::uint64_t>(replication_index));
  const Vec delta = ctx.prior.mean + ctx.prior_factor * rng.normal_vec(p + q);
  Vec beta(p + q);
  beta.head(p) = delta.head(p);
  beta.tail(q) = dgp.tau_post_true + delta.tail(q);
  const Vec beta_hat = beta + ctx.sigma_chol * rng.normal_vec(p + q);

  EventStudy es;
  for (int t = -p; t <= -1; ++t) es.pre_periods.push_back(t);
  for (int t = 1; t <= q; ++t) es.post_periods.push_back(t);
  es.beta_pre = beta_hat.head(p);
  es.beta_post = beta_hat.tail(q);
  es.sigma = dgp.sigma;
  return validate_event_study(std::move(es));
}

}  // namespace

EventStudy simulate_event_study(const DgpSpec& dgp, long replication_index) {
  const DgpSpec checked = validate_dgp(dgp);
  return simulate_with(SimContext::build(checked), checked, replication_index);
}

Method parse_method(const std::string& name) {
  if (name == "bayes_known_prior") return Method::BayesKnownPrior;
  if (name == "eb") return Method::Eb;
  if (name == "hierarchical") return Method::Hierarchical;
  if (name == "ols") return Method::Ols;
  throw Error(ErrorKind::BadConfig, "unknown method '" + name + "'");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::BayesKnownPrior: return "bayes_known_prior";
    case Method::Eb: return "eb";
    case Method::Hierarchical: return "hierarchical";
    case Method::Ols: return "ols";
  }
  return "?";
}

CoverageReport coverage_experiment(const DgpSpec& dgp, Method method, long n_reps,
                                   double level, ExecMode mode,
                                   const std::optional<HyperPriorGrid>& hyper) {
  if (n_reps < 100)
    throw Error(ErrorKind::BadConfig, "coverage experiments need n_reps >= 100");
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorKind::BadLevel, "level must lie in (0, 1)");
  const DgpSpec checked = validate_dgp(dgp);
  const SimContext ctx = SimContext::build(checked);
  const int q = checked.n_post;
  const double z = normal_quantile(0.5 * (1.0 + level));

  // Per-replication slots; reduced in replication order below.
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(n_reps) * q);
  std::vector<double> lengths(covered.size());
  std::vector<double> biases(covered.size());

  for_each_index_checked(
      static_cast<std::size_t>(n_reps),
      [&](std::size_t rep) {
        const EventStudy es = simulate_with(ctx, checked, static_cast<long>(rep));
        std::vector<CredibleInterval> intervals;
        Vec center(q);
        switch (method) {
          case Method::BayesKnownPrior: {
            const PosteriorSummary ps =
                with_intervals(posterior_for_prior(es, ctx.prior), level);
            intervals = ps.intervals;
            center = ps.tau_mean;
            break;
          }
          case Method::Eb: {
            const EbResult r = eb_posterior(es, level);
            intervals = r.posterior.intervals;
            center = r.posterior.tau_mean;
            break;
          }
          case Method::Hierarchical: {
            const HyperPriorGrid grid =
                hyper ? *hyper : HyperPriorGrid::default_grid(es);
            // Grid points already run serially here; the replication loop
            // is the parallel axis.
            const HyperPosterior hp =
                hierarchical_posterior(es, grid, level, ExecMode::Serial);
            intervals = hp.mixture.intervals;
            center = hp.mixture.tau_mean;
            break;
          }
          case Method::Ols: {
            const SigmaBlocks s = split_covariance(es);
            for (int j = 0; j < q; ++j) {
              const double sd = std::sqrt(s.post(j, j));
              intervals.push_back({es.post_periods[j], level,
                                   es.beta_post[j] - z * sd,
                                   es.beta_post[j] + z * sd});
              center[j] = es.beta_post[j];
            }
            break;
          }
        }
        for (int j = 0; j < q; ++j) {
          const std::size_t slot = rep * q + j;
          const double truth = checked.tau_post_true[j];
          covered[slot] =
              intervals[j].lower <= truth && truth <= intervals[j].upper;
          lengths[slot] = intervals[j].upper - intervals[j].lower;
          biases[slot] = center[j] - truth;
        }
      },
      mode, "replication");

  CoverageReport report;
  report.method = method;
  report.level = level;
  report.n_reps = n_reps;
  for (int j = 0; j < q; ++j) {
    PeriodCoverage pc;
    pc.period = j + 1;
    double hits = 0.0, len = 0.0, bias = 0.0;
    for (long rep = 0; rep < n_reps; ++rep) {
      const std::size_t slot = static_cast<std::size_t>(rep) * q + j;
      hits += covered[slot];
      len += lengths[slot];
      bias += biases[slot];
    }
    pc.coverage = hits / n_reps;
    pc.mean_length = len / n_reps;
    pc.mean_bias = bias / n_reps;
    pc.se = std::sqrt(std::max(0.0, pc.coverage * (1.0 - pc.coverage) / n_reps));
    report.periods.push_back(pc);
  }
  return report;
}

std::vector<ConsistencyRow> mle_consistency_experiment(
    double true_mu, double true_sigma2, double sigma_scale,
    const std::vector<int>& t_pre_list, long n_reps, std::uint64_t seed,
    ExecMode mode) {
  if (t_pre_list.empty()) throw Error(ErrorKind::BadConfig, "t_pre_list is empty");
  if (!std::is_sorted(t_pre_list.begin(), t_pre_list.end()))
    throw Error(ErrorKind::BadConfig, "t_pre_list must be ascending");
  if (n_reps < 1) throw Error(ErrorKind::BadConfig, "n_reps must be positive");

  std::vector<ConsistencyRow> rows;
  for (std::size_t ti = 0; ti < t_pre_list.size(); ++ti) {
    const int t_pre = t_pre_list[ti];
    DgpSpec dgp;
    dgp.prior_spec = RandomWalkSpec{true_mu, true_sigma2};
    dgp.n_pre = t_pre;
    dgp.n_post = 1;
    dgp.tau_post_true = Vec::Zero(1);
    dgp.sigma = sigma_scale * Mat::Identity(t_pre + 1, t_pre + 1);
    dgp.seed = seed;
    const DgpSpec checked = validate_dgp(dgp);
    const SimContext ctx = SimContext::build(checked);

    std::vector<double> err_mu(n_reps), err_s2(n_reps);
    for_each_index_checked(
        static_cast<std::size_t>(n_reps),
        [&](std::size_t rep) {
          // Stream ids stay unique across the t_pre sweep.
          const long stream = static_cast<long>(ti) * n_reps + static_cast<long>(rep);
          const EventStudy es = simulate_with(ctx, checked, stream);
          const EbFit fit = fit_random_walk_mle(es);
          err_mu[rep] = std::abs(fit.mu_hat - true_mu);
          err_s2[rep] = std::abs(fit.sigma2_hat - true_sigma2);
        },
        mode, "replication");

    const auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      const std::size_t n = v.size();
      return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    rows.push_back({t_pre, median(err_mu), median(err_s2)});
  }
  return rows;
}

}  // namespace bt

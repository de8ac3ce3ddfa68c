#include "bt/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "bt/errors.hpp"
#include "bt/prior_builders.hpp"
#include "bt/rng.hpp"

namespace bt::oracle {

namespace {

struct QuadBox {
  std::vector<double> lo;
  std::vector<double> width;
};

struct QuadAccum {
  double mass = 0.0;
  double edge_mass = 0.0;
  Vec tau1;   // sum of w * tau
  Mat tau2;   // sum of w * tau tau'
};

struct QuadContext {
  int p = 0, q = 0, dims = 0;
  Vec beta_hat;
  Vec mu;
  Mat sigma_inv;
  Mat v_inv;
  QuadBox box;
  double log_shift = 0.0;
};

double quad_log_density(const QuadContext& c, const double* theta) {
  // theta = (delta_pre[p], delta_post[q], tau[q])
  const int n = c.p + c.q;
  Vec r(n);
  Vec d(n);
  for (int i = 0; i < c.p; ++i) {
    d[i] = theta[i];
    r[i] = c.beta_hat[i] - theta[i];
  }
  for (int j = 0; j < c.q; ++j) {
    d[c.p + j] = theta[c.p + j];
    r[c.p + j] = c.beta_hat[c.p + j] - theta[c.p + j] - theta[c.p + c.q + j];
  }
  const Vec dc = d - c.mu;
  return -0.5 * (r.dot(c.sigma_inv * r) + dc.dot(c.v_inv * dc));
}

struct QuadResult {
  Vec mean;
  Mat cov;
  double edge_fraction = 0.0;
};

QuadResult quad_pass(const QuadContext& c, int n_points, ExecMode mode) {
  const int d = c.dims;
  const int q = c.q;
  std::vector<double> h(d);
  for (int k = 0; k < d; ++k) h[k] = c.box.width[k] / n_points;

  // Slab per outer index: each slab accumulates its cells in a fixed order,
  // and slabs are reduced in index order afterwards.
  long inner = 1;
  for (int k = 1; k < d; ++k) inner *= n_points;
  std::vector<QuadAccum> slabs(n_points);

  for_each_index(
      static_cast<std::size_t>(n_points),
      [&](std::size_t i0) {
        QuadAccum acc;
        acc.tau1 = Vec::Zero(q);
        acc.tau2 = Mat::Zero(q, q);
        std::array<double, 4> theta{};
        std::array<int, 4> idx{};
        theta[0] = c.box.lo[0] + (static_cast<double>(i0) + 0.5) * h[0];
        const bool outer_edge = (i0 == 0 || static_cast<int>(i0) == n_points - 1);
        for (long flat = 0; flat < inner; ++flat) {
          long rem = flat;
          bool edge = outer_edge;
          for (int k = d - 1; k >= 1; --k) {
            idx[k] = static_cast<int>(rem % n_points);
            rem /= n_points;
            theta[k] = c.box.lo[k] + (idx[k] + 0.5) * h[k];
            edge = edge || idx[k] == 0 || idx[k] == n_points - 1;
          }
          const double w = std::exp(quad_log_density(c, theta.data()) - c.log_shift);
          acc.mass += w;
          if (edge) acc.edge_mass += w;
          for (int a = 0; a < q; ++a) {
            const double t_a = theta[c.p + c.q + a];
            acc.tau1[a] += w * t_a;
            for (int b = 0; b <= a; ++b) acc.tau2(a, b) += w * t_a * theta[c.p + c.q + b];
          }
        }
        slabs[i0] = std::move(acc);
      },
      mode);

  QuadAccum total;
  total.tau1 = Vec::Zero(q);
  total.tau2 = Mat::Zero(q, q);
  for (const QuadAccum& s : slabs) {
    total.mass += s.mass;
    total.edge_mass += s.edge_mass;
    total.tau1 += s.tau1;
    total.tau2 += s.tau2;
  }
  if (!(total.mass > 0.0))
    throw Error(ErrorKind::GridTooCoarse,
                "quadrature grid captured no posterior mass");

  QuadResult res;
  res.mean = total.tau1 / total.mass;
  Mat second = total.tau2 / total.mass;
  second = second.selfadjointView<Eigen::Lower>();
  res.cov = second - res.mean * res.mean.transpose();
  res.edge_fraction = total.edge_mass / total.mass;
  return res;
}

}  // namespace

TauMoments grid_posterior_oracle(const EventStudy& es, const GaussianPrior& prior,
                                 double grid_half_width, int points_per_dim,
                                 double target_abs_error, ExecMode mode) {
  const int p = es.n_pre();
  const int q = es.n_post();
  const int dims = p + 2 * q;
  if (dims > 4)
    throw Error(ErrorKind::DimensionTooLarge,
                "quadrature supports at most 4 integration dimensions, got " +
                    std::to_string(dims));
  if (points_per_dim < 8)
    throw Error(ErrorKind::GridTooCoarse, "need at least 8 points per dimension");

  QuadContext c;
  c.p = p;
  c.q = q;
  c.dims = dims;
  c.beta_hat.resize(p + q);
  c.beta_hat.head(p) = es.beta_pre;
  c.beta_hat.tail(q) = es.beta_post;
  c.mu = prior.mean;

  Eigen::LLT<Mat> llt_sigma(es.sigma);
  if (llt_sigma.info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite, "sigma is not positive definite");
  c.sigma_inv = llt_sigma.solve(Mat::Identity(p + q, p + q));
  Eigen::LLT<Mat> llt_v(prior.cov);
  if (llt_v.info() != Eigen::Success)
    throw Error(ErrorKind::SingularPrior,
                "quadrature needs a strictly PD prior covariance");
  c.v_inv = llt_v.solve(Mat::Identity(p + q, p + q));

  // Box per axis. delta_pre combines the 1-d prior and sampling precisions;
  // delta_post uses the prior marginal; tau is centered at
  // beta_post - mu_post and sized by both spreads. Widths are inflated and
  // the edge-mass check below guards against an undersized box.
  c.box.lo.resize(dims);
  c.box.width.resize(dims);
  const auto set_axis = [&](int axis, double center, double half) {
    c.box.lo[axis] = center - half;
    c.box.width[axis] = 2.0 * half;
  };
  for (int i = 0; i < p; ++i) {
    const double prec = 1.0 / es.sigma(i, i) + 1.0 / prior.cov(i, i);
    const double sd = 1.0 / std::sqrt(prec);
    const double center =
        (es.beta_pre[i] / es.sigma(i, i) + prior.mean[i] / prior.cov(i, i)) / prec;
    set_axis(i, center, grid_half_width * sd * 1.5);
  }
  for (int j = 0; j < q; ++j) {
    const double sd = std::sqrt(prior.cov(p + j, p + j));
    set_axis(p + j, prior.mean[p + j], grid_half_width * sd * 2.0);
  }
  for (int j = 0; j < q; ++j) {
    const double sd = std::sqrt(es.sigma(p + j, p + j)) +
                      std::sqrt(prior.cov(p + j, p + j));
    set_axis(p + q + j, es.beta_post[j] - prior.mean[p + j], grid_half_width * sd);
  }

  // Shift the log density by its max over a coarse probe grid so the
  // exponentials stay in range.
  {
    const int probe = 9;
    double best = -std::numeric_limits<double>::infinity();
    std::array<double, 4> theta{};
    long cells = 1;
    for (int k = 0; k < dims; ++k) cells *= probe;
    for (long flat = 0; flat < cells; ++flat) {
      long rem = flat;
      for (int k = 0; k < dims; ++k) {
        const int ik = static_cast<int>(rem % probe);
        rem /= probe;
        theta[k] = c.box.lo[k] + (ik + 0.5) * c.box.width[k] / probe;
      }
      best = std::max(best, quad_log_density(c, theta.data()));
    }
    c.log_shift = best;
  }

  const QuadResult fine = quad_pass(c, points_per_dim, mode);
  if (fine.edge_fraction > 1e-5)
    throw Error(ErrorKind::GridTooCoarse,
                "posterior mass on the box boundary (fraction " +
                    std::to_string(fine.edge_fraction) + "); widen the grid");

  // Richardson-style error estimate from a half-resolution pass.
  const QuadResult half = quad_pass(c, points_per_dim / 2, mode);
  double est = (fine.mean - half.mean).cwiseAbs().maxCoeff() / 3.0;
  est = std::max(est, (fine.cov - half.cov).cwiseAbs().maxCoeff() / 3.0);
  if (est > target_abs_error)
    throw Error(ErrorKind::GridTooCoarse,
                "estimated discretization error " + std::to_string(est) +
                    " exceeds target " + std::to_string(target_abs_error));

  return {fine.mean, fine.cov};
}

TauMoments proper_prior_limit_oracle(const EventStudy& es,
                                     const GaussianPrior& prior, double kappa) {
  const int p = es.n_pre();
  const int q = es.n_post();
  const int n = p + q;
  const int m = p + 2 * q;
  if (prior.mean.size() != n || prior.cov.rows() != n)
    throw Error(ErrorKind::DimensionMismatch,
                "prior dimension does not match the event study");

  Mat c0 = Mat::Zero(m, m);
  c0.topLeftCorner(n, n) = prior.cov;
  c0.bottomRightCorner(q, q) = kappa * Mat::Identity(q, q);
  const double scale = std::max(1.0, c0.diagonal().maxCoeff());
  if (!(kappa > 0.0) || kappa < 1e-25 * scale)
    throw Error(ErrorKind::SingularCovariance,
                "tau prior variance kappa is numerically indistinguishable from "
                "zero; the conditioning covariance would be singular");

  Mat a = Mat::Zero(n, m);
  a.topLeftCorner(p, p).setIdentity();
  a.block(p, p, q, q).setIdentity();
  a.block(p, p + q, q, q).setIdentity();

  Vec m0 = Vec::Zero(m);
  m0.head(n) = prior.mean;
  Vec beta_hat(n);
  beta_hat.head(p) = es.beta_pre;
  beta_hat.tail(q) = es.beta_post;

  const Mat cross = c0 * a.transpose();               // Cov(theta, beta_hat)
  const Mat s = a * cross + es.sigma;                 // Var(beta_hat)
  Eigen::LLT<Mat> llt_s(s);
  if (llt_s.info() != Eigen::Success)
    throw Error(ErrorKind::SingularCovariance,
                "marginal covariance of beta_hat is not positive definite");

  const Vec mean = m0 + cross * llt_s.solve(beta_hat - a * m0);
  const Mat cov = c0 - cross * llt_s.solve(cross.transpose());

  TauMoments out;
  out.mean = mean.tail(q);
  Mat tc = cov.bottomRightCorner(q, q);
  out.cov = ((tc + tc.transpose()) * 0.5).eval();
  return out;
}

MleGridResult mle_grid_oracle(const EventStudy& es,
                              std::pair<double, double> mu_range,
                              std::pair<double, double> sigma_range, int n) {
  if (n < 100)
    throw Error(ErrorKind::BadConfig, "grid search needs n >= 100 per axis");
  if (es.n_pre() < 2)
    throw Error(ErrorKind::TooFewPeriods, "need at least two pre periods");
  const int t = es.n_pre();
  const Mat m = differencing_matrix(t);
  const Vec w_hat = m * es.beta_pre;
  const Mat sigma_pre = es.sigma.topLeftCorner(t, t);
  const Mat sigma_w = m * sigma_pre * m.transpose();

  Eigen::SelfAdjointEigenSolver<Mat> eig(sigma_w);
  const Vec lambda = eig.eigenvalues();
  if (lambda.minCoeff() <= 1e-14 * std::max(1.0, lambda.maxCoeff()))
    throw Error(ErrorKind::SingularOmega, "Sigma_w is numerically singular");
  const Vec wt = eig.eigenvectors().transpose() * w_hat;
  const Vec ones_t = eig.eigenvectors().transpose() * Vec::Ones(t);

  const double d_mu = (mu_range.second - mu_range.first) / (n - 1);
  const double d_sigma = (sigma_range.second - sigma_range.first) / (n - 1);

  MleGridResult best;
  best.loglik_best = -std::numeric_limits<double>::infinity();
  best.cell_mu = d_mu;
  best.cell_sigma = d_sigma;
  for (int i = 0; i < n; ++i) {
    const double mu = mu_range.first + i * d_mu;
    for (int j = 0; j < n; ++j) {
      const double sigma = sigma_range.first + j * d_sigma;
      const double s2 = sigma * sigma;
      double logdet = 0.0, quad = 0.0;
      for (int k = 0; k < t; ++k) {
        const double om = lambda[k] + s2;
        const double r = wt[k] - mu * ones_t[k];
        logdet += std::log(om);
        quad += r * r / om;
      }
      const double ll = -0.5 * (logdet + quad + t * std::log(2.0 * M_PI));
      if (ll > best.loglik_best) {
        best.loglik_best = ll;
        best.mu_best = mu;
        best.sigma2_best = s2;
      }
    }
  }
  return best;
}

namespace {

// Factor L with L L' = cov for PSD matrices (eigendecomposition, negative
// roundoff clipped at zero).
Mat psd_factor(const Mat& cov) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
  const Vec lam = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

}  // namespace

SampleMoments mc_prior_moments(const PriorSpec& spec, int t_pre, int t_post,
                               long n_draws, std::uint64_t seed,
                               Ar1Sampling ar1_sampling, double rejection_tol,
                               ExecMode mode) {
  if (n_draws < 10000)
    throw Error(ErrorKind::BadConfig, "moment checks need n_draws >= 10000");
  const int d = t_pre + t_post;

  // One draw = one stream, so results do not depend on scheduling. A draw
  // may be rejected (AR(1) rejection sampling), in which case it
  // contributes nothing.
  enum class Kind { RandomWalk, Ar1Exact, Ar1Reject, Explicit };
  Kind kind;
  double mu = 0.0, sigma = 0.0, rho = 0.0, stat_sd = 0.0, eps_sd = 0.0;
  Mat factor;  // for Ar1Exact / Explicit
  Vec mean0 = Vec::Zero(d);
  if (const auto* rw = std::get_if<RandomWalkSpec>(&spec)) {
    if (rw->sigma2 < 0.0)
      throw Error(ErrorKind::NegativeVariance, "random walk variance < 0");
    kind = Kind::RandomWalk;
    mu = rw->mu;
    sigma = std::sqrt(rw->sigma2);
  } else if (const auto* ar = std::get_if<Ar1Spec>(&spec)) {
    if (!(std::abs(ar->rho) < 1.0)) throw Error(ErrorKind::BadRho, "|rho| >= 1");
    if (!(ar->sigma_eps2 > 0.0))
      throw Error(ErrorKind::NegativeVariance, "AR(1) variance must be > 0");
    rho = ar->rho;
    const double v = ar->sigma_eps2 / (1.0 - rho * rho);
    stat_sd = std::sqrt(v);
    eps_sd = std::sqrt(ar->sigma_eps2);
    if (ar1_sampling == Ar1Sampling::ExactConditional) {
      kind = Kind::Ar1Exact;
      // Stationary covariance over (-T_pre..T_post) conditioned on the
      // delta_0 coordinate by a generic Schur complement.
      const int full = t_pre + 1 + t_post;
      std::vector<int> periods(full);
      for (int i = 0; i < full; ++i) periods[i] = i - t_pre;
      Mat stat(full, full);
      for (int i = 0; i < full; ++i)
        for (int j = 0; j < full; ++j)
          stat(i, j) = v * std::pow(rho, std::abs(periods[i] - periods[j]));
      const int z0 = t_pre;  // index of period 0
      std::vector<int> keep;
      for (int i = 0; i < full; ++i)
        if (i != z0) keep.push_back(i);
      Mat cond(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          cond(i, j) = stat(keep[i], keep[j]) -
                       stat(keep[i], z0) * stat(z0, keep[j]) / stat(z0, z0);
      factor = psd_factor(cond);
    } else {
      kind = Kind::Ar1Reject;
    }
  } else {
    kind = Kind::Explicit;
    const auto& g = std::get<GaussianPrior>(spec);
    if (g.mean.size() != d || g.cov.rows() != d)
      throw Error(ErrorKind::DimensionMismatch, "explicit prior dimension mismatch");
    factor = psd_factor(g.cov);
    mean0 = g.mean;
  }

  const auto draw_one = [&](std::uint64_t stream, Vec& out) -> bool {
    Rng rng(seed, stream);
    switch (kind) {
      case Kind::RandomWalk: {
        // Forward increments delta_1..delta_Tpost, then backward from
        // delta_0 = 0 down to delta_{-T_pre}.
        double cur = 0.0;
        for (int t = 1; t <= t_post; ++t) {
          cur += mu + sigma * rng.normal();
          out[t_pre + t - 1] = cur;
        }
        cur = 0.0;
        for (int k = 1; k <= t_pre; ++k) {
          cur -= mu + sigma * rng.normal();
          out[t_pre - k] = cur;
        }
        return true;
      }
      case Kind::Ar1Exact:
      case Kind::Explicit: {
        out = mean0 + factor * rng.normal_vec(d);
        return true;
      }
      case Kind::Ar1Reject: {
        // Stationary path from -T_pre forward; keep when delta_0 ~ 0.
        double cur = stat_sd * rng.normal();
        std::vector<double> path(t_pre + 1 + t_post);
        path[0] = cur;
        for (int i = 1; i < static_cast<int>(path.size()); ++i) {
          cur = rho * cur + eps_sd * rng.normal();
          path[i] = cur;
        }
        if (std::abs(path[t_pre]) >= rejection_tol) return false;
        for (int i = 0; i < t_pre; ++i) out[i] = path[i];
        for (int j = 0; j < t_post; ++j) out[t_pre + j] = path[t_pre + 1 + j];
        return true;
      }
    }
    return false;
  };

  // Chunked accumulation: each chunk sums its draws in index order and
  // chunks are combined in order, so the totals are identical for any
  // ExecMode / thread count.
  const long chunk = 1 << 14;
  const long n_chunks = (n_draws + chunk - 1) / chunk;
  struct Partial {
    long kept = 0;
    Vec sum;
    Mat outer;
  };
  std::vector<Partial> partials(n_chunks);
  for_each_index(
      static_cast<std::size_t>(n_chunks),
      [&](std::size_t ci) {
        Partial part;
        part.sum = Vec::Zero(d);
        part.outer = Mat::Zero(d, d);
        Vec x(d);
        const long begin = static_cast<long>(ci) * chunk;
        const long end = std::min(n_draws, begin + chunk);
        for (long i = begin; i < end; ++i) {
          if (!draw_one(static_cast<std::uint64_t>(i), x)) continue;
          part.kept += 1;
          part.sum += x;
          part.outer.selfadjointView<Eigen::Lower>().rankUpdate(x);
        }
        partials[ci] = std::move(part);
      },
      mode);

  long kept = 0;
  Vec sum = Vec::Zero(d);
  Mat outer = Mat::Zero(d, d);
  for (const Partial& part : partials) {
    kept += part.kept;
    sum += part.sum;
    outer += part.outer;
  }
  if (kept < 2)
    throw Error(ErrorKind::Internal,
                "fewer than two draws retained; loosen the rejection tolerance");
  outer = Mat(outer.selfadjointView<Eigen::Lower>());

  SampleMoments sm;
  sm.n_kept = kept;
  sm.mean = sum / static_cast<double>(kept);
  sm.cov = (outer - kept * sm.mean * sm.mean.transpose()) / (kept - 1.0);
  sm.mean_se = (sm.cov.diagonal() / static_cast<double>(kept)).cwiseSqrt();
  sm.cov_se.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      sm.cov_se(i, j) = std::sqrt((sm.cov(i, i) * sm.cov(j, j) +
                                   sm.cov(i, j) * sm.cov(i, j)) /
                                  static_cast<double>(kept));
  return sm;
}

}  // namespace bt::oracle

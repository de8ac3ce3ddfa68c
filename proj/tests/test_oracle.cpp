#include <doctest.h>

#include <cmath>

#include "bt/errors.hpp"
#include "bt/oracle.hpp"
#include "bt/posterior.hpp"
#include "bt/prior_builders.hpp"
#include "test_helpers.hpp"

using namespace bt;
using namespace bt::testing;

TEST_CASE("quadrature reproduces the scalar fixture") {
  const EventStudy es = scalar_fixture_study();
  const GaussianPrior prior = scalar_fixture_prior();
  const auto q = oracle::grid_posterior_oracle(es, prior, 8.0, 240);
  CHECK(std::abs(q.mean[0] - 1.75) < 1e-3);
  CHECK(std::abs(q.cov(0, 0) - 1.875) < 1e-3);
}

TEST_CASE("quadrature refinement self-check") {
  const EventStudy es = scalar_fixture_study();
  const GaussianPrior prior = scalar_fixture_prior();
  const auto coarse = oracle::grid_posterior_oracle(es, prior, 8.0, 150, 1e-2);
  const auto fine = oracle::grid_posterior_oracle(es, prior, 8.0, 300, 1e-2);
  CHECK(std::abs(coarse.mean[0] - fine.mean[0]) < 1e-4);
  CHECK(std::abs(coarse.cov(0, 0) - fine.cov(0, 0)) < 5e-4);
}

TEST_CASE("quadrature under a near-point prior approaches the GLS correction") {
  Mat sigma(2, 2);
  sigma << 1.0, 0.4, 0.4, 1.0;
  const EventStudy es = make_event_study({1.0}, {2.0}, sigma);
  GaussianPrior prior;
  prior.mean = Vec::Zero(2);
  prior.cov = 1e-8 * Mat::Identity(2, 2);
  const auto q = oracle::grid_posterior_oracle(es, prior, 8.0, 300);
  const double expected = 2.0 - 0.4 * 1.0;  // beta_post - Gamma_S' beta_pre
  CHECK(std::abs(q.mean[0] - expected) < 1e-3);
}

TEST_CASE("quadrature guards its own validity") {
  const EventStudy es = make_event_study({1.0, 0.5, 0.2}, {2.0, 1.0},
                                         Mat::Identity(5, 5));
  GaussianPrior prior;
  prior.mean = Vec::Zero(5);
  prior.cov = Mat::Identity(5, 5);
  // 3 + 2*2 = 7 integration dims
  CHECK_THROWS_AS(oracle::grid_posterior_oracle(es, prior), Error);

  // a very coarse grid must be rejected, not silently accepted
  try {
    oracle::grid_posterior_oracle(scalar_fixture_study(), scalar_fixture_prior(),
                                  8.0, 16, 1e-4);
    FAIL("expected GridTooCoarse");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridTooCoarse);
  }
}

TEST_CASE("proper-prior limit approaches the flat-tau fixture") {
  const EventStudy es = scalar_fixture_study();
  const GaussianPrior prior = scalar_fixture_prior();
  const auto lim = oracle::proper_prior_limit_oracle(es, prior, 1e8);
  CHECK(std::abs(lim.mean[0] - 1.75) < 1e-6);
  CHECK(std::abs(lim.cov(0, 0) - 1.875) < 1e-5);
}

TEST_CASE("proper-prior limit error decreases in kappa") {
  const EventStudy es = scalar_fixture_study();
  const GaussianPrior prior = scalar_fixture_prior();
  double prev = 1e300;
  for (double kappa : {1e2, 1e4, 1e6, 1e8}) {
    const auto lim = oracle::proper_prior_limit_oracle(es, prior, kappa);
    const double err = std::abs(lim.mean[0] - 1.75) + std::abs(lim.cov(0, 0) - 1.875);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("kappa indistinguishable from zero is rejected") {
  try {
    oracle::proper_prior_limit_oracle(scalar_fixture_study(), scalar_fixture_prior(),
                                      1e-30);
    FAIL("expected SingularCovariance");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularCovariance);
  }
}

TEST_CASE("limit oracle agrees with quadrature at kappa = 1e6") {
  Rng rng(5150, 0);
  const RandomInstance inst = random_instance(5150, 3, 2, 1);
  const auto lim = oracle::proper_prior_limit_oracle(inst.es, inst.prior, 1e6);
  const auto quad = oracle::grid_posterior_oracle(inst.es, inst.prior, 8.0, 140);
  CHECK((lim.mean - quad.mean).cwiseAbs().maxCoeff() < 1e-3);
  CHECK((lim.cov - quad.cov).cwiseAbs().maxCoeff() < 2e-3);
}

TEST_CASE("mle grid oracle finds the noiseless optimum") {
  // beta_pre chosen so M beta_pre = (1, 2, 3)
  const EventStudy es =
      make_event_study({-6.0, -5.0, -3.0}, {0.0}, 1e-12 * Mat::Identity(4, 4));
  const auto res =
      oracle::mle_grid_oracle(es, {0.0, 4.0}, {0.0, 2.0}, 400);
  CHECK(std::abs(res.mu_best - 2.0) <= res.cell_mu + 1e-12);
  CHECK(std::abs(std::sqrt(res.sigma2_best) - std::sqrt(2.0 / 3.0)) <=
        res.cell_sigma + 1e-12);
}

TEST_CASE("mle grid argmax beats random probes") {
  Rng rng(808, 0);
  const EventStudy es = make_event_study({0.3, 0.9, 1.1, 1.8, 2.4, 3.1}, {1.0},
                                         0.04 * Mat::Identity(7, 7));
  const auto res = oracle::mle_grid_oracle(es, {-2.0, 2.0}, {0.0, 3.0}, 400);

  // Off-grid probes can beat the grid argmax only by the within-cell
  // variation of the likelihood, which is tiny at this resolution.
  const Mat m = differencing_matrix(6);
  const Vec w = m * es.beta_pre;
  const Mat sw = m * es.sigma.topLeftCorner(6, 6) * m.transpose();
  for (int probe = 0; probe < 10000; ++probe) {
    const double mu = -2.0 + 4.0 * rng.uniform();
    const double sigma = 3.0 * rng.uniform();
    const Mat omega = sw + sigma * sigma * Mat::Identity(6, 6);
    const Eigen::LLT<Mat> llt(omega);
    const Vec r = w - mu * Vec::Ones(6);
    const double quad = r.dot(llt.solve(r));
    double logdet = 0.0;
    for (int k = 0; k < 6; ++k) logdet += 2.0 * std::log(llt.matrixL()(k, k));
    const double ll = -0.5 * (logdet + quad + 6 * std::log(2 * M_PI));
    REQUIRE(res.loglik_best >= ll - 1e-2);
  }
}

TEST_CASE("mc prior moments are bitwise reproducible") {
  const auto a = oracle::mc_prior_moments(RandomWalkSpec{0.1, 1.0}, 2, 2, 20000, 77);
  const auto b = oracle::mc_prior_moments(RandomWalkSpec{0.1, 1.0}, 2, 2, 20000, 77);
  CHECK(a.mean == b.mean);
  CHECK(a.cov == b.cov);
  const auto c = oracle::mc_prior_moments(RandomWalkSpec{0.1, 1.0}, 2, 2, 20000, 78);
  CHECK(a.mean != c.mean);
}

TEST_CASE("mc prior moments: known random walk covariance entry") {
  const auto mc = oracle::mc_prior_moments(RandomWalkSpec{0.0, 1.0}, 1, 2, 200000, 3);
  // cov(delta_1, delta_2) = 1
  CHECK(std::abs(mc.cov(1, 2) - 1.0) < 3.0 * mc.cov_se(1, 2));
}

TEST_CASE("oracle triangle on small random instances") {
  int done = 0;
  for (std::uint64_t stream = 0; done < 6; ++stream) {
    const RandomInstance inst = random_instance(4242, stream, 2, 1);
    if (inst.es.n_pre() + 2 * inst.es.n_post() > 4) continue;
    ++done;
    const int n_pts = inst.es.n_pre() + 2 * inst.es.n_post() == 4 ? 72 : 200;
    const auto quad =
        oracle::grid_posterior_oracle(inst.es, inst.prior, 6.5, n_pts, 2e-3);
    const auto lim = oracle::proper_prior_limit_oracle(inst.es, inst.prior, 1e8);
    const auto info = summarize(
        posterior_information_form(inst.es, inst.prior, TauPrior::flat()),
        inst.es.post_periods);
    CHECK((quad.mean - lim.mean).cwiseAbs().maxCoeff() < 2e-3);
    CHECK((quad.cov - lim.cov).cwiseAbs().maxCoeff() < 2e-3);
    CHECK((info.tau_mean - lim.mean).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((info.tau_cov - lim.cov).cwiseAbs().maxCoeff() < 1e-6);
  }
}

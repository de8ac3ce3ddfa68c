#include <doctest.h>

#include <cmath>

#include "bt/errors.hpp"
#include "bt/posterior.hpp"
#include "bt/prior_builders.hpp"
#include "test_helpers.hpp"

using namespace bt;
using namespace bt::testing;

TEST_CASE("closed form solves the scalar fixture exactly") {
  const PosteriorSummary ps =
      posterior_closed_form(scalar_fixture_study(), scalar_fixture_prior());
  // Intermediates fixed by the conditional-mean algebra; the headline
  // moments were first confirmed by the quadrature oracle.
  CHECK(ps.beta_pre_star[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ps.delta_post_mean[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(ps.tau_mean[0] == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(ps.tau_cov(0, 0) == doctest::Approx(1.875).epsilon(1e-12));
}

TEST_CASE("no cross-covariances means no correction") {
  Mat sigma = Mat::Identity(4, 4);
  sigma(0, 0) = 2.0;
  const EventStudy es = make_event_study({1.0, -0.5}, {2.0, 0.7}, sigma);
  GaussianPrior prior;
  prior.mean = Vec::Zero(4);
  prior.cov = Mat::Identity(4, 4);
  prior.cov(0, 1) = prior.cov(1, 0) = 0.5;  // pre-pre correlation only
  const PosteriorSummary ps = posterior_closed_form(es, prior);
  CHECK(ps.tau_mean == es.beta_post);
}

TEST_CASE("a diffuse independent prior learns nothing about delta_post") {
  GaussianPrior prior;
  prior.mean = Vec::Zero(2);
  prior.cov = 1e8 * Mat::Identity(2, 2);
  const PosteriorSummary ps = posterior_closed_form(scalar_fixture_study(), prior);
  CHECK(std::abs(ps.beta_pre_star[0] - 1.0) < 1e-6);
  CHECK(std::abs(ps.tau_mean[0] - 2.0) < 1e-6);
}

TEST_CASE("information form marginal matches the closed form on the fixture") {
  const auto joint = posterior_information_form(
      scalar_fixture_study(), scalar_fixture_prior(), TauPrior::flat());
  CHECK(std::abs(joint.tau_mean()[0] - 1.75) < 1e-10);
  CHECK(std::abs(joint.tau_cov()(0, 0) - 1.875) < 1e-10);
  CHECK(std::abs(joint.delta_pre_mean()[0] - 0.5) < 1e-10);
  CHECK(std::abs(joint.delta_post_mean()[0] - 0.25) < 1e-10);
}

TEST_CASE("path equivalence on random PD instances") {
  for (std::uint64_t stream = 0; stream < 100; ++stream) {
    const RandomInstance inst = random_instance(31337, stream, 4, 4);
    const PosteriorSummary cf = posterior_closed_form(inst.es, inst.prior);
    const PosteriorSummary in = summarize(
        posterior_information_form(inst.es, inst.prior, TauPrior::flat()),
        inst.es.post_periods);
    CHECK(rel_err(cf.tau_mean, in.tau_mean) < 1e-8);
    CHECK(rel_err(cf.tau_cov, in.tau_cov) < 1e-8);
    CHECK(rel_err(cf.beta_pre_star, in.beta_pre_star) < 1e-8);
    CHECK(rel_err(cf.delta_post_mean, in.delta_post_mean) < 1e-8);
  }
}

TEST_CASE("a nearly flat Gaussian tau prior converges to the flat answer") {
  const EventStudy es = scalar_fixture_study();
  const GaussianPrior prior = scalar_fixture_prior();
  const auto flat = posterior_information_form(es, prior, TauPrior::flat());
  double prev = 1e300;
  for (double kappa : {1e2, 1e4, 1e6, 1e8}) {
    const auto prop = posterior_information_form(
        es, prior, TauPrior::gaussian(Vec::Zero(1), kappa * Mat::Identity(1, 1)));
    const double err =
        std::abs(prop.tau_mean()[0] - flat.tau_mean()[0]) / flat.tau_mean()[0] +
        std::abs(prop.tau_cov()(0, 0) - flat.tau_cov()(0, 0)) / flat.tau_cov()(0, 0);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-4);

  const auto prop = posterior_information_form(
      es, prior, TauPrior::gaussian(Vec::Zero(1), 1e8 * Mat::Identity(1, 1)));
  CHECK(std::abs(prop.tau_mean()[0] - flat.tau_mean()[0]) < 1e-5 * 1.75);
}

TEST_CASE("a dogmatic tau prior dominates the data") {
  const auto joint = posterior_information_form(
      scalar_fixture_study(), scalar_fixture_prior(),
      TauPrior::gaussian(Vec::Constant(1, 2.0), 1e-10 * Mat::Identity(1, 1)));
  CHECK(std::abs(joint.tau_mean()[0] - 2.0) < 1e-6);
  CHECK(joint.tau_cov()(0, 0) < 1e-9);
}

TEST_CASE("shifting the post prior mean shifts tau_mean by the negative") {
  for (std::uint64_t stream = 0; stream < 20; ++stream) {
    const RandomInstance inst = random_instance(555, stream, 3, 3);
    const PosteriorSummary base = posterior_closed_form(inst.es, inst.prior);
    GaussianPrior shifted = inst.prior;
    const double c = 0.7;
    shifted.mean.tail(inst.es.n_post()).array() += c;
    const PosteriorSummary moved = posterior_closed_form(inst.es, shifted);
    CHECK((moved.tau_mean - (base.tau_mean.array() - c).matrix())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK(rel_err(moved.tau_cov, base.tau_cov) < 1e-12);
  }
}

TEST_CASE("prior concentration approaches the GLS-style correction") {
  Mat sigma(3, 3);
  sigma << 1.0, 0.3, 0.2, 0.3, 1.0, 0.1, 0.2, 0.1, 1.0;
  const EventStudy es = make_event_study({1.0, 0.4}, {2.0}, sigma);
  GaussianPrior prior;
  prior.mean = Vec::Zero(3);
  prior.cov = 1e-10 * Mat::Identity(3, 3);
  const PosteriorSummary ps = posterior_closed_form(es, prior);

  const SigmaBlocks s = split_covariance(es);
  const Vec expected =
      es.beta_post - s.pre_post.transpose() * s.pre.llt().solve(es.beta_pre);
  CHECK(std::abs(ps.tau_mean[0] - expected[0]) < 1e-8);

  // the exact-zero prior takes the dedicated path and agrees
  const PosteriorSummary point = posterior_point_prior(es, Vec::Zero(3));
  CHECK(std::abs(point.tau_mean[0] - expected[0]) < 1e-14);
  CHECK(std::abs(point.tau_cov(0, 0) - ps.tau_cov(0, 0)) < 1e-8);
}

TEST_CASE("posterior_for_prior dispatches on a zero covariance") {
  const EventStudy es = scalar_fixture_study();
  GaussianPrior point;
  point.mean = Vec::Zero(2);
  point.mean << 0.5, -0.25;
  point.cov = Mat::Zero(2, 2);
  const PosteriorSummary ps = posterior_for_prior(es, point);
  CHECK(ps.tau_mean[0] == doctest::Approx(2.0 + 0.25));  // sigma is diagonal
  CHECK(ps.tau_cov(0, 0) == doctest::Approx(1.0));
  CHECK(ps.delta_post_mean[0] == -0.25);
}

TEST_CASE("tau_cov stays symmetric PSD on random instances") {
  for (std::uint64_t stream = 0; stream < 40; ++stream) {
    const RandomInstance inst = random_instance(8080, stream, 4, 4);
    const PosteriorSummary ps = posterior_closed_form(inst.es, inst.prior);
    CHECK((ps.tau_cov - ps.tau_cov.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Mat> eig(ps.tau_cov, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() >
          -1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff()));
  }
}

TEST_CASE("singular priors are rejected with the right kind") {
  const EventStudy es = scalar_fixture_study();
  GaussianPrior singular;
  singular.mean = Vec::Zero(2);
  singular.cov = Mat::Zero(2, 2);
  singular.cov(1, 1) = 1.0;  // pre block singular
  try {
    posterior_closed_form(es, singular);
    FAIL("expected SingularPrior");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularPrior);
  }
  try {
    posterior_information_form(es, singular, TauPrior::flat());
    FAIL("expected SingularPrior");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularPrior);
  }
}

TEST_CASE("credible sets") {
  PosteriorSummary ps;
  ps.post_periods = {1};
  ps.tau_mean = Vec::Zero(1);
  ps.tau_cov = Mat::Identity(1, 1);
  ps.delta_post_mean = Vec::Zero(1);
  ps.beta_pre_star = Vec::Zero(1);

  SUBCASE("standard normal 95%") {
    const auto intervals = credible_set(ps, 0.95);
    CHECK(std::abs(intervals[0].lower + 1.959964) < 1e-6);
    CHECK(std::abs(intervals[0].upper - 1.959964) < 1e-6);
  }
  SUBCASE("fixture-derived interval") {
    ps.tau_mean[0] = 1.75;
    ps.tau_cov(0, 0) = 1.875;
    const auto intervals = credible_set(ps, 0.95);
    CHECK(std::abs(intervals[0].lower - (1.75 - 1.959964 * 1.369306)) < 1e-5);
    CHECK(std::abs(intervals[0].upper - (1.75 + 1.959964 * 1.369306)) < 1e-5);
  }
  SUBCASE("zero variance degenerates to a point") {
    ps.tau_mean[0] = 0.3;
    ps.tau_cov(0, 0) = 0.0;
    const auto intervals = credible_set(ps, 0.95);
    CHECK(intervals[0].lower == 0.3);
    CHECK(intervals[0].upper == 0.3);
  }
  SUBCASE("bad levels throw") {
    CHECK_THROWS_AS(credible_set(ps, 0.0), Error);
    CHECK_THROWS_AS(credible_set(ps, 1.0), Error);
    CHECK_THROWS_AS(credible_set(ps, -2.0), Error);
  }
  SUBCASE("intervals bracket the mean and are attached by with_intervals") {
    const PosteriorSummary full = with_intervals(ps, 0.9);
    REQUIRE(full.intervals.size() == 1);
    CHECK(full.intervals[0].lower <= full.tau_mean[0]);
    CHECK(full.tau_mean[0] <= full.intervals[0].upper);
    CHECK(full.intervals[0].level == 0.9);
  }
}

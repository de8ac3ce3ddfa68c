#include <doctest.h>

#include <cmath>

#include "bt/errors.hpp"
#include "bt/prior_builders.hpp"
#include "bt/simulator.hpp"
#include "test_helpers.hpp"

using namespace bt;
using namespace bt::testing;

namespace {

DgpSpec basic_dgp() {
  DgpSpec dgp;
  dgp.prior_spec = RandomWalkSpec{0.1, 0.25};
  dgp.n_pre = 4;
  dgp.n_post = 3;
  dgp.tau_post_true = Vec::Constant(3, 1.0);
  dgp.sigma = 0.04 * Mat::Identity(7, 7);
  dgp.seed = 99;
  return dgp;
}

}  // namespace

TEST_CASE("noiseless dgp reproduces tau exactly") {
  DgpSpec dgp;
  dgp.prior_spec = RandomWalkSpec{0.0, 0.0};
  dgp.n_pre = 3;
  dgp.n_post = 1;
  dgp.tau_post_true = Vec::Constant(1, 1.0);
  dgp.sigma = 1e-18 * Mat::Identity(4, 4);
  dgp.seed = 1;
  const EventStudy es = simulate_event_study(dgp, 0);
  CHECK(es.beta_pre.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::abs(es.beta_post[0] - 1.0) < 1e-8);
}

TEST_CASE("same seed and index give the same study") {
  const DgpSpec dgp = basic_dgp();
  const EventStudy a = simulate_event_study(dgp, 7);
  const EventStudy b = simulate_event_study(dgp, 7);
  CHECK(a.beta_pre == b.beta_pre);
  CHECK(a.beta_post == b.beta_post);
  const EventStudy c = simulate_event_study(dgp, 8);
  CHECK(a.beta_pre != c.beta_pre);
}

TEST_CASE("simulated beta_hat moments match sigma plus the prior law") {
  DgpSpec dgp;
  dgp.prior_spec = RandomWalkSpec{0.0, 0.5};
  dgp.n_pre = 2;
  dgp.n_post = 2;
  dgp.tau_post_true = Vec::Zero(2);
  Mat sigma(4, 4);
  sigma << 1.0, 0.2, 0.1, 0.0, 0.2, 1.0, 0.0, 0.1, 0.1, 0.0, 1.0, 0.3, 0.0, 0.1,
      0.3, 1.0;
  dgp.sigma = sigma;
  dgp.seed = 1234;

  const long n = 100000;
  Vec sum = Vec::Zero(4);
  Mat outer = Mat::Zero(4, 4);
  for (long i = 0; i < n; ++i) {
    const EventStudy es = simulate_event_study(dgp, i);
    Vec b(4);
    b << es.beta_pre, es.beta_post;
    sum += b;
    outer += b * b.transpose();
  }
  const Vec mean = sum / n;
  const Mat cov = outer / n - mean * mean.transpose();
  const Mat expected =
      sigma + materialize_prior(dgp.prior_spec, 2, 2).cov;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double se = std::sqrt((expected(i, i) * expected(j, j) +
                                   expected(i, j) * expected(i, j)) /
                                  n);
      CHECK(std::abs(cov(i, j) - expected(i, j)) < 3.5 * se);
    }
}

TEST_CASE("method name round trip") {
  for (const char* name : {"bayes_known_prior", "eb", "hierarchical", "ols"})
    CHECK(to_string(parse_method(name)) == name);
  try {
    parse_method("mcmc");
    FAIL("expected BadConfig");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BadConfig);
    CHECK(e.exit_code() == 3);
  }
}

TEST_CASE("ols coverage is nominal when parallel trends holds") {
  DgpSpec dgp = basic_dgp();
  dgp.prior_spec = RandomWalkSpec{0.0, 0.0};  // no violations
  const CoverageReport report =
      coverage_experiment(dgp, Method::Ols, 2000, 0.95);
  for (const PeriodCoverage& pc : report.periods) {
    CHECK(pc.coverage > 0.93);
    CHECK(pc.coverage < 0.97);
    CHECK(std::abs(pc.mean_bias) < 0.02);
  }
}

TEST_CASE("ols coverage collapses under a deterministic violation") {
  DgpSpec dgp = basic_dgp();
  dgp.prior_spec = RandomWalkSpec{0.5, 0.0};
  dgp.sigma = 0.01 * Mat::Identity(7, 7);
  const CoverageReport report = coverage_experiment(dgp, Method::Ols, 500, 0.95);
  CHECK(report.periods.back().coverage == 0.0);
}

TEST_CASE("known-prior Bayes stays calibrated where OLS fails") {
  DgpSpec dgp = basic_dgp();
  dgp.prior_spec = RandomWalkSpec{0.5, 0.0};
  dgp.sigma = 0.01 * Mat::Identity(7, 7);
  const CoverageReport report =
      coverage_experiment(dgp, Method::BayesKnownPrior, 1000, 0.95);
  for (const PeriodCoverage& pc : report.periods) {
    CHECK(pc.coverage > 0.93);
    CHECK(pc.coverage < 0.97);
  }
}

TEST_CASE("eb method coverage runs end to end") {
  DgpSpec dgp = basic_dgp();
  dgp.n_pre = 8;
  dgp.sigma = 0.04 * Mat::Identity(11, 11);
  dgp.tau_post_true = Vec::Constant(3, 0.5);
  const CoverageReport report = coverage_experiment(dgp, Method::Eb, 200, 0.95);
  for (const PeriodCoverage& pc : report.periods) {
    CHECK(pc.coverage > 0.5);  // plug-in intervals are roughly calibrated here
    CHECK(pc.mean_length > 0.0);
  }
}

TEST_CASE("coverage experiment is independent of execution mode") {
  const DgpSpec dgp = basic_dgp();
  const CoverageReport serial =
      coverage_experiment(dgp, Method::BayesKnownPrior, 300, 0.95, ExecMode::Serial);
  const CoverageReport parallel = coverage_experiment(
      dgp, Method::BayesKnownPrior, 300, 0.95, ExecMode::Parallel);
  REQUIRE(serial.periods.size() == parallel.periods.size());
  for (std::size_t i = 0; i < serial.periods.size(); ++i) {
    CHECK(serial.periods[i].coverage == parallel.periods[i].coverage);
    CHECK(serial.periods[i].mean_length == parallel.periods[i].mean_length);
    CHECK(serial.periods[i].mean_bias == parallel.periods[i].mean_bias);
  }
}

TEST_CASE("replication failures abort with the replication index") {
  DgpSpec dgp = basic_dgp();
  dgp.n_pre = 1;  // eb needs two pre periods, so every replication fails
  dgp.sigma = 0.04 * Mat::Identity(4, 4);
  try {
    coverage_experiment(dgp, Method::Eb, 100, 0.95);
    FAIL("expected a propagated failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("replication 0:") != std::string::npos);
    CHECK(e.kind() == ErrorKind::TooFewPeriods);
  }
}

TEST_CASE("dgp validation errors") {
  DgpSpec dgp = basic_dgp();
  dgp.tau_post_true = Vec::Zero(2);
  CHECK_THROWS_AS(validate_dgp(dgp), Error);
  dgp = basic_dgp();
  dgp.sigma = Mat::Zero(7, 7);
  CHECK_THROWS_AS(validate_dgp(dgp), Error);
  dgp = basic_dgp();
  dgp.prior_spec = Ar1Spec{1.5, 1.0};
  CHECK_THROWS_AS(validate_dgp(dgp), Error);
  CHECK_THROWS_AS(coverage_experiment(basic_dgp(), Method::Ols, 50, 0.95), Error);
}

TEST_CASE("mle consistency experiment with zero true variance") {
  const auto rows =
      mle_consistency_experiment(0.2, 0.0, 1e-6, {5, 10}, 60, 123);
  REQUIRE(rows.size() == 2);
  for (const ConsistencyRow& row : rows) CHECK(row.median_abs_err_sigma2 < 1e-6);
}

TEST_CASE("mle consistency errors shrink with more pre periods") {
  const auto rows =
      mle_consistency_experiment(-0.24, 0.3721, 1e-4, {8, 32}, 60, 2025);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].median_abs_err_mu < rows[0].median_abs_err_mu);
  CHECK(rows[1].median_abs_err_sigma2 < rows[0].median_abs_err_sigma2);
}

TEST_CASE("consistency experiment validates its arguments") {
  CHECK_THROWS_AS(mle_consistency_experiment(0, 1, 1, {}, 60, 1), Error);
  CHECK_THROWS_AS(mle_consistency_experiment(0, 1, 1, {10, 5}, 60, 1), Error);
}

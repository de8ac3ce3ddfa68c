#include <doctest.h>

#include <cmath>

#include "bt/errors.hpp"
#include "bt/io.hpp"
#include "test_helpers.hpp"

using namespace bt;
using namespace bt::testing;

TEST_CASE("event study json round trip is exact") {
  for (std::uint64_t stream = 0; stream < 10; ++stream) {
    const RandomInstance inst = random_instance(321, stream, 3, 3);
    const std::string text = io::event_study_to_json(inst.es);
    const EventStudy back = io::parse_event_study_json(text);
    CHECK(back.pre_periods == inst.es.pre_periods);
    CHECK(back.post_periods == inst.es.post_periods);
    CHECK(back.beta_pre == inst.es.beta_pre);
    CHECK(back.beta_post == inst.es.beta_post);
    CHECK(back.sigma == inst.es.sigma);
  }
}

TEST_CASE("event study json schema errors carry field paths") {
  try {
    io::parse_event_study_json(R"({"pre_periods":[-1]})");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("post_periods") != std::string::npos);
  }
  try {
    io::parse_event_study_json(
        R"({"pre_periods":[-1],"post_periods":[1],"beta_pre":[0.1],
            "beta_post":[0.2],"sigma":[[1,0],["x",1]]})");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("$.sigma[1][0]") != std::string::npos);
  }
  CHECK_THROWS_AS(io::parse_event_study_json("not json"), Error);
}

TEST_CASE("event study csv ingestion") {
  const std::string est =
      "period,estimate\n-2,0.1\n-1,0.2\n1,1.5\n2,1.7\n";
  const std::string cov =
      "1,0,0,0\n0,1,0,0\n0,0,1,0\n0,0,0,1\n";
  const EventStudy es = io::parse_event_study_csv(est, cov);
  CHECK(es.n_pre() == 2);
  CHECK(es.n_post() == 2);
  CHECK(es.beta_pre[0] == 0.1);
  CHECK(es.beta_post[1] == 1.7);
  CHECK(es.sigma == Mat::Identity(4, 4));

  CHECK_THROWS_AS(io::parse_event_study_csv("period\n-1,0.1\n", cov), Error);
  try {
    io::parse_event_study_csv("period,estimate\n-1,abc\n1,2\n", "1,0\n0,1\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("prior spec json round trip") {
  const PriorSpec rw = io::parse_prior_spec(R"({"type":"random_walk","mu":0.1,"sigma2":0.5})");
  CHECK(std::get<RandomWalkSpec>(rw).mu == 0.1);
  const PriorSpec ar = io::parse_prior_spec(R"({"type":"ar1","rho":0.5,"sigma_eps2":0.75})");
  CHECK(std::get<Ar1Spec>(ar).rho == 0.5);
  const PriorSpec ex = io::parse_prior_spec(
      R"({"type":"explicit","mean":[0,0],"cov":[[1,0.5],[0.5,1]]})");
  CHECK(std::get<GaussianPrior>(ex).cov(0, 1) == 0.5);

  for (const PriorSpec& spec : {rw, ar, ex}) {
    const PriorSpec back = io::parse_prior_spec(io::prior_spec_to_json(spec));
    CHECK(back.index() == spec.index());
  }
  CHECK_THROWS_AS(io::parse_prior_spec(R"({"type":"cauchy"})"), Error);
}

TEST_CASE("hyper config parsing") {
  const HyperPriorGrid grid = io::parse_hyper_config(
      R"({"mu":{"min":-1,"max":1,"n":5},"sigma":{"min":0,"max":2,"n":3},"weights":"uniform"})");
  CHECK(grid.mu_grid.size() == 5);
  CHECK(grid.sigma_grid.size() == 3);
  CHECK_THROWS_AS(io::parse_hyper_config(R"({"mu":{"min":-1,"max":1,"n":5}})"), Error);
  CHECK_THROWS_AS(
      io::parse_hyper_config(
          R"({"mu":{"min":-1,"max":1,"n":5},"sigma":{"min":0,"max":2,"n":3},"weights":"jeffreys"})"),
      Error);
}

TEST_CASE("experiment config parsing with field paths") {
  const std::string good = R"({
    "experiment": "coverage", "method": "ols", "n_reps": 500, "level": 0.9,
    "seed": 7,
    "dgp": {"t_pre": 2, "t_post": 1,
            "prior": {"type": "random_walk", "mu": 0, "sigma2": 0.1},
            "tau_true": [1.0], "sigma": {"diag": 0.01}}})";
  const auto config = io::parse_experiment_config(good);
  const auto& cov = std::get<io::CoverageConfig>(config);
  CHECK(cov.method == Method::Ols);
  CHECK(cov.n_reps == 500);
  CHECK(cov.dgp.seed == 7);
  CHECK(cov.dgp.sigma(0, 0) == 0.01);

  try {
    io::parse_experiment_config(R"({"experiment":"coverage","method":"ols",
      "n_reps":500,"seed":1,"dgp":{"t_pre":2,"t_post":1,
      "prior":{"type":"random_walk","mu":0,"sigma2":0.1},
      "tau_true":[1.0],"sigma":"nope"}})");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("$.dgp.sigma") != std::string::npos);
    CHECK(e.exit_code() == 3);
  }

  const auto cons = io::parse_experiment_config(
      R"({"experiment":"mle_consistency","true_mu":-0.24,"true_sigma2":0.3721,
          "sigma_scale":1e-4,"t_pre_list":[10,40],"n_reps":50,"seed":3})");
  CHECK(std::get<io::ConsistencyConfig>(cons).t_pre_list.size() == 2);

  CHECK_THROWS_AS(io::parse_experiment_config(R"({"experiment":"banana"})"), Error);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.0, 1.75, -0.9337912155757357, 1e-12, 123456.789}) {
    const std::string s = io::format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(io::format_double(1.75) == "1.75");
  CHECK(io::format_double(2.0) == "2");
}

TEST_CASE("hashes are stable and content sensitive") {
  const std::string h = io::hash_hex("hello");
  CHECK(h.substr(0, 8) == "fnv1a64:");
  CHECK(h.size() == 8 + 16);
  CHECK(io::hash_hex("hello") == h);
  CHECK(io::hash_hex("hellp") != h);
}

TEST_CASE("posterior csv layout") {
  const EventStudy es = scalar_fixture_study();
  const auto rows = io::ols_rows(es, 0.95);
  PosteriorSummary ps;
  ps.post_periods = {1};
  ps.tau_mean = Vec::Constant(1, 1.75);
  ps.tau_cov = Mat::Constant(1, 1, 1.875);
  ps.delta_post_mean = Vec::Constant(1, 0.25);
  ps.beta_pre_star = Vec::Constant(1, 0.5);
  ps = with_intervals(std::move(ps), 0.95);

  const std::string csv = io::posterior_csv("fnv1a64:0123456789abcdef", rows, ps);
  CHECK(csv.find("# input_hash=fnv1a64:0123456789abcdef") == 0);
  CHECK(csv.find("period,ols_estimate,ols_lo,ols_hi,bayes_mean,bayes_lo,bayes_hi\n") !=
        std::string::npos);
  // row: 1, 2, 2 -+ 1.959964, 1.75, 1.75 -+ 1.959964*sqrt(1.875)
  CHECK(csv.find("\n1,2,0.040036015459") != std::string::npos);
  CHECK(csv.find(",3.959963984540") != std::string::npos);
  CHECK(csv.find(",1.75,-0.93379121557") != std::string::npos);
  CHECK(csv.find(",4.43379121557") != std::string::npos);
}

TEST_CASE("svg emission contains both series") {
  const EventStudy es = scalar_fixture_study();
  const auto rows = io::ols_rows(es, 0.95);
  PosteriorSummary ps;
  ps.post_periods = {1};
  ps.tau_mean = Vec::Constant(1, 1.75);
  ps.tau_cov = Mat::Constant(1, 1, 1.875);
  ps.delta_post_mean = Vec::Constant(1, 0.25);
  ps.beta_pre_star = Vec::Constant(1, 0.5);
  ps = with_intervals(std::move(ps), 0.95);
  const std::string svg = io::event_study_svg(es, rows, ps);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("posterior") != std::string::npos);
  CHECK(svg.find("OLS") != std::string::npos);
  CHECK(svg.find("circle") != std::string::npos);
}

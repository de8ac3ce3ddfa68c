// Times the parallel kernels against their serial reference and checks that
// both produce identical bytes. Workloads are sized to run in seconds:
//
//   bt_bench [n_reps] [grid_n] [mc_draws]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "bt/empirical_bayes.hpp"
#include "bt/exec.hpp"
#include "bt/oracle.hpp"
#include "bt/simulator.hpp"

using namespace bt;

namespace {

using clock_type = std::chrono::steady_clock;

template <class F>
double time_ms(F&& f) {
  const auto t0 = clock_type::now();
  f();
  const auto t1 = clock_type::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-28s serial %9.1f ms   omp %9.1f ms   speedup %5.2fx   %s\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "identical" : "MISMATCH");
}

bool same_report(const CoverageReport& a, const CoverageReport& b) {
  if (a.periods.size() != b.periods.size()) return false;
  for (std::size_t i = 0; i < a.periods.size(); ++i) {
    if (std::memcmp(&a.periods[i].coverage, &b.periods[i].coverage, sizeof(double)) ||
        std::memcmp(&a.periods[i].mean_length, &b.periods[i].mean_length,
                    sizeof(double)) ||
        std::memcmp(&a.periods[i].mean_bias, &b.periods[i].mean_bias, sizeof(double)))
      return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const long n_reps = argc > 1 ? std::atol(argv[1]) : 4000;
  const int grid_n = argc > 2 ? std::atoi(argv[2]) : 61;
  const long mc_draws = argc > 3 ? std::atol(argv[3]) : 400000;

  std::printf("workers: %d (set BT_THREADS to cap)\n", worker_count());

  DgpSpec dgp;
  dgp.prior_spec = RandomWalkSpec{0.1, 0.25};
  dgp.n_pre = 6;
  dgp.n_post = 3;
  dgp.tau_post_true = Vec::Constant(3, 1.0);
  dgp.sigma = 0.05 * Mat::Identity(9, 9);
  dgp.seed = 12345;

  {
    CoverageReport serial, parallel;
    const double t_s = time_ms([&] {
      serial = coverage_experiment(dgp, Method::BayesKnownPrior, n_reps, 0.95,
                                   ExecMode::Serial);
    });
    const double t_p = time_ms([&] {
      parallel = coverage_experiment(dgp, Method::BayesKnownPrior, n_reps, 0.95,
                                     ExecMode::Parallel);
    });
    report("coverage (known prior)", t_s, t_p, same_report(serial, parallel));
  }

  {
    CoverageReport serial, parallel;
    const long reps = std::max(100L, n_reps / 10);
    const double t_s = time_ms([&] {
      serial = coverage_experiment(dgp, Method::Eb, reps, 0.95, ExecMode::Serial);
    });
    const double t_p = time_ms([&] {
      parallel = coverage_experiment(dgp, Method::Eb, reps, 0.95, ExecMode::Parallel);
    });
    report("coverage (eb)", t_s, t_p, same_report(serial, parallel));
  }

  {
    const EventStudy es = simulate_event_study(dgp, 0);
    const HyperPriorGrid grid = HyperPriorGrid::uniform(-1.0, 1.0, grid_n, 0.0, 1.5, grid_n);
    HyperPosterior serial, parallel;
    const double t_s = time_ms(
        [&] { serial = hierarchical_posterior(es, grid, 0.95, ExecMode::Serial); });
    const double t_p = time_ms(
        [&] { parallel = hierarchical_posterior(es, grid, 0.95, ExecMode::Parallel); });
    bool same = serial.post_weights == parallel.post_weights &&
                serial.mixture.tau_mean == parallel.mixture.tau_mean;
    report("hierarchical grid", t_s, t_p, same);
  }

  {
    oracle::SampleMoments serial, parallel;
    const PriorSpec spec = Ar1Spec{0.5, 0.75};
    const double t_s = time_ms([&] {
      serial = oracle::mc_prior_moments(spec, 4, 3, mc_draws, 99,
                                        oracle::Ar1Sampling::ExactConditional, 1e-2,
                                        ExecMode::Serial);
    });
    const double t_p = time_ms([&] {
      parallel = oracle::mc_prior_moments(spec, 4, 3, mc_draws, 99,
                                          oracle::Ar1Sampling::ExactConditional, 1e-2,
                                          ExecMode::Parallel);
    });
    report("mc prior moments", t_s, t_p,
           serial.mean == parallel.mean && serial.cov == parallel.cov);
  }

  {
    EventStudy es;
    es.pre_periods = {-2, -1};
    es.post_periods = {1};
    es.beta_pre = Vec::Constant(2, 0.5);
    es.beta_post = Vec::Constant(1, 1.5);
    es.sigma = Mat::Identity(3, 3);
    es = validate_event_study(std::move(es));
    GaussianPrior prior;
    prior.mean = Vec::Zero(3);
    prior.cov = Mat::Identity(3, 3);
    prior.cov(0, 1) = prior.cov(1, 0) = 0.4;
    oracle::TauMoments serial, parallel;
    const double t_s = time_ms([&] {
      serial = oracle::grid_posterior_oracle(es, prior, 7.0, 72, 1e-2,
                                             ExecMode::Serial);
    });
    const double t_p = time_ms([&] {
      parallel = oracle::grid_posterior_oracle(es, prior, 7.0, 72, 1e-2,
                                               ExecMode::Parallel);
    });
    report("quadrature oracle", t_s, t_p,
           serial.mean == parallel.mean && serial.cov == parallel.cov);
  }

  return 0;
}

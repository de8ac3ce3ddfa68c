#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bt/empirical_bayes.hpp"
#include "bt/event_study.hpp"
#include "bt/posterior.hpp"
#include "bt/prior.hpp"
#include "bt/simulator.hpp"

namespace bt::io {

// ---- files and hashing ------------------------------------------------

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

std::uint64_t fnv1a64(std::string_view bytes);
/// "fnv1a64:" + 16 lowercase hex digits.
std::string hash_hex(std::string_view bytes);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

// ---- event studies ----------------------------------------------------

/// Canonical schema:
/// { "pre_periods": [...], "post_periods": [...],
///   "beta_pre": [...], "beta_post": [...], "sigma": [[...], ...] }
/// sigma row-major, pre-then-post. The result is validated.
EventStudy parse_event_study_json(const std::string& text);
std::string event_study_to_json(const EventStudy& es);

/// CSV alternative: a long table with header "period,estimate" (periods
/// ascending, 0 absent) plus a separate header-less covariance CSV in the
/// same ordering.
EventStudy parse_event_study_csv(const std::string& estimates_csv,
                                 const std::string& covariance_csv);

// ---- configs ----------------------------------------------------------

/// {"type":"random_walk","mu":..,"sigma2":..} |
/// {"type":"ar1","rho":..,"sigma_eps2":..} |
/// {"type":"explicit","mean":[...],"cov":[[...]]}
PriorSpec parse_prior_spec(const std::string& text);
std::string prior_spec_to_json(const PriorSpec& spec);

/// {"mu":{"min":..,"max":..,"n":..},"sigma":{...},"weights":"uniform"}
HyperPriorGrid parse_hyper_config(const std::string& text);

struct CoverageConfig {
  DgpSpec dgp;
  Method method = Method::Ols;
  long n_reps = 0;
  double level = 0.95;
  std::optional<HyperPriorGrid> hyper;
};

struct ConsistencyConfig {
  double true_mu = 0.0;
  double true_sigma2 = 0.0;
  double sigma_scale = 1.0;
  std::vector<int> t_pre_list;
  long n_reps = 0;
  std::uint64_t seed = 0;
};

using ExperimentConfig = std::variant<CoverageConfig, ConsistencyConfig>;

/// {"experiment":"coverage"|"mle_consistency", ...}; schema violations are
/// reported with their field path.
ExperimentConfig parse_experiment_config(const std::string& text);

// ---- report emission --------------------------------------------------

struct OlsRow {
  int period = 0;
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

std::vector<OlsRow> ols_rows(const EventStudy& es, double level);

/// First line of every output file: "# input_hash=<hash> tool=<name>/<ver>".
std::string provenance_line(const std::string& input_hash);

std::string posterior_csv(const std::string& input_hash,
                          const std::vector<OlsRow>& ols,
                          const PosteriorSummary& ps);

std::string coverage_csv(const std::string& input_hash, const CoverageReport& report);

std::string consistency_csv(const std::string& input_hash,
                            const std::vector<ConsistencyRow>& rows);

/// Minimal static event-study figure: OLS points and whiskers for all
/// periods, posterior means and credible whiskers for post periods.
std::string event_study_svg(const EventStudy& es, const std::vector<OlsRow>& ols,
                            const PosteriorSummary& ps);

}  // namespace bt::io

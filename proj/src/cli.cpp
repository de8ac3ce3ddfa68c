#include "bt/cli.hpp"

#include <cstdint>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bt/empirical_bayes.hpp"
#include "bt/errors.hpp"
#include "bt/io.hpp"
#include "bt/oracle.hpp"
#include "bt/posterior.hpp"
#include "bt/prior_builders.hpp"
#include "bt/simulator.hpp"
#include "bt/version.hpp"

namespace bt::cli {

using nlohmann::ordered_json;

namespace {

std::string out_base(const std::string& out) {
  if (out.size() > 4 && out.substr(out.size() - 4) == ".csv")
    return out.substr(0, out.size() - 4);
  return out;
}

struct LoadedStudy {
  EventStudy es;
  std::string input_hash;
};

LoadedStudy load_study(const std::string& input_path,
                       const std::optional<std::string>& sigma_csv_path) {
  const std::string raw = io::read_file(input_path);
  LoadedStudy loaded;
  if (sigma_csv_path) {
    const std::string cov = io::read_file(*sigma_csv_path);
    loaded.es = io::parse_event_study_csv(raw, cov);
    loaded.input_hash = io::hash_hex(raw + cov);
  } else {
    loaded.es = io::parse_event_study_json(raw);
    loaded.input_hash = io::hash_hex(raw);
  }
  return loaded;
}

ordered_json provenance_json(const std::string& command,
                             const std::string& input_hash) {
  ordered_json p;
  p["tool"] = kToolName;
  p["version"] = kToolVersion;
  p["command"] = command;
  p["input_hash"] = input_hash;
  return p;
}

ordered_json vec_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json mat_json(const Mat& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json posterior_json(const PosteriorSummary& ps) {
  ordered_json j;
  j["post_periods"] = ps.post_periods;
  j["tau_mean"] = vec_json(ps.tau_mean);
  j["tau_cov"] = mat_json(ps.tau_cov);
  j["delta_post_mean"] = vec_json(ps.delta_post_mean);
  j["beta_pre_star"] = vec_json(ps.beta_pre_star);
  ordered_json intervals = ordered_json::array();
  for (const CredibleInterval& ci : ps.intervals) {
    ordered_json ij;
    ij["period"] = ci.period;
    ij["level"] = ci.level;
    ij["lower"] = ci.lower;
    ij["upper"] = ci.upper;
    intervals.push_back(std::move(ij));
  }
  j["intervals"] = std::move(intervals);
  return j;
}

ordered_json ols_json(const std::vector<io::OlsRow>& rows) {
  ordered_json a = ordered_json::array();
  for (const io::OlsRow& r : rows) {
    ordered_json j;
    j["period"] = r.period;
    j["estimate"] = r.estimate;
    j["lo"] = r.lo;
    j["hi"] = r.hi;
    a.push_back(std::move(j));
  }
  return a;
}

void emit_posterior_outputs(const std::string& command, const LoadedStudy& loaded,
                            const PosteriorSummary& ps, double level,
                            const OutputOpts& out, ordered_json extra) {
  const std::string base = out_base(out.out);
  const auto rows = io::ols_rows(loaded.es, level);

  ordered_json doc;
  doc["provenance"] = provenance_json(command, loaded.input_hash);
  doc["provenance"]["level"] = level;
  for (auto& [key, value] : extra.items()) doc[key] = value;
  doc["ols"] = ols_json(rows);
  doc["posterior"] = posterior_json(ps);

  if (out.format == "csv")
    io::write_file(base + ".csv", io::posterior_csv(loaded.input_hash, rows, ps));
  io::write_file(base + ".json", doc.dump(2) + "\n");
  if (out.svg)
    io::write_file(*out.svg, io::event_study_svg(loaded.es, rows, ps));
}

}  // namespace

void cmd_validate(const std::string& input_path,
                  const std::optional<std::string>& sigma_csv_path,
                  const std::optional<std::string>& out_path) {
  const LoadedStudy loaded = load_study(input_path, sigma_csv_path);
  if (out_path) io::write_file(*out_path, io::event_study_to_json(loaded.es));
  std::cout << "ok: t_pre=" << loaded.es.n_pre()
            << " t_post=" << loaded.es.n_post()
            << " input_hash=" << loaded.input_hash << "\n";
}

void cmd_posterior(const std::string& input_path,
                   const std::optional<std::string>& sigma_csv_path,
                   const std::string& prior_path, double level,
                   const OutputOpts& out) {
  const LoadedStudy loaded = load_study(input_path, sigma_csv_path);
  const std::string prior_text = io::read_file(prior_path);
  const PriorSpec spec = io::parse_prior_spec(prior_text);
  const GaussianPrior prior =
      materialize_prior(spec, loaded.es.n_pre(), loaded.es.n_post());
  const PosteriorSummary ps =
      with_intervals(posterior_for_prior(loaded.es, prior), level);

  ordered_json extra;
  extra["prior"] = ordered_json::parse(io::prior_spec_to_json(spec));
  emit_posterior_outputs("posterior", loaded, ps, level, out, std::move(extra));
}

void cmd_eb(const std::string& input_path,
            const std::optional<std::string>& sigma_csv_path,
            const std::string& mode,
            const std::optional<std::string>& hyper_config_path, double level,
            const OutputOpts& out) {
  const LoadedStudy loaded = load_study(input_path, sigma_csv_path);
  if (mode == "mle") {
    const EbResult r = eb_posterior(loaded.es, level);
    ordered_json extra;
    ordered_json fit;
    fit["mu_hat"] = r.fit.mu_hat;
    fit["sigma2_hat"] = r.fit.sigma2_hat;
    fit["sigma_hat"] = std::sqrt(r.fit.sigma2_hat);
    fit["log_likelihood"] = r.fit.log_likelihood;
    fit["converged"] = r.fit.converged;
    fit["boundary"] = r.fit.boundary;
    fit["n_pre"] = r.fit.n_pre;
    fit["summary"] = summary_line(r.fit);
    fit["description"] = describe(r.fit);
    extra["fit"] = std::move(fit);
    std::cout << summary_line(r.fit) << "\n";
    emit_posterior_outputs("eb", loaded, r.posterior, level, out, std::move(extra));
    return;
  }
  if (mode == "hierarchical") {
    const HyperPriorGrid grid =
        hyper_config_path
            ? io::parse_hyper_config(io::read_file(*hyper_config_path))
            : HyperPriorGrid::default_grid(loaded.es);
    const HyperPosterior hp = hierarchical_posterior(loaded.es, grid, level);
    ordered_json extra;
    ordered_json hyper;
    hyper["mu_grid"] = hp.grid.mu_grid;
    hyper["sigma_grid"] = hp.grid.sigma_grid;
    hyper["prior_weights"] = hp.grid.weights;
    hyper["post_weights"] = hp.post_weights;
    extra["hyper_posterior"] = std::move(hyper);
    emit_posterior_outputs("hb", loaded, hp.mixture, level, out, std::move(extra));
    return;
  }
  throw Error(ErrorKind::BadConfig, "unknown eb mode '" + mode + "'");
}

void cmd_simulate(const std::string& config_path,
                  const std::optional<std::uint64_t>& seed_override,
                  const OutputOpts& out) {
  const std::string raw = io::read_file(config_path);
  const std::string input_hash = io::hash_hex(raw);
  io::ExperimentConfig config = io::parse_experiment_config(raw);
  const std::string base = out_base(out.out);

  ordered_json doc;
  doc["provenance"] = provenance_json("simulate", input_hash);
  doc["provenance"]["config"] = ordered_json::parse(raw);
  if (seed_override) doc["provenance"]["seed_override"] = *seed_override;

  std::string csv;
  if (auto* cov = std::get_if<io::CoverageConfig>(&config)) {
    if (seed_override) cov->dgp.seed = *seed_override;
    const CoverageReport report = coverage_experiment(
        cov->dgp, cov->method, cov->n_reps, cov->level, ExecMode::Parallel,
        cov->hyper);
    csv = io::coverage_csv(input_hash, report);
    ordered_json rows = ordered_json::array();
    for (const PeriodCoverage& pc : report.periods) {
      ordered_json r;
      r["period"] = pc.period;
      r["coverage"] = pc.coverage;
      r["mean_length"] = pc.mean_length;
      r["bias"] = pc.mean_bias;
      r["se"] = pc.se;
      rows.push_back(std::move(r));
    }
    doc["report"]["method"] = to_string(report.method);
    doc["report"]["level"] = report.level;
    doc["report"]["n_reps"] = report.n_reps;
    doc["report"]["periods"] = std::move(rows);
  } else {
    auto& cons = std::get<io::ConsistencyConfig>(config);
    if (seed_override) cons.seed = *seed_override;
    const auto rows_out =
        mle_consistency_experiment(cons.true_mu, cons.true_sigma2, cons.sigma_scale,
                                   cons.t_pre_list, cons.n_reps, cons.seed);
    csv = io::consistency_csv(input_hash, rows_out);
    ordered_json rows = ordered_json::array();
    for (const ConsistencyRow& row : rows_out) {
      ordered_json r;
      r["t_pre"] = row.n_pre;
      r["median_abs_err_mu"] = row.median_abs_err_mu;
      r["median_abs_err_sigma2"] = row.median_abs_err_sigma2;
      rows.push_back(std::move(r));
    }
    doc["report"]["rows"] = std::move(rows);
  }

  if (out.format == "csv") io::write_file(base + ".csv", csv);
  io::write_file(base + ".json", doc.dump(2) + "\n");
}

int run(int argc, const char* const* argv) {
  CLI::App app{std::string(kToolName) +
               " - Bayesian and empirical-Bayes event-study inference"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::string input, prior_path, out, format = "csv", hyper_path, sigma_path,
              svg_path, validate_out;
  double level = 0.95;
  std::uint64_t seed = 0;
  bool have_seed = false;

  const auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--input", input, "input file (event-study JSON, or CSV with --sigma)")
        ->required();
    cmd->add_option("--sigma", sigma_path,
                    "covariance CSV when --input is an estimates CSV");
    if (needs_out) {
      cmd->add_option("--out", out, "output base path (.csv is stripped)")
          ->required();
      cmd->add_option("--format", format, "csv or json")
          ->check(CLI::IsMember({"csv", "json"}));
      cmd->add_option("--svg", svg_path, "also write a minimal SVG figure");
      cmd->add_option("--level", level, "credible/confidence level")
          ->check(CLI::Range(1e-9, 1.0 - 1e-9));
    }
  };

  CLI::App* validate = app.add_subcommand("validate", "validate an event-study file");
  add_common(validate, false);
  validate->add_option("--out", validate_out, "write the normalized JSON here");

  CLI::App* posterior =
      app.add_subcommand("posterior", "posterior under an explicit prior");
  add_common(posterior, true);
  posterior->add_option("--prior", prior_path, "prior spec JSON")->required();

  CLI::App* eb = app.add_subcommand("eb", "empirical-Bayes (random-walk MLE) posterior");
  add_common(eb, true);

  CLI::App* hb = app.add_subcommand("hb", "hierarchical-Bayes posterior");
  add_common(hb, true);
  hb->add_option("--hyper", hyper_path, "hyper-prior grid config JSON");

  CLI::App* simulate = app.add_subcommand("simulate", "run a simulation experiment");
  simulate->add_option("--input", input, "experiment config JSON")->required();
  simulate->add_option("--out", out, "output base path (.csv is stripped)")
      ->required();
  simulate->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  simulate->add_option("--seed", seed, "override the config seed")
      ->trigger_on_parse()
      ->each([&](const std::string&) { have_seed = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }

  try {
    const auto maybe = [](const std::string& s) {
      return s.empty() ? std::optional<std::string>{} : std::optional<std::string>{s};
    };
    OutputOpts oo;
    oo.out = out;
    oo.format = format;
    oo.svg = maybe(svg_path);
    if (validate->parsed()) {
      cmd_validate(input, maybe(sigma_path), maybe(validate_out));
    } else if (posterior->parsed()) {
      cmd_posterior(input, maybe(sigma_path), prior_path, level, oo);
    } else if (eb->parsed()) {
      cmd_eb(input, maybe(sigma_path), "mle", {}, level, oo);
    } else if (hb->parsed()) {
      cmd_eb(input, maybe(sigma_path), "hierarchical", maybe(hyper_path), level, oo);
    } else if (simulate->parsed()) {
      cmd_simulate(input, have_seed ? std::optional<std::uint64_t>{seed}
                                    : std::optional<std::uint64_t>{},
                   oo);
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bt::cli

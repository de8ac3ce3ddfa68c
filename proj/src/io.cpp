#include "bt/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bt/errors.hpp"
#include "bt/stats.hpp"
#include "bt/version.hpp"

namespace bt::io {

using nlohmann::ordered_json;

// ---- files and hashing ------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Internal, "cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::string_view bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---- json helpers -----------------------------------------------------

namespace {

ordered_json parse_json(const std::string& text) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

const ordered_json& member(const ordered_json& j, const char* key,
                           const std::string& path) {
  if (!j.is_object())
    throw Error(ErrorKind::ParseError, path + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end())
    throw Error(ErrorKind::ParseError, path + "." + key + ": missing field");
  return *it;
}

double number_field(const ordered_json& j, const std::string& path) {
  if (!j.is_number())
    throw Error(ErrorKind::ParseError, path + ": expected a number");
  return j.get<double>();
}

long integer_field(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer())
    throw Error(ErrorKind::ParseError, path + ": expected an integer");
  return j.get<long>();
}

Vec vec_field(const ordered_json& j, const std::string& path) {
  if (!j.is_array())
    throw Error(ErrorKind::ParseError, path + ": expected an array of numbers");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] =
        number_field(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Mat mat_field(const ordered_json& j, const std::string& path) {
  if (!j.is_array() || j.empty())
    throw Error(ErrorKind::ParseError, path + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  Mat m;
  for (std::size_t r = 0; r < rows; ++r) {
    const Vec row = vec_field(j[r], path + "[" + std::to_string(r) + "]");
    if (r == 0) {
      m.resize(rows, row.size());
    } else if (row.size() != m.cols()) {
      throw Error(ErrorKind::ParseError,
                  path + "[" + std::to_string(r) + "]: ragged row length");
    }
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

ordered_json vec_to_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json mat_to_json(const Mat& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<int> int_list_field(const ordered_json& j, const std::string& path) {
  if (!j.is_array())
    throw Error(ErrorKind::ParseError, path + ": expected an array of integers");
  std::vector<int> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(static_cast<int>(
        integer_field(j[i], path + "[" + std::to_string(i) + "]")));
  return out;
}

}  // namespace

// ---- event studies ----------------------------------------------------

EventStudy parse_event_study_json(const std::string& text) {
  const ordered_json j = parse_json(text);
  EventStudy es;
  es.pre_periods = int_list_field(member(j, "pre_periods", "$"), "$.pre_periods");
  es.post_periods = int_list_field(member(j, "post_periods", "$"), "$.post_periods");
  es.beta_pre = vec_field(member(j, "beta_pre", "$"), "$.beta_pre");
  es.beta_post = vec_field(member(j, "beta_post", "$"), "$.beta_post");
  es.sigma = mat_field(member(j, "sigma", "$"), "$.sigma");
  return validate_event_study(std::move(es));
}

std::string event_study_to_json(const EventStudy& es) {
  ordered_json j;
  j["pre_periods"] = es.pre_periods;
  j["post_periods"] = es.post_periods;
  j["beta_pre"] = vec_to_json(es.beta_pre);
  j["beta_post"] = vec_to_json(es.beta_post);
  j["sigma"] = mat_to_json(es.sigma);
  return j.dump(2) + "\n";
}

namespace {

std::vector<std::vector<std::string>> csv_rows(const std::string& text,
                                               const std::string& name) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) {
      // trim surrounding spaces
      const auto b = field.find_first_not_of(" \t");
      const auto e = field.find_last_not_of(" \t");
      fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    if (fields.empty()) fields.push_back("");
    rows.push_back(std::move(fields));
  }
  if (rows.empty())
    throw Error(ErrorKind::ParseError, name + ": file is empty");
  return rows;
}

double parse_number(const std::string& s, const std::string& where) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw Error(ErrorKind::ParseError, where + ": cannot parse number '" + s + "'");
  return v;
}

}  // namespace

EventStudy parse_event_study_csv(const std::string& estimates_csv,
                                 const std::string& covariance_csv) {
  const auto est = csv_rows(estimates_csv, "estimates csv");
  if (est[0].size() != 2 || est[0][0] != "period" || est[0][1] != "estimate")
    throw Error(ErrorKind::ParseError,
                "estimates csv line 1: expected header 'period,estimate'");
  EventStudy es;
  std::vector<double> pre, post;
  for (std::size_t r = 1; r < est.size(); ++r) {
    const std::string where = "estimates csv line " + std::to_string(r + 1);
    if (est[r].size() != 2)
      throw Error(ErrorKind::ParseError, where + ": expected 2 fields");
    const double p = parse_number(est[r][0], where);
    const int period = static_cast<int>(p);
    if (period != p)
      throw Error(ErrorKind::ParseError, where + ": period must be an integer");
    const double value = parse_number(est[r][1], where);
    if (period < 0) {
      es.pre_periods.push_back(period);
      pre.push_back(value);
    } else {
      es.post_periods.push_back(period);
      post.push_back(value);
    }
  }
  es.beta_pre = Eigen::Map<const Vec>(pre.data(), static_cast<Eigen::Index>(pre.size()));
  es.beta_post =
      Eigen::Map<const Vec>(post.data(), static_cast<Eigen::Index>(post.size()));

  const auto cov = csv_rows(covariance_csv, "covariance csv");
  const std::size_t d = cov.size();
  es.sigma.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < d; ++r) {
    const std::string where = "covariance csv line " + std::to_string(r + 1);
    if (cov[r].size() != d)
      throw Error(ErrorKind::ParseError,
                  where + ": expected " + std::to_string(d) + " fields");
    for (std::size_t c = 0; c < d; ++c)
      es.sigma(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_number(cov[r][c], where);
  }
  return validate_event_study(std::move(es));
}

// ---- configs ----------------------------------------------------------

namespace {

PriorSpec parse_prior_json(const ordered_json& j, const std::string& path) {
  const ordered_json& type = member(j, "type", path);
  if (!type.is_string())
    throw Error(ErrorKind::ParseError, path + ".type: expected a string");
  const std::string t = type.get<std::string>();
  if (t == "random_walk") {
    RandomWalkSpec rw;
    rw.mu = number_field(member(j, "mu", path), path + ".mu");
    rw.sigma2 = number_field(member(j, "sigma2", path), path + ".sigma2");
    return rw;
  }
  if (t == "ar1") {
    Ar1Spec ar;
    ar.rho = number_field(member(j, "rho", path), path + ".rho");
    ar.sigma_eps2 =
        number_field(member(j, "sigma_eps2", path), path + ".sigma_eps2");
    return ar;
  }
  if (t == "explicit") {
    GaussianPrior g;
    g.mean = vec_field(member(j, "mean", path), path + ".mean");
    g.cov = mat_field(member(j, "cov", path), path + ".cov");
    return g;
  }
  throw Error(ErrorKind::ParseError,
              path + ".type: unknown prior type '" + t + "'");
}

ordered_json prior_json(const PriorSpec& spec) {
  ordered_json j;
  if (const auto* rw = std::get_if<RandomWalkSpec>(&spec)) {
    j["type"] = "random_walk";
    j["mu"] = rw->mu;
    j["sigma2"] = rw->sigma2;
  } else if (const auto* ar = std::get_if<Ar1Spec>(&spec)) {
    j["type"] = "ar1";
    j["rho"] = ar->rho;
    j["sigma_eps2"] = ar->sigma_eps2;
  } else {
    const auto& g = std::get<GaussianPrior>(spec);
    j["type"] = "explicit";
    j["mean"] = vec_to_json(g.mean);
    j["cov"] = mat_to_json(g.cov);
  }
  return j;
}

HyperPriorGrid parse_hyper_json(const ordered_json& j, const std::string& path) {
  const ordered_json& mu = member(j, "mu", path);
  const ordered_json& sigma = member(j, "sigma", path);
  const auto axis = [&](const ordered_json& a, const std::string& p) {
    return std::tuple<double, double, int>(
        number_field(member(a, "min", p), p + ".min"),
        number_field(member(a, "max", p), p + ".max"),
        static_cast<int>(integer_field(member(a, "n", p), p + ".n")));
  };
  const auto [mu_min, mu_max, mu_n] = axis(mu, path + ".mu");
  const auto [s_min, s_max, s_n] = axis(sigma, path + ".sigma");
  if (j.contains("weights")) {
    const ordered_json& w = j.at("weights");
    if (!w.is_string() || w.get<std::string>() != "uniform")
      throw Error(ErrorKind::ParseError,
                  path + ".weights: only \"uniform\" is supported");
  }
  try {
    return HyperPriorGrid::uniform(mu_min, mu_max, mu_n, s_min, s_max, s_n);
  } catch (const Error& e) {
    throw Error(ErrorKind::BadConfig, path + ": " + e.what());
  }
}

Mat parse_sigma_spec(const ordered_json& j, int dim, const std::string& path) {
  if (j.is_array()) {
    const Mat m = mat_field(j, path);
    if (m.rows() != dim || m.cols() != dim)
      throw Error(ErrorKind::ParseError,
                  path + ": expected a " + std::to_string(dim) + "x" +
                      std::to_string(dim) + " matrix");
    return m;
  }
  if (j.is_object() && j.contains("diag")) {
    const ordered_json& dj = j.at("diag");
    if (dj.is_number())
      return dj.get<double>() * Mat::Identity(dim, dim);
    const Vec diag = vec_field(dj, path + ".diag");
    if (diag.size() != dim)
      throw Error(ErrorKind::ParseError,
                  path + ".diag: expected " + std::to_string(dim) + " entries");
    return diag.asDiagonal();
  }
  throw Error(ErrorKind::ParseError,
              path + ": expected a matrix or {\"diag\": ...}");
}

}  // namespace

PriorSpec parse_prior_spec(const std::string& text) {
  return parse_prior_json(parse_json(text), "$");
}

std::string prior_spec_to_json(const PriorSpec& spec) {
  return prior_json(spec).dump(2) + "\n";
}

HyperPriorGrid parse_hyper_config(const std::string& text) {
  return parse_hyper_json(parse_json(text), "$");
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  const ordered_json j = parse_json(text);
  const ordered_json& ej = member(j, "experiment", "$");
  if (!ej.is_string())
    throw Error(ErrorKind::ParseError, "$.experiment: expected a string");
  const std::string experiment = ej.get<std::string>();

  if (experiment == "coverage") {
    CoverageConfig cfg;
    const ordered_json& mj = member(j, "method", "$");
    if (!mj.is_string())
      throw Error(ErrorKind::ParseError, "$.method: expected a string");
    cfg.method = parse_method(mj.get<std::string>());
    cfg.n_reps = integer_field(member(j, "n_reps", "$"), "$.n_reps");
    cfg.level = j.contains("level") ? number_field(j.at("level"), "$.level") : 0.95;

    const ordered_json& dj = member(j, "dgp", "$");
    cfg.dgp.n_pre =
        static_cast<int>(integer_field(member(dj, "t_pre", "$.dgp"), "$.dgp.t_pre"));
    cfg.dgp.n_post = static_cast<int>(
        integer_field(member(dj, "t_post", "$.dgp"), "$.dgp.t_post"));
    cfg.dgp.prior_spec = parse_prior_json(member(dj, "prior", "$.dgp"), "$.dgp.prior");
    cfg.dgp.tau_post_true =
        vec_field(member(dj, "tau_true", "$.dgp"), "$.dgp.tau_true");
    cfg.dgp.sigma = parse_sigma_spec(member(dj, "sigma", "$.dgp"),
                                     cfg.dgp.n_pre + cfg.dgp.n_post, "$.dgp.sigma");
    cfg.dgp.seed = static_cast<std::uint64_t>(
        integer_field(member(j, "seed", "$"), "$.seed"));
    if (j.contains("hyper")) cfg.hyper = parse_hyper_json(j.at("hyper"), "$.hyper");
    return cfg;
  }
  if (experiment == "mle_consistency") {
    ConsistencyConfig cfg;
    cfg.true_mu = number_field(member(j, "true_mu", "$"), "$.true_mu");
    cfg.true_sigma2 = number_field(member(j, "true_sigma2", "$"), "$.true_sigma2");
    cfg.sigma_scale = number_field(member(j, "sigma_scale", "$"), "$.sigma_scale");
    cfg.t_pre_list = int_list_field(member(j, "t_pre_list", "$"), "$.t_pre_list");
    cfg.n_reps = integer_field(member(j, "n_reps", "$"), "$.n_reps");
    cfg.seed =
        static_cast<std::uint64_t>(integer_field(member(j, "seed", "$"), "$.seed"));
    return cfg;
  }
  throw Error(ErrorKind::BadConfig,
              "$.experiment: unknown experiment '" + experiment + "'");
}

// ---- report emission --------------------------------------------------

std::vector<OlsRow> ols_rows(const EventStudy& es, double level) {
  const double z = normal_quantile(0.5 * (1.0 + level));
  const SigmaBlocks s = split_covariance(es);
  std::vector<OlsRow> rows;
  rows.reserve(es.post_periods.size());
  for (int j = 0; j < es.n_post(); ++j) {
    const double sd = std::sqrt(s.post(j, j));
    rows.push_back({es.post_periods[j], es.beta_post[j], es.beta_post[j] - z * sd,
                    es.beta_post[j] + z * sd});
  }
  return rows;
}

std::string provenance_line(const std::string& input_hash) {
  return "# input_hash=" + input_hash + " tool=" + kToolName + "/" + kToolVersion +
         "\n";
}

std::string posterior_csv(const std::string& input_hash,
                          const std::vector<OlsRow>& ols,
                          const PosteriorSummary& ps) {
  std::string out = provenance_line(input_hash);
  out += "period,ols_estimate,ols_lo,ols_hi,bayes_mean,bayes_lo,bayes_hi\n";
  for (std::size_t j = 0; j < ols.size(); ++j) {
    out += std::to_string(ols[j].period) + "," + format_double(ols[j].estimate) +
           "," + format_double(ols[j].lo) + "," + format_double(ols[j].hi) + "," +
           format_double(ps.tau_mean[static_cast<Eigen::Index>(j)]) + "," +
           format_double(ps.intervals[j].lower) + "," +
           format_double(ps.intervals[j].upper) + "\n";
  }
  return out;
}

std::string coverage_csv(const std::string& input_hash, const CoverageReport& report) {
  std::string out = provenance_line(input_hash);
  out += "period,method,level,coverage,mean_length,bias,se\n";
  for (const PeriodCoverage& pc : report.periods) {
    out += std::to_string(pc.period) + "," + to_string(report.method) + "," +
           format_double(report.level) + "," + format_double(pc.coverage) + "," +
           format_double(pc.mean_length) + "," + format_double(pc.mean_bias) + "," +
           format_double(pc.se) + "\n";
  }
  return out;
}

std::string consistency_csv(const std::string& input_hash,
                            const std::vector<ConsistencyRow>& rows) {
  std::string out = provenance_line(input_hash);
  out += "t_pre,median_abs_err_mu,median_abs_err_sigma2\n";
  for (const ConsistencyRow& row : rows) {
    out += std::to_string(row.n_pre) + "," + format_double(row.median_abs_err_mu) +
           "," + format_double(row.median_abs_err_sigma2) + "\n";
  }
  return out;
}

// ---- svg ----------------------------------------------------------------

namespace {

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string event_study_svg(const EventStudy& es, const std::vector<OlsRow>& ols,
                            const PosteriorSummary& ps) {
  const double width = 720, height = 400;
  const double left = 60, right = 690, top = 24, bottom = 356;

  // OLS whiskers exist for all periods (pre intervals use the same level as
  // the post rows); posterior whiskers for post periods only.
  const double level = ps.intervals.empty() ? 0.95 : ps.intervals.front().level;
  const double z = normal_quantile(0.5 * (1.0 + level));

  struct Point {
    double period, value, lo, hi;
    bool bayes;
  };
  std::vector<Point> points;
  for (int i = 0; i < es.n_pre(); ++i) {
    const double sd = std::sqrt(es.sigma(i, i));
    points.push_back({static_cast<double>(es.pre_periods[i]), es.beta_pre[i],
                      es.beta_pre[i] - z * sd, es.beta_pre[i] + z * sd, false});
  }
  for (const OlsRow& row : ols)
    points.push_back(
        {static_cast<double>(row.period), row.estimate, row.lo, row.hi, false});
  for (std::size_t j = 0; j < ps.intervals.size(); ++j)
    points.push_back({static_cast<double>(ps.intervals[j].period),
                      ps.tau_mean[static_cast<Eigen::Index>(j)],
                      ps.intervals[j].lower, ps.intervals[j].upper, true});

  double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
  for (const Point& pt : points) {
    x_min = std::min(x_min, pt.period);
    x_max = std::max(x_max, pt.period);
    y_min = std::min(y_min, pt.lo);
    y_max = std::max(y_max, pt.hi);
  }
  x_min -= 0.75;
  x_max += 0.75;
  const double pad = 0.08 * (y_max - y_min + 1e-12);
  y_min -= pad;
  y_max += pad;

  const auto sx = [&](double p) {
    return left + (p - x_min) / (x_max - x_min) * (right - left);
  };
  const auto sy = [&](double v) {
    return bottom - (v - y_min) / (y_max - y_min) * (bottom - top);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(width) +
         "\" height=\"" + px(height) + "\" viewBox=\"0 0 " + px(width) + " " +
         px(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // zero line and reference-period marker
  svg += "<line x1=\"" + px(left) + "\" y1=\"" + px(sy(0)) + "\" x2=\"" + px(right) +
         "\" y2=\"" + px(sy(0)) + "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  svg += "<line x1=\"" + px(sx(0)) + "\" y1=\"" + px(top) + "\" x2=\"" + px(sx(0)) +
         "\" y2=\"" + px(bottom) + "\" stroke=\"#ddd\"/>\n";
  // axes
  svg += "<line x1=\"" + px(left) + "\" y1=\"" + px(bottom) + "\" x2=\"" + px(right) +
         "\" y2=\"" + px(bottom) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + px(left) + "\" y1=\"" + px(top) + "\" x2=\"" + px(left) +
         "\" y2=\"" + px(bottom) + "\" stroke=\"black\"/>\n";
  for (int p = static_cast<int>(std::ceil(x_min)); p <= std::floor(x_max); ++p) {
    if (p == 0) continue;
    svg += "<text x=\"" + px(sx(p)) + "\" y=\"" + px(bottom + 16) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + std::to_string(p) +
           "</text>\n";
  }
  svg += "<text x=\"" + px(0.5 * (left + right)) + "\" y=\"" + px(height - 6) +
         "\" font-size=\"12\" text-anchor=\"middle\">event time</text>\n";

  for (const Point& pt : points) {
    const double dx = pt.bayes ? 5.0 : (es.post_periods.empty() ? 0.0 : -5.0);
    const std::string color = pt.bayes ? "#1f77b4" : "#666";
    const double x = sx(pt.period) + dx;
    svg += "<line x1=\"" + px(x) + "\" y1=\"" + px(sy(pt.lo)) + "\" x2=\"" + px(x) +
           "\" y2=\"" + px(sy(pt.hi)) + "\" stroke=\"" + color + "\"/>\n";
    svg += "<circle cx=\"" + px(x) + "\" cy=\"" + px(sy(pt.value)) +
           "\" r=\"3\" fill=\"" + color + "\"/>\n";
  }
  svg += "<text x=\"" + px(right - 4) + "\" y=\"" + px(top + 4) +
         "\" font-size=\"11\" text-anchor=\"end\" fill=\"#666\">OLS</text>\n";
  svg += "<text x=\"" + px(right - 4) + "\" y=\"" + px(top + 18) +
         "\" font-size=\"11\" text-anchor=\"end\" fill=\"#1f77b4\">posterior</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace bt::io

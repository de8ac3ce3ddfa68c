#pragma once

#include <optional>
#include <string>

namespace bt::cli {

/// Full command-line front end. Returns the process exit code
/// (0 success, 1 internal, 2 validation, 3 config).
int run(int argc, const char* const* argv);

struct OutputOpts {
  std::string out;             // base path; a trailing ".csv" is stripped
  std::string format = "csv";  // "csv" writes base.csv + base.json sidecar,
                               // "json" writes base.json only
  std::optional<std::string> svg;
};

void cmd_validate(const std::string& input_path,
                  const std::optional<std::string>& sigma_csv_path,
                  const std::optional<std::string>& out_path);

void cmd_posterior(const std::string& input_path,
                   const std::optional<std::string>& sigma_csv_path,
                   const std::string& prior_path, double level,
                   const OutputOpts& out);

/// mode "mle" (command `eb`) or "hierarchical" (command `hb`).
void cmd_eb(const std::string& input_path,
            const std::optional<std::string>& sigma_csv_path,
            const std::string& mode,
            const std::optional<std::string>& hyper_config_path, double level,
            const OutputOpts& out);

void cmd_simulate(const std::string& config_path,
                  const std::optional<std::uint64_t>& seed_override,
                  const OutputOpts& out);

}  // namespace bt::cli

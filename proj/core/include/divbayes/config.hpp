#pragma once

// Flat `key = value` configuration files and the resolved per-study settings.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "divbayes/density.hpp"
#include "divbayes/divergences.hpp"
#include "divbayes/sampler.hpp"

namespace divbayes {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// UTF-8 text, one `key = value` per line, `#` starts a comment. Later keys override earlier ones.
std::map<std::string, std::string> parse_key_values(std::string_view text);
std::map<std::string, std::string> load_key_values(const std::filesystem::path& path);

enum class Study { Simple, Regression, TimeSeries, Efficiency, Scores, OracleCheck };

std::string_view study_name(Study study);
Study parse_study(std::string_view name);

struct ExperimentConfig {
  Study study = Study::Simple;

  // simple
  std::string source = "eps_contam";  // eps_contam | student_t | csv
  std::size_t n = 1000;
  double df = 4.0;
  std::filesystem::path data_path;
  std::string csv_column = "x";
  std::size_t predictive_draws = 20000;

  // regression
  std::vector<std::size_t> p_values = {1, 5};
  std::size_t test_size = 100;

  // timeseries
  std::vector<std::string> datasets = {"ar3", "garch_high", "garch_low"};
  std::size_t series_length = 1000;
  double ar_sigma = 0.5;

  // efficiency
  std::vector<std::size_t> sizes = {50, 100, 200, 500};
  std::vector<double> data_means = {0.0, 15.0};
  double data_sd = 10.0;

  // scores
  std::vector<double> score_g = {0.1, 0.25, 0.5, 0.75};
  std::vector<double> score_alphas = {0.6, 0.75, 0.85};

  std::size_t repeats = 1;
  std::vector<DivergenceSpec> divergences;

  double prior_location_mean = 0.0;
  double prior_location_sd = 10.0;
  double prior_sigma_shape = 0.001;
  double prior_sigma_rate = 0.001;
  double prior_ig_shape = 2.0;
  double prior_ig_scale = 0.5;
  double prior_coef_ratio = 5.0;

  SamplerOptions sampler;
  bool leave_one_out = false;
  ResponseReference kde_reference = ResponseReference::Marginal;
  bool kde_cross_validate = true;
  bool strict = false;
  std::uint64_t seed = 20180101;
  std::filesystem::path out = "out";

  DensityOptions density_options() const {
    return {leave_one_out, {kde_reference, kde_cross_validate}};
  }

  /// Canonical `key = value` text of every setting, in a fixed order.
  std::string resolved() const;
  /// 16 hex digits of the FNV-1a hash of resolved().
  std::string hash() const;
};

/// Study defaults, then `settings` (from a file and/or command line) applied on top.
/// Unknown keys and invalid values raise ConfigError before any computation starts.
ExperimentConfig resolve_config(Study study, const std::map<std::string, std::string>& settings);

}  // namespace divbayes

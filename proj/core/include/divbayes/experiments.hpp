#pragma once

// Study runners: simulate data, fit every configured divergence, and write
// CSV tables plus SVG figures into config.out.

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "divbayes/config.hpp"
#include "divbayes/density.hpp"
#include "divbayes/distributions.hpp"
#include "divbayes/divergences.hpp"
#include "divbayes/sampler.hpp"
#include "divbayes/types.hpp"

namespace divbayes::experiments {

/// derive_seed folded along `path`: stream_seed(s, {a, b}) = derive_seed(derive_seed(s, a), b).
std::uint64_t stream_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Starting points for the sampler from the data rather than the prior: (median, log(1.4826 MAD))
/// with spreads of about two standard errors.
Initializer location_scale_initializer(std::span<const double> y);
/// Least-squares coefficients and log residual sd. With `intercept` a leading constant column is
/// added (AR families place the intercept first).
Initializer regression_initializer(const Dataset& data, bool intercept);

struct FitResult {
  DivergenceSpec spec;
  Chain chain;
  std::vector<double> mean;  // posterior mean of theta
  double sigma_mean = 0.0;   // E[sigma]
  double sigma2_mean = 0.0;  // E[sigma^2]

  bool converged() const { return chain.diagnostics().converged; }
};

/// One general-Bayes fit. `context` is only read when the divergence needs a density estimate.
FitResult fit(const ModelFamily& family, const PriorSpec& prior, const Dataset& data,
              const DivergenceSpec& spec, const LossContext& context,
              const SamplerOptions& options, const Initializer& init);

/// Fits every divergence on the same data; the density estimate is computed at most once.
std::vector<FitResult> fit_all(const ModelFamily& family, const PriorSpec& prior,
                               const Dataset& data, std::span<const DivergenceSpec> specs,
                               const SamplerOptions& options, const Initializer& init,
                               const DensityOptions& density, std::uint64_t seed);

struct StudyOutcome {
  std::size_t fits = 0;
  std::size_t diagnostic_failures = 0;
  std::vector<std::filesystem::path> files;
};

// ---------------------------------------------------------------------------

struct SimpleRow {
  DivergenceSpec spec;
  double mu_mean = 0.0;
  double mu_sd = 0.0;
  double sigma_mean = 0.0;
  double sigma_sd = 0.0;
  double predictive_mean = 0.0;
  double predictive_sd = 0.0;
  double acceptance = 0.0;
  double max_rhat = 0.0;
  double min_ess = 0.0;
  bool converged = false;
};

struct SimpleResult {
  std::vector<double> data;
  std::vector<SimpleRow> rows;
  StudyOutcome outcome;
};

SimpleResult run_simple(const ExperimentConfig& config);

struct RegressionRepeat {
  std::size_t p = 0;
  std::size_t repeat = 0;
  DivergenceSpec spec;
  double beta_se = 0.0;  // sum_k (beta_hat_k - beta_k)^2
  double test_se = 0.0;  // sum over test points of (y_hat - X beta)^2
  double sigma2_mean = 0.0;
  bool converged = false;
};

struct RegressionCell {
  std::size_t p = 0;
  DivergenceSpec spec;
  double beta_mse = 0.0;
  double test_mse = 0.0;
  double sigma2_mean = 0.0;
  std::size_t unconverged = 0;
};

struct RegressionResult {
  std::vector<std::vector<double>> coefficients;  // per entry of config.p_values
  std::vector<RegressionRepeat> repeats;
  std::vector<RegressionCell> table;
  StudyOutcome outcome;

  const RegressionCell& cell(std::size_t p, const DivergenceSpec& spec) const;
};

RegressionResult run_regression(const ExperimentConfig& config);

struct TimeSeriesRow {
  std::string dataset;
  DivergenceSpec spec;
  double rmse = 0.0;
  double predictive_var_mean = 0.0;
  double sigma_mean = 0.0;
  bool converged = false;
};

struct TimeSeriesResult {
  std::vector<TimeSeriesRow> rows;
  StudyOutcome outcome;

  const TimeSeriesRow& row(const std::string& dataset, const DivergenceSpec& spec) const;
};

TimeSeriesResult run_timeseries(const ExperimentConfig& config);

struct EfficiencyRepeat {
  std::size_t n = 0;
  double data_mean = 0.0;
  std::size_t repeat = 0;
  DivergenceSpec spec;
  double mu_hat = 0.0;
  double sigma_hat = 0.0;
  bool converged = false;
  bool excluded = false;
};

struct EfficiencyCell {
  std::size_t n = 0;
  double data_mean = 0.0;
  DivergenceSpec spec;
  double mu_mse = 0.0;
  double sigma_mse = 0.0;
  int mu_sign_sum = 0;
  int sigma_sign_sum = 0;
  std::size_t used = 0;
  std::size_t excluded = 0;
};

struct EfficiencyResult {
  std::vector<EfficiencyRepeat> repeats;
  std::vector<EfficiencyCell> table;
  StudyOutcome outcome;

  const EfficiencyCell& cell(std::size_t n, double data_mean, const DivergenceSpec& spec) const;
};

/// TV fits that fail diagnostics are excluded from the MSE and sign tables and counted.
EfficiencyResult run_efficiency(const ExperimentConfig& config);

struct ScoreCurve {
  double g = 0.0;
  std::string label;
  std::vector<double> f;
  std::vector<double> score;
};

struct ScoresResult {
  std::vector<ScoreCurve> curves;
  StudyOutcome outcome;
};

/// Per-observation scores as a function of the quoted density f at fixed g: KL, Hellinger
/// (alpha = 0.5 divided by 4) and alpha at each configured alpha.
ScoresResult plot_scores(const ExperimentConfig& config);

struct OracleCheckRow {
  std::string check;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct OracleCheckResult {
  std::vector<OracleCheckRow> rows;
  StudyOutcome outcome;
  bool all_pass() const;
};

/// Quadrature divergences against Gaussian closed forms and grid minimizer orderings.
OracleCheckResult run_oracle_check(const ExperimentConfig& config);

/// Runs the configured study; returns the number of fits failing diagnostics.
StudyOutcome run_study(const ExperimentConfig& config);

}  // namespace divbayes::experiments

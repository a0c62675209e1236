#include "divbayes/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "divbayes/datagen.hpp"
#include "divbayes/oracle.hpp"
#include "divbayes/report.hpp"

namespace divbayes::experiments {
namespace {

namespace fs = std::filesystem;
using report::CsvTable;

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

double sd_of(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::uint64_t name_stream(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t to_stream(double v) { return static_cast<std::uint64_t>(std::llround(v * 1000.0)); }

// One manifest row per fit; flagged fits carry the diagnostics message.
class Manifest {
 public:
  explicit Manifest(const ExperimentConfig& config)
      : hash_(config.hash()),
        study_(study_name(config.study)),
        table_({"study", "cell", "divergence", "acceptance", "max_rhat", "min_ess", "converged",
                "message", "config_hash"}) {}

  void add(const std::string& cell, const FitResult& fit, StudyOutcome& outcome) {
    const auto& d = fit.chain.diagnostics();
    table_.row()
        .add(std::string(study_))
        .add(cell)
        .add(fit.spec.name())
        .add(fit.chain.acceptance_rate())
        .add(d.max_rhat())
        .add(d.min_ess())
        .add(d.converged)
        .add(d.message)
        .add(hash_);
    ++outcome.fits;
    if (!d.converged) ++outcome.diagnostic_failures;
  }

  void write(const fs::path& dir, StudyOutcome& outcome) const {
    table_.write(dir / "manifest.csv");
    outcome.files.push_back(dir / "manifest.csv");
  }

 private:
  std::string hash_;
  std::string_view study_;
  CsvTable table_;
};

void write_resolved(const ExperimentConfig& config, StudyOutcome& outcome) {
  const fs::path path = config.out / "config.resolved.txt";
  report::write_text(path, config.resolved() + "# config_hash = " + config.hash() + "\n");
  outcome.files.push_back(path);
}

void write_table(const CsvTable& table, const fs::path& path, StudyOutcome& outcome) {
  table.write(path);
  outcome.files.push_back(path);
}

void write_svg(const report::PlotSpec& spec, const std::vector<report::Series>& series,
               const fs::path& path, StudyOutcome& outcome) {
  report::write_text(path, report::line_plot_svg(spec, series));
  outcome.files.push_back(path);
}

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// Posterior predictive density of the location-scale model: average of N(y; mu_s, sigma_s)
// over (at most `max_draws` evenly spaced) retained draws.
std::vector<double> predictive_density(const Chain& chain, std::span<const double> grid,
                                       std::size_t max_draws) {
  const std::size_t n = chain.size();
  const std::size_t stride = std::max<std::size_t>(1, n / max_draws);
  std::vector<double> out(grid.size(), 0.0);
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; i += stride) {
    const double mu = chain.draws()(static_cast<Eigen::Index>(i), 0);
    const double sigma = std::exp(chain.draws()(static_cast<Eigen::Index>(i), 1));
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] += normal_pdf(grid[k], mu, sigma);
    ++used;
  }
  for (double& v : out) v /= static_cast<double>(used);
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

std::uint64_t stream_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = master;
  for (auto p : path) s = derive_seed(s, p);
  return s;
}

Initializer location_scale_initializer(std::span<const double> y) {
  if (y.size() < 2) throw std::invalid_argument("location_scale_initializer: need >= 2 points");
  std::vector<double> v(y.begin(), y.end());
  const double m = median(v);
  for (double& x : v) x = std::abs(x - m);
  double s = 1.4826 * median(v);
  if (!(s > 0.0)) s = sd_of(y);
  if (!(s > 0.0)) s = 1.0;
  const double n = static_cast<double>(y.size());
  return {{m, std::log(s)}, {2.0 * s / std::sqrt(n), 2.0 / std::sqrt(2.0 * n)}, 2.0};
}

Initializer regression_initializer(const Dataset& data, bool intercept) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto p = static_cast<Eigen::Index>(data.covariate_dim());
  const Eigen::Index k = p + (intercept ? 1 : 0);
  if (n <= k + 1) throw std::invalid_argument("regression_initializer: too few observations");
  Eigen::MatrixXd X(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = data.row(static_cast<std::size_t>(i));
    Eigen::Index c = 0;
    if (intercept) X(i, c++) = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) X(i, c++) = row[static_cast<std::size_t>(j)];
    y(i) = data.response()[static_cast<std::size_t>(i)];
  }
  const Eigen::MatrixXd xtx = X.transpose() * X;
  const auto ldlt = xtx.ldlt();
  const Eigen::VectorXd beta = ldlt.solve(X.transpose() * y);
  const Eigen::VectorXd resid = y - X * beta;
  double s = std::sqrt(resid.squaredNorm() / static_cast<double>(n - k));
  if (!(s > 0.0)) s = 1.0;
  const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(k, k));

  Initializer init;
  init.jitter = 2.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    init.center.push_back(beta(j));
    init.spread.push_back(2.0 * s * std::sqrt(std::max(inv(j, j), 0.0)));
  }
  init.center.push_back(std::log(s));
  init.spread.push_back(2.0 / std::sqrt(2.0 * static_cast<double>(n)));
  return init;
}

FitResult fit(const ModelFamily& family, const PriorSpec& prior, const Dataset& data,
              const DivergenceSpec& spec, const LossContext& context,
              const SamplerOptions& options, const Initializer& init) {
  GBPosterior posterior(family, prior, data, spec,
                        spec.needs_density_estimate() ? context : LossContext{});
  Chain chain = run_mcmc(posterior, options, init);
  const Eigen::VectorXd mean = chain.mean();
  FitResult out{spec, std::move(chain), {}, 0.0, 0.0};
  out.mean.assign(mean.data(), mean.data() + mean.size());
  const std::size_t last = out.mean.size() - 1;
  out.sigma_mean = out.chain.expectation([last](std::span<const double> t) {
    return std::exp(t[last]);
  });
  out.sigma2_mean = out.chain.expectation([last](std::span<const double> t) {
    return std::exp(2.0 * t[last]);
  });
  return out;
}

std::vector<FitResult> fit_all(const ModelFamily& family, const PriorSpec& prior,
                               const Dataset& data, std::span<const DivergenceSpec> specs,
                               const SamplerOptions& options, const Initializer& init,
                               const DensityOptions& density, std::uint64_t seed) {
  LossContext context;
  if (std::any_of(specs.begin(), specs.end(),
                  [](const DivergenceSpec& s) { return s.needs_density_estimate(); })) {
    context = density_context(data, density);
  }
  std::vector<FitResult> out;
  out.reserve(specs.size());
  for (const auto& spec : specs) {
    SamplerOptions opts = options;
    opts.seed = derive_seed(seed, name_stream(spec.name()));
    out.push_back(fit(family, prior, data, spec, context, opts, init));
  }
  return out;
}

// ---------------------------------------------------------------------------
// simple

SimpleResult run_simple(const ExperimentConfig& config) {
  SimpleResult result;
  auto& outcome = result.outcome;
  fs::create_directories(config.out);
  write_resolved(config, outcome);
  const std::string hash = config.hash();

  if (config.source == "eps_contam") {
    result.data = datagen::gen_eps_contam(config.n, stream_seed(config.seed, {0}));
  } else if (config.source == "student_t") {
    result.data = datagen::gen_student_t(config.n, config.df, stream_seed(config.seed, {0}));
  } else {
    result.data = datagen::load_csv(config.data_path, config.csv_column);
  }
  const Dataset data(result.data);
  const ModelFamily family = GaussianModel{};
  const PriorSpec prior =
      location_scale_prior(config.prior_location_mean, config.prior_location_sd,
                           config.prior_sigma_shape, config.prior_sigma_rate);
  const auto fits =
      fit_all(family, prior, data, config.divergences, config.sampler,
              location_scale_initializer(result.data), config.density_options(),
              stream_seed(config.seed, {1}));

  Manifest manifest(config);
  CsvTable summary({"divergence", "mu_mean", "mu_sd", "sigma_mean", "sigma_sd", "predictive_mean",
                    "predictive_sd", "acceptance", "max_rhat", "min_ess", "converged",
                    "config_hash"});
  const auto [lo_it, hi_it] = std::minmax_element(result.data.begin(), result.data.end());
  const std::vector<double> grid = linspace(*lo_it - 1.0, *hi_it + 1.0, 401);
  const KDE kde = fit_kde(result.data);
  CsvTable curves({"divergence", "y", "density", "log_density", "config_hash"});
  std::vector<report::Series> density_series;
  std::vector<report::Series> log_series;
  {
    report::Series s{"data KDE", grid, {}};
    for (double y : grid) s.y.push_back(kde(y));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      curves.row().add("data_kde").add(grid[k]).add(s.y[k]).add(std::log(s.y[k])).add(hash);
    }
    density_series.push_back(s);
    for (double& v : s.y) v = std::log(v);
    log_series.push_back(std::move(s));
  }

  for (std::size_t k = 0; k < fits.size(); ++k) {
    const auto& f = fits[k];
    manifest.add("all", f, outcome);
    Rng rng(stream_seed(config.seed, {2, k}));
    const auto draws = posterior_predictive(f.chain, family, {}, config.predictive_draws, rng);
    double pm = 0.0;
    for (double d : draws) pm += d;
    pm /= static_cast<double>(draws.size());
    const double psd = draws.size() > 1 ? sd_of(draws) : 0.0;
    const Eigen::VectorXd sd = f.chain.sd();
    const double sigma_sd = std::sqrt(std::max(0.0, f.sigma2_mean - f.sigma_mean * f.sigma_mean));
    const auto& diag = f.chain.diagnostics();
    SimpleRow row{f.spec,          f.mean[0],  sd(0),           f.sigma_mean,
                  sigma_sd,        pm,         psd,             f.chain.acceptance_rate(),
                  diag.max_rhat(), diag.min_ess(), diag.converged};
    summary.row()
        .add(f.spec.name())
        .add(row.mu_mean)
        .add(row.mu_sd)
        .add(row.sigma_mean)
        .add(row.sigma_sd)
        .add(row.predictive_mean)
        .add(row.predictive_sd)
        .add(row.acceptance)
        .add(row.max_rhat)
        .add(row.min_ess)
        .add(row.converged)
        .add(hash);
    result.rows.push_back(row);

    report::Series s{f.spec.label(), grid, predictive_density(f.chain, grid, 2000)};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      curves.row().add(f.spec.name()).add(grid[i]).add(s.y[i]).add(std::log(s.y[i])).add(hash);
    }
    density_series.push_back(s);
    for (double& v : s.y) v = std::log(v);
    log_series.push_back(std::move(s));
  }

  write_table(summary, config.out / "simple_summary.csv", outcome);
  write_table(curves, config.out / "simple_predictive.csv", outcome);
  write_svg({"Posterior predictive densities (" + config.source + ")", "y", "density"},
            density_series, config.out / "simple_predictive.svg", outcome);
  report::PlotSpec log_plot{"Posterior predictive log densities (" + config.source + ")", "y",
                            "log density"};
  log_plot.y_min = -20.0;
  write_svg(log_plot, log_series, config.out / "simple_logdensity.svg", outcome);
  manifest.write(config.out, outcome);
  return result;
}

// ---------------------------------------------------------------------------
// regression

const RegressionCell& RegressionResult::cell(std::size_t p, const DivergenceSpec& spec) const {
  for (const auto& c : table) {
    if (c.p == p && c.spec == spec) return c;
  }
  throw std::out_of_range("RegressionResult: no cell for p = " + std::to_string(p) + ", " +
                          spec.name());
}

RegressionResult run_regression(const ExperimentConfig& config) {
  RegressionResult result;
  auto& outcome = result.outcome;
  fs::create_directories(config.out);
  write_resolved(config, outcome);
  const std::string hash = config.hash();
  Manifest manifest(config);

  CsvTable coefficients({"p", "index", "beta", "config_hash"});
  CsvTable repeats({"p", "repeat", "divergence", "beta_se", "test_se", "sigma2_mean", "acceptance",
                    "max_rhat", "min_ess", "converged", "config_hash"});
  CsvTable table({"p", "divergence", "beta_mse", "test_mse", "sigma2_mean", "n_repeats",
                  "n_unconverged", "config_hash"});

  for (const std::size_t p : config.p_values) {
    const auto beta = datagen::draw_coefficients(p, stream_seed(config.seed, {0, p}));
    result.coefficients.push_back(beta);
    for (std::size_t j = 0; j < p; ++j) coefficients.row().add(p).add(j).add(beta[j]).add(hash);

    const ModelFamily family = LinRegModel{p};
    const PriorSpec prior = conjugate_regression_prior(p, config.prior_ig_shape,
                                                       config.prior_ig_scale,
                                                       config.prior_coef_ratio);
    std::vector<RegressionCell> cells;
    for (const auto& spec : config.divergences) cells.push_back({p, spec, 0.0, 0.0, 0.0, 0});

    for (std::size_t r = 0; r < config.repeats; ++r) {
      const Dataset data =
          datagen::gen_hetero_linreg(config.n, p, beta, stream_seed(config.seed, {1, p, r}));
      // Test covariates; responses are the noise-free means X beta.
      Rng test_rng(stream_seed(config.seed, {2, p, r}));
      std::normal_distribution<double> z(0.0, 1.0);
      std::vector<double> x_test(config.test_size * p);
      for (double& v : x_test) v = z(test_rng);

      const auto fits = fit_all(family, prior, data, config.divergences, config.sampler,
                                regression_initializer(data, false),
                                config.density_options(),
                                stream_seed(config.seed, {3, p, r}));
      for (std::size_t k = 0; k < fits.size(); ++k) {
        const auto& f = fits[k];
        manifest.add("p=" + std::to_string(p) + ",repeat=" + std::to_string(r), f, outcome);
        double beta_se = 0.0;
        for (std::size_t j = 0; j < p; ++j) beta_se += (f.mean[j] - beta[j]) * (f.mean[j] - beta[j]);
        double test_se = 0.0;
        for (std::size_t i = 0; i < config.test_size; ++i) {
          double truth = 0.0, pred = 0.0;
          for (std::size_t j = 0; j < p; ++j) {
            truth += x_test[i * p + j] * beta[j];
            pred += x_test[i * p + j] * f.mean[j];
          }
          test_se += (pred - truth) * (pred - truth);
        }
        const auto& diag = f.chain.diagnostics();
        result.repeats.push_back({p, r, f.spec, beta_se, test_se, f.sigma2_mean, diag.converged});
        repeats.row()
            .add(p)
            .add(r)
            .add(f.spec.name())
            .add(beta_se)
            .add(test_se)
            .add(f.sigma2_mean)
            .add(f.chain.acceptance_rate())
            .add(diag.max_rhat())
            .add(diag.min_ess())
            .add(diag.converged)
            .add(hash);
        cells[k].beta_mse += beta_se;
        cells[k].test_mse += test_se;
        cells[k].sigma2_mean += f.sigma2_mean;
        if (!diag.converged) ++cells[k].unconverged;
      }
    }
    for (auto& c : cells) {
      const double n = static_cast<double>(config.repeats);
      c.beta_mse /= n;
      c.test_mse /= n;
      c.sigma2_mean /= n;
      table.row()
          .add(p)
          .add(c.spec.name())
          .add(c.beta_mse)
          .add(c.test_mse)
          .add(c.sigma2_mean)
          .add(config.repeats)
          .add(c.unconverged)
          .add(hash);
      result.table.push_back(c);
    }
  }

  write_table(coefficients, config.out / "regression_coefficients.csv", outcome);
  write_table(repeats, config.out / "regression_repeats.csv", outcome);
  write_table(table, config.out / "regression_table.csv", outcome);
  manifest.write(config.out, outcome);
  return result;
}

// ---------------------------------------------------------------------------
// time series

const TimeSeriesRow& TimeSeriesResult::row(const std::string& dataset,
                                           const DivergenceSpec& spec) const {
  for (const auto& r : rows) {
    if (r.dataset == dataset && r.spec == spec) return r;
  }
  throw std::out_of_range("TimeSeriesResult: no row for " + dataset + ", " + spec.name());
}

TimeSeriesResult run_timeseries(const ExperimentConfig& config) {
  TimeSeriesResult result;
  auto& outcome = result.outcome;
  fs::create_directories(config.out);
  write_resolved(config, outcome);
  const std::string hash = config.hash();
  Manifest manifest(config);

  CsvTable rmse({"dataset", "divergence", "rmse", "mean_predictive_var", "sigma_mean",
                 "acceptance", "max_rhat", "min_ess", "converged", "config_hash"});
  CsvTable predictions({"dataset", "t", "truth", "divergence", "prediction", "sq_error",
                        "config_hash"});

  const std::size_t T = config.series_length;
  const std::size_t total = T + config.test_size;
  for (std::size_t d = 0; d < config.datasets.size(); ++d) {
    const std::string& name = config.datasets[d];
    const std::uint64_t data_seed = stream_seed(config.seed, {0, name_stream(name)});
    std::vector<double> intercept_lags;
    std::vector<double> y, latent;
    if (name == "ar3") {
      const std::vector<double> lags = {0.4, 0.2, 0.3};
      latent = datagen::gen_ar(total, 0.25, lags, config.ar_sigma, data_seed);
      y = latent;
      intercept_lags = {0.25, 0.4, 0.2, 0.3};
    } else {
      const datagen::GarchParams garch =
          name == "garch_high" ? datagen::GarchParams{2.0, 0.99, 0.01}
                               : datagen::GarchParams{1.0, 0.75, 0.01};
      const std::vector<double> lags = {0.9};
      auto series = datagen::gen_ar_garch(total, 0.0, lags, config.ar_sigma, garch, data_seed);
      y = std::move(series.y);
      latent = std::move(series.latent);
      intercept_lags = {0.0, 0.9};
    }
    const std::size_t L = intercept_lags.size() - 1;
    const Dataset train = Dataset::lagged(std::span<const double>(y).first(T), L);
    const ModelFamily family = ARModel{L};
    const PriorSpec prior = conjugate_regression_prior(L + 1, config.prior_ig_shape,
                                                       config.prior_ig_scale,
                                                       config.prior_coef_ratio);
    const auto fits = fit_all(family, prior, train, config.divergences, config.sampler,
                              regression_initializer(train, true),
                              config.density_options(),
                              stream_seed(config.seed, {1, name_stream(name)}));

    std::vector<double> ts;
    std::vector<double> truth;
    for (std::size_t t = T; t < total; ++t) {
      ts.push_back(static_cast<double>(t));
      truth.push_back(latent[t]);
    }
    std::vector<report::Series> overlay = {{"truth", ts, truth}};
    std::vector<std::vector<double>> sq_errors;

    for (const auto& f : fits) {
      manifest.add(name, f, outcome);
      // Covariance of (c, phi) draws for the predictive variance of each one-step mean.
      const Eigen::MatrixXd& draws = f.chain.draws();
      const Eigen::MatrixXd coef = draws.leftCols(static_cast<Eigen::Index>(L + 1));
      const Eigen::RowVectorXd coef_mean = coef.colwise().mean();
      const Eigen::MatrixXd centered = coef.rowwise() - coef_mean;
      const Eigen::MatrixXd cov =
          centered.transpose() * centered / static_cast<double>(std::max<Eigen::Index>(1, coef.rows() - 1));

      std::vector<double> pred, sq;
      double sse = 0.0, var_sum = 0.0;
      for (std::size_t t = T; t < total; ++t) {
        Eigen::VectorXd h(static_cast<Eigen::Index>(L + 1));
        h(0) = 1.0;
        for (std::size_t j = 1; j <= L; ++j) h(static_cast<Eigen::Index>(j)) = latent[t - j];
        const double yhat = coef_mean.dot(h.transpose());
        const double e = yhat - latent[t];
        pred.push_back(yhat);
        sq.push_back(e * e);
        sse += e * e;
        var_sum += h.dot(cov * h) + f.sigma2_mean;
        predictions.row()
            .add(name)
            .add(t)
            .add(latent[t])
            .add(f.spec.name())
            .add(yhat)
            .add(e * e)
            .add(hash);
      }
      const double m = static_cast<double>(config.test_size);
      const auto& diag = f.chain.diagnostics();
      TimeSeriesRow row{name, f.spec, std::sqrt(sse / m), var_sum / m, f.sigma_mean, diag.converged};
      rmse.row()
          .add(name)
          .add(f.spec.name())
          .add(row.rmse)
          .add(row.predictive_var_mean)
          .add(row.sigma_mean)
          .add(f.chain.acceptance_rate())
          .add(diag.max_rhat())
          .add(diag.min_ess())
          .add(diag.converged)
          .add(hash);
      result.rows.push_back(row);
      overlay.push_back({f.spec.label(), ts, pred});
      sq_errors.push_back(std::move(sq));
    }

    write_svg({"One-step-ahead predictions (" + name + ")", "t", "x_t"}, overlay,
              config.out / ("timeseries_" + name + "_predictions.svg"), outcome);
    const auto kl = std::find(config.divergences.begin(), config.divergences.end(),
                              DivergenceSpec::kl());
    const auto hell = std::find(config.divergences.begin(), config.divergences.end(),
                                DivergenceSpec::hellinger());
    if (kl != config.divergences.end() && hell != config.divergences.end()) {
      const auto& a = sq_errors[static_cast<std::size_t>(kl - config.divergences.begin())];
      const auto& b = sq_errors[static_cast<std::size_t>(hell - config.divergences.begin())];
      report::Series diff{"KL - Hell", ts, {}};
      for (std::size_t i = 0; i < a.size(); ++i) diff.y.push_back(a[i] - b[i]);
      write_svg({"Squared error difference, KL minus Hellinger (" + name + ")", "t",
                 "squared error difference"},
                {diff}, config.out / ("timeseries_" + name + "_sqerr_diff.svg"), outcome);
    }
  }

  write_table(rmse, config.out / "timeseries_rmse.csv", outcome);
  write_table(predictions, config.out / "timeseries_predictions.csv", outcome);
  manifest.write(config.out, outcome);
  return result;
}

// ---------------------------------------------------------------------------
// efficiency

const EfficiencyCell& EfficiencyResult::cell(std::size_t n, double data_mean,
                                             const DivergenceSpec& spec) const {
  for (const auto& c : table) {
    if (c.n == n && c.data_mean == data_mean && c.spec == spec) return c;
  }
  throw std::out_of_range("EfficiencyResult: no cell for n = " + std::to_string(n) + ", " +
                          spec.name());
}

EfficiencyResult run_efficiency(const ExperimentConfig& config) {
  EfficiencyResult result;
  auto& outcome = result.outcome;
  fs::create_directories(config.out);
  write_resolved(config, outcome);
  const std::string hash = config.hash();
  Manifest manifest(config);

  CsvTable repeats({"n", "data_mean", "repeat", "divergence", "mu_hat", "sigma_hat", "acceptance",
                    "max_rhat", "min_ess", "converged", "excluded", "config_hash"});
  CsvTable table({"n", "data_mean", "divergence", "mu_mse", "sigma_mse", "mu_sign_sum",
                  "sigma_sign_sum", "n_used", "n_excluded", "config_hash"});

  const ModelFamily family = GaussianModel{};
  const PriorSpec prior =
      location_scale_prior(config.prior_location_mean, config.prior_location_sd,
                           config.prior_sigma_shape, config.prior_sigma_rate);
  auto sign = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };

  for (const std::size_t n : config.sizes) {
    for (const double mean : config.data_means) {
      std::vector<EfficiencyCell> cells;
      for (const auto& spec : config.divergences) cells.push_back({n, mean, spec});
      for (std::size_t r = 0; r < config.repeats; ++r) {
        const auto y = datagen::gen_normal(n, mean, config.data_sd,
                                           stream_seed(config.seed, {0, n, to_stream(mean), r}));
        const auto fits = fit_all(family, prior, Dataset(y), config.divergences, config.sampler,
                                  location_scale_initializer(y),
                                  config.density_options(),
                                  stream_seed(config.seed, {1, n, to_stream(mean), r}));
        for (std::size_t k = 0; k < fits.size(); ++k) {
          const auto& f = fits[k];
          char cell_name[96];
          std::snprintf(cell_name, sizeof(cell_name), "n=%zu,mean=%g,repeat=%zu", n, mean, r);
          manifest.add(cell_name, f, outcome);
          const auto& diag = f.chain.diagnostics();
          const bool excluded = f.spec.kind() == DivergenceKind::TV && !diag.converged;
          const double mu_hat = f.mean[0];
          const double sigma_hat = f.sigma_mean;
          result.repeats.push_back({n, mean, r, f.spec, mu_hat, sigma_hat, diag.converged, excluded});
          repeats.row()
              .add(n)
              .add(mean)
              .add(r)
              .add(f.spec.name())
              .add(mu_hat)
              .add(sigma_hat)
              .add(f.chain.acceptance_rate())
              .add(diag.max_rhat())
              .add(diag.min_ess())
              .add(diag.converged)
              .add(excluded)
              .add(hash);
          auto& c = cells[k];
          if (excluded) {
            ++c.excluded;
            continue;
          }
          ++c.used;
          c.mu_mse += (mu_hat - mean) * (mu_hat - mean);
          c.sigma_mse += (sigma_hat - config.data_sd) * (sigma_hat - config.data_sd);
          c.mu_sign_sum += sign(mu_hat - mean);
          c.sigma_sign_sum += sign(sigma_hat - config.data_sd);
        }
      }
      for (auto& c : cells) {
        if (c.used > 0) {
          c.mu_mse /= static_cast<double>(c.used);
          c.sigma_mse /= static_cast<double>(c.used);
        } else {
          c.mu_mse = c.sigma_mse = std::numeric_limits<double>::quiet_NaN();
        }
        table.row()
            .add(c.n)
            .add(c.data_mean)
            .add(c.spec.name())
            .add(c.mu_mse)
            .add(c.sigma_mse)
            .add(c.mu_sign_sum)
            .add(c.sigma_sign_sum)
            .add(c.used)
            .add(c.excluded)
            .add(hash);
        result.table.push_back(c);
      }
    }
  }

  write_table(repeats, config.out / "efficiency_repeats.csv", outcome);
  write_table(table, config.out / "efficiency_table.csv", outcome);
  manifest.write(config.out, outcome);
  return result;
}

// ---------------------------------------------------------------------------
// scores

ScoresResult plot_scores(const ExperimentConfig& config) {
  ScoresResult result;
  auto& outcome = result.outcome;
  fs::create_directories(config.out);
  write_resolved(config, outcome);
  const std::string hash = config.hash();

  CsvTable table({"g", "f", "score", "value", "config_hash"});
  const std::vector<double> f = linspace(0.0, 1.0, 201);
  for (const double g : config.score_g) {
    std::vector<ScoreCurve> curves;
    ScoreCurve kl{g, "KL", f, {}};
    ScoreCurve hell{g, "Hellinger", f, {}};
    for (double x : f) {
      const double log_f = std::log(x);
      kl.score.push_back(score::kl(log_f));
      // alpha = 0.5 score divided by 4 is exactly the Hellinger score -sqrt(f / g).
      hell.score.push_back(score::alpha(log_f, g, 0.5) / 4.0);
    }
    curves.push_back(std::move(kl));
    curves.push_back(std::move(hell));
    for (const double a : config.score_alphas) {
      char label[32];
      std::snprintf(label, sizeof(label), "alpha=%g", a);
      ScoreCurve c{g, label, f, {}};
      for (double x : f) c.score.push_back(score::alpha(std::log(x), g, a));
      curves.push_back(std::move(c));
    }

    std::vector<report::Series> series;
    double lowest = 0.0;
    for (const auto& c : curves) {
      for (std::size_t i = 0; i < f.size(); ++i) {
        table.row().add(g).add(f[i]).add(c.label).add(c.score[i]).add(hash);
        if (std::isfinite(c.score[i])) lowest = std::min(lowest, c.score[i]);
      }
      series.push_back({c.label, c.f, c.score});
    }
    report::PlotSpec plot;
    char title[64];
    std::snprintf(title, sizeof(title), "Scores for quoted density f at g = %g", g);
    plot.title = title;
    plot.x_label = "f";
    plot.y_label = "score";
    plot.y_min = lowest;
    plot.y_max = 5.0;
    char file[64];
    std::snprintf(file, sizeof(file), "scores_g%g.svg", g);
    write_svg(plot, series, config.out / file, outcome);
    for (auto& c : curves) result.curves.push_back(std::move(c));
  }
  write_table(table, config.out / "scores.csv", outcome);
  return result;
}

// ---------------------------------------------------------------------------
// oracle check

bool OracleCheckResult::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const OracleCheckRow& r) { return r.pass; });
}

OracleCheckResult run_oracle_check(const ExperimentConfig& config) {
  OracleCheckResult result;
  auto& outcome = result.outcome;
  fs::create_directories(config.out);
  write_resolved(config, outcome);
  const std::string hash = config.hash();
  auto close = [&](const std::string& name, double value, double expected, double tol) {
    result.rows.push_back({name, value, expected, tol, std::abs(value - expected) <= tol});
  };
  auto at_least = [&](const std::string& name, double value, double bound) {
    result.rows.push_back({name, value, bound, 0.0, value >= bound});
  };

  const auto g = oracle::gaussian_density(0.0, 1.0);
  const auto f = oracle::gaussian_density(1.0, 1.0);
  const auto [lo, hi] = oracle::gaussian_interval(0.0, 1.0, 1.0, 1.0);
  const double h2 = 1.0 - std::exp(-0.125);
  close("kl N(0,1) N(1,1)", oracle::quad_divergence(DivergenceSpec::kl(), g, f, lo, hi), 0.5, 1e-6);
  close("hellinger N(0,1) N(1,1)", oracle::quad_divergence(DivergenceSpec::hellinger(), g, f, lo, hi),
        h2, 1e-6);
  close("tv N(0,1) N(1,1)", oracle::quad_divergence(DivergenceSpec::tv(), g, f, lo, hi),
        2.0 * standard_normal_cdf(0.5) - 1.0, 1e-6);
  close("alpha:0.5 equals 4 hellinger",
        oracle::quad_divergence(DivergenceSpec::alpha(0.5), g, f, lo, hi), 4.0 * h2, 1e-8);
  close("power:0.0001 near kl", oracle::quad_divergence(DivergenceSpec::power(1e-4), g, f, lo, hi),
        0.5, 1e-3);
  for (const auto& spec : {DivergenceSpec::kl(), DivergenceSpec::hellinger(), DivergenceSpec::tv(),
                           DivergenceSpec::alpha(0.75), DivergenceSpec::power(0.5),
                           DivergenceSpec::alpha_beta(1.0, 0.5)}) {
    close(spec.name() + " identity", oracle::quad_divergence(spec, g, g, lo, hi), 0.0, 1e-8);
  }

  // Grid minimizers over (mu, sigma).
  const auto grid = oracle::location_scale_grid(-1.0, 1.0, 21, 0.5, 2.5, 41);
  const double sigma_step = 0.05, mu_step = 0.1;
  const auto shifted = oracle::gaussian_density(0.3, 1.0);
  for (const auto& spec : {DivergenceSpec::kl(), DivergenceSpec::hellinger(), DivergenceSpec::tv(),
                           DivergenceSpec::alpha(0.75), DivergenceSpec::power(0.5)}) {
    const auto best = oracle::brute_minimizer(spec, shifted, GaussianModel{}, grid, -15.0, 15.0);
    close(spec.name() + " minimizer mu for N(0.3,1)", best[0], 0.3, mu_step);
    close(spec.name() + " minimizer sigma for N(0.3,1)", std::exp(best[1]), 1.0, sigma_step);
  }
  auto min_sigma = [&](const DivergenceSpec& spec, const oracle::DensityFn& density, double a,
                       double b) {
    return std::exp(oracle::brute_minimizer(spec, density, GaussianModel{}, grid, a, b)[1]);
  };
  const auto contam = oracle::eps_contamination_density();
  const double kl_contam = min_sigma(DivergenceSpec::kl(), contam, -40.0, 70.0);
  const double tv_contam = min_sigma(DivergenceSpec::tv(), contam, -40.0, 70.0);
  at_least("eps_contam sigma kl minus tv", kl_contam - tv_contam, sigma_step);
  const auto t4 = oracle::student_t_density(4.0);
  at_least("student_t sigma kl minus hellinger",
           min_sigma(DivergenceSpec::kl(), t4, -200.0, 200.0) -
               min_sigma(DivergenceSpec::hellinger(), t4, -200.0, 200.0),
           0.0);

  CsvTable table({"check", "value", "expected", "tolerance", "pass", "config_hash"});
  for (const auto& r : result.rows) {
    table.row().add(r.check).add(r.value).add(r.expected).add(r.tolerance).add(r.pass).add(hash);
  }
  write_table(table, config.out / "oracle_check.csv", outcome);
  return result;
}

StudyOutcome run_study(const ExperimentConfig& config) {
  switch (config.study) {
    case Study::Simple: return run_simple(config).outcome;
    case Study::Regression: return run_regression(config).outcome;
    case Study::TimeSeries: return run_timeseries(config).outcome;
    case Study::Efficiency: return run_efficiency(config).outcome;
    case Study::Scores: return plot_scores(config).outcome;
    case Study::OracleCheck: return run_oracle_check(config).outcome;
  }
  throw std::logic_error("run_study: unknown study");
}

}  // namespace divbayes::experiments

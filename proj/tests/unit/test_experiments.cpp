#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "divbayes/experiments.hpp"

using namespace divbayes;
using namespace divbayes::experiments;
namespace fs = std::filesystem;

namespace {

using Settings = std::map<std::string, std::string>;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "divbayes_experiments_test" / name;
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small(Study study, const fs::path& out, Settings extra = {}) {
  Settings s = {{"sampler.warmup", "500"}, {"sampler.keep", "500"}, {"out", out.string()}};
  for (const auto& [k, v] : extra) s[k] = v;
  return resolve_config(study, s);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<fs::path> csv_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".csv") out.push_back(e.path().filename());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void check_identical_rerun(Study study, const std::string& name, const Settings& extra) {
  const auto a = scratch(name + "_a");
  const auto b = scratch(name + "_b");
  run_study(small(study, a, extra));
  run_study(small(study, b, extra));
  const auto files = csv_files(a);
  REQUIRE_FALSE(files.empty());
  CHECK(files == csv_files(b));
  for (const auto& f : files) {
    CAPTURE(f.string());
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("stream seeds") {
  CHECK(stream_seed(7, {}) == 7);
  CHECK(stream_seed(7, {1, 2}) == derive_seed(derive_seed(7, 1), 2));
  CHECK(stream_seed(7, {1, 2}) != stream_seed(7, {2, 1}));
}

TEST_CASE("data-driven initializers") {
  const Initializer ls = location_scale_initializer(std::vector<double>{1.0, 2.0, 3.0, 4.0, 100.0});
  CHECK(ls.center[0] == doctest::Approx(3.0));
  CHECK(ls.center[1] == doctest::Approx(std::log(1.4826)));
  CHECK(ls.spread[0] > 0.0);
  CHECK(ls.spread[1] > 0.0);

  const Dataset d({3.0, 5.0, 7.1, 8.9}, {0.0, 1.0, 2.0, 3.0}, 1);
  const Initializer r = regression_initializer(d, true);
  REQUIRE(r.center.size() == 3);
  CHECK(r.center[0] == doctest::Approx(3.03).epsilon(1e-9));
  CHECK(r.center[1] == doctest::Approx(1.98).epsilon(1e-9));
  CHECK(regression_initializer(d, false).center.size() == 2);
}

TEST_CASE("simple study writes its artifacts") {
  const auto out = scratch("simple");
  const auto result = run_simple(small(Study::Simple, out, {{"n", "200"}, {"divergences", "kl,power:0.5"},
                                                            {"predictive_draws", "2000"}}));
  REQUIRE(result.rows.size() == 2);
  CHECK(result.data.size() == 200);
  CHECK(result.outcome.fits == 2);
  for (const char* f : {"simple_summary.csv", "simple_predictive.csv", "simple_predictive.svg",
                        "simple_logdensity.svg", "manifest.csv", "config.resolved.txt"}) {
    CAPTURE(f);
    CHECK(fs::exists(out / f));
  }
  const std::string summary = slurp(out / "simple_summary.csv");
  CHECK(summary.find(small(Study::Simple, out, {{"n", "200"}, {"divergences", "kl,power:0.5"},
                                                {"predictive_draws", "2000"}}).hash()) != std::string::npos);
  CHECK(slurp(out / "simple_predictive.csv").find("data_kde") != std::string::npos);
  CHECK(slurp(out / "config.resolved.txt").find("# config_hash = ") != std::string::npos);
  for (const auto& r : result.rows) {
    CHECK(r.sigma_mean > 0.0);
    CHECK(r.predictive_sd >= r.sigma_mean * 0.9);
  }
}

TEST_CASE("student t source orders the fitted scales") {
  const auto out = scratch("student");
  const auto result = run_simple(small(Study::Simple, out, {{"source", "student_t"},
                                                            {"sampler.warmup", "2000"},
                                                            {"sampler.keep", "2000"}}));
  REQUIRE(result.rows.size() == 5);
  const double kl = result.rows[0].sigma_mean;
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    CAPTURE(result.rows[i].spec.name());
    CHECK(kl >= result.rows[i].sigma_mean);
  }
}

TEST_CASE("csv source with standard normal data") {
  const auto out = scratch("csv");
  const auto file = out.parent_path() / "normal.csv";
  fs::create_directories(out.parent_path());
  {
    Rng rng(3);
    std::normal_distribution<double> nd;
    std::ofstream f(file);
    f << "id,x\n";
    for (int i = 0; i < 300; ++i) f << i << ',' << nd(rng) << '\n';
  }
  const auto result = run_simple(small(Study::Simple, out, {{"data", file.string()}}));
  REQUIRE(result.rows.size() == 5);
  CHECK(result.data.size() == 300);
  for (const auto& r : result.rows) {
    CAPTURE(r.spec.name());
    CHECK(std::abs(r.mu_mean) < 3.0 * r.mu_sd);
  }
}

TEST_CASE("well-specified regression recovers zero coefficients") {
  const std::size_t p = 3;
  Rng rng(11);
  std::normal_distribution<double> nd;
  std::vector<double> x(200 * p), y(200);
  for (auto& v : x) v = nd(rng);
  for (auto& v : y) v = nd(rng);
  const Dataset data(y, x, p);
  SamplerOptions o;
  o.n_warmup = 1500;
  o.n_keep = 1500;
  const auto fits = fit_all(LinRegModel{p}, conjugate_regression_prior(p), data,
                            resolve_config(Study::Regression, {}).divergences, o,
                            regression_initializer(data, false), {}, 5);
  REQUIRE(fits.size() == 5);
  for (const auto& f : fits) {
    double se = 0.0;
    for (std::size_t k = 0; k < p; ++k) se += f.mean[k] * f.mean[k];
    CAPTURE(f.spec.name());
    CHECK(se < 0.1);
  }
}

TEST_CASE("regression study tables") {
  const auto out = scratch("regression");
  const auto result = run_regression(small(Study::Regression, out, {{"p", "2"}, {"repeats", "2"},
                                                                     {"divergences", "kl,hellinger"}}));
  CHECK(result.coefficients.size() == 1);
  CHECK(result.coefficients[0].size() == 2);
  CHECK(result.repeats.size() == 4);
  CHECK(result.table.size() == 2);
  const auto& cell = result.cell(2, DivergenceSpec::kl());
  CHECK(cell.beta_mse >= 0.0);
  CHECK(cell.sigma2_mean > 0.0);
  CHECK_THROWS_AS(result.cell(5, DivergenceSpec::kl()), std::out_of_range);
  CHECK(fs::exists(out / "regression_table.csv"));
}

TEST_CASE("time series study") {
  const auto out = scratch("timeseries");
  const auto result = run_timeseries(small(Study::TimeSeries, out, {{"T", "200"}, {"test_size", "20"}}));
  CHECK(result.rows.size() == 6);
  CHECK(result.row("ar3", DivergenceSpec::kl()).rmse > 0.0);
  CHECK(result.row("garch_low", DivergenceSpec::hellinger()).predictive_var_mean > 0.0);
  for (const char* f : {"timeseries_rmse.csv", "timeseries_predictions.csv",
                        "timeseries_ar3_predictions.svg", "timeseries_garch_high_sqerr_diff.svg"}) {
    CAPTURE(f);
    CHECK(fs::exists(out / f));
  }
}

TEST_CASE("efficiency study") {
  const auto out = scratch("efficiency");
  const auto result = run_efficiency(small(Study::Efficiency, out, {{"sizes", "30"}, {"repeats", "2"},
                                                                     {"divergences", "kl,tv"}}));
  CHECK(result.repeats.size() == 8);
  CHECK(result.table.size() == 4);
  const auto& c = result.cell(30, 15.0, DivergenceSpec::tv());
  CHECK(c.used + c.excluded == 2);
  CHECK(std::abs(c.mu_sign_sum) <= 2);
  CHECK(fs::exists(out / "efficiency_table.csv"));
}

TEST_CASE("score curves") {
  const auto out = scratch("scores");
  const auto result = plot_scores(resolve_config(Study::Scores, {{"out", out.string()}}));
  CHECK(result.curves.size() == 4 * 5);
  for (const auto& c : result.curves) {
    CAPTURE(c.label);
    CHECK(c.f.front() == 0.0);
    if (c.label == "KL") {
      CHECK(std::isinf(c.score.front()));
    } else {
      CHECK(std::isfinite(c.score.front()));
    }
    if (c.label == "Hellinger") {
      for (std::size_t i = 0; i < c.f.size(); ++i) {
        if (std::abs(c.f[i] - c.g) < 1e-12) CHECK(c.score[i] == doctest::Approx(-1.0));
      }
    }
  }
  // Curvature near f = g grows with alpha.
  auto curvature = [&](const std::string& label, double g) {
    for (const auto& c : result.curves) {
      if (c.label != label || c.g != g) continue;
      const std::size_t i = 100;
      return (c.score[i + 1] - 2 * c.score[i] + c.score[i - 1]) / ((c.f[1] - c.f[0]) * (c.f[1] - c.f[0]));
    }
    return std::nan("");
  };
  CHECK(curvature("alpha=0.6", 0.5) < curvature("alpha=0.75", 0.5));
  CHECK(curvature("alpha=0.75", 0.5) < curvature("alpha=0.85", 0.5));
  CHECK(fs::exists(out / "scores.csv"));
  CHECK(fs::exists(out / "scores_g0.5.svg"));
}

TEST_CASE("oracle check passes") {
  const auto out = scratch("oracle");
  const auto result = run_oracle_check(resolve_config(Study::OracleCheck, {{"out", out.string()}}));
  CHECK(result.rows.size() > 10);
  for (const auto& r : result.rows) {
    CAPTURE(r.check);
    CHECK(r.pass);
  }
  CHECK(result.all_pass());
}

TEST_CASE("reruns are byte-identical") {
  check_identical_rerun(Study::Simple, "rerun_simple", {{"n", "100"}, {"divergences", "kl,tv"},
                                                        {"predictive_draws", "500"}});
  check_identical_rerun(Study::Regression, "rerun_regression",
                        {{"p", "1"}, {"repeats", "1"}, {"divergences", "kl,tv"}});
  check_identical_rerun(Study::Scores, "rerun_scores", {});
}

}  // TEST_SUITE

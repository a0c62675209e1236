// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "divbayes/density.hpp"
#include "divbayes/experiments.hpp"
#include "divbayes/oracle.hpp"

using namespace divbayes;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [violated]");
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

ExperimentConfig config_for(Study study, const fs::path& out,
                            std::map<std::string, std::string> settings = {}) {
  settings["out"] = out.string();
  return resolve_config(study, settings);
}

// --------------------------------------------------------------------------------------------

Verdict conjugate() {
  Verdict v;
  const GBPosterior post(GaussianModel{1.0}, location_prior(0.0, 1.0),
                         Dataset({0.5, 1.5, 0.0, 2.0}), DivergenceSpec::kl());
  const Chain c = run_mcmc(post, SamplerOptions{});
  const double mean = c.mean()(0);
  const double var = c.sd()(0) * c.sd()(0);
  const double se = c.sd()(0) / std::sqrt(c.diagnostics().ess[0]);
  v.require(std::abs(mean - 0.8) < 3.0 * se, "mean " + num(mean) + " vs 0.8 (3 MC SE = " + num(3 * se) + ")");
  v.require(std::abs(var / 0.2 - 1.0) < 0.10, "variance " + num(var) + " vs 0.2");
  return v;
}

Verdict closed_forms() {
  Verdict v;
  const auto g = oracle::gaussian_density(0.0, 1.0);
  const auto f = oracle::gaussian_density(1.0, 1.0);
  const auto [lo, hi] = oracle::gaussian_interval(0.0, 1.0, 1.0, 1.0);
  const double kl = oracle::quad_divergence(DivergenceSpec::kl(), g, f, lo, hi);
  const double h2 = oracle::quad_divergence(DivergenceSpec::hellinger(), g, f, lo, hi);
  const double tv = oracle::quad_divergence(DivergenceSpec::tv(), g, f, lo, hi);
  v.require(std::abs(kl - 0.5) < 1e-6, "KL " + num(kl));
  v.require(std::abs(h2 - (1.0 - std::exp(-0.125))) < 1e-6, "H2 " + num(h2));
  v.require(std::abs(tv - (2.0 * normal_cdf(0.5) - 1.0)) < 1e-6, "TV " + num(tv));
  return v;
}

Verdict inequalities() {
  Verdict v;
  constexpr double slack = 1e-8;
  Rng rng(derive_seed(20180101, 3));
  std::uniform_real_distribution<double> mean(-2.0, 2.0), sd(0.5, 2.0);
  std::size_t violations[4] = {0, 0, 0, 0};
  for (int k = 0; k < 1000; ++k) {
    const double m1 = mean(rng), s1 = sd(rng), m2 = mean(rng), s2 = sd(rng);
    const auto g = oracle::gaussian_density(m1, s1);
    const auto f = oracle::gaussian_density(m2, s2);
    const auto [lo, hi] = oracle::gaussian_interval(m1, s1, m2, s2);
    const double kl = oracle::quad_kl_log(oracle::gaussian_log_density(m1, s1),
                                          oracle::gaussian_log_density(m2, s2), lo, hi);
    const double h2 = oracle::quad_divergence(DivergenceSpec::hellinger(), g, f, lo, hi);
    const double tv = oracle::quad_divergence(DivergenceSpec::tv(), g, f, lo, hi);
    if (!(tv <= std::sqrt(kl / 2.0) + slack)) ++violations[0];
    if (!(h2 <= tv + slack && tv <= std::sqrt(h2 * (2.0 - h2)) + slack &&
          std::sqrt(h2 * (2.0 - h2)) <= std::sqrt(2.0 * h2) + slack)) {
      ++violations[1];
    }
    for (double a : {0.25, 0.5, 0.75, 0.9}) {
      const double d = oracle::quad_divergence(DivergenceSpec::alpha(a), g, f, lo, hi);
      if (!(a * (1.0 - a) * d <= tv + slack)) ++violations[2];
      if (a == 0.5 && !(std::abs(d - 4.0 * h2) <= slack)) ++violations[3];
    }
  }
  v.require(violations[0] == 0, "Pinsker violations " + std::to_string(violations[0]));
  v.require(violations[1] == 0, "sandwich violations " + std::to_string(violations[1]));
  v.require(violations[2] == 0, "Sason violations " + std::to_string(violations[2]));
  v.require(violations[3] == 0, "alpha=0.5 vs 4 H2 violations " + std::to_string(violations[3]));
  return v;
}

Verdict slices() {
  Verdict v;
  const ModelFamily family = GaussianModel{};
  Rng rng(derive_seed(20180101, 4));
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0.1, 2.0);

  std::size_t mismatched = 0;
  for (int k = 0; k < 2000; ++k) {
    const std::vector<double> theta = {nd(rng), 0.5 * nd(rng)};
    const Observation obs{2.0 * nd(rng), {}};
    const double a = u(rng);
    if (loss_alphabeta(family, theta, obs, u(rng), 1.0, a) != loss_dpd(family, theta, obs, a)) ++mismatched;
  }
  v.require(mismatched == 0, "alphabeta(1, a) vs dpd(a) mismatches " + std::to_string(mismatched));

  const auto grid = oracle::location_scale_grid(-2.0, 2.0, 50, 0.3, 3.0, 50);
  std::size_t disagree = 0;
  for (int d = 0; d < 20; ++d) {
    std::vector<double> y(50);
    const double m = nd(rng), s = 0.5 + u(rng);
    for (auto& x : y) x = m + s * nd(rng);
    const Dataset data(y);
    const LossContext ctx = density_context(data);
    const double a = 0.2 + 0.6 * static_cast<double>(d) / 19.0;
    auto argmin = [&](auto&& total) {
      std::size_t best = 0;
      double best_value = INFINITY;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double value = total(grid[i]);
        if (value < best_value) best_value = value, best = i;
      }
      return best;
    };
    const auto ab = argmin([&](const std::vector<double>& t) {
      double s = 0.0;
      for (std::size_t i = 0; i < data.size(); ++i) s += loss_alphabeta(family, t, data[i], ctx[i], a, 1.0 - a);
      return s;
    });
    const auto al = argmin([&](const std::vector<double>& t) {
      double s = 0.0;
      for (std::size_t i = 0; i < data.size(); ++i) s += loss_alpha(family, t, data[i], ctx[i], a);
      return s;
    });
    if (ab != al) ++disagree;
  }
  v.require(disagree == 0, "argmin disagreements " + std::to_string(disagree) + " of 20");
  return v;
}

Verdict contamination(const fs::path& work) {
  Verdict v;
  const auto result = experiments::run_simple(config_for(Study::Simple, work / "simple"));
  double kl = NAN, power = NAN;
  for (const auto& r : result.rows) {
    if (r.spec == DivergenceSpec::kl()) kl = r.sigma_mean;
    if (r.spec == DivergenceSpec::power(0.5)) power = r.sigma_mean;
  }
  v.require(kl > 1.15, "default seed sigma KL " + num(kl) + " > 1.15");
  v.require(power >= 0.9 && power <= 1.15, "sigma power " + num(power) + " in [0.9, 1.15]");

  int ordered = 0;
  std::string seeds;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const std::uint64_t seed = experiments::stream_seed(20180101, {100, k});
    const auto r = experiments::run_simple(
        config_for(Study::Simple, work / ("simple_seed" + std::to_string(k)),
                   {{"seed", std::to_string(seed)}, {"divergences", "kl,power:0.5"},
                    {"predictive_draws", "1000"}}));
    const bool ok = r.rows[0].sigma_mean > r.rows[1].sigma_mean;
    ordered += ok ? 1 : 0;
    seeds += (k ? "," : "") + num(r.rows[0].sigma_mean) + "/" + num(r.rows[1].sigma_mean);
  }
  v.require(ordered >= 9, "KL > power on " + std::to_string(ordered) + " of 10 seeds (" + seeds + ")");
  return v;
}

Verdict regression(const fs::path& work) {
  Verdict v;
  const auto config = config_for(Study::Regression, work / "regression");
  const auto result = experiments::run_regression(config);
  for (std::size_t p : config.p_values) {
    const double kl = result.cell(p, DivergenceSpec::kl()).sigma2_mean;
    for (const auto& spec : config.divergences) {
      if (spec == DivergenceSpec::kl()) continue;
      const double d = result.cell(p, spec).sigma2_mean;
      v.require(kl > d, "p=" + std::to_string(p) + " sigma2 KL " + num(kl) + " > " + spec.name() + " " + num(d));
    }
  }
  const double kl = result.cell(5, DivergenceSpec::kl()).test_mse;
  const double power = result.cell(5, DivergenceSpec::power(0.5)).test_mse;
  v.require(kl > power, "p=5 test MSE KL " + num(kl) + " > power " + num(power));
  return v;
}

Verdict timeseries(const fs::path& work) {
  Verdict v;
  const auto result = experiments::run_timeseries(config_for(Study::TimeSeries, work / "timeseries"));
  const auto rmse = [&](const char* d, const DivergenceSpec& s) { return result.row(d, s).rmse; };
  for (const char* d : {"garch_high", "garch_low"}) {
    const double h = rmse(d, DivergenceSpec::hellinger()), k = rmse(d, DivergenceSpec::kl());
    v.require(h < k, std::string(d) + " RMSE Hell " + num(h) + " < KL " + num(k));
  }
  const double ratio = rmse("ar3", DivergenceSpec::hellinger()) / rmse("ar3", DivergenceSpec::kl());
  v.require(ratio >= 0.9 && ratio <= 1.1, "ar3 RMSE ratio " + num(ratio) + " in [0.9, 1.1]");
  return v;
}

Verdict efficiency(const fs::path& work) {
  Verdict v;
  const auto config = config_for(Study::Efficiency, work / "efficiency", {{"sizes", "50,500"}});
  const auto result = experiments::run_efficiency(config);
  const double ratio = result.cell(50, 15.0, DivergenceSpec::power(0.5)).mu_mse /
                       result.cell(50, 15.0, DivergenceSpec::kl()).mu_mse;
  v.require(ratio > 5.0, "n=50 miscentered mu-MSE power/KL " + num(ratio) + " > 5");

  std::vector<double> mse;
  for (const auto& s : {DivergenceSpec::kl(), DivergenceSpec::hellinger(), DivergenceSpec::alpha(0.75)}) {
    mse.push_back(result.cell(500, 0.0, s).mu_mse);
  }
  const auto [lo, hi] = std::minmax_element(mse.begin(), mse.end());
  v.require(*hi <= 2.0 * *lo, "n=500 centered mu-MSE KL/Hell/alpha " + num(mse[0]) + "/" + num(mse[1]) +
                                  "/" + num(mse[2]) + " within factor 2");

  std::size_t under = 0, used = 0;
  for (const auto& r : result.repeats) {
    if (!(r.spec == DivergenceSpec::hellinger()) || r.excluded) continue;
    ++used;
    if (r.sigma_hat < config.data_sd) ++under;
  }
  v.require(2 * under > used, "Hellinger sigma under-estimates in " + std::to_string(under) + " of " +
                                  std::to_string(used) + " repeats");
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism(const fs::path& work) {
  Verdict v;
  // Reruns the exact configurations used above into fresh directories.
  const std::vector<std::pair<Study, std::map<std::string, std::string>>> runs = {
      {Study::Simple, {}},
      {Study::Regression, {}},
      {Study::TimeSeries, {}},
      {Study::Efficiency, {{"sizes", "50,500"}}},
      {Study::Scores, {}},
      {Study::OracleCheck, {}}};
  for (const auto& [study, settings] : runs) {
    const std::string name(study_name(study));
    const fs::path first = work / name;
    const fs::path second = work / (name + "_rerun");
    if (!fs::exists(first)) experiments::run_study(config_for(study, first, settings));
    experiments::run_study(config_for(study, second, settings));
    std::size_t files = 0, differing = 0;
    for (const auto& e : fs::directory_iterator(first)) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      const fs::path other = second / e.path().filename();
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differing;
    }
    v.require(files > 0 && differing == 0,
              name + " " + std::to_string(files - differing) + "/" + std::to_string(files) + " CSVs identical");
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the divbayes library"};
  std::string work_dir = "acceptance_out";
  std::vector<int> only;
  app.add_option("--work-dir", work_dir, "directory for study outputs");
  app.add_option("--only", only, "run only these criterion numbers");
  CLI11_PARSE(app, argc, argv);

  const fs::path work = work_dir;
  fs::remove_all(work);
  fs::create_directories(work);

  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "conjugate posterior", 10, conjugate},
      {2, "divergence closed forms", 5, closed_forms},
      {3, "divergence inequalities", 60, inequalities},
      {4, "alpha-beta slices", 60, slices},
      {5, "contamination scale ordering", 600, [&] { return contamination(work); }},
      {6, "regression orderings", 1800, [&] { return regression(work); }},
      {7, "time series orderings", 1200, [&] { return timeseries(work); }},
      {8, "efficiency properties", 1800, [&] { return efficiency(work); }},
      {9, "determinism", 3600, [&] { return determinism(work); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.require(seconds < c.limit_seconds, "runtime " + num(seconds) + " s < " + num(c.limit_seconds) + " s");
    if (!v.pass) ++failures;
    std::printf("criterion %d: %s  %s: %s\n", c.id, v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "divbayes/divergences.hpp"

using namespace divbayes;

namespace {

const double kPhi0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);  // 0.398942
const double kPowerIntegralHalf = std::pow(2.0 * std::numbers::pi, -0.25) / std::sqrt(1.5);

const ModelFamily kGauss = GaussianModel{};
const std::vector<double> kUnit = {0.0, 0.0};

Observation at(double x) { return {x, {}}; }

}  // namespace

TEST_SUITE("divergences") {

TEST_CASE("DivergenceSpec rejects invalid hyperparameters") {
  CHECK_THROWS_AS(DivergenceSpec::alpha(0.0), std::invalid_argument);
  CHECK_THROWS_AS(DivergenceSpec::alpha(1.0), std::invalid_argument);
  CHECK_THROWS_AS(DivergenceSpec::power(0.0), std::invalid_argument);
  CHECK_THROWS_AS(DivergenceSpec::alpha_beta(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(DivergenceSpec::alpha_beta(1.0, 0.0), std::invalid_argument);
  CHECK_NOTHROW(DivergenceSpec::alpha_beta(1.0, 0.5));
}

TEST_CASE("parse round-trips names") {
  for (const auto& s : {DivergenceSpec::kl(), DivergenceSpec::hellinger(), DivergenceSpec::tv(),
                        DivergenceSpec::alpha(0.75), DivergenceSpec::power(0.5),
                        DivergenceSpec::alpha_beta(1.0, 0.5)}) {
    CHECK(DivergenceSpec::parse(s.name()) == s);
  }
  CHECK(DivergenceSpec::parse("alpha") == DivergenceSpec::alpha(0.75));
  CHECK(DivergenceSpec::parse("power") == DivergenceSpec::power(0.5));
  CHECK(DivergenceSpec::parse("dpd:0.3") == DivergenceSpec::power(0.3));
  CHECK_THROWS_AS(DivergenceSpec::parse("wasserstein"), std::invalid_argument);
  CHECK_THROWS_AS(DivergenceSpec::parse("alpha:x"), std::invalid_argument);
  CHECK_THROWS_AS(DivergenceSpec::parse("alphabeta:1"), std::invalid_argument);
}

TEST_CASE("density estimate requirement") {
  CHECK_FALSE(DivergenceSpec::kl().needs_density_estimate());
  CHECK_FALSE(DivergenceSpec::power(0.5).needs_density_estimate());
  CHECK_FALSE(DivergenceSpec::alpha_beta(1.0, 0.5).needs_density_estimate());
  CHECK(DivergenceSpec::hellinger().needs_density_estimate());
  CHECK(DivergenceSpec::tv().needs_density_estimate());
  CHECK(DivergenceSpec::alpha(0.75).needs_density_estimate());
  CHECK(DivergenceSpec::alpha_beta(0.5, 0.5).needs_density_estimate());
}

TEST_CASE("kl loss") {
  CHECK(loss_kl(kGauss, kUnit, at(0.0)) == doctest::Approx(0.918938533).epsilon(1e-9));
  // sigma = 1 / sqrt(2 pi) makes f(mu) = 1.
  const std::vector<double> peak = {0.0, -0.5 * std::log(2.0 * std::numbers::pi)};
  CHECK(std::abs(loss_kl(kGauss, peak, at(0.0))) < 1e-12);
  CHECK(loss_kl(kGauss, kUnit, at(50.0)) > 1000.0);
}

TEST_CASE("hellinger loss") {
  CHECK(loss_hellinger(kGauss, kUnit, at(0.0), kPhi0) == doctest::Approx(-1.0));
  CHECK(loss_hellinger(kGauss, kUnit, at(0.0), 0.2) == doctest::Approx(-1.41234).epsilon(1e-5));
  CHECK(loss_hellinger(kGauss, kUnit, at(60.0), 0.2) == doctest::Approx(0.0));
}

TEST_CASE("tv loss") {
  CHECK(loss_tv(kGauss, kUnit, at(0.0), kPhi0) == doctest::Approx(0.0));
  CHECK(loss_tv(kGauss, kUnit, at(60.0), 0.3) == doctest::Approx(0.5));
  CHECK(loss_tv(kGauss, kUnit, at(0.0), kPhi0 / 3.0) == doctest::Approx(1.0));
  // Not monotone in f: both under- and over-prediction are penalized.
  CHECK(loss_tv(kGauss, kUnit, at(0.0), kPhi0 * 2.0) > 0.0);
  CHECK(loss_tv(kGauss, kUnit, at(0.0), kPhi0 / 2.0) > 0.0);
}

TEST_CASE("alpha loss") {
  CHECK(loss_alpha(kGauss, kUnit, at(0.0), kPhi0, 0.75) == doctest::Approx(-16.0 / 3.0));
  CHECK(loss_alpha(kGauss, kUnit, at(60.0), 0.3, 0.6) == doctest::Approx(0.0));
  CHECK(score::alpha(std::log(0.1), 0.4, 0.5) == doctest::Approx(-2.0));
  CHECK(score::alpha(std::log(0.1), 0.4, 0.5) ==
        doctest::Approx(4.0 * score::hellinger(std::log(0.1), 0.4)));
}

TEST_CASE("density power loss uses the integral of f^(1 + alpha)") {
  const double expected = -(2.0 * std::sqrt(kPhi0) - kPowerIntegralHalf / 1.5);
  CHECK(loss_dpd(kGauss, kUnit, at(0.0), 0.5) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(loss_dpd(kGauss, kUnit, at(0.0), 0.5) == doctest::Approx(-0.91943).epsilon(1e-5));
  CHECK(loss_dpd(kGauss, kUnit, at(80.0), 0.5) == doctest::Approx(0.343810).epsilon(1e-6));
}

TEST_CASE("density power loss minus kl is theta-constant as alpha -> 0") {
  // (f^a - 1) / a -> log f, so loss_dpd + 1/a - 1/(1+a) tends to loss_kl.
  const double a = 1e-4;
  double lo = INFINITY, hi = -INFINITY;
  for (double mu = -1.0; mu <= 1.0; mu += 0.25) {
    for (double ls = -0.5; ls <= 0.5; ls += 0.25) {
      const std::vector<double> theta = {mu, ls};
      const double d = loss_dpd(kGauss, theta, at(0.3), a) - loss_kl(kGauss, theta, at(0.3));
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  CHECK(hi - lo < 1e-3);
}

TEST_CASE("alpha-beta slices") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> theta = {u(rng) / 3, u(rng) / 6};
    const double x = u(rng);
    const double a = 0.05 + std::abs(u(rng)) / 2;
    CHECK(loss_alphabeta(kGauss, theta, at(x), 0.123, 1.0, a) == loss_dpd(kGauss, theta, at(x), a));
    const double diff = loss_alphabeta(kGauss, theta, at(x), 0.2, 0.75, 0.25) -
                        loss_alpha(kGauss, theta, at(x), 0.2, 0.75);
    CHECK(diff == doctest::Approx(1.0 / 0.75).epsilon(1e-10));
  }
  const double f0 = loss_alphabeta(kGauss, kUnit, at(80.0), 0.2, 1.0, 0.5);
  CHECK(f0 == doctest::Approx(kPowerIntegralHalf / 1.5).epsilon(1e-10));
}

TEST_CASE("bounds over random inputs") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-6, 6), lg(-30, 0);
  for (int k = 0; k < 2000; ++k) {
    const std::vector<double> theta = {u(rng) / 2, u(rng) / 4};
    const double x = u(rng);
    const double g = std::exp(lg(rng));
    const double f = std::exp(log_density(kGauss, theta, at(x)));
    const double h = loss_hellinger(kGauss, theta, at(x), g);
    CHECK(h <= 0.0);
    CHECK(h >= -std::sqrt(f / kDensityFloor) * (1.0 + 1e-12));
    CHECK(loss_tv(kGauss, theta, at(x), g) >= 0.0);
    CHECK(loss_alpha(kGauss, theta, at(x), g, 0.6) <= 0.0);
  }
  CHECK(loss_tv(kGauss, kUnit, at(0.0), 0.0) == doctest::Approx(0.5 * (kPhi0 / kDensityFloor - 1)));
}

TEST_CASE("loss context floors values") {
  const LossContext ctx({0.0, -1.0, NAN, 0.5});
  CHECK(ctx[0] == kDensityFloor);
  CHECK(ctx[1] == kDensityFloor);
  CHECK(ctx[2] == kDensityFloor);
  CHECK(ctx[3] == 0.5);
}

TEST_CASE("kl posterior differences equal analytic log posterior differences") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> y(30);
  for (auto& v : y) v = 1.0 + 2.0 * z(rng);
  const auto prior = location_scale_prior(0.0, 10.0, 0.001, 0.001);
  const GBPosterior post(kGauss, prior, Dataset(y), DivergenceSpec::kl());
  auto analytic = [&](const std::vector<double>& t) {
    const double s = std::exp(t[1]);
    double ll = 0.0;
    for (double v : y) ll += -std::log(s) - 0.5 * std::log(2 * std::numbers::pi) - 0.5 * (v - t[0]) * (v - t[0]) / (s * s);
    const double lp = -0.5 * t[0] * t[0] / 100.0 + (0.001 - 1) * std::log(s) - 0.001 * s + t[1];
    return ll + lp;
  };
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 100; ++k) {
    const std::vector<double> a = {1 + u(rng), std::log(2.0) + 0.3 * u(rng)};
    const std::vector<double> b = {1 + u(rng), std::log(2.0) + 0.3 * u(rng)};
    const double got = gb_log_posterior(post, a) - gb_log_posterior(post, b);
    CHECK(std::abs(got - (analytic(a) - analytic(b))) < 1e-10);
  }
}

TEST_CASE("kl posterior on a grid peaks at the conjugate mode") {
  const ModelFamily known = GaussianModel{1.0};
  const std::vector<double> y = {0.5, 1.5, 0.0, 2.0};
  const GBPosterior post(known, location_prior(0.0, 1.0), Dataset(y), DivergenceSpec::kl());
  double best = -INFINITY, arg = 0.0;
  for (int i = -2000; i <= 2000; ++i) {
    const std::vector<double> t = {i * 0.001};
    const double v = gb_log_posterior(post, t);
    if (v > best) best = v, arg = t[0];
  }
  CHECK(arg == doctest::Approx(0.8).epsilon(1e-9));
}

TEST_CASE("hellinger with g equal to f gives total loss -n") {
  const std::vector<double> y = {-0.5, 0.1, 0.7, 1.4};
  std::vector<double> g;
  for (double v : y) g.push_back(std::exp(log_density(kGauss, kUnit, at(v))));
  const GBPosterior post(kGauss, location_scale_prior(0, 10, 1, 1), Dataset(y),
                         DivergenceSpec::hellinger(), LossContext(g));
  CHECK(post.total_loss(kUnit) == doctest::Approx(-4.0));
}

TEST_CASE("empty data returns the log prior and missing context throws") {
  const auto prior = location_scale_prior(0, 10, 0.001, 0.001);
  const GBPosterior post(kGauss, prior, Dataset{}, DivergenceSpec::kl());
  const std::vector<double> theta = {0.4, -0.2};
  CHECK(gb_log_posterior(post, theta) == log_prior(prior, theta));
  const std::vector<double> y = {1.0, 2.0};
  CHECK_THROWS_AS(GBPosterior(kGauss, prior, Dataset(y), DivergenceSpec::hellinger()),
                  std::invalid_argument);
  CHECK_THROWS_AS(GBPosterior(kGauss, prior, Dataset(y), DivergenceSpec::tv(), LossContext({1.0})),
                  std::invalid_argument);
}

TEST_CASE("log posterior is order invariant for a fixed context") {
  const std::vector<double> y = {0.3, -1.2, 2.2, 0.9, 0.0};
  const std::vector<double> g = {0.3, 0.1, 0.05, 0.25, 0.4};
  const std::vector<double> yp = {2.2, 0.0, 0.3, 0.9, -1.2};
  const std::vector<double> gp = {0.05, 0.4, 0.3, 0.25, 0.1};
  const auto prior = location_scale_prior(0, 10, 1, 1);
  for (const auto& spec : {DivergenceSpec::kl(), DivergenceSpec::hellinger(), DivergenceSpec::tv(),
                           DivergenceSpec::alpha(0.75), DivergenceSpec::power(0.5)}) {
    const GBPosterior a(kGauss, prior, Dataset(y), spec, LossContext(g));
    const GBPosterior b(kGauss, prior, Dataset(yp), spec, LossContext(gp));
    const std::vector<double> theta = {0.2, 0.1};
    CHECK(gb_log_posterior(a, theta) == doctest::Approx(gb_log_posterior(b, theta)).epsilon(1e-13));
  }
}

TEST_CASE("argmin of summed dpd matches kl for small alpha") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    std::normal_distribution<double> z(0.5, 1.3);
    std::vector<double> y(40);
    for (auto& v : y) v = z(rng);
    std::pair<int, int> best_kl, best_dpd;
    double vk = INFINITY, vd = INFINITY;
    for (int i = 0; i < 41; ++i) {
      for (int j = 0; j < 41; ++j) {
        const std::vector<double> theta = {-0.5 + 0.05 * i, std::log(0.6 + 0.04 * j)};
        double sk = 0.0, sd = 0.0;
        for (double v : y) {
          sk += loss_kl(kGauss, theta, at(v));
          sd += loss_dpd(kGauss, theta, at(v), 1e-4);
        }
        if (sk < vk) vk = sk, best_kl = {i, j};
        if (sd < vd) vd = sd, best_dpd = {i, j};
      }
    }
    CHECK(std::abs(best_kl.first - best_dpd.first) <= 1);
    CHECK(std::abs(best_kl.second - best_dpd.second) <= 1);
  }
}

TEST_CASE("score shapes at fixed g") {
  const double g = 0.25;
  double prev_kl = INFINITY;
  for (int i = 1; i < 100; ++i) {
    const double lf = std::log(i / 100.0);
    const double kl = score::kl(lf);
    CHECK(kl < prev_kl);
    prev_kl = kl;
    if (i > 1 && i < 99) {
      // Strict convexity: midpoint below the chord.
      const double left = score::kl(std::log((i - 1) / 100.0));
      const double right = score::kl(std::log((i + 1) / 100.0));
      CHECK(kl < 0.5 * (left + right));
    }
  }
  CHECK(score::kl(-INFINITY) == INFINITY);
  CHECK(std::isfinite(score::hellinger(-INFINITY, g)));
  CHECK(std::isfinite(score::alpha(-INFINITY, g, 0.75)));
  CHECK(score::hellinger(std::log(g), g) == doctest::Approx(-1.0));
}

}  // TEST_SUITE

#pragma once

// Conditionally Gaussian model families and the prior blocks used with them.
//
// Every family maps (theta, conditioning values) to a Gaussian conditional
// density N(mean, sigma^2). Scale parameters live on the log scale in theta,
// so any finite theta is a valid parameter.

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "divbayes/types.hpp"

namespace divbayes {

/// N(mu, sigma^2) with theta = (mu, log sigma), or theta = (mu) when sigma is known.
struct GaussianModel {
  std::optional<double> fixed_sigma;
};

/// y | x ~ N(x . beta, sigma^2) with theta = (beta_1..beta_p, log sigma).
struct LinRegModel {
  std::size_t p = 1;
};

/// x_t | history ~ N(c + sum_j phi_j x_{t-j}, sigma^2) with theta = (c, phi_1..phi_L, log sigma).
struct ARModel {
  std::size_t lags = 1;
};

using ModelFamily = std::variant<GaussianModel, LinRegModel, ARModel>;

std::size_t param_dim(const ModelFamily& family);
std::size_t covariate_dim(const ModelFamily& family);

double conditional_mean(const ModelFamily& family, Params theta, std::span<const double> x);
double log_sigma(const ModelFamily& family, Params theta);

/// log f(y | x; theta). Returns -inf for non-finite theta.
double log_density(const ModelFamily& family, Params theta, const Observation& obs);

/// log of the integral of f(y | x; theta)^(1 + gamma) dy, for gamma > -1.
///
/// For a d-dimensional Gaussian with covariance S the integral equals
/// (1 + gamma)^(-d/2) (2 pi)^(-d gamma / 2) |S|^(-gamma / 2); here d = 1 and
/// the value does not depend on the conditional mean.
double log_power_integral(const ModelFamily& family, Params theta, double gamma);
double power_integral(const ModelFamily& family, Params theta, double gamma);

/// One draw from f(. | x; theta).
double sample(const ModelFamily& family, Params theta, std::span<const double> x, Rng& rng);

// Scalar log densities.
double normal_log_pdf(double x, double mean, double sd);
double gamma_log_pdf(double x, double shape, double rate);
double inv_gamma_log_pdf(double x, double shape, double scale);

// ---------------------------------------------------------------------------
// Priors

/// theta[index] ~ N(mean, sd^2).
struct NormalPrior {
  std::size_t index = 0;
  double mean = 0.0;
  double sd = 1.0;
};

/// sigma = exp(theta[index]) ~ Gamma(shape, rate), with the log-sigma Jacobian.
struct GammaSigmaPrior {
  std::size_t index = 0;
  double shape = 1.0;
  double rate = 1.0;
};

/// sigma^2 ~ IG(shape, scale) and coefficient_k | sigma^2 ~ N(0, variance_ratio * sigma^2)
/// for the coefficients theta[first_coef .. first_coef + n_coef), with sigma^2 = exp(2 theta[log_sigma_index]).
struct ConjugateRegressionPrior {
  std::size_t first_coef = 0;
  std::size_t n_coef = 1;
  std::size_t log_sigma_index = 1;
  double shape = 2.0;
  double scale = 0.5;
  double variance_ratio = 5.0;
};

using PriorBlock = std::variant<NormalPrior, GammaSigmaPrior, ConjugateRegressionPrior>;

/// Independent prior blocks that together cover every parameter exactly once.
class PriorSpec {
 public:
  PriorSpec(std::size_t dim, std::vector<PriorBlock> blocks);

  std::size_t dim() const { return dim_; }
  const std::vector<PriorBlock>& blocks() const { return blocks_; }

  /// Sum of block log densities in unconstrained coordinates. Throws on dimension mismatch.
  double log_density(Params theta) const;

  /// A central point and per-coordinate spread of the prior in unconstrained coordinates.
  std::vector<double> center() const;
  std::vector<double> spread() const;

 private:
  std::size_t dim_;
  std::vector<PriorBlock> blocks_;
};

double log_prior(const PriorSpec& prior, Params theta);

/// mu ~ N(location_mean, location_sd^2), sigma ~ Gamma(shape, rate).
PriorSpec location_scale_prior(double location_mean, double location_sd, double sigma_shape,
                               double sigma_rate);
/// Known-sigma location model: mu ~ N(mean, sd^2).
PriorSpec location_prior(double mean, double sd);
/// Conjugate regression prior over `n_coef` coefficients followed by log sigma.
PriorSpec conjugate_regression_prior(std::size_t n_coef, double shape = 2.0, double scale = 0.5,
                                     double variance_ratio = 5.0);

}  // namespace divbayes

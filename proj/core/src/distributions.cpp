#include "divbayes/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace divbayes {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool all_finite(Params theta) {
  for (double v : theta) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void check_theta(const ModelFamily& family, Params theta) {
  if (theta.size() != param_dim(family)) {
    throw std::invalid_argument("parameter vector has length " + std::to_string(theta.size()) +
                                ", model expects " + std::to_string(param_dim(family)));
  }
}

}  // namespace

std::size_t param_dim(const ModelFamily& family) {
  return std::visit(Overloaded{
                        [](const GaussianModel& m) -> std::size_t { return m.fixed_sigma ? 1 : 2; },
                        [](const LinRegModel& m) -> std::size_t { return m.p + 1; },
                        [](const ARModel& m) -> std::size_t { return m.lags + 2; },
                    },
                    family);
}

std::size_t covariate_dim(const ModelFamily& family) {
  return std::visit(Overloaded{
                        [](const GaussianModel&) -> std::size_t { return 0; },
                        [](const LinRegModel& m) -> std::size_t { return m.p; },
                        [](const ARModel& m) -> std::size_t { return m.lags; },
                    },
                    family);
}

double conditional_mean(const ModelFamily& family, Params theta, std::span<const double> x) {
  return std::visit(Overloaded{
                        [&](const GaussianModel&) { return theta[0]; },
                        [&](const LinRegModel& m) {
                          double mean = 0.0;
                          for (std::size_t j = 0; j < m.p; ++j) mean += theta[j] * x[j];
                          return mean;
                        },
                        [&](const ARModel& m) {
                          double mean = theta[0];
                          for (std::size_t j = 0; j < m.lags; ++j) mean += theta[j + 1] * x[j];
                          return mean;
                        },
                    },
                    family);
}

double log_sigma(const ModelFamily& family, Params theta) {
  if (const auto* g = std::get_if<GaussianModel>(&family); g && g->fixed_sigma) {
    return std::log(*g->fixed_sigma);
  }
  return theta.back();
}

double log_density(const ModelFamily& family, Params theta, const Observation& obs) {
  check_theta(family, theta);
  if (!all_finite(theta)) return kNegInf;
  const double mean = conditional_mean(family, theta, obs.x);
  const double ls = log_sigma(family, theta);
  const double z = (obs.y - mean) * std::exp(-ls);
  return -0.5 * z * z - ls - kLogSqrt2Pi;
}

double log_power_integral(const ModelFamily& family, Params theta, double gamma) {
  check_theta(family, theta);
  if (!(gamma > -1.0)) {
    throw std::invalid_argument("power integral requires gamma > -1");
  }
  const double ls = log_sigma(family, theta);
  // d = 1: -(1/2) log(1 + gamma) - (gamma / 2) log(2 pi) - gamma log sigma
  return -0.5 * std::log1p(gamma) - gamma * (kLogSqrt2Pi + ls);
}

double power_integral(const ModelFamily& family, Params theta, double gamma) {
  return std::exp(log_power_integral(family, theta, gamma));
}

double sample(const ModelFamily& family, Params theta, std::span<const double> x, Rng& rng) {
  check_theta(family, theta);
  std::normal_distribution<double> z(0.0, 1.0);
  return conditional_mean(family, theta, x) + std::exp(log_sigma(family, theta)) * z(rng);
}

double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

double gamma_log_pdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double inv_gamma_log_pdf(double x, double shape, double scale) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

// ---------------------------------------------------------------------------

PriorSpec::PriorSpec(std::size_t dim, std::vector<PriorBlock> blocks)
    : dim_(dim), blocks_(std::move(blocks)) {
  std::vector<int> covered(dim_, 0);
  auto mark = [&](std::size_t i) {
    if (i >= dim_) throw std::invalid_argument("prior block index out of range");
    ++covered[i];
  };
  for (const auto& block : blocks_) {
    std::visit(Overloaded{
                   [&](const NormalPrior& b) {
                     if (!(b.sd > 0.0)) throw std::invalid_argument("normal prior sd must be > 0");
                     mark(b.index);
                   },
                   [&](const GammaSigmaPrior& b) {
                     if (!(b.shape > 0.0) || !(b.rate > 0.0)) {
                       throw std::invalid_argument("gamma prior needs shape, rate > 0");
                     }
                     mark(b.index);
                   },
                   [&](const ConjugateRegressionPrior& b) {
                     if (!(b.shape > 0.0) || !(b.scale > 0.0) || !(b.variance_ratio > 0.0)) {
                       throw std::invalid_argument("conjugate prior needs positive hyperparameters");
                     }
                     for (std::size_t k = 0; k < b.n_coef; ++k) mark(b.first_coef + k);
                     mark(b.log_sigma_index);
                   },
               },
               block);
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    if (covered[i] != 1) {
      throw std::invalid_argument("prior blocks must cover parameter " + std::to_string(i) +
                                  " exactly once");
    }
  }
}

double PriorSpec::log_density(Params theta) const {
  if (theta.size() != dim_) {
    throw std::invalid_argument("prior expects " + std::to_string(dim_) + " parameters, got " +
                                std::to_string(theta.size()));
  }
  if (!all_finite(theta)) return kNegInf;
  double total = 0.0;
  for (const auto& block : blocks_) {
    total += std::visit(
        Overloaded{
            [&](const NormalPrior& b) { return normal_log_pdf(theta[b.index], b.mean, b.sd); },
            [&](const GammaSigmaPrior& b) {
              const double u = theta[b.index];
              // p(u) = p_sigma(e^u) e^u
              return gamma_log_pdf(std::exp(u), b.shape, b.rate) + u;
            },
            [&](const ConjugateRegressionPrior& b) {
              const double u = theta[b.log_sigma_index];
              const double sigma2 = std::exp(2.0 * u);
              // p(u) = p_{sigma^2}(e^{2u}) * 2 e^{2u}
              double lp = inv_gamma_log_pdf(sigma2, b.shape, b.scale) + std::log(2.0) + 2.0 * u;
              const double coef_sd = std::sqrt(b.variance_ratio * sigma2);
              for (std::size_t k = 0; k < b.n_coef; ++k) {
                lp += normal_log_pdf(theta[b.first_coef + k], 0.0, coef_sd);
              }
              return lp;
            },
        },
        block);
  }
  return total;
}

std::vector<double> PriorSpec::center() const {
  std::vector<double> c(dim_, 0.0);
  for (const auto& block : blocks_) {
    std::visit(Overloaded{
                   [&](const NormalPrior& b) { c[b.index] = b.mean; },
                   [&](const GammaSigmaPrior& b) { c[b.index] = std::log(b.shape / b.rate); },
                   [&](const ConjugateRegressionPrior& b) {
                     const double typical = b.shape > 1.0 ? b.scale / (b.shape - 1.0)
                                                          : b.scale / (b.shape + 1.0);
                     c[b.log_sigma_index] = 0.5 * std::log(typical);
                     for (std::size_t k = 0; k < b.n_coef; ++k) c[b.first_coef + k] = 0.0;
                   },
               },
               block);
  }
  return c;
}

std::vector<double> PriorSpec::spread() const {
  std::vector<double> s(dim_, 1.0);
  for (const auto& block : blocks_) {
    std::visit(Overloaded{
                   [&](const NormalPrior& b) { s[b.index] = b.sd; },
                   [&](const GammaSigmaPrior& b) { s[b.index] = 1.0; },
                   [&](const ConjugateRegressionPrior& b) {
                     const double typical = b.shape > 1.0 ? b.scale / (b.shape - 1.0)
                                                          : b.scale / (b.shape + 1.0);
                     s[b.log_sigma_index] = 1.0;
                     for (std::size_t k = 0; k < b.n_coef; ++k) {
                       s[b.first_coef + k] = std::sqrt(b.variance_ratio * typical);
                     }
                   },
               },
               block);
  }
  return s;
}

double log_prior(const PriorSpec& prior, Params theta) { return prior.log_density(theta); }

PriorSpec location_scale_prior(double location_mean, double location_sd, double sigma_shape,
                               double sigma_rate) {
  return PriorSpec(2, {NormalPrior{0, location_mean, location_sd},
                       GammaSigmaPrior{1, sigma_shape, sigma_rate}});
}

PriorSpec location_prior(double mean, double sd) {
  return PriorSpec(1, {NormalPrior{0, mean, sd}});
}

PriorSpec conjugate_regression_prior(std::size_t n_coef, double shape, double scale,
                                     double variance_ratio) {
  return PriorSpec(n_coef + 1,
                   {ConjugateRegressionPrior{0, n_coef, n_coef, shape, scale, variance_ratio}});
}

}  // namespace divbayes

#pragma once

// Seeded generators for the simulation studies, and a CSV column reader.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "divbayes/types.hpp"

namespace divbayes::datagen {

/// n draws from 0.99 N(0, 1) + 0.01 N(5, 5^2).
std::vector<double> gen_eps_contam(std::size_t n, std::uint64_t seed);

std::vector<double> gen_normal(std::size_t n, double mean, double sd, std::uint64_t seed);

std::vector<double> gen_student_t(std::size_t n, double df, std::uint64_t seed);

/// Coefficients drawn i.i.d. Unif[-2, 2].
std::vector<double> draw_coefficients(std::size_t p, std::uint64_t seed);

/// sd of the heteroscedastic noise at first covariate x1: exp(2 x1 / 3).
double hetero_noise_sd(double x1);

/// X ~ N_p(0, I), y = X beta + exp(2 x1 / 3) * N(0, 1). Throws when n < p + 2.
Dataset gen_hetero_linreg(std::size_t n, std::size_t p, std::span<const double> beta,
                          std::uint64_t seed);

/// Largest eigenvalue modulus of the AR companion matrix.
double companion_spectral_radius(std::span<const double> lags);

/// x_t = c + sum_j phi_j x_{t-j} + sigma eps_t after 500 burn-in steps from x = 0.
/// Throws std::invalid_argument when the lag polynomial is not stationary.
std::vector<double> gen_ar(std::size_t T, double intercept, std::span<const double> lags,
                           double sigma, std::uint64_t seed);

struct GarchParams {
  double omega = 1.0;
  double alpha1 = 0.5;
  double beta1 = 0.0;
};

/// psi_t^2 = omega + alpha1 e_{t-1}^2 + beta1 psi_{t-1}^2.
double garch_variance_step(const GarchParams& params, double e_prev, double psi2_prev);

struct ArGarchSeries {
  std::vector<double> y;       // observed x + e
  std::vector<double> latent;  // AR process x
  std::vector<double> noise;   // GARCH errors e
};

/// AR series plus independent GARCH(1,1) noise. psi_0^2 starts at omega / (1 - alpha1 - beta1)
/// when alpha1 + beta1 < 1 and at omega otherwise.
ArGarchSeries gen_ar_garch(std::size_t T, double intercept, std::span<const double> lags,
                           double sigma, const GarchParams& garch, std::uint64_t seed);

/// Reads a named numeric column from a comma-separated file with a header row.
/// Throws std::runtime_error naming the file line on missing files, columns, or parse failures.
std::vector<double> load_csv(const std::filesystem::path& path, const std::string& column);

}  // namespace divbayes::datagen

#pragma once

// Reference divergences between 1-d densities by adaptive quadrature, and a
// grid minimizer built on them. Used to check the inference path; the
// inference path never calls into this header.

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "divbayes/distributions.hpp"
#include "divbayes/divergences.hpp"

namespace divbayes::oracle {

using DensityFn = std::function<double(double)>;

/// Adaptive Simpson on [lo, hi], started from `panels` equal panels.
double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double abs_tol = 1e-10, int max_depth = 40, int panels = 32);

/// d(g, f) by quadrature:
///   KL         int g log(g / f)
///   Hellinger  1 - int sqrt(g f)              (squared Hellinger)
///   TV         (1/2) int |g - f|
///   Alpha      (1 - int g^a f^(1-a)) / (a (1 - a))
///   Power      int f^(1+a)/(1+a) - f^a g / a + g^(1+a) / (a (1+a))
///   AlphaBeta  int f^(a+b)/(a(a+b)) - g^a f^b/(a b) + g^(a+b)/(b(a+b))
/// Returns +inf when the integrand is not finite (KL with f = 0 where g > 0).
double quad_divergence(const DivergenceSpec& spec, const DensityFn& g, const DensityFn& f,
                       double lo, double hi);

/// [min(m - 12 s), max(m + 12 s)] over two Gaussians.
std::pair<double, double> gaussian_interval(double m1, double s1, double m2, double s2);

DensityFn gaussian_density(double mean, double sd);
DensityFn student_t_density(double df);
/// 0.99 N(0, 1) + 0.01 N(5, 5^2).
DensityFn eps_contamination_density();

/// int exp(log_g) (log_g - log_f) from log densities, for pairs where f underflows inside [lo, hi].
double quad_kl_log(const DensityFn& log_g, const DensityFn& log_f, double lo, double hi);
DensityFn gaussian_log_density(double mean, double sd);

/// Grid point minimizing quad_divergence(spec, g, f(.; theta)); ties go to the first point.
/// KL uses the model's log density so that far tails do not underflow.
/// Throws std::invalid_argument on an empty grid.
std::vector<double> brute_minimizer(const DivergenceSpec& spec, const DensityFn& g,
                                    const GaussianModel& family,
                                    std::span<const std::vector<double>> theta_grid, double lo,
                                    double hi);

/// Cartesian grid over (mu, log sigma) with `mu_steps` x `sigma_steps` points.
std::vector<std::vector<double>> location_scale_grid(double mu_lo, double mu_hi,
                                                     std::size_t mu_steps, double sigma_lo,
                                                     double sigma_hi, std::size_t sigma_steps);

}  // namespace divbayes::oracle

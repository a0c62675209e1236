#include "divbayes/oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace divbayes::oracle {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Simpson {
  const std::function<double(double)>& f;
  int max_depth;
  bool non_finite = false;

  double eval(double x) {
    const double v = f(x);
    if (!std::isfinite(v)) non_finite = true;
    return v;
  }

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                 int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (non_finite) return kInf;
    if (depth >= max_depth || std::abs(delta) <= 15.0 * tol) {
      return left + right + delta / 15.0;
    }
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

// x log(x / y) with the 0 log 0 = 0 convention.
double xlogxy(double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return kInf;
  return x * std::log(x / y);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double abs_tol, int max_depth, int panels) {
  if (!(hi > lo)) return 0.0;
  Simpson s{f, max_depth};
  const double width = (hi - lo) / panels;
  double total = 0.0;
  double fa = s.eval(lo);
  for (int k = 0; k < panels; ++k) {
    const double a = lo + k * width;
    const double b = k + 1 == panels ? hi : a + width;
    const double m = 0.5 * (a + b);
    const double fm = s.eval(m);
    const double fb = s.eval(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    total += s.recurse(a, b, fa, fm, fb, whole, abs_tol / panels, 0);
    if (s.non_finite) return kInf;
    fa = fb;
  }
  return total;
}

double quad_divergence(const DivergenceSpec& spec, const DensityFn& g, const DensityFn& f,
                       double lo, double hi) {
  const double a = spec.alpha();
  const double b = spec.beta();
  std::function<double(double)> integrand;
  double scale = 1.0;
  switch (spec.kind()) {
    case DivergenceKind::KL:
      integrand = [&](double x) { return xlogxy(g(x), f(x)); };
      break;
    case DivergenceKind::Hellinger:
      // (1/2)(sqrt g - sqrt f)^2 integrates to 1 - int sqrt(g f) without cancellation.
      integrand = [&](double x) {
        const double d = std::sqrt(g(x)) - std::sqrt(f(x));
        return 0.5 * d * d;
      };
      break;
    case DivergenceKind::TV:
      integrand = [&](double x) { return 0.5 * std::abs(g(x) - f(x)); };
      break;
    case DivergenceKind::Alpha:
      // g - g^a f^(1-a) integrates to 1 - int g^a f^(1-a) and vanishes pointwise when g = f.
      integrand = [&, a](double x) {
        const double gx = g(x);
        const double fx = f(x);
        if (gx <= 0.0) return 0.0;
        return gx - std::pow(gx, a) * std::pow(fx, 1.0 - a);
      };
      scale = 1.0 / (a * (1.0 - a));
      break;
    case DivergenceKind::Power:
      integrand = [&, a](double x) {
        const double gx = g(x);
        const double fx = f(x);
        return std::pow(fx, 1.0 + a) / (1.0 + a) - std::pow(fx, a) * gx / a +
               std::pow(gx, 1.0 + a) / (a * (1.0 + a));
      };
      break;
    case DivergenceKind::AlphaBeta:
      integrand = [&, a, b](double x) {
        const double gx = g(x);
        const double fx = f(x);
        return std::pow(fx, a + b) / (a * (a + b)) - std::pow(gx, a) * std::pow(fx, b) / (a * b) +
               std::pow(gx, a + b) / (b * (a + b));
      };
      break;
  }
  const double value = adaptive_simpson(integrand, lo, hi);
  if (!std::isfinite(value)) return kInf;
  return scale * value;
}

std::pair<double, double> gaussian_interval(double m1, double s1, double m2, double s2) {
  return {std::min(m1 - 12.0 * s1, m2 - 12.0 * s2), std::max(m1 + 12.0 * s1, m2 + 12.0 * s2)};
}

DensityFn gaussian_density(double mean, double sd) {
  return [mean, sd](double x) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
  };
}

DensityFn student_t_density(double df) {
  const double log_norm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                          0.5 * std::log(df * std::numbers::pi);
  return [df, log_norm](double x) {
    return std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(x * x / df));
  };
}

DensityFn eps_contamination_density() {
  auto clean = gaussian_density(0.0, 1.0);
  auto contaminant = gaussian_density(5.0, 5.0);
  return [clean, contaminant](double x) { return 0.99 * clean(x) + 0.01 * contaminant(x); };
}

double quad_kl_log(const DensityFn& log_g, const DensityFn& log_f, double lo, double hi) {
  auto integrand = [&](double x) {
    const double lg = log_g(x);
    if (lg == -kInf) return 0.0;
    return std::exp(lg) * (lg - log_f(x));
  };
  const double value = adaptive_simpson(integrand, lo, hi);
  return std::isfinite(value) ? value : kInf;
}

DensityFn gaussian_log_density(double mean, double sd) {
  const double log_norm = -std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
  return [mean, sd, log_norm](double x) {
    const double z = (x - mean) / sd;
    return log_norm - 0.5 * z * z;
  };
}

std::vector<double> brute_minimizer(const DivergenceSpec& spec, const DensityFn& g,
                                    const GaussianModel& family,
                                    std::span<const std::vector<double>> theta_grid, double lo,
                                    double hi) {
  if (theta_grid.empty()) throw std::invalid_argument("brute_minimizer: empty grid");
  const ModelFamily model = family;
  std::size_t best = 0;
  double best_value = kInf;
  for (std::size_t k = 0; k < theta_grid.size(); ++k) {
    const auto& theta = theta_grid[k];
    const double mean = theta[0];
    const double sd = std::exp(log_sigma(model, theta));
    const double value =
        spec.kind() == DivergenceKind::KL
            ? quad_kl_log([&g](double x) { return std::log(g(x)); },
                          gaussian_log_density(mean, sd), lo, hi)
            : quad_divergence(spec, g, gaussian_density(mean, sd), lo, hi);
    if (value < best_value) {
      best_value = value;
      best = k;
    }
  }
  return theta_grid[best];
}

std::vector<std::vector<double>> location_scale_grid(double mu_lo, double mu_hi,
                                                     std::size_t mu_steps, double sigma_lo,
                                                     double sigma_hi, std::size_t sigma_steps) {
  std::vector<std::vector<double>> grid;
  grid.reserve(mu_steps * sigma_steps);
  for (std::size_t i = 0; i < mu_steps; ++i) {
    const double mu =
        mu_steps == 1 ? mu_lo : mu_lo + (mu_hi - mu_lo) * static_cast<double>(i) / (mu_steps - 1);
    for (std::size_t j = 0; j < sigma_steps; ++j) {
      const double sigma = sigma_steps == 1
                               ? sigma_lo
                               : sigma_lo + (sigma_hi - sigma_lo) * static_cast<double>(j) /
                                                (sigma_steps - 1);
      grid.push_back({mu, std::log(sigma)});
    }
  }
  return grid;
}

}  // namespace divbayes::oracle

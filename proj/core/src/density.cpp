#include "divbayes/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace divbayes {
namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> column(const Dataset& data, std::size_t d) {
  std::vector<double> col(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) col[i] = data.row(i)[d];
  return col;
}

std::vector<double> least_squares_residuals(const Dataset& data) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto p = static_cast<Eigen::Index>(data.covariate_dim());
  Eigen::MatrixXd X(n, p + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    const auto row = data.row(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < p; ++j) X(i, j + 1) = row[static_cast<std::size_t>(j)];
    y(i) = data.response()[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd r = y - X * beta;
  return {r.data(), r.data() + r.size()};
}

}  // namespace

double silverman_bandwidth(std::span<const double> data) {
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("bandwidth selection needs at least 2 points");
  for (double v : data) {
    if (!std::isfinite(v)) throw std::invalid_argument("bandwidth selection: non-finite value");
  }
  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : data) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  if (!(spread > 0.0)) throw std::invalid_argument("bandwidth selection: data have zero spread");
  return 1.06 * spread * std::pow(static_cast<double>(n), -0.2);
}

// ---------------------------------------------------------------------------

KDE::KDE(std::vector<double> points, double bandwidth) : points_(std::move(points)), h_(bandwidth) {
  if (points_.empty()) throw std::invalid_argument("KDE needs at least one point");
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw std::invalid_argument("KDE bandwidth must be > 0");
}

double KDE::operator()(double x) const {
  double sum = 0.0;
  for (double p : points_) {
    const double z = (x - p) / h_;
    sum += std::exp(-0.5 * z * z);
  }
  return sum * kInvSqrt2Pi / (static_cast<double>(points_.size()) * h_);
}

double KDE::leave_one_out(std::size_t i) const {
  const std::size_t n = points_.size();
  if (n < 2) throw std::invalid_argument("leave-one-out KDE needs at least 2 points");
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const double z = (points_[i] - points_[j]) / h_;
    sum += std::exp(-0.5 * z * z);
  }
  return sum * kInvSqrt2Pi / (static_cast<double>(n - 1) * h_);
}

KDE fit_kde(std::span<const double> data) {
  const double h = silverman_bandwidth(data);
  return KDE(std::vector<double>(data.begin(), data.end()), h);
}

// ---------------------------------------------------------------------------

ConditionalKDE::ConditionalKDE(Dataset data, std::vector<double> hx, double hy)
    : data_(std::move(data)), hx_(std::move(hx)), hy_(hy) {
  if (data_.empty()) throw std::invalid_argument("conditional KDE needs data");
  if (hx_.size() != data_.covariate_dim()) {
    throw std::invalid_argument("conditional KDE: one x bandwidth per covariate required");
  }
  if (!(hy_ > 0.0)) throw std::invalid_argument("conditional KDE: y bandwidth must be > 0");
  for (double h : hx_) {
    if (!(h > 0.0)) throw std::invalid_argument("conditional KDE: x bandwidths must be > 0");
  }
}

double ConditionalKDE::kernel_x(std::span<const double> x, std::size_t i) const {
  const auto xi = data_.row(i);
  double q = 0.0;
  double norm = 1.0;
  for (std::size_t d = 0; d < hx_.size(); ++d) {
    const double z = (x[d] - xi[d]) / hx_[d];
    q += z * z;
    norm *= kInvSqrt2Pi / hx_[d];
  }
  return norm * std::exp(-0.5 * q);
}

double ConditionalKDE::operator()(std::span<const double> x, double y) const {
  if (x.size() != hx_.size()) throw std::invalid_argument("conditional KDE: dimension mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double kx = kernel_x(x, i);
    const double z = (y - data_.response()[i]) / hy_;
    num += kx * kInvSqrt2Pi / hy_ * std::exp(-0.5 * z * z);
    den += kx;
  }
  const double n = static_cast<double>(data_.size());
  return (num / n) / std::max(den / n, kDensityFloor);
}

double ConditionalKDE::leave_one_out(std::size_t i) const {
  const std::size_t n = data_.size();
  if (n < 2) throw std::invalid_argument("leave-one-out conditional KDE needs at least 2 points");
  const auto x = data_.row(i);
  const double y = data_.response()[i];
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const double kx = kernel_x(x, j);
    const double z = (y - data_.response()[j]) / hy_;
    num += kx * kInvSqrt2Pi / hy_ * std::exp(-0.5 * z * z);
    den += kx;
  }
  const double m = static_cast<double>(n - 1);
  return (num / m) / std::max(den / m, kDensityFloor);
}

ConditionalKDE fit_conditional_kde(const Dataset& data, ConditionalBandwidthFit* report,
                                   const ConditionalBandwidthOptions& options) {
  const std::size_t n = data.size();
  const std::size_t dims = data.covariate_dim();
  if (n < 10) throw std::invalid_argument("conditional KDE needs at least 10 observations");
  if (dims == 0) throw std::invalid_argument("conditional KDE needs at least one covariate");

  std::vector<double> ref_hx(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    const auto col = column(data, d);
    try {
      ref_hx[d] = silverman_bandwidth(col);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("conditional KDE: covariate " + std::to_string(d) +
                                  " has zero spread");
    }
  }
  const double ref_hy = options.reference == ResponseReference::Residual
                            ? silverman_bandwidth(least_squares_residuals(data))
                            : silverman_bandwidth(data.response());
  if (!options.cross_validate) {
    if (report != nullptr) *report = {ref_hx, ref_hy, 1.0, 1.0, 0.0};
    return ConditionalKDE(data, ref_hx, ref_hy);
  }

  // Squared distances in units of the reference bandwidths.
  std::vector<double> dx(n * n, 0.0);
  std::vector<double> dy(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = data.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const auto xj = data.row(j);
      double q = 0.0;
      for (std::size_t d = 0; d < dims; ++d) {
        const double z = (xi[d] - xj[d]) / ref_hx[d];
        q += z * z;
      }
      dx[i * n + j] = q;
      const double zy = (data.response()[i] - data.response()[j]) / ref_hy;
      dy[i * n + j] = zy * zy;
    }
  }

  double log_ref_x_norm = 0.0;
  for (double h : ref_hx) log_ref_x_norm += std::log(kInvSqrt2Pi / h);

  constexpr std::size_t kGrid = std::size(kBandwidthGrid);
  std::vector<std::vector<double>> ky(kGrid, std::vector<double>(n * n));
  for (std::size_t b = 0; b < kGrid; ++b) {
    const double my = kBandwidthGrid[b];
    const double norm = kInvSqrt2Pi / (my * ref_hy);
    for (std::size_t k = 0; k < n * n; ++k) ky[b][k] = norm * std::exp(-0.5 * dy[k] / (my * my));
  }

  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_x = 2;
  std::size_t best_y = 2;
  std::vector<double> kx(n * n);
  const double m = static_cast<double>(n - 1);
  for (std::size_t a = 0; a < kGrid; ++a) {
    const double mx = kBandwidthGrid[a];
    const double norm = std::exp(log_ref_x_norm - static_cast<double>(dims) * std::log(mx));
    for (std::size_t k = 0; k < n * n; ++k) kx[k] = norm * std::exp(-0.5 * dx[k] / (mx * mx));
    for (std::size_t b = 0; b < kGrid; ++b) {
      double score = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          num += kx[i * n + j] * ky[b][i * n + j];
          den += kx[i * n + j];
        }
        const double g = (num / m) / std::max(den / m, kDensityFloor);
        score += std::log(std::max(g, kDensityFloor));
      }
      if (score > best) {
        best = score;
        best_x = a;
        best_y = b;
      }
    }
  }

  std::vector<double> hx(dims);
  for (std::size_t d = 0; d < dims; ++d) hx[d] = ref_hx[d] * kBandwidthGrid[best_x];
  const double hy = ref_hy * kBandwidthGrid[best_y];
  if (report != nullptr) {
    *report = {ref_hx, ref_hy, kBandwidthGrid[best_x], kBandwidthGrid[best_y], best};
  }
  return ConditionalKDE(data, std::move(hx), hy);
}

LossContext density_context(const Dataset& data, const DensityOptions& options) {
  std::vector<double> g(data.size());
  if (data.covariate_dim() == 0) {
    const KDE kde = fit_kde(data.response());
    for (std::size_t i = 0; i < data.size(); ++i) {
      g[i] = options.leave_one_out ? kde.leave_one_out(i) : kde(data.response()[i]);
    }
  } else {
    const ConditionalKDE ckde = fit_conditional_kde(data, nullptr, options.bandwidth);
    for (std::size_t i = 0; i < data.size(); ++i) {
      g[i] = options.leave_one_out ? ckde.leave_one_out(i) : ckde(data.row(i), data.response()[i]);
    }
  }
  return LossContext(std::move(g));
}

}  // namespace divbayes

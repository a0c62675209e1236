#pragma once

// Fixed-width Gaussian kernel density estimates, marginal and conditional.

#include <span>
#include <vector>

#include "divbayes/divergences.hpp"
#include "divbayes/types.hpp"

namespace divbayes {

/// 1.06 * min(sd, IQR / 1.34) * n^(-1/5). Falls back to sd when the IQR is zero.
/// Throws std::invalid_argument for fewer than 2 points, non-finite values, or zero spread.
double silverman_bandwidth(std::span<const double> data);

class KDE {
 public:
  KDE(std::vector<double> points, double bandwidth);

  /// (1 / (n h)) sum_i phi((x - x_i) / h).
  double operator()(double x) const;
  /// Same sum with point i removed.
  double leave_one_out(std::size_t i) const;

  double bandwidth() const { return h_; }
  std::span<const double> points() const { return points_; }

 private:
  std::vector<double> points_;
  double h_;
};

/// Marginal KDE with the Silverman bandwidth.
KDE fit_kde(std::span<const double> data);

/// Product-Gaussian-kernel estimate of p(y | x):
///   sum_i K_hx(x - x_i) K_hy(y - y_i) / max(sum_i K_hx(x - x_i), floor)
/// with both sums divided by n.
class ConditionalKDE {
 public:
  ConditionalKDE(Dataset data, std::vector<double> hx, double hy);

  double operator()(std::span<const double> x, double y) const;
  double leave_one_out(std::size_t i) const;

  std::span<const double> hx() const { return hx_; }
  double hy() const { return hy_; }
  const Dataset& data() const { return data_; }

 private:
  double kernel_x(std::span<const double> x, std::size_t i) const;

  Dataset data_;
  std::vector<double> hx_;
  double hy_;
};

struct ConditionalBandwidthFit {
  std::vector<double> reference_hx;
  double reference_hy = 0.0;
  double x_multiplier = 1.0;
  double y_multiplier = 1.0;
  double cv_log_likelihood = 0.0;
};

/// Multipliers applied to the reference bandwidths during cross-validation.
inline constexpr double kBandwidthGrid[] = {0.25, 0.5, 1.0, 2.0, 4.0};

enum class ResponseReference {
  /// Silverman's rule on the responses.
  Marginal,
  /// Silverman's rule on the residuals of a least-squares fit of y on (1, x), i.e. a
  /// normal linear reference model for the conditional spread.
  Residual,
};

struct ConditionalBandwidthOptions {
  ResponseReference reference = ResponseReference::Marginal;
  /// Refine the reference bandwidths over kBandwidthGrid by leave-one-out likelihood.
  bool cross_validate = true;
};

/// Two-stage bandwidth selection: per-dimension Silverman reference values, then (optionally)
/// the (x, y) multiplier pair from kBandwidthGrid maximizing the leave-one-out log density.
/// Requires n >= 10 and a non-degenerate spread in every covariate.
ConditionalKDE fit_conditional_kde(const Dataset& data, ConditionalBandwidthFit* report = nullptr,
                                   const ConditionalBandwidthOptions& options = {});

struct DensityOptions {
  /// Evaluate g_n at x_i without x_i's own kernel.
  bool leave_one_out = false;
  ConditionalBandwidthOptions bandwidth;
};

/// g_n at every datum: marginal KDE when the data carry no covariates, conditional otherwise.
LossContext density_context(const Dataset& data, const DensityOptions& options = {});

}  // namespace divbayes

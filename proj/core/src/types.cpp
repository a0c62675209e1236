#include "divbayes/types.hpp"

#include <stdexcept>
#include <string>

namespace divbayes {

Dataset::Dataset(std::vector<double> response) : response_(std::move(response)) {}

Dataset::Dataset(std::vector<double> response, std::vector<double> covariates_row_major,
                 std::size_t covariate_dim)
    : response_(std::move(response)),
      covariates_(std::move(covariates_row_major)),
      covariate_dim_(covariate_dim) {
  if (covariates_.size() != response_.size() * covariate_dim_) {
    throw std::invalid_argument("Dataset: covariate matrix has " +
                                std::to_string(covariates_.size()) + " entries, expected " +
                                std::to_string(response_.size() * covariate_dim_));
  }
}

Dataset Dataset::lagged(std::span<const double> series, std::size_t lags) {
  if (series.size() <= lags) {
    throw std::invalid_argument("Dataset::lagged: series shorter than lag order");
  }
  const std::size_t n = series.size() - lags;
  std::vector<double> y(n);
  std::vector<double> x(n * lags);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = i + lags;
    y[i] = series[t];
    for (std::size_t j = 0; j < lags; ++j) x[i * lags + j] = series[t - 1 - j];
  }
  return Dataset(std::move(y), std::move(x), lags);
}

}  // namespace divbayes

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace divbayes {

using Rng = std::mt19937_64;

/// Parameter vector in the sampler's unconstrained coordinates.
using Params = std::span<const double>;

/// Absolute floor applied to every density-estimate value used as a divisor.
inline constexpr double kDensityFloor = 1e-12;

/// Independent 64-bit seed for sub-stream `stream` of `master` (splitmix64 finalizer).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// One response together with its conditioning values (covariates or lagged history).
struct Observation {
  double y = 0.0;
  std::span<const double> x;
};

/// Responses with an optional row-major covariate matrix.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<double> response);
  Dataset(std::vector<double> response, std::vector<double> covariates_row_major,
          std::size_t covariate_dim);

  /// Observations (x_t; x_{t-1}, ..., x_{t-lags}) for t = lags, ..., n-1.
  static Dataset lagged(std::span<const double> series, std::size_t lags);

  std::size_t size() const { return response_.size(); }
  bool empty() const { return response_.empty(); }
  std::size_t covariate_dim() const { return covariate_dim_; }

  Observation operator[](std::size_t i) const {
    return {response_[i], row(i)};
  }
  std::span<const double> row(std::size_t i) const {
    return {covariates_.data() + i * covariate_dim_, covariate_dim_};
  }
  std::span<const double> response() const { return response_; }
  std::span<const double> covariates() const { return covariates_; }

 private:
  std::vector<double> response_;
  std::vector<double> covariates_;
  std::size_t covariate_dim_ = 0;
};

}  // namespace divbayes

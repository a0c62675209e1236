#pragma once

// Adaptive random-walk Metropolis over an unnormalized log density, with
// split-Rhat / ESS diagnostics across chains.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "divbayes/distributions.hpp"
#include "divbayes/divergences.hpp"
#include "divbayes/types.hpp"

namespace divbayes {

using LogDensityFn = std::function<double(std::span<const double>)>;

struct SamplerOptions {
  std::size_t n_chains = 4;
  std::size_t n_warmup = 5000;
  std::size_t n_keep = 5000;
  std::size_t thin = 1;
  std::uint64_t seed = 20180101;
  double target_accept = 0.234;
  /// Run chains on separate threads. Draws do not depend on this flag.
  bool parallel = false;
};

/// Chain k starts at center + jitter * spread * z_k with z_k standard normal.
struct Initializer {
  std::vector<double> center;
  std::vector<double> spread;
  double jitter = 2.0;
};

inline constexpr double kMaxRhat = 1.05;
inline constexpr double kMinEss = 200.0;

struct Diagnostics {
  std::vector<double> rhat;
  std::vector<double> ess;
  /// Some parameter has zero variance across all draws; its Rhat is NaN.
  bool degenerate = false;
  bool converged = false;
  std::string message;

  double max_rhat() const;
  double min_ess() const;
};

/// Split-Rhat and multi-chain ESS per parameter. Each matrix is iterations x dim.
/// Throws std::invalid_argument for fewer than 2 chains, unequal shapes, or fewer than 4 rows.
Diagnostics diagnostics(std::span<const Eigen::MatrixXd> chains);

class Chain {
 public:
  Chain(std::vector<Eigen::MatrixXd> draws, std::vector<double> acceptance, std::uint64_t seed);

  std::size_t n_chains() const { return per_chain_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(combined_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(combined_.rows()); }

  /// All kept draws stacked chain after chain.
  const Eigen::MatrixXd& draws() const { return combined_; }
  const std::vector<Eigen::MatrixXd>& per_chain() const { return per_chain_; }
  std::vector<double> row(std::size_t i) const;

  double acceptance_rate() const;
  std::span<const double> acceptance_per_chain() const { return acceptance_; }
  const Diagnostics& diagnostics() const { return diagnostics_; }
  std::uint64_t seed() const { return seed_; }

  Eigen::VectorXd mean() const;
  Eigen::VectorXd sd() const;
  /// Posterior mean of g(theta) over all kept draws.
  double expectation(const std::function<double(std::span<const double>)>& g) const;

 private:
  std::vector<Eigen::MatrixXd> per_chain_;
  Eigen::MatrixXd combined_;
  std::vector<double> acceptance_;
  Diagnostics diagnostics_;
  std::uint64_t seed_;
};

/// Adaptive RWM. During warmup the global proposal scale follows a Robbins-Monro
/// recursion towards `target_accept` and the proposal covariance is re-estimated
/// from two warmup windows; both are frozen for the kept iterations.
/// Throws std::runtime_error if no finite starting point is found for some chain.
Chain run_mcmc(const LogDensityFn& log_density, const Initializer& init,
               const SamplerOptions& options);

/// Uses `init` when given, else the prior's center and spread.
Chain run_mcmc(const GBPosterior& posterior, const SamplerOptions& options,
               const std::optional<Initializer>& init = std::nullopt);

/// For each draw, theta is picked uniformly from the chain and y ~ f(. | x; theta).
std::vector<double> posterior_predictive(const Chain& chain, const ModelFamily& family,
                                         std::span<const double> x, std::size_t n_draws, Rng& rng);

}  // namespace divbayes

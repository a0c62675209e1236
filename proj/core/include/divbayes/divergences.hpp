#pragma once

// Per-observation losses for minimum-divergence general Bayesian updating and
// the resulting unnormalized log posterior
//
//   log pi(theta | data) = log pi(theta) - w * sum_i loss(x_i, f(.; theta)),  w = 1.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "divbayes/distributions.hpp"
#include "divbayes/types.hpp"

namespace divbayes {

enum class DivergenceKind { KL, Hellinger, TV, Alpha, Power, AlphaBeta };

/// Target divergence plus hyperparameters; invalid hyperparameters are rejected on construction.
class DivergenceSpec {
 public:
  static DivergenceSpec kl();
  static DivergenceSpec hellinger();
  static DivergenceSpec tv();
  /// alpha in (0, 1).
  static DivergenceSpec alpha(double a);
  /// Density power divergence, alpha > 0.
  static DivergenceSpec power(double a);
  /// alpha, beta > 0.
  static DivergenceSpec alpha_beta(double a, double b);

  /// Parses "kl", "hellinger", "tv", "alpha:0.75", "power:0.5", "alphabeta:1,0.5".
  static DivergenceSpec parse(std::string_view text);

  DivergenceKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  /// True when the loss needs g_n evaluated at each datum.
  bool needs_density_estimate() const;

  /// Short label, also accepted by parse(): "kl", "alpha:0.75", ...
  std::string name() const;
  /// Display label used in tables and plots: "KL", "Hell", "TV", "alpha", "power", "alphabeta".
  std::string label() const;

  friend bool operator==(const DivergenceSpec&, const DivergenceSpec&) = default;

 private:
  DivergenceSpec(DivergenceKind kind, double a, double b) : kind_(kind), alpha_(a), beta_(b) {}

  DivergenceKind kind_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
};

// Losses as functions of the model's log density at the datum, the density estimate,
// and (where needed) the log power integral. Building blocks of the per-family losses
// below and of the score-shape plots.
namespace score {
double kl(double log_f);
double hellinger(double log_f, double g);
double tv(double log_f, double g);
double alpha(double log_f, double g, double a);
double power(double log_f, double log_integral, double a);
double alpha_beta(double log_f, double g, double log_integral, double a, double b);
}  // namespace score

double loss_kl(const ModelFamily& family, Params theta, const Observation& obs);
double loss_hellinger(const ModelFamily& family, Params theta, const Observation& obs, double g);
double loss_tv(const ModelFamily& family, Params theta, const Observation& obs, double g);
double loss_alpha(const ModelFamily& family, Params theta, const Observation& obs, double g,
                  double a);
double loss_dpd(const ModelFamily& family, Params theta, const Observation& obs, double a);
double loss_alphabeta(const ModelFamily& family, Params theta, const Observation& obs, double g,
                      double a, double b);

/// Dispatches on spec.kind(); `g` is ignored when the divergence needs no density estimate.
double loss(const DivergenceSpec& spec, const ModelFamily& family, Params theta,
            const Observation& obs, double g);

/// Density-estimate values g_n(x_i), floored at kDensityFloor.
class LossContext {
 public:
  LossContext() = default;
  explicit LossContext(std::vector<double> g_values);

  bool empty() const { return g_.empty(); }
  std::size_t size() const { return g_.size(); }
  double operator[](std::size_t i) const { return g_[i]; }
  std::span<const double> values() const { return g_; }

 private:
  std::vector<double> g_;
};

/// Prior + family + data + divergence, assembled into an unnormalized log posterior.
class GBPosterior {
 public:
  static constexpr double kWeight = 1.0;

  /// Throws std::invalid_argument when the divergence needs a density estimate and `context`
  /// does not match the data, or when the prior and family dimensions disagree.
  GBPosterior(ModelFamily family, PriorSpec prior, Dataset data, DivergenceSpec spec,
              LossContext context = {});

  double log_prior(Params theta) const { return prior_.log_density(theta); }
  /// sum_i loss(x_i, f(.; theta)).
  double total_loss(Params theta) const;
  double log_posterior(Params theta) const;

  const ModelFamily& family() const { return family_; }
  const PriorSpec& prior() const { return prior_; }
  const Dataset& data() const { return data_; }
  const DivergenceSpec& spec() const { return spec_; }
  const LossContext& context() const { return context_; }
  std::size_t dim() const { return prior_.dim(); }

 private:
  ModelFamily family_;
  PriorSpec prior_;
  Dataset data_;
  DivergenceSpec spec_;
  LossContext context_;
};

double gb_log_posterior(const GBPosterior& posterior, Params theta);

}  // namespace divbayes

#include "divbayes/divergences.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace divbayes {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double floored_log(double g) { return std::log(std::max(g, kDensityFloor)); }

double parse_double(std::string_view text, std::string_view whole) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("bad divergence hyperparameter in '" + std::string(whole) + "'");
  }
  return value;
}

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

DivergenceSpec DivergenceSpec::kl() { return {DivergenceKind::KL, 0.0, 0.0}; }
DivergenceSpec DivergenceSpec::hellinger() { return {DivergenceKind::Hellinger, 0.0, 0.0}; }
DivergenceSpec DivergenceSpec::tv() { return {DivergenceKind::TV, 0.0, 0.0}; }

DivergenceSpec DivergenceSpec::alpha(double a) {
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alpha divergence requires alpha in (0, 1)");
  return {DivergenceKind::Alpha, a, 1.0 - a};
}

DivergenceSpec DivergenceSpec::power(double a) {
  if (!(a > 0.0)) throw std::invalid_argument("density power divergence requires alpha > 0");
  return {DivergenceKind::Power, a, 0.0};
}

DivergenceSpec DivergenceSpec::alpha_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("alpha-beta divergence requires alpha > 0 and beta > 0");
  }
  return {DivergenceKind::AlphaBeta, a, b};
}

DivergenceSpec DivergenceSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view tail = colon == std::string_view::npos ? "" : text.substr(colon + 1);
  if (head == "kl" || head == "KL") return kl();
  if (head == "hellinger" || head == "hell" || head == "Hell") return hellinger();
  if (head == "tv" || head == "TV") return tv();
  if (head == "alpha") return alpha(tail.empty() ? 0.75 : parse_double(tail, text));
  if (head == "power" || head == "dpd") return power(tail.empty() ? 0.5 : parse_double(tail, text));
  if (head == "alphabeta") {
    const auto comma = tail.find(',');
    if (comma == std::string_view::npos) {
      throw std::invalid_argument("alphabeta needs two hyperparameters: '" + std::string(text) + "'");
    }
    return alpha_beta(parse_double(tail.substr(0, comma), text),
                      parse_double(tail.substr(comma + 1), text));
  }
  throw std::invalid_argument("unknown divergence '" + std::string(text) + "'");
}

bool DivergenceSpec::needs_density_estimate() const {
  switch (kind_) {
    case DivergenceKind::KL:
    case DivergenceKind::Power:
      return false;
    case DivergenceKind::AlphaBeta:
      return alpha_ != 1.0;
    default:
      return true;
  }
}

std::string DivergenceSpec::name() const {
  switch (kind_) {
    case DivergenceKind::KL: return "kl";
    case DivergenceKind::Hellinger: return "hellinger";
    case DivergenceKind::TV: return "tv";
    case DivergenceKind::Alpha: return "alpha:" + format_param(alpha_);
    case DivergenceKind::Power: return "power:" + format_param(alpha_);
    case DivergenceKind::AlphaBeta:
      return "alphabeta:" + format_param(alpha_) + "," + format_param(beta_);
  }
  return {};
}

std::string DivergenceSpec::label() const {
  switch (kind_) {
    case DivergenceKind::KL: return "KL";
    case DivergenceKind::Hellinger: return "Hell";
    case DivergenceKind::TV: return "TV";
    case DivergenceKind::Alpha: return "alpha";
    case DivergenceKind::Power: return "power";
    case DivergenceKind::AlphaBeta: return "alphabeta";
  }
  return {};
}

// ---------------------------------------------------------------------------

namespace score {

double kl(double log_f) { return -log_f; }

double hellinger(double log_f, double g) { return -std::exp(0.5 * (log_f - floored_log(g))); }

double tv(double log_f, double g) { return 0.5 * std::abs(1.0 - std::exp(log_f - floored_log(g))); }

double alpha(double log_f, double g, double a) {
  return -std::exp((a - 1.0) * floored_log(g) + (1.0 - a) * log_f) / (a * (1.0 - a));
}

double power(double log_f, double log_integral, double a) {
  return -(std::exp(a * log_f) / a - std::exp(log_integral) / (1.0 + a));
}

double alpha_beta(double log_f, double g, double log_integral, double a, double b) {
  const double log_g = a == 1.0 ? 0.0 : floored_log(g);
  return -(std::exp((a - 1.0) * log_g + b * log_f) / (a * b) -
           std::exp(log_integral) / (a * (a + b)));
}

}  // namespace score

double loss_kl(const ModelFamily& family, Params theta, const Observation& obs) {
  return score::kl(log_density(family, theta, obs));
}

double loss_hellinger(const ModelFamily& family, Params theta, const Observation& obs, double g) {
  return score::hellinger(log_density(family, theta, obs), g);
}

double loss_tv(const ModelFamily& family, Params theta, const Observation& obs, double g) {
  return score::tv(log_density(family, theta, obs), g);
}

double loss_alpha(const ModelFamily& family, Params theta, const Observation& obs, double g,
                  double a) {
  return score::alpha(log_density(family, theta, obs), g, a);
}

double loss_dpd(const ModelFamily& family, Params theta, const Observation& obs, double a) {
  return score::power(log_density(family, theta, obs), log_power_integral(family, theta, a), a);
}

double loss_alphabeta(const ModelFamily& family, Params theta, const Observation& obs, double g,
                      double a, double b) {
  return score::alpha_beta(log_density(family, theta, obs), g,
                           log_power_integral(family, theta, (a - 1.0) + b), a, b);
}

double loss(const DivergenceSpec& spec, const ModelFamily& family, Params theta,
            const Observation& obs, double g) {
  switch (spec.kind()) {
    case DivergenceKind::KL: return loss_kl(family, theta, obs);
    case DivergenceKind::Hellinger: return loss_hellinger(family, theta, obs, g);
    case DivergenceKind::TV: return loss_tv(family, theta, obs, g);
    case DivergenceKind::Alpha: return loss_alpha(family, theta, obs, g, spec.alpha());
    case DivergenceKind::Power: return loss_dpd(family, theta, obs, spec.alpha());
    case DivergenceKind::AlphaBeta:
      return loss_alphabeta(family, theta, obs, g, spec.alpha(), spec.beta());
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

LossContext::LossContext(std::vector<double> g_values) : g_(std::move(g_values)) {
  for (double& g : g_) {
    if (!(g >= kDensityFloor)) g = kDensityFloor;  // also maps NaN to the floor
  }
}

GBPosterior::GBPosterior(ModelFamily family, PriorSpec prior, Dataset data, DivergenceSpec spec,
                         LossContext context)
    : family_(std::move(family)),
      prior_(std::move(prior)),
      data_(std::move(data)),
      spec_(spec),
      context_(std::move(context)) {
  if (prior_.dim() != param_dim(family_)) {
    throw std::invalid_argument("prior dimension " + std::to_string(prior_.dim()) +
                                " does not match model dimension " +
                                std::to_string(param_dim(family_)));
  }
  if (data_.size() > 0 && data_.covariate_dim() != covariate_dim(family_)) {
    throw std::invalid_argument("data covariate dimension does not match model");
  }
  if (spec_.needs_density_estimate() && context_.size() != data_.size()) {
    throw std::invalid_argument("divergence '" + spec_.name() +
                                "' needs a density estimate at every datum (have " +
                                std::to_string(context_.size()) + " values for " +
                                std::to_string(data_.size()) + " data)");
  }
}

double GBPosterior::total_loss(Params theta) const {
  if (theta.size() != dim()) {
    throw std::invalid_argument("parameter vector has wrong length");
  }
  for (double v : theta) {
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
  }
  const double ls = log_sigma(family_, theta);
  const double inv_sigma = std::exp(-ls);
  const double log_norm = -ls - kLogSqrt2Pi;

  double log_integral = 0.0;
  if (spec_.kind() == DivergenceKind::Power) {
    log_integral = log_power_integral(family_, theta, spec_.alpha());
  } else if (spec_.kind() == DivergenceKind::AlphaBeta) {
    log_integral = log_power_integral(family_, theta, (spec_.alpha() - 1.0) + spec_.beta());
  }

  double total = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const Observation obs = data_[i];
    const double z = (obs.y - conditional_mean(family_, theta, obs.x)) * inv_sigma;
    const double log_f = -0.5 * z * z + log_norm;
    switch (spec_.kind()) {
      case DivergenceKind::KL: total += score::kl(log_f); break;
      case DivergenceKind::Hellinger: total += score::hellinger(log_f, context_[i]); break;
      case DivergenceKind::TV: total += score::tv(log_f, context_[i]); break;
      case DivergenceKind::Alpha: total += score::alpha(log_f, context_[i], spec_.alpha()); break;
      case DivergenceKind::Power: total += score::power(log_f, log_integral, spec_.alpha()); break;
      case DivergenceKind::AlphaBeta: {
        const double g = spec_.needs_density_estimate() ? context_[i] : 1.0;
        total += score::alpha_beta(log_f, g, log_integral, spec_.alpha(), spec_.beta());
        break;
      }
    }
  }
  return total;
}

double GBPosterior::log_posterior(Params theta) const {
  const double lp = log_prior(theta);
  if (lp == kNegInf || std::isnan(lp)) return kNegInf;
  if (data_.empty()) return lp;
  const double result = lp - kWeight * total_loss(theta);
  return std::isnan(result) ? kNegInf : result;
}

double gb_log_posterior(const GBPosterior& posterior, Params theta) {
  return posterior.log_posterior(theta);
}

}  // namespace divbayes

#include "divbayes/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace divbayes {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_eval(const LogDensityFn& f, std::span<const double> x) {
  const double v = f(x);
  return std::isnan(v) ? kNegInf : v;
}

// Stan-style regularized covariance estimate.
Eigen::MatrixXd regularize(const Eigen::MatrixXd& cov, double n) {
  const auto d = cov.rows();
  return (n / (n + 5.0)) * cov +
         1e-3 * (5.0 / (n + 5.0)) * Eigen::MatrixXd::Identity(d, d);
}

Eigen::MatrixXd cholesky_or_diagonal(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  return cov.diagonal().cwiseMax(1e-12).cwiseSqrt().asDiagonal();
}

class Welford {
 public:
  explicit Welford(Eigen::Index d) : mean_(Eigen::VectorXd::Zero(d)), m2_(Eigen::MatrixXd::Zero(d, d)) {}
  void add(const Eigen::VectorXd& x) {
    ++n_;
    const Eigen::VectorXd delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_).transpose();
  }
  std::size_t count() const { return n_; }
  Eigen::MatrixXd covariance() const { return m2_ / static_cast<double>(n_ - 1); }

 private:
  std::size_t n_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
};

struct ChainResult {
  Eigen::MatrixXd draws;
  double acceptance = 0.0;
};

ChainResult run_chain(const LogDensityFn& log_density, const Initializer& init,
                      const SamplerOptions& options, std::uint64_t chain_seed) {
  const auto d = static_cast<Eigen::Index>(init.center.size());
  Rng rng(chain_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Eigen::VectorXd x(d);
  double lp = kNegInf;
  for (int attempt = 0; attempt < 100 && !std::isfinite(lp); ++attempt) {
    for (Eigen::Index j = 0; j < d; ++j) {
      x[j] = init.center[j] + init.jitter * init.spread[j] * normal(rng);
    }
    lp = safe_eval(log_density, {x.data(), static_cast<std::size_t>(d)});
  }
  if (!std::isfinite(lp)) {
    throw std::runtime_error("run_mcmc: log density is not finite at any initialization attempt");
  }

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) cov(j, j) = init.spread[j] * init.spread[j];
  Eigen::MatrixXd chol = cholesky_or_diagonal(cov);
  const double base_scale = 2.38 / std::sqrt(static_cast<double>(d));
  double log_scale = std::log(0.1 * base_scale);

  const std::size_t warmup = options.n_warmup;
  const auto w1 = static_cast<std::size_t>(0.20 * static_cast<double>(warmup));
  const auto w2 = static_cast<std::size_t>(0.50 * static_cast<double>(warmup));
  const auto w3 = static_cast<std::size_t>(0.85 * static_cast<double>(warmup));
  Welford window(d);
  std::size_t rm_step = 0;

  const std::size_t total = warmup + options.n_keep * options.thin;
  Eigen::MatrixXd kept(static_cast<Eigen::Index>(options.n_keep), d);
  std::size_t accepted = 0;
  Eigen::VectorXd z(d);
  Eigen::VectorXd proposal(d);

  for (std::size_t it = 0; it < total; ++it) {
    for (Eigen::Index j = 0; j < d; ++j) z[j] = normal(rng);
    proposal = x + std::exp(log_scale) * (chol * z);
    const double lp_new = safe_eval(log_density, {proposal.data(), static_cast<std::size_t>(d)});
    const double log_ratio = lp_new - lp;
    const double accept_prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
    if (uniform(rng) < accept_prob) {
      x = proposal;
      lp = lp_new;
      if (it >= warmup) ++accepted;
    }

    if (it < warmup) {
      ++rm_step;
      log_scale += std::pow(static_cast<double>(rm_step) + 1.0, -0.6) *
                   (accept_prob - options.target_accept);
      if (it >= w1) window.add(x);
      if ((it + 1 == w2 || it + 1 == w3) && window.count() > 2 * static_cast<std::size_t>(d) + 2) {
        cov = regularize(window.covariance(), static_cast<double>(window.count()));
        chol = cholesky_or_diagonal(cov);
        window = Welford(d);
        rm_step = 0;
        if (it + 1 == w2) log_scale = std::log(base_scale);
      }
    } else {
      const std::size_t k = it - warmup;
      if (k % options.thin == 0) kept.row(static_cast<Eigen::Index>(k / options.thin)) = x;
    }
  }
  const double kept_steps = static_cast<double>(options.n_keep * options.thin);
  return {std::move(kept), kept_steps > 0 ? static_cast<double>(accepted) / kept_steps : 0.0};
}

// Autocovariance at `lag` with 1/n normalization.
double autocovariance(const Eigen::VectorXd& x, double mean, Eigen::Index lag) {
  const Eigen::Index n = x.size();
  double s = 0.0;
  for (Eigen::Index i = 0; i + lag < n; ++i) s += (x[i] - mean) * (x[i + lag] - mean);
  return s / static_cast<double>(n);
}

}  // namespace

double Diagnostics::max_rhat() const {
  double m = 0.0;
  for (double r : rhat) {
    if (std::isnan(r)) return std::numeric_limits<double>::quiet_NaN();
    m = std::max(m, r);
  }
  return m;
}

double Diagnostics::min_ess() const {
  double m = std::numeric_limits<double>::infinity();
  for (double e : ess) {
    if (std::isnan(e)) return std::numeric_limits<double>::quiet_NaN();
    m = std::min(m, e);
  }
  return m;
}

Diagnostics diagnostics(std::span<const Eigen::MatrixXd> chains) {
  if (chains.size() < 2) throw std::invalid_argument("diagnostics need at least 2 chains");
  const Eigen::Index rows = chains[0].rows();
  const Eigen::Index dim = chains[0].cols();
  for (const auto& c : chains) {
    if (c.rows() != rows || c.cols() != dim) {
      throw std::invalid_argument("diagnostics: chains have mismatched shapes");
    }
  }
  if (rows < 4) throw std::invalid_argument("diagnostics need at least 4 draws per chain");

  // Split each chain into halves; an odd middle draw is dropped.
  const Eigen::Index half = rows / 2;
  const auto m = static_cast<Eigen::Index>(2 * chains.size());
  const auto nd = static_cast<double>(half);

  Diagnostics out;
  out.rhat.assign(static_cast<std::size_t>(dim), 0.0);
  out.ess.assign(static_cast<std::size_t>(dim), 0.0);
  std::vector<Eigen::VectorXd> split(static_cast<std::size_t>(m));

  for (Eigen::Index p = 0; p < dim; ++p) {
    for (std::size_t c = 0; c < chains.size(); ++c) {
      split[2 * c] = chains[c].col(p).head(half);
      split[2 * c + 1] = chains[c].col(p).tail(half);
    }
    std::vector<double> means(static_cast<std::size_t>(m));
    std::vector<double> vars(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& s = split[static_cast<std::size_t>(j)];
      means[j] = s.mean();
      vars[j] = (s.array() - means[j]).square().sum() / (nd - 1.0);
    }
    const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(m);
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
    double b_over_n = 0.0;
    for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
    b_over_n /= static_cast<double>(m - 1);
    const double var_plus = (nd - 1.0) / nd * w + b_over_n;

    const auto ip = static_cast<std::size_t>(p);
    if (!(w > 0.0)) {
      out.degenerate = true;
      out.rhat[ip] = std::numeric_limits<double>::quiet_NaN();
      out.ess[ip] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    out.rhat[ip] = std::sqrt(var_plus / w);

    // Geyer initial positive sequence on the multi-chain autocorrelation.
    auto rho = [&](Eigen::Index lag) {
      double acov = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        acov += autocovariance(split[static_cast<std::size_t>(j)], means[j], lag);
      }
      acov /= static_cast<double>(m);
      return 1.0 - (w - acov) / var_plus;
    };
    double tau = -1.0;
    double previous_pair = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t + 1 < half; t += 2) {
      double pair = (t == 0 ? 1.0 : rho(t)) + rho(t + 1);
      if (pair <= 0.0) break;
      pair = std::min(pair, previous_pair);
      tau += 2.0 * pair;
      previous_pair = pair;
    }
    tau = std::max(tau, 1.0 / std::log10(static_cast<double>(m) * nd));
    out.ess[ip] = static_cast<double>(m) * nd / tau;
  }

  std::ostringstream msg;
  if (out.degenerate) {
    msg << "zero posterior variance in at least one parameter";
  } else {
    const double r = out.max_rhat();
    const double e = out.min_ess();
    out.converged = r < kMaxRhat && e > kMinEss;
    if (!out.converged) {
      msg << "max Rhat " << r << (r < kMaxRhat ? "" : " >= 1.05") << ", min ESS " << e
          << (e > kMinEss ? "" : " <= 200");
    }
  }
  out.message = msg.str();
  return out;
}

// ---------------------------------------------------------------------------

Chain::Chain(std::vector<Eigen::MatrixXd> draws, std::vector<double> acceptance, std::uint64_t seed)
    : per_chain_(std::move(draws)), acceptance_(std::move(acceptance)), seed_(seed) {
  if (per_chain_.empty()) throw std::invalid_argument("Chain needs at least one chain of draws");
  Eigen::Index rows = 0;
  for (const auto& c : per_chain_) rows += c.rows();
  combined_.resize(rows, per_chain_[0].cols());
  Eigen::Index at = 0;
  for (const auto& c : per_chain_) {
    if (c.cols() != combined_.cols()) throw std::invalid_argument("Chain: mismatched dimensions");
    combined_.middleRows(at, c.rows()) = c;
    at += c.rows();
  }
  try {
    diagnostics_ = divbayes::diagnostics(per_chain_);
  } catch (const std::invalid_argument& e) {
    diagnostics_.message = e.what();
  }
}

std::vector<double> Chain::row(std::size_t i) const {
  std::vector<double> out(dim());
  for (std::size_t j = 0; j < dim(); ++j) {
    out[j] = combined_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return out;
}

double Chain::acceptance_rate() const {
  if (acceptance_.empty()) return 0.0;
  return std::accumulate(acceptance_.begin(), acceptance_.end(), 0.0) /
         static_cast<double>(acceptance_.size());
}

Eigen::VectorXd Chain::mean() const { return combined_.colwise().mean().transpose(); }

Eigen::VectorXd Chain::sd() const {
  const Eigen::RowVectorXd mu = combined_.colwise().mean();
  const double n = static_cast<double>(combined_.rows());
  return ((combined_.rowwise() - mu).array().square().colwise().sum() / (n - 1.0)).sqrt().transpose();
}

double Chain::expectation(const std::function<double(std::span<const double>)>& g) const {
  double sum = 0.0;
  std::vector<double> theta(dim());
  for (Eigen::Index i = 0; i < combined_.rows(); ++i) {
    for (std::size_t j = 0; j < dim(); ++j) theta[j] = combined_(i, static_cast<Eigen::Index>(j));
    sum += g(theta);
  }
  return sum / static_cast<double>(combined_.rows());
}

Chain run_mcmc(const LogDensityFn& log_density, const Initializer& init,
               const SamplerOptions& options) {
  if (options.n_chains < 1) throw std::invalid_argument("run_mcmc: need at least one chain");
  if (options.thin < 1) throw std::invalid_argument("run_mcmc: thin must be >= 1");
  if (init.center.empty() || init.center.size() != init.spread.size()) {
    throw std::invalid_argument("run_mcmc: initializer center and spread must match");
  }
  std::vector<ChainResult> results(options.n_chains);
  auto work = [&](std::size_t k) {
    results[k] = run_chain(log_density, init, options, derive_seed(options.seed, k));
  };
  if (options.parallel && options.n_chains > 1) {
    std::vector<std::exception_ptr> errors(options.n_chains);
    std::vector<std::thread> threads;
    for (std::size_t k = 0; k < options.n_chains; ++k) {
      threads.emplace_back([&, k] {
        try {
          work(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t k = 0; k < options.n_chains; ++k) work(k);
  }
  std::vector<Eigen::MatrixXd> draws;
  std::vector<double> acceptance;
  for (auto& r : results) {
    draws.push_back(std::move(r.draws));
    acceptance.push_back(r.acceptance);
  }
  return Chain(std::move(draws), std::move(acceptance), options.seed);
}

Chain run_mcmc(const GBPosterior& posterior, const SamplerOptions& options,
               const std::optional<Initializer>& init) {
  const Initializer start =
      init ? *init : Initializer{posterior.prior().center(), posterior.prior().spread(), 2.0};
  return run_mcmc([&posterior](std::span<const double> theta) { return posterior.log_posterior(theta); },
                  start, options);
}

std::vector<double> posterior_predictive(const Chain& chain, const ModelFamily& family,
                                         std::span<const double> x, std::size_t n_draws, Rng& rng) {
  if (chain.size() == 0) throw std::invalid_argument("posterior_predictive: empty chain");
  std::uniform_int_distribution<std::size_t> pick(0, chain.size() - 1);
  std::vector<double> out(n_draws);
  std::vector<double> theta(chain.dim());
  for (auto& y : out) {
    const auto i = static_cast<Eigen::Index>(pick(rng));
    for (std::size_t j = 0; j < chain.dim(); ++j) {
      theta[j] = chain.draws()(i, static_cast<Eigen::Index>(j));
    }
    y = sample(family, theta, x, rng);
  }
  return out;
}

}  // namespace divbayes

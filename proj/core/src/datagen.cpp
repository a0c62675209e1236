#include "divbayes/datagen.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace divbayes::datagen {
namespace {

constexpr std::size_t kBurnIn = 500;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<double> gen_eps_contam(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::bernoulli_distribution contaminated(0.01);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) {
    const bool c = contaminated(rng);
    const double e = z(rng);
    v = c ? 5.0 + 5.0 * e : e;
  }
  return out;
}

std::vector<double> gen_normal(std::size_t n, double mean, double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z(mean, sd);
  std::vector<double> out(n);
  for (auto& v : out) v = z(rng);
  return out;
}

std::vector<double> gen_student_t(std::size_t n, double df, std::uint64_t seed) {
  Rng rng(seed);
  std::student_t_distribution<double> t(df);
  std::vector<double> out(n);
  for (auto& v : out) v = t(rng);
  return out;
}

std::vector<double> draw_coefficients(std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> beta(p);
  for (auto& b : beta) b = u(rng);
  return beta;
}

double hetero_noise_sd(double x1) { return std::exp(2.0 * x1 / 3.0); }

Dataset gen_hetero_linreg(std::size_t n, std::size_t p, std::span<const double> beta,
                          std::uint64_t seed) {
  if (p == 0 || beta.size() != p) throw std::invalid_argument("gen_hetero_linreg: need p coefficients");
  if (n < p + 2) throw std::invalid_argument("gen_hetero_linreg: need n >= p + 2");
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(n * p);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      x[i * p + j] = z(rng);
      mean += beta[j] * x[i * p + j];
    }
    y[i] = mean + hetero_noise_sd(x[i * p]) * z(rng);
  }
  return Dataset(std::move(y), std::move(x), p);
}

double companion_spectral_radius(std::span<const double> lags) {
  const auto L = static_cast<Eigen::Index>(lags.size());
  if (L == 0) return 0.0;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(L, L);
  for (Eigen::Index j = 0; j < L; ++j) companion(0, j) = lags[static_cast<std::size_t>(j)];
  for (Eigen::Index j = 1; j < L; ++j) companion(j, j - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<double> gen_ar(std::size_t T, double intercept, std::span<const double> lags,
                           double sigma, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gen_ar: sigma must be > 0");
  if (!(companion_spectral_radius(lags) < 1.0)) {
    throw std::invalid_argument("gen_ar: lag coefficients are not stationary");
  }
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::size_t L = lags.size();
  std::vector<double> x(kBurnIn + T, 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    double mean = intercept;
    for (std::size_t j = 0; j < L; ++j) {
      if (t >= j + 1) mean += lags[j] * x[t - 1 - j];
    }
    x[t] = mean + sigma * z(rng);
  }
  return {x.begin() + static_cast<std::ptrdiff_t>(kBurnIn), x.end()};
}

double garch_variance_step(const GarchParams& params, double e_prev, double psi2_prev) {
  return params.omega + params.alpha1 * e_prev * e_prev + params.beta1 * psi2_prev;
}

ArGarchSeries gen_ar_garch(std::size_t T, double intercept, std::span<const double> lags,
                           double sigma, const GarchParams& garch, std::uint64_t seed) {
  if (!(garch.omega > 0.0) || !(garch.alpha1 >= 0.0) || !(garch.beta1 >= 0.0)) {
    throw std::invalid_argument("gen_ar_garch: need omega > 0, alpha1 >= 0, beta1 >= 0");
  }
  ArGarchSeries out;
  out.latent = gen_ar(T, intercept, lags, sigma, derive_seed(seed, 0));
  Rng rng(derive_seed(seed, 1));
  std::normal_distribution<double> z(0.0, 1.0);
  const double persistence = garch.alpha1 + garch.beta1;
  double psi2 = persistence < 1.0 ? garch.omega / (1.0 - persistence) : garch.omega;
  out.noise.resize(T);
  out.y.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) psi2 = garch_variance_step(garch, out.noise[t - 1], psi2);
    out.noise[t] = std::sqrt(psi2) * z(rng);
    out.y[t] = out.latent[t] + out.noise[t];
  }
  return out;
}

std::vector<double> load_csv(const std::filesystem::path& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("CSV file '" + path.string() + "' is empty");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  const auto header = split_fields(line);
  std::size_t col = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == column) col = j;
  }
  if (col == header.size()) {
    throw std::runtime_error("CSV file '" + path.string() + "' has no column '" + column + "'");
  }
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (col >= fields.size()) {
      throw std::runtime_error("CSV line " + std::to_string(line_no) + ": missing column '" +
                               column + "'");
    }
    const std::string& f = fields[col];
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
      throw std::runtime_error("CSV line " + std::to_string(line_no) + ": cannot parse '" + f +
                               "' as a number");
    }
    values.push_back(v);
  }
  if (values.empty()) {
    throw std::runtime_error("CSV file '" + path.string() + "': empty column '" + column + "'");
  }
  return values;
}

}  // namespace divbayes::datagen

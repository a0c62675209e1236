#include "divbayes/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace divbayes {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(s)};
  // alphabeta:a,b carries its own comma, so lists use ';' when one is present.
  const char sep = s.find(';') != std::string_view::npos ? ';' : ',';
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> split_divergences(std::string_view s) {
  // "kl,alphabeta:1,0.5,tv": a bare number continues the previous alphabeta entry.
  if (s.find(';') != std::string_view::npos) return split_list(s);
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(s)};
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const bool numeric = std::isdigit(static_cast<unsigned char>(item[0])) || item[0] == '.' ||
                         item[0] == '-';
    if (numeric && !out.empty() && out.back().rfind("alphabeta:", 0) == 0 &&
        out.back().find(',') == std::string::npos) {
      out.back() += "," + item;
    } else {
      out.push_back(item);
    }
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a non-negative integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& f, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += f(xs[i]);
  }
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "study", "source", "n", "df", "data", "column", "predictive_draws", "p", "test_size",
      "datasets", "T", "ar_sigma", "sizes", "data_means", "data_sd", "scores.g", "scores.alphas",
      "repeats", "divergences", "prior.location_mean", "prior.location_sd", "prior.sigma_shape",
      "prior.sigma_rate", "prior.ig_shape", "prior.ig_scale", "prior.coef_ratio",
      "sampler.chains", "sampler.warmup", "sampler.keep", "sampler.thin", "sampler.target_accept",
      "sampler.parallel", "leave_one_out", "kde.reference", "kde.cross_validate", "strict", "seed", "out"};
  return keys;
}

std::vector<DivergenceSpec> all_five() {
  return {DivergenceSpec::kl(), DivergenceSpec::hellinger(), DivergenceSpec::tv(),
          DivergenceSpec::alpha(0.75), DivergenceSpec::power(0.5)};
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
      line.erase(0, 3);
    }
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    out[key] = trim(std::string_view(stripped).substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_key_values(buffer.str());
}

std::string_view study_name(Study study) {
  switch (study) {
    case Study::Simple: return "simple";
    case Study::Regression: return "regression";
    case Study::TimeSeries: return "timeseries";
    case Study::Efficiency: return "efficiency";
    case Study::Scores: return "scores";
    case Study::OracleCheck: return "oracle-check";
  }
  return "";
}

Study parse_study(std::string_view name) {
  for (Study s : {Study::Simple, Study::Regression, Study::TimeSeries, Study::Efficiency,
                  Study::Scores, Study::OracleCheck}) {
    if (study_name(s) == name) return s;
  }
  throw ConfigError("unknown study '" + std::string(name) + "'");
}

std::string ExperimentConfig::resolved() const {
  std::ostringstream o;
  auto size_str = [](std::size_t v) { return std::to_string(v); };
  o << "study = " << study_name(study) << '\n';
  o << "source = " << source << '\n';
  o << "n = " << n << '\n';
  o << "df = " << fmt(df) << '\n';
  o << "data = " << data_path.string() << '\n';
  o << "column = " << csv_column << '\n';
  o << "predictive_draws = " << predictive_draws << '\n';
  o << "p = " << join(p_values, size_str) << '\n';
  o << "test_size = " << test_size << '\n';
  o << "datasets = " << join(datasets, [](const std::string& s) { return s; }) << '\n';
  o << "T = " << series_length << '\n';
  o << "ar_sigma = " << fmt(ar_sigma) << '\n';
  o << "sizes = " << join(sizes, size_str) << '\n';
  o << "data_means = " << join(data_means, fmt) << '\n';
  o << "data_sd = " << fmt(data_sd) << '\n';
  o << "scores.g = " << join(score_g, fmt) << '\n';
  o << "scores.alphas = " << join(score_alphas, fmt) << '\n';
  o << "repeats = " << repeats << '\n';
  o << "divergences = " << join(divergences, [](const DivergenceSpec& d) { return d.name(); }, ";")
    << '\n';
  o << "prior.location_mean = " << fmt(prior_location_mean) << '\n';
  o << "prior.location_sd = " << fmt(prior_location_sd) << '\n';
  o << "prior.sigma_shape = " << fmt(prior_sigma_shape) << '\n';
  o << "prior.sigma_rate = " << fmt(prior_sigma_rate) << '\n';
  o << "prior.ig_shape = " << fmt(prior_ig_shape) << '\n';
  o << "prior.ig_scale = " << fmt(prior_ig_scale) << '\n';
  o << "prior.coef_ratio = " << fmt(prior_coef_ratio) << '\n';
  o << "sampler.chains = " << sampler.n_chains << '\n';
  o << "sampler.warmup = " << sampler.n_warmup << '\n';
  o << "sampler.keep = " << sampler.n_keep << '\n';
  o << "sampler.thin = " << sampler.thin << '\n';
  o << "sampler.target_accept = " << fmt(sampler.target_accept) << '\n';
  o << "leave_one_out = " << (leave_one_out ? "true" : "false") << '\n';
  o << "kde.reference = " << (kde_reference == ResponseReference::Residual ? "residual" : "marginal")
    << '\n';
  o << "kde.cross_validate = " << (kde_cross_validate ? "true" : "false") << '\n';
  o << "strict = " << (strict ? "true" : "false") << '\n';
  o << "seed = " << seed << '\n';
  return o.str();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : resolved()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig resolve_config(Study study, const std::map<std::string, std::string>& settings) {
  for (const auto& [key, value] : settings) {
    if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  if (auto it = settings.find("study"); it != settings.end() && parse_study(it->second) != study) {
    throw ConfigError("config file is for study '" + it->second + "', not '" +
                      std::string(study_name(study)) + "'");
  }

  ExperimentConfig c;
  c.study = study;
  switch (study) {
    case Study::Simple:
      c.divergences = all_five();
      break;
    case Study::Regression:
      c.n = 200;
      c.repeats = 10;
      c.divergences = all_five();
      break;
    case Study::TimeSeries:
      c.divergences = {DivergenceSpec::kl(), DivergenceSpec::hellinger()};
      break;
    case Study::Efficiency:
      c.repeats = 10;
      c.prior_location_sd = 5.0;
      c.prior_sigma_shape = 0.01;
      c.prior_sigma_rate = 0.01;
      c.divergences = all_five();
      break;
    case Study::Scores:
    case Study::OracleCheck:
      break;
  }

  auto get = [&](const char* key) -> const std::string* {
    auto it = settings.find(key);
    return it == settings.end() ? nullptr : &it->second;
  };
  auto size_list = [](const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    for (const auto& s : split_list(v)) out.push_back(to_uint(key, s));
    return out;
  };
  auto double_list = [](const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
    return out;
  };

  if (auto v = get("source")) c.source = *v;
  if (c.source == "student_t") c.n = 200;
  if (auto v = get("n")) c.n = to_uint("n", *v);
  if (auto v = get("df")) c.df = to_double("df", *v);
  if (auto v = get("data")) {
    c.data_path = *v;
    if (!get("source")) c.source = "csv";
  }
  if (auto v = get("column")) c.csv_column = *v;
  if (auto v = get("predictive_draws")) c.predictive_draws = to_uint("predictive_draws", *v);
  if (auto v = get("p")) c.p_values = size_list("p", *v);
  if (auto v = get("test_size")) c.test_size = to_uint("test_size", *v);
  if (auto v = get("datasets")) c.datasets = split_list(*v);
  if (auto v = get("T")) c.series_length = to_uint("T", *v);
  if (auto v = get("ar_sigma")) c.ar_sigma = to_double("ar_sigma", *v);
  if (auto v = get("sizes")) c.sizes = size_list("sizes", *v);
  if (auto v = get("data_means")) c.data_means = double_list("data_means", *v);
  if (auto v = get("data_sd")) c.data_sd = to_double("data_sd", *v);
  if (auto v = get("scores.g")) c.score_g = double_list("scores.g", *v);
  if (auto v = get("scores.alphas")) c.score_alphas = double_list("scores.alphas", *v);
  if (auto v = get("repeats")) c.repeats = to_uint("repeats", *v);
  if (auto v = get("divergences")) {
    c.divergences.clear();
    try {
      for (const auto& s : split_divergences(*v)) c.divergences.push_back(DivergenceSpec::parse(s));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config key 'divergences': ") + e.what());
    }
  }
  if (auto v = get("prior.location_mean")) c.prior_location_mean = to_double("prior.location_mean", *v);
  if (auto v = get("prior.location_sd")) c.prior_location_sd = to_double("prior.location_sd", *v);
  if (auto v = get("prior.sigma_shape")) c.prior_sigma_shape = to_double("prior.sigma_shape", *v);
  if (auto v = get("prior.sigma_rate")) c.prior_sigma_rate = to_double("prior.sigma_rate", *v);
  if (auto v = get("prior.ig_shape")) c.prior_ig_shape = to_double("prior.ig_shape", *v);
  if (auto v = get("prior.ig_scale")) c.prior_ig_scale = to_double("prior.ig_scale", *v);
  if (auto v = get("prior.coef_ratio")) c.prior_coef_ratio = to_double("prior.coef_ratio", *v);
  if (auto v = get("sampler.chains")) c.sampler.n_chains = to_uint("sampler.chains", *v);
  if (auto v = get("sampler.warmup")) c.sampler.n_warmup = to_uint("sampler.warmup", *v);
  if (auto v = get("sampler.keep")) c.sampler.n_keep = to_uint("sampler.keep", *v);
  if (auto v = get("sampler.thin")) c.sampler.thin = to_uint("sampler.thin", *v);
  if (auto v = get("sampler.target_accept")) {
    c.sampler.target_accept = to_double("sampler.target_accept", *v);
  }
  if (auto v = get("sampler.parallel")) c.sampler.parallel = to_bool("sampler.parallel", *v);
  if (auto v = get("leave_one_out")) c.leave_one_out = to_bool("leave_one_out", *v);
  if (auto v = get("kde.reference")) {
    if (*v == "marginal") {
      c.kde_reference = ResponseReference::Marginal;
    } else if (*v == "residual") {
      c.kde_reference = ResponseReference::Residual;
    } else {
      throw ConfigError("config key 'kde.reference': expected marginal or residual, got '" + *v + "'");
    }
  }
  if (auto v = get("kde.cross_validate")) c.kde_cross_validate = to_bool("kde.cross_validate", *v);
  if (auto v = get("strict")) c.strict = to_bool("strict", *v);
  if (auto v = get("seed")) c.seed = to_uint("seed", *v);
  if (auto v = get("out")) c.out = *v;
  c.sampler.seed = c.seed;

  // Validation.
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(c.sampler.n_chains >= 2, "sampler.chains must be >= 2");
  require(c.sampler.n_keep >= 100, "sampler.keep must be >= 100");
  require(c.sampler.thin >= 1, "sampler.thin must be >= 1");
  require(c.sampler.target_accept > 0.0 && c.sampler.target_accept < 1.0,
          "sampler.target_accept must be in (0, 1)");
  require(c.repeats >= 1, "repeats must be >= 1");
  require(c.prior_location_sd > 0.0 && c.prior_sigma_shape > 0.0 && c.prior_sigma_rate > 0.0 &&
              c.prior_ig_shape > 0.0 && c.prior_ig_scale > 0.0 && c.prior_coef_ratio > 0.0,
          "prior hyperparameters must be positive");
  const bool fits = study != Study::Scores && study != Study::OracleCheck;
  if (fits) require(!c.divergences.empty(), "divergences must not be empty");

  switch (study) {
    case Study::Simple:
      require(c.source == "eps_contam" || c.source == "student_t" || c.source == "csv",
              "source must be eps_contam, student_t or csv");
      if (c.source == "csv") {
        require(!c.data_path.empty(), "source = csv needs data = <path>");
        require(std::filesystem::exists(c.data_path),
                "data file '" + c.data_path.string() + "' does not exist");
      } else {
        require(c.n >= 2, "n must be >= 2");
      }
      require(c.df > 0.0, "df must be > 0");
      require(c.predictive_draws >= 1, "predictive_draws must be >= 1");
      break;
    case Study::Regression:
      require(!c.p_values.empty(), "p must list at least one dimension");
      for (auto p : c.p_values) {
        require(p >= 1, "p must be >= 1");
        require(c.n >= std::max<std::size_t>(p + 2, 10), "n must be >= max(p + 2, 10)");
      }
      require(c.test_size >= 1, "test_size must be >= 1");
      break;
    case Study::TimeSeries:
      require(!c.datasets.empty(), "datasets must not be empty");
      for (const auto& d : c.datasets) {
        require(d == "ar3" || d == "garch_high" || d == "garch_low",
                "unknown dataset '" + d + "' (ar3, garch_high, garch_low)");
      }
      require(c.series_length >= 20, "T must be >= 20");
      require(c.test_size >= 1, "test_size must be >= 1");
      require(c.ar_sigma > 0.0, "ar_sigma must be > 0");
      break;
    case Study::Efficiency:
      require(!c.sizes.empty() && !c.data_means.empty(), "sizes and data_means must not be empty");
      for (auto n : c.sizes) require(n >= 10, "sizes must be >= 10");
      require(c.data_sd > 0.0, "data_sd must be > 0");
      break;
    case Study::Scores:
      for (double g : c.score_g) require(g > 0.0, "scores.g values must be > 0");
      for (double a : c.score_alphas) require(a > 0.0 && a < 1.0, "scores.alphas must be in (0, 1)");
      break;
    case Study::OracleCheck:
      break;
  }
  return c;
}

}  // namespace divbayes

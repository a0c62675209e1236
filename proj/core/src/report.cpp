#include "divbayes/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace divbayes::report {
namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw std::invalid_argument("CsvTable: no columns");
}

CsvTable::Row CsvTable::row() {
  rows_.emplace_back();
  return Row(*this);
}

CsvTable::Row& CsvTable::Row::add(const std::string& v) {
  table_.rows_.back().push_back(v);
  return *this;
}
CsvTable::Row& CsvTable::Row::add(double v) { return add(format_number(v)); }
CsvTable::Row& CsvTable::Row::add(std::size_t v) { return add(std::to_string(v)); }
CsvTable::Row& CsvTable::Row::add(int v) { return add(std::to_string(v)); }
CsvTable::Row& CsvTable::Row::add(bool v) { return add(std::string(v ? "true" : "false")); }

std::string CsvTable::str() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) out += ',';
      out += escape_csv(cells[j]);
    }
    out += '\n';
  };
  emit(columns_);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != columns_.size()) {
      throw std::runtime_error("CsvTable: row " + std::to_string(i) + " has " +
                               std::to_string(rows_[i].size()) + " cells, expected " +
                               std::to_string(columns_.size()));
    }
    emit(rows_[i]);
  }
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("error writing '" + path.string() + "'");
}

std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series) {
  double x_lo = spec.x_min, x_hi = spec.x_max, y_lo = spec.y_min, y_hi = spec.y_max;
  auto fit = [](double& lo, double& hi, const std::vector<double>& v) {
    for (double d : v) {
      if (!std::isfinite(d)) continue;
      if (std::isnan(lo) || d < lo) lo = d;
      if (std::isnan(hi) || d > hi) hi = d;
    }
  };
  const bool fit_x_lo = std::isnan(spec.x_min), fit_x_hi = std::isnan(spec.x_max);
  const bool fit_y_lo = std::isnan(spec.y_min), fit_y_hi = std::isnan(spec.y_max);
  for (const auto& s : series) {
    double a = std::numeric_limits<double>::quiet_NaN(), b = a;
    fit(a, b, s.x);
    if (fit_x_lo && !std::isnan(a)) x_lo = std::isnan(x_lo) ? a : std::min(x_lo, a);
    if (fit_x_hi && !std::isnan(b)) x_hi = std::isnan(x_hi) ? b : std::max(x_hi, b);
    a = b = std::numeric_limits<double>::quiet_NaN();
    fit(a, b, s.y);
    if (fit_y_lo && !std::isnan(a)) y_lo = std::isnan(y_lo) ? a : std::min(y_lo, a);
    if (fit_y_hi && !std::isnan(b)) y_hi = std::isnan(y_hi) ? b : std::max(y_hi, b);
  }
  if (std::isnan(x_lo) || std::isnan(x_hi)) x_lo = 0.0, x_hi = 1.0;
  if (std::isnan(y_lo) || std::isnan(y_hi)) y_lo = 0.0, y_hi = 1.0;
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }

  const double left = 70, right = 150, top = 40, bottom = 50;
  const double w = spec.width - left - right;
  const double h = spec.height - top - bottom;
  auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * w; };
  auto sy = [&](double y) {
    const double c = std::clamp(y, y_lo, y_hi);
    return top + (1.0 - (c - y_lo) / (y_hi - y_lo)) * h;
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
    << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << px(left + w / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape_xml(spec.title) << "</text>\n";
  o << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(w) << "\" height=\""
    << px(h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x_lo + (x_hi - x_lo) * k / 4.0;
    const double yv = y_lo + (y_hi - y_lo) * k / 4.0;
    o << "<text x=\"" << px(sx(xv)) << "\" y=\"" << px(top + h + 16)
      << "\" text-anchor=\"middle\">" << format_number(xv) << "</text>\n";
    o << "<text x=\"" << px(left - 6) << "\" y=\"" << px(sy(yv) + 4)
      << "\" text-anchor=\"end\">" << format_number(yv) << "</text>\n";
  }
  o << "<text x=\"" << px(left + w / 2) << "\" y=\"" << px(spec.height - 10.0)
    << "\" text-anchor=\"middle\">" << escape_xml(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << px(top + h / 2) << ") rotate(-90)\" "
    << "text-anchor=\"middle\">" << escape_xml(spec.y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = kPalette[s % std::size(kPalette)];
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\""
          << points << "\"/>\n";
        points.clear();
      }
    };
    const auto& sr = series[s];
    const std::size_t n = std::min(sr.x.size(), sr.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      const double x = sr.x[i], y = sr.y[i];
      if (std::isnan(x) || std::isnan(y) || x < x_lo || x > x_hi) {
        flush();
        continue;
      }
      const double yy = std::isinf(y) ? (y > 0 ? y_hi : y_lo) : y;
      if (!points.empty()) points += ' ';
      points += px(sx(x)) + "," + px(sy(yy));
    }
    flush();
    const double ly = top + 14.0 + 18.0 * static_cast<double>(s);
    o << "<line x1=\"" << px(left + w + 10) << "\" y1=\"" << px(ly) << "\" x2=\""
      << px(left + w + 30) << "\" y2=\"" << px(ly) << "\" stroke=\"" << colour
      << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << px(left + w + 35) << "\" y=\"" << px(ly + 4) << "\">"
      << escape_xml(sr.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace divbayes::report

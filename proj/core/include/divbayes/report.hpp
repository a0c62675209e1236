#pragma once

// CSV tables and minimal SVG line plots for experiment output.

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace divbayes::report {

/// Floats as "%.6g"; NaN as "nan", infinities as "inf" / "-inf".
std::string format_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  class Row {
   public:
    Row& add(const std::string& v);
    Row& add(const char* v) { return add(std::string(v)); }
    Row& add(double v);
    Row& add(std::size_t v);
    Row& add(int v);
    Row& add(bool v);

   private:
    friend class CsvTable;
    explicit Row(CsvTable& table) : table_(table) {}
    CsvTable& table_;
  };

  /// Starts a new row; cells are appended with Row::add. Rows must be complete before write().
  Row row();

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string str() const;
  /// Throws std::runtime_error when a row has the wrong number of cells or the file cannot be written.
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  /// Axis limits; NaN means "fit to data". Values outside y limits are clipped to the frame.
  double x_min = std::numeric_limits<double>::quiet_NaN();
  double x_max = std::numeric_limits<double>::quiet_NaN();
  double y_min = std::numeric_limits<double>::quiet_NaN();
  double y_max = std::numeric_limits<double>::quiet_NaN();
  int width = 640;
  int height = 420;
};

std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace divbayes::report

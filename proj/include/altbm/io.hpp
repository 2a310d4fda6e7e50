#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace altbm {

// %.17g, which round-trips every double.
std::string format_double(double x);

// Table with a fixed header. Numeric cells must be finite: add_row throws
// RangeViolation otherwise, so a table never carries NaN or inf.
class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit CsvTable(std::vector<std::string> columns);

  void add_row(const std::vector<Cell>& cells);
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t size() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // points instead of a polyline
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

// Static SVG line chart; nonpositive values are dropped on log axes.
std::string svg_line_chart(const ChartSpec& spec, const std::vector<Series>& series);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace altbm

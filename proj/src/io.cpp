#include "altbm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "altbm/errors.hpp"

namespace altbm {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
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

}  // namespace

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw InvalidArgument("CsvTable: no columns");
}

void CsvTable::add_row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_.size()) throw InvalidArgument("CsvTable: row width differs from header");
  std::vector<std::string> row;
  row.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (const auto* d = std::get_if<double>(&cells[i])) {
      if (!std::isfinite(*d)) throw RangeViolation("non-finite value in column " + columns_[i]);
      row.push_back(format_double(*d));
    } else if (const auto* n = std::get_if<long long>(&cells[i])) {
      row.push_back(std::to_string(*n));
    } else {
      row.push_back(quote_csv(std::get<std::string>(cells[i])));
    }
  }
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  std::vector<std::string> header;
  for (const auto& c : columns_) header.push_back(quote_csv(c));
  line(header);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string svg_line_chart(const ChartSpec& spec, const std::vector<Series>& series) {
  constexpr double W = 720, H = 460, L = 80, R = 170, T = 40, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0) && (!spec.log_y || y > 0);
  };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return T + (y1 - ty(v)) / (y1 - y0) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(2);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << xml_escape(spec.title) << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int k = 0; k <= 5; ++k) {
    const double fx = x0 + (x1 - x0) * k / 5.0;
    const double fy = y0 + (y1 - y0) * k / 5.0;
    const double gx = L + pw * k / 5.0;
    const double gy = T + ph - ph * k / 5.0;
    char lx[32], ly[32];
    std::snprintf(lx, sizeof lx, "%.3g", spec.log_x ? std::pow(10.0, fx) : fx);
    std::snprintf(ly, sizeof ly, "%.3g", spec.log_y ? std::pow(10.0, fy) : fy);
    o << "<line x1=\"" << gx << "\" y1=\"" << T << "\" x2=\"" << gx << "\" y2=\"" << T + ph
      << "\" stroke=\"#ddd\"/>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << gy << "\" x2=\"" << L + pw << "\" y2=\"" << gy
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << gx << "\" y=\"" << T + ph + 16 << "\" text-anchor=\"middle\">" << lx << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\">" << ly << "</text>\n";
  }
  o << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
    << xml_escape(spec.x_label) << (spec.log_x ? " (log)" : "") << "</text>\n";
  o << "<text transform=\"translate(20," << T + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << xml_escape(spec.y_label) << (spec.log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    const char* col = colors[s % std::size(colors)];
    if (sr.markers) {
      for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i)
        if (usable(sr.x[i], sr.y[i]))
          o << "<circle cx=\"" << px(sr.x[i]) << "\" cy=\"" << py(sr.y[i]) << "\" r=\"3\" fill=\""
            << col << "\"/>\n";
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i)
        if (usable(sr.x[i], sr.y[i])) o << px(sr.x[i]) << ',' << py(sr.y[i]) << ' ';
      o << "\"/>\n";
    }
    const double ly = T + 14 + 18.0 * static_cast<double>(s);
    o << "<rect x=\"" << L + pw + 12 << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"3\" fill=\""
      << col << "\"/>\n";
    o << "<text x=\"" << L + pw + 30 << "\" y=\"" << ly - 3 << "\">" << xml_escape(sr.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("IoError", "cannot open " + path + " for writing");
  f << content;
  if (!f) throw Error("IoError", "failed writing " + path);
}

}  // namespace altbm

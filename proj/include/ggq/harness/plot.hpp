#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ggq/errors.hpp"
#include "ggq/harness/bands.hpp"
#include "ggq/io.hpp"

namespace ggq {

struct PlotStyle {
  std::string title;
  std::string x_label = "samples";
  std::string y_label;
  int width = 640;
  int height = 400;
};

struct BandSeries {
  std::string name;
  BandSummary band;
};

/// Parses a band CSV (series,samples,p05,p50,p95). Series keep first-appearance order.
inline std::vector<BandSeries> read_band_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("band csv: empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
  for (const char* need : {"series", "samples", "p05", "p50", "p95"})
    if (!column.count(need)) throw SchemaError(std::string("band csv: missing column '") + need + "'");

  std::vector<BandSeries> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size())
      throw SchemaError("band csv line " + std::to_string(line_no) + ": wrong number of cells");
    const std::string& name = cells[column["series"]];
    auto it = std::find_if(out.begin(), out.end(), [&](const BandSeries& s) { return s.name == name; });
    if (it == out.end()) {
      out.push_back({name, {}});
      it = out.end() - 1;
    }
    try {
      it->band.grid.push_back(std::stod(cells[column["samples"]]));
      it->band.p05.push_back(std::stod(cells[column["p05"]]));
      it->band.p50.push_back(std::stod(cells[column["p50"]]));
      it->band.p95.push_back(std::stod(cells[column["p95"]]));
    } catch (const std::exception&) {
      throw SchemaError("band csv line " + std::to_string(line_no) + ": bad number");
    }
  }
  if (out.empty()) throw SchemaError("band csv: no data rows");
  return out;
}

namespace plot_detail {
inline std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                           "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
}  // namespace plot_detail

/// Log-y line plot: shaded 5-95 band plus one path per percentile series.
inline std::string render_band_svg(const std::vector<BandSeries>& series, const PlotStyle& style) {
  using namespace plot_detail;
  if (series.empty()) throw SchemaError("plot: no series");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const auto& s : series) {
    if (s.band.grid.empty()) throw SchemaError("plot: series '" + s.name + "' has no rows");
    for (std::size_t i = 0; i < s.band.grid.size(); ++i) {
      xmin = std::min(xmin, s.band.grid[i]);
      xmax = std::max(xmax, s.band.grid[i]);
      for (double y : {s.band.p05[i], s.band.p50[i], s.band.p95[i]}) {
        if (y > 0.0) {
          ymin = std::min(ymin, y);
          ymax = std::max(ymax, y);
        }
      }
    }
  }
  if (!std::isfinite(ymin)) {
    ymin = 1e-3;
    ymax = 1.0;
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  double lo = std::floor(std::log10(ymin));
  double hi = std::ceil(std::log10(ymax));
  if (hi <= lo) hi = lo + 1.0;

  const double left = 70, right = 150, top = 40, bottom = 50;
  const double pw = style.width - left - right;
  const double ph = style.height - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) {
    const double ly = std::log10(std::max(y, std::pow(10.0, lo)));
    return top + (hi - ly) / (hi - lo) * ph;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\""
      << style.height << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\"" << style.height
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << escape(style.title) << "</text>\n";
  svg << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw)
      << "\" height=\"" << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double e = lo; e <= hi + 1e-9; e += 1.0) {
    const double y = top + (hi - e) / (hi - lo) * ph;
    svg << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(left + pw)
        << "\" y2=\"" << fixed(y) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << static_cast<int>(e)
        << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    svg << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << fixed(top + ph + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(xv)
        << "</text>\n";
  }
  svg << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(style.height - 10.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(style.x_label)
      << "</text>\n";
  svg << "<text x=\"16\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fixed(top + ph / 2) << ")\" font-family=\"sans-serif\" font-size=\"12\">" << escape(style.y_label)
      << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    const auto& g = s.band.grid;
    svg << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < g.size(); ++i) svg << (i ? " " : "") << fixed(px(g[i])) << ',' << fixed(py(s.band.p95[i]));
    for (std::size_t i = g.size(); i-- > 0;) svg << ' ' << fixed(px(g[i])) << ',' << fixed(py(s.band.p05[i]));
    svg << "\"/>\n";
    const std::vector<double>* lines[] = {&s.band.p05, &s.band.p50, &s.band.p95};
    const char* names[] = {"p05", "p50", "p95"};
    for (int j = 0; j < 3; ++j) {
      svg << "<path class=\"" << names[j] << "\" data-series=\"" << escape(s.name) << "\" fill=\"none\" stroke=\""
          << color << "\" stroke-width=\"" << (j == 1 ? "2" : "0.8") << "\" d=\"";
      for (std::size_t i = 0; i < g.size(); ++i)
        svg << (i ? " L" : "M") << fixed(px(g[i])) << ',' << fixed(py((*lines[j])[i]));
      svg << "\"/>\n";
    }
    const double ly = top + 14.0 + 18.0 * static_cast<double>(k);
    svg << "<line x1=\"" << fixed(left + pw + 10) << "\" y1=\"" << fixed(ly) << "\" x2=\""
        << fixed(left + pw + 30) << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fixed(left + pw + 36) << "\" y=\"" << fixed(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

inline void plot(const std::filesystem::path& csv_in, const std::filesystem::path& svg_out,
                 const PlotStyle& style) {
  std::ifstream in(csv_in);
  if (!in) throw std::runtime_error("cannot open " + csv_in.string());
  const auto series = read_band_csv(in);
  write_file_atomic(svg_out, render_band_svg(series, style));
}

}  // namespace ggq

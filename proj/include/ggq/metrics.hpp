#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ggq/errors.hpp"

namespace ggq {

struct TraceRow {
  std::uint64_t samples_consumed = 0;
  std::uint64_t iter = 0;
  double grad_norm_sq = 0.0;
  double min_grad_norm_sq = 0.0;
  double tracking_error = 0.0;
  std::optional<double> mc_variance;
  std::optional<double> mc_literal;

  bool operator==(const TraceRow&) const = default;
};

/// Per-evaluation records of one run. Rows are appended in iteration order.
struct MetricsTrace {
  std::vector<TraceRow> rows;

  bool operator==(const MetricsTrace&) const = default;
};

inline constexpr const char* kTraceHeader =
    "samples_consumed,iter,grad_norm_sq,min_grad_norm_sq,tracking_error,mc_variance,mc_literal";

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_trace_csv(const MetricsTrace& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const auto& row : trace.rows) {
    out << row.samples_consumed << ',' << row.iter << ',' << format_real(row.grad_norm_sq) << ','
        << format_real(row.min_grad_norm_sq) << ',' << format_real(row.tracking_error) << ','
        << (row.mc_variance ? format_real(*row.mc_variance) : "") << ','
        << (row.mc_literal ? format_real(*row.mc_literal) : "") << '\n';
  }
}

/// Parses a trace CSV and checks the monotonicity invariants.
inline MetricsTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw SchemaError("trace csv: unexpected header");
  MetricsTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 7) throw SchemaError("trace csv line " + std::to_string(line_no) + ": expected 7 cells");
    TraceRow row;
    try {
      row.samples_consumed = std::stoull(cells[0]);
      row.iter = std::stoull(cells[1]);
      row.grad_norm_sq = std::stod(cells[2]);
      row.min_grad_norm_sq = std::stod(cells[3]);
      row.tracking_error = std::stod(cells[4]);
      if (!cells[5].empty()) row.mc_variance = std::stod(cells[5]);
      if (!cells[6].empty()) row.mc_literal = std::stod(cells[6]);
    } catch (const std::exception&) {
      throw SchemaError("trace csv line " + std::to_string(line_no) + ": bad number");
    }
    if (!trace.rows.empty()) {
      const auto& prev = trace.rows.back();
      if (row.min_grad_norm_sq > prev.min_grad_norm_sq)
        throw SchemaError("trace csv line " + std::to_string(line_no) + ": min_grad_norm_sq increased");
      if (row.samples_consumed <= prev.samples_consumed)
        throw SchemaError("trace csv line " + std::to_string(line_no) + ": samples_consumed not increasing");
    }
    trace.rows.push_back(row);
  }
  return trace;
}

}  // namespace ggq

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ggq/metrics.hpp"

namespace ggq {

enum class TraceMetric { grad_norm_sq, min_grad_norm_sq, tracking_error, mc_variance };

inline std::string_view to_string(TraceMetric m) {
  switch (m) {
    case TraceMetric::grad_norm_sq: return "grad_norm_sq";
    case TraceMetric::min_grad_norm_sq: return "min_grad_norm_sq";
    case TraceMetric::tracking_error: return "tracking_error";
    case TraceMetric::mc_variance: return "mc_variance";
  }
  return "grad_norm_sq";
}

inline double metric_value(const TraceRow& row, TraceMetric m) {
  switch (m) {
    case TraceMetric::grad_norm_sq: return row.grad_norm_sq;
    case TraceMetric::min_grad_norm_sq: return row.min_grad_norm_sq;
    case TraceMetric::tracking_error: return row.tracking_error;
    case TraceMetric::mc_variance:
      if (!row.mc_variance) throw std::invalid_argument("trace row has no mc_variance");
      return *row.mc_variance;
  }
  return 0.0;
}

/// 5th, 50th and 95th percentile of a metric across runs, per grid point.
struct BandSummary {
  std::vector<double> grid;
  std::vector<double> p05;
  std::vector<double> p50;
  std::vector<double> p95;
};

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value.
inline double nearest_rank(std::vector<double> values, double percent) {
  if (values.empty()) throw std::invalid_argument("nearest_rank: no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(percent / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

/// Linear interpolation of a metric at a samples-consumed coordinate.
inline double interpolate(const MetricsTrace& trace, TraceMetric metric, double x) {
  const auto& rows = trace.rows;
  if (rows.empty()) throw std::invalid_argument("interpolate: empty trace");
  if (x <= static_cast<double>(rows.front().samples_consumed)) return metric_value(rows.front(), metric);
  const auto it = std::lower_bound(rows.begin(), rows.end(), x, [](const TraceRow& r, double v) {
    return static_cast<double>(r.samples_consumed) < v;
  });
  if (it == rows.end()) return metric_value(rows.back(), metric);
  if (static_cast<double>(it->samples_consumed) == x) return metric_value(*it, metric);
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double x0 = static_cast<double>(lo.samples_consumed);
  const double x1 = static_cast<double>(hi.samples_consumed);
  const double w = (x - x0) / (x1 - x0);
  return (1.0 - w) * metric_value(lo, metric) + w * metric_value(hi, metric);
}

inline BandSummary aggregate_bands(const std::vector<MetricsTrace>& traces, TraceMetric metric,
                                   const std::vector<double>& grid) {
  if (traces.size() < 2) throw std::invalid_argument("aggregate_bands: need at least two traces");
  if (grid.empty()) throw std::invalid_argument("aggregate_bands: empty grid");
  for (std::size_t k = 0; k < traces.size(); ++k) {
    if (traces[k].rows.empty() ||
        static_cast<double>(traces[k].rows.back().samples_consumed) < grid.back())
      throw std::invalid_argument("aggregate_bands: trace " + std::to_string(k) +
                                  " ends before the grid end " + format_real(grid.back()));
  }
  BandSummary out;
  out.grid = grid;
  std::vector<double> column(traces.size());
  for (double x : grid) {
    for (std::size_t k = 0; k < traces.size(); ++k) column[k] = interpolate(traces[k], metric, x);
    out.p05.push_back(nearest_rank(column, 5.0));
    out.p50.push_back(nearest_rank(column, 50.0));
    out.p95.push_back(nearest_rank(column, 95.0));
  }
  return out;
}

/// Evenly spaced grid over [0, end] with `points` entries.
inline std::vector<double> linear_grid(double end, std::size_t points) {
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = points == 1 ? end : end * static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

inline constexpr const char* kBandHeader = "series,samples,p05,p50,p95";

inline void write_band_rows(const std::string& series, const BandSummary& band, std::ostream& out) {
  for (std::size_t i = 0; i < band.grid.size(); ++i)
    out << series << ',' << format_real(band.grid[i]) << ',' << format_real(band.p05[i]) << ','
        << format_real(band.p50[i]) << ',' << format_real(band.p95[i]) << '\n';
}

}  // namespace ggq

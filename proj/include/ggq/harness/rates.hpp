#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ggq {

struct RateFit {
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
};

/// Least-squares slope of log y against log T.
inline RateFit rate_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("rate_fit: need at least three points");
  double tmin = points.front().first;
  double tmax = tmin;
  for (const auto& [t, y] : points) {
    if (!(t > 0.0) || !(y > 0.0)) throw std::invalid_argument("rate_fit: inputs must be positive");
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  if (tmax < 10.0 * tmin * (1.0 - 1e-12))
    throw std::invalid_argument("rate_fit: horizons must span at least one decade");

  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [t, y] : points) {
    mx += std::log(t);
    my += std::log(y);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [t, y] : points) {
    const double dx = std::log(t) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (const auto& [t, y] : points) {
    const double r = std::log(y) - (fit.intercept + fit.slope * std::log(t));
    rss += r * r;
  }
  fit.slope_stderr = n > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  return fit;
}

}  // namespace ggq

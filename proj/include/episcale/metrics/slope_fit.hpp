#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace episcale {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Standard error of the slope.
  double stderr_slope = 0.0;
};

/// Ordinary least squares of log(value) on log(N).
inline SlopeFit slope_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("slope_fit needs at least three points");
  const double m = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs, ys;
  for (const auto& [n, v] : points) {
    if (!(n > 0.0)) throw std::invalid_argument("slope_fit: N must be positive");
    if (!(v > 0.0)) throw std::invalid_argument("slope_fit: values must be positive");
    xs.push_back(std::log(n));
    ys.push_back(std::log(v));
    sx += xs.back();
    sy += ys.back();
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("slope_fit: all N are equal");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double e = ys[k] - fit.intercept - fit.slope * xs[k];
    rss += e * e;
  }
  fit.stderr_slope = std::sqrt(rss / (m - 2.0) / sxx);
  return fit;
}

}  // namespace episcale

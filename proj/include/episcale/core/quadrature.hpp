#pragma once

#include <cstddef>

#include <boost/math/quadrature/gauss.hpp>

namespace episcale::quadrature {

using Rule = boost::math::quadrature::gauss<double, 20>;

/// Composite 20-point Gauss-Legendre on [a, b] split into `panels` equal panels.
template <class F>
double composite_1d(F&& f, double a, double b, std::size_t panels) {
  const double width = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    const double lo = a + width * static_cast<double>(k);
    total += Rule::integrate(f, lo, lo + width);
  }
  return total;
}

/// Tensor-product composite rule on [x0, x1] x [y0, y1]; f(x, y).
template <class F>
double composite_2d(F&& f, double x0, double x1, double y0, double y1, std::size_t panels) {
  auto inner = [&](double x) {
    return composite_1d([&](double y) { return f(x, y); }, y0, y1, panels);
  };
  return composite_1d(inner, x0, x1, panels);
}

}  // namespace episcale::quadrature

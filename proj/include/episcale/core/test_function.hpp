#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "episcale/core/types.hpp"

namespace episcale {

/// A bounded test function per compartment.
struct TestFunction {
  std::function<double(Point)> s;
  std::function<double(Point)> i;
  std::function<double(Point)> r;

  static TestFunction constant(double c) {
    auto f = [c](Point) { return c; };
    return {f, f, f};
  }

  double operator()(HealthState a, Point x) const {
    switch (a) {
      case HealthState::S: return s(x);
      case HealthState::I: return i(x);
      case HealthState::R: return r(x);
    }
    return 0.0;
  }
};

/// <mu, phi> = (1/N) sum_k phi^{A_k}(x_k).
inline double pairing(const std::vector<Point>& positions, const std::vector<HealthState>& states,
                      const TestFunction& phi) {
  double sum = 0.0;
  for (std::size_t k = 0; k < positions.size(); ++k) sum += phi(states[k], positions[k]);
  return sum / static_cast<double>(positions.size());
}

}  // namespace episcale

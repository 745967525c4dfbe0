#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "episcale/core/initial_distribution.hpp"
#include "episcale/core/quadrature.hpp"
#include "episcale/core/types.hpp"

namespace episcale {

/// Densities (f^S, f^I, f^R) on an n x n cell-centred grid over the unit
/// square. Storage is one contiguous block: all S values, then I, then R,
/// each row-major with row = y index.
class GridField {
 public:
  GridField() = default;
  explicit GridField(std::size_t n, double time = 0.0)
      : n_(n), h_(n > 0 ? 1.0 / static_cast<double>(n) : 0.0), time_(time), data_(3 * n * n, 0.0) {
    if (n == 0) throw std::invalid_argument("grid needs at least one cell per side");
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t cells() const noexcept { return n_ * n_; }
  double h() const noexcept { return h_; }
  double cell_area() const noexcept { return h_ * h_; }
  double time() const noexcept { return time_; }
  void set_time(double t) noexcept { time_ = t; }

  Point center(std::size_t cell) const noexcept {
    return {(static_cast<double>(cell % n_) + 0.5) * h_, (static_cast<double>(cell / n_) + 0.5) * h_};
  }

  std::span<double> component(HealthState a) noexcept {
    return {data_.data() + index_of(a) * cells(), cells()};
  }
  std::span<const double> component(HealthState a) const noexcept {
    return {data_.data() + index_of(a) * cells(), cells()};
  }

  double& at(HealthState a, std::size_t cell) noexcept { return data_[index_of(a) * cells() + cell]; }
  double at(HealthState a, std::size_t cell) const noexcept {
    return data_[index_of(a) * cells() + cell];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  double cell_sum(std::size_t cell) const noexcept {
    return at(HealthState::S, cell) + at(HealthState::I, cell) + at(HealthState::R, cell);
  }

  /// Integral of one component (cell masses summed).
  double mass(HealthState a) const noexcept {
    double m = 0.0;
    for (double v : component(a)) m += v;
    return m * cell_area();
  }

  double total_mass() const noexcept {
    return mass(HealthState::S) + mass(HealthState::I) + mass(HealthState::R);
  }

  friend bool operator==(const GridField& a, const GridField& b) {
    return a.n_ == b.n_ && a.time_ == b.time_ && a.data_ == b.data_;
  }

 private:
  std::size_t n_ = 0;
  double h_ = 0.0;
  double time_ = 0.0;
  std::vector<double> data_;
};

/// Cell averages of f0^A = f(x) P(A | x), by Gauss-Legendre quadrature on
/// each cell.
inline GridField initial_field(const InitialDistribution& dist, std::size_t n) {
  GridField field(n);
  const double h = field.h();
  for (std::size_t cell = 0; cell < field.cells(); ++cell) {
    const double x0 = static_cast<double>(cell % n) * h;
    const double y0 = static_cast<double>(cell / n) * h;
    for (HealthState a : kHealthStates) {
      const double integral = quadrature::composite_2d(
          [&](double x, double y) { return dist.density(a, {x, y}); }, x0, x0 + h, y0, y0 + h, 1);
      field.at(a, cell) = integral / (h * h);
    }
  }
  return field;
}

}  // namespace episcale

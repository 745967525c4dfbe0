#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>

#include "episcale/core/quadrature.hpp"
#include "episcale/core/types.hpp"

namespace episcale {

/// 1 / integral over the unit disk of exp(-1 / (1 - |x|^2)).
/// Derived by tools/derive_bump_constant.py.
inline constexpr double kBumpNormalization = 2.1435657757922366;

/// Base mollifier as a function of the squared radius:
/// c0 exp(-1 / (1 - r^2)) on r < 1, zero elsewhere.
inline double bump_profile_sq(double r2) noexcept {
  if (r2 >= 1.0) return 0.0;
  return kBumpNormalization * std::exp(-1.0 / (1.0 - r2));
}

inline double bump(Point x) noexcept { return bump_profile_sq(x.x * x.x + x.y * x.y); }

/// theta_N(x) = N^beta theta(N^(beta / d) x), d the exponent divisor (2 in
/// the plane). Support radius N^(-beta / d).
class LocalKernel {
 public:
  LocalKernel(double beta, std::size_t n, double exponent_divisor = 2.0)
      : beta_(beta), divisor_(exponent_divisor), n_(n) {
    if (!(beta > 0.0 && beta < 1.0 / 3.0))
      throw std::invalid_argument("local kernel exponent beta must lie in (0, 1/3)");
    if (!(exponent_divisor > 0.0)) throw std::invalid_argument("exponent divisor must be > 0");
    if (n == 0) throw std::invalid_argument("local kernel needs N >= 1");
    const double nd = static_cast<double>(n);
    height_ = std::pow(nd, beta_);
    scale_ = std::pow(nd, beta_ / divisor_);
    scale_sq_ = scale_ * scale_;
    radius_ = 1.0 / scale_;
  }

  double operator()(Point dx) const noexcept { return at_sq(dx.x * dx.x + dx.y * dx.y); }
  double operator()(Point a, Point b) const noexcept { return at_sq(squared_distance(a, b)); }

  /// theta_N at squared distance r2.
  double at_sq(double r2) const noexcept { return height_ * bump_profile_sq(r2 * scale_sq_); }

  double beta() const noexcept { return beta_; }
  double exponent_divisor() const noexcept { return divisor_; }
  std::size_t population() const noexcept { return n_; }
  double height() const noexcept { return height_; }
  double scale() const noexcept { return scale_; }
  double support_radius() const noexcept { return radius_; }
  double peak() const noexcept { return height_ * kBumpNormalization * std::exp(-1.0); }

 private:
  double beta_;
  double divisor_;
  std::size_t n_;
  double height_ = 1.0;
  double scale_ = 1.0;
  double scale_sq_ = 1.0;
  double radius_ = 1.0;
};

/// Integral of theta_N over the plane, by radial Gauss-Legendre quadrature.
/// A self-check: 1 whenever the divisor equals the dimension.
inline double mollifier_mass(const LocalKernel& k, std::size_t panels = 16) {
  const double r = k.support_radius();
  return 2.0 * std::numbers::pi *
         quadrature::composite_1d([&](double s) { return s * k.at_sq(s * s); }, 0.0, r, panels);
}

}  // namespace episcale

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "episcale/core/types.hpp"

namespace episcale {

/// Mean-field interaction function T on D x D. Always evaluated as
/// T(susceptible position, infected position).
class InteractionKernel {
 public:
  enum class Kind { Constant, Gaussian, Custom };

  /// T(x, y) = value.
  static InteractionKernel constant(double value) {
    if (!(value >= 0.0) || !std::isfinite(value))
      throw std::invalid_argument("constant kernel value must be finite and >= 0");
    InteractionKernel k;
    k.kind_ = Kind::Constant;
    k.amplitude_ = value;
    return k;
  }

  /// T(x, y) = amplitude * exp(-|x - y|^2 / (2 sigma^2)); separable in the
  /// two coordinates.
  static InteractionKernel gaussian(double amplitude, double sigma) {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
      throw std::invalid_argument("gaussian kernel amplitude must be finite and >= 0");
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian kernel sigma must be > 0");
    InteractionKernel k;
    k.kind_ = Kind::Gaussian;
    k.amplitude_ = amplitude;
    k.sigma_ = sigma;
    return k;
  }

  /// Arbitrary non-negative T with a known sup bound.
  static InteractionKernel custom(std::function<double(Point, Point)> fn, double sup_bound,
                                  std::string name = "custom") {
    if (!fn) throw std::invalid_argument("custom kernel needs a callable");
    InteractionKernel k;
    k.kind_ = Kind::Custom;
    k.fn_ = std::move(fn);
    k.amplitude_ = sup_bound;
    k.name_ = std::move(name);
    return k;
  }

  double operator()(Point s, Point i) const {
    switch (kind_) {
      case Kind::Constant: return amplitude_;
      case Kind::Gaussian:
        return amplitude_ * std::exp(-squared_distance(s, i) / (2.0 * sigma_ * sigma_));
      case Kind::Custom: return fn_(s, i);
    }
    return 0.0;
  }

  /// One-dimensional factor g with T(x, y) = amplitude * g(x1 - y1) g(x2 - y2).
  double gaussian_factor(double dx) const { return std::exp(-dx * dx / (2.0 * sigma_ * sigma_)); }

  Kind kind() const noexcept { return kind_; }
  bool is_constant() const noexcept { return kind_ == Kind::Constant; }
  double amplitude() const noexcept { return amplitude_; }
  double sigma() const noexcept { return sigma_; }
  double sup_norm() const noexcept { return amplitude_; }

  std::string name() const {
    switch (kind_) {
      case Kind::Constant: return "constant";
      case Kind::Gaussian: return "gaussian";
      case Kind::Custom: return name_;
    }
    return "?";
  }

 private:
  InteractionKernel() = default;

  Kind kind_ = Kind::Constant;
  double amplitude_ = 1.0;
  double sigma_ = 0.0;
  std::function<double(Point, Point)> fn_;
  std::string name_;
};

}  // namespace episcale

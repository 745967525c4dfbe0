#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "episcale/core/quadrature.hpp"
#include "episcale/core/random.hpp"
#include "episcale/core/types.hpp"

namespace episcale {

struct UniformDensity {};

/// Isotropic Gaussian truncated to the unit square and renormalized.
struct GaussianDensity {
  Point center{0.5, 0.5};
  double sigma = 0.15;
};

/// 4 sin^2(pi x) sin^2(pi y): smooth, unit mass, vanishing with its first
/// derivatives on the boundary of the square.
struct SineBumpDensity {};

using DensityShape = std::variant<UniformDensity, GaussianDensity, SineBumpDensity>;

struct MixtureComponent {
  DensityShape shape;
  double weight = 1.0;
};

namespace detail {

inline double truncated_gaussian_mass_1d(double center, double sigma) {
  const double s = sigma * std::numbers::sqrt2;
  return sigma * std::sqrt(std::numbers::pi / 2.0) *
         (std::erf((1.0 - center) / s) + std::erf(center / s));
}

inline double shape_value(const DensityShape& shape, Point p) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UniformDensity>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, GaussianDensity>) {
          const double z = truncated_gaussian_mass_1d(d.center.x, d.sigma) *
                           truncated_gaussian_mass_1d(d.center.y, d.sigma);
          return std::exp(-squared_distance(p, d.center) / (2.0 * d.sigma * d.sigma)) / z;
        } else {
          const double sx = std::sin(std::numbers::pi * p.x);
          const double sy = std::sin(std::numbers::pi * p.y);
          return 4.0 * sx * sx * sy * sy;
        }
      },
      shape);
}

inline double shape_upper_bound(const DensityShape& shape) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UniformDensity>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, GaussianDensity>) {
          return 1.0 / (truncated_gaussian_mass_1d(d.center.x, d.sigma) *
                        truncated_gaussian_mass_1d(d.center.y, d.sigma));
        } else {
          return 4.0;
        }
      },
      shape);
}

}  // namespace detail

/// Probability density of positions on the unit square: a weighted mixture
/// of closed-form shapes. Weights are normalized on construction.
class SpatialDensity {
 public:
  SpatialDensity() : parts_{{UniformDensity{}, 1.0}} {}
  explicit SpatialDensity(DensityShape shape) : parts_{{std::move(shape), 1.0}} {}
  explicit SpatialDensity(std::vector<MixtureComponent> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw std::invalid_argument("density mixture has no components");
    double total = 0.0;
    for (const auto& c : parts_) {
      if (!(c.weight >= 0.0)) throw std::invalid_argument("mixture weight must be non-negative");
      if (const auto* g = std::get_if<GaussianDensity>(&c.shape); g && !(g->sigma > 0.0)) {
        throw std::invalid_argument("gaussian density needs sigma > 0");
      }
      total += c.weight;
    }
    if (!(total > 0.0)) throw std::invalid_argument("mixture weights sum to zero");
    for (auto& c : parts_) c.weight /= total;
  }

  double operator()(Point p) const {
    double v = 0.0;
    for (const auto& c : parts_) v += c.weight * detail::shape_value(c.shape, p);
    return v;
  }

  /// Upper bound on the density over the square, used as the rejection envelope.
  double upper_bound() const {
    double m = 0.0;
    for (const auto& c : parts_) m += c.weight * detail::shape_upper_bound(c.shape);
    return m;
  }

  const std::vector<MixtureComponent>& components() const noexcept { return parts_; }

 private:
  std::vector<MixtureComponent> parts_;
};

/// Position-dependent compartment law:
///   P(I | x) = infected_base + infected_amplitude * exp(-|x - c|^2 / (2 w^2))
///   P(R | x) = removed_fraction
///   P(S | x) = 1 - P(I | x) - P(R | x)
struct CompartmentProfile {
  double infected_base = 0.1;
  double infected_amplitude = 0.0;
  Point infected_center{0.5, 0.5};
  double infected_width = 0.1;
  double removed_fraction = 0.0;

  std::array<double, 3> probabilities(Point p) const {
    double pi = infected_base;
    if (infected_amplitude != 0.0) {
      pi += infected_amplitude *
            std::exp(-squared_distance(p, infected_center) / (2.0 * infected_width * infected_width));
    }
    return {1.0 - pi - removed_fraction, pi, removed_fraction};
  }

  void validate() const {
    if (!(removed_fraction >= 0.0 && removed_fraction <= 1.0))
      throw std::invalid_argument("removed_fraction must lie in [0, 1]");
    if (!(infected_width > 0.0)) throw std::invalid_argument("infected_width must be positive");
    const double lo = infected_base + std::min(infected_amplitude, 0.0);
    const double hi = infected_base + std::max(infected_amplitude, 0.0);
    if (!(lo >= 0.0)) throw std::invalid_argument("P(I|x) can become negative");
    if (!(hi + removed_fraction <= 1.0)) throw std::invalid_argument("P(I|x) + P(R|x) can exceed 1");
  }
};

/// Law of one individual on D x {S, I, R}: density f0^A(x) = f(x) P(A | x).
class InitialDistribution {
 public:
  InitialDistribution() = default;
  InitialDistribution(SpatialDensity positions, CompartmentProfile compartments)
      : positions_(std::move(positions)), compartments_(compartments) {}

  const SpatialDensity& positions() const noexcept { return positions_; }
  const CompartmentProfile& compartments() const noexcept { return compartments_; }

  double density(HealthState a, Point p) const {
    return positions_(p) * compartments_.probabilities(p)[index_of(a)];
  }

  /// Sum over compartments of the integral of each density; 1 for a valid law.
  double total_mass(std::size_t panels = 16) const {
    return quadrature::composite_2d([&](double x, double y) { return positions_({x, y}); }, 0.0,
                                    1.0, 0.0, 1.0, panels);
  }

  void validate() const {
    compartments_.validate();
    const double mass = total_mass();
    if (std::abs(mass - 1.0) > 1e-8) {
      throw std::invalid_argument("initial distribution mass is " + std::to_string(mass) +
                                  ", expected 1");
    }
  }

 private:
  SpatialDensity positions_;
  CompartmentProfile compartments_;
};

inline constexpr std::size_t kMaxRejections = 100000;

/// i.i.d. sample of N individuals. Positions by rejection against
/// SpatialDensity::upper_bound, compartment from the conditional law at the
/// accepted position. The infection pressure is left zeroed; the engine
/// initializes it for its kernel.
inline PopulationState sample_initial_population(const InitialDistribution& dist, std::size_t n,
                                                 std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("population size must be at least 1");
  Rng rng(seed);
  const double envelope = dist.positions().upper_bound();

  PopulationState pop;
  pop.positions.reserve(n);
  pop.states.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Point p;
    std::size_t tries = 0;
    for (;; ++tries) {
      if (tries == kMaxRejections) {
        throw std::runtime_error("rejection sampling exceeded " + std::to_string(kMaxRejections) +
                                 " proposals; density envelope is wrong");
      }
      p = {uniform01(rng), uniform01(rng)};
      const double f = dist.positions()(p);
      if (f > envelope * (1.0 + 1e-12)) {
        throw std::runtime_error("density exceeds its declared upper bound");
      }
      if (uniform01(rng) * envelope < f) break;
    }
    const auto probs = dist.compartments().probabilities(p);
    const double u = uniform01(rng);
    HealthState s = HealthState::R;
    if (u < probs[0]) {
      s = HealthState::S;
    } else if (u < probs[0] + probs[1]) {
      s = HealthState::I;
    }
    pop.positions.push_back(p);
    pop.states.push_back(s);
  }
  pop.counts = count_states(pop.states);
  pop.pressure.assign(n, 0.0);
  pop.clock = 0.0;
  return pop;
}

}  // namespace episcale

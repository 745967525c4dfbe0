#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "episcale/core/types.hpp"
#include "episcale/fields/grid_field.hpp"
#include "episcale/kernels/local_kernel.hpp"

namespace episcale {

/// Finite weighted point set in the plane.
struct AtomSet {
  std::vector<Point> positions;
  std::vector<double> weights;

  std::size_t size() const noexcept { return positions.size(); }
  bool empty() const noexcept { return positions.empty(); }

  void add(Point x, double w) {
    positions.push_back(x);
    weights.push_back(w);
  }

  double mass() const noexcept {
    double m = 0.0;
    for (double w : weights) m += w;
    return m;
  }
};

/// (mu^S, mu^I, mu^R): atoms of weight 1/N at the individuals of each state.
struct EmpiricalMeasure {
  std::array<AtomSet, 3> parts;
  std::size_t n = 0;

  const AtomSet& operator[](HealthState a) const noexcept { return parts[index_of(a)]; }
  AtomSet& operator[](HealthState a) noexcept { return parts[index_of(a)]; }

  double total_mass() const noexcept {
    return parts[0].mass() + parts[1].mass() + parts[2].mass();
  }
};

inline EmpiricalMeasure empirical_measure(const std::vector<Point>& positions,
                                          const std::vector<HealthState>& states) {
  EmpiricalMeasure mu;
  mu.n = positions.size();
  const double w = 1.0 / static_cast<double>(mu.n);
  for (std::size_t k = 0; k < positions.size(); ++k) mu[states[k]].add(positions[k], w);
  return mu;
}

inline EmpiricalMeasure empirical_measure(const PopulationState& pop) {
  return empirical_measure(pop.positions, pop.states);
}

/// Cell masses of one component as atoms at the cell centres (zero cells
/// dropped).
inline AtomSet atoms_from_grid(const GridField& f, HealthState a) {
  AtomSet out;
  const double area = f.cell_area();
  for (std::size_t c = 0; c < f.cells(); ++c) {
    const double m = f.at(a, c) * area;
    if (m != 0.0) out.add(f.center(c), m);
  }
  return out;
}

/// True when the grid spacing exceeds half the kernel support radius.
inline bool kernel_under_resolved(const LocalKernel& kernel, std::size_t n) {
  return 1.0 / static_cast<double>(n) > 0.5 * kernel.support_radius();
}

/// rho^A(x) = sum over atoms of w_k theta_N(x - x_k), sampled at cell
/// centres of an n x n grid over D. Only cells within the support radius of
/// an atom are visited. If `warning` is given it receives a message when the
/// grid under-resolves the kernel.
inline GridField mollified_density(const EmpiricalMeasure& mu, const LocalKernel& kernel,
                                   std::size_t n, std::string* warning = nullptr) {
  GridField rho(n);
  if (warning && kernel_under_resolved(kernel, n)) {
    *warning = "grid spacing " + std::to_string(rho.h()) + " exceeds half the kernel radius " +
               std::to_string(kernel.support_radius()) + "; kernel under-resolved";
  }
  const double h = rho.h();
  const double r = kernel.support_radius();
  const double r2 = r * r;
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  auto clamp_index = [&](double v) {
    return std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::floor(v / h)), 0, last);
  };
  for (HealthState a : kHealthStates) {
    const AtomSet& atoms = mu[a];
    auto out = rho.component(a);
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const Point x = atoms.positions[k];
      const double w = atoms.weights[k];
      const std::ptrdiff_t ix0 = clamp_index(x.x - r), ix1 = clamp_index(x.x + r);
      const std::ptrdiff_t iy0 = clamp_index(x.y - r), iy1 = clamp_index(x.y + r);
      for (std::ptrdiff_t iy = iy0; iy <= iy1; ++iy) {
        const double dy = (static_cast<double>(iy) + 0.5) * h - x.y;
        for (std::ptrdiff_t ix = ix0; ix <= ix1; ++ix) {
          const double dx = (static_cast<double>(ix) + 0.5) * h - x.x;
          const double d2 = dx * dx + dy * dy;
          if (d2 >= r2) continue;
          out[static_cast<std::size_t>(iy) * n + static_cast<std::size_t>(ix)] += w * kernel.at_sq(d2);
        }
      }
    }
  }
  return rho;
}

/// rho-tilde: the mollification of all atoms regardless of state.
inline std::vector<double> mollified_total(const GridField& rho) {
  std::vector<double> out(rho.cells());
  for (std::size_t c = 0; c < rho.cells(); ++c) out[c] = rho.cell_sum(c);
  return out;
}

}  // namespace episcale

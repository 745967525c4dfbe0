#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "episcale/core/types.hpp"
#include "episcale/kernels/local_kernel.hpp"
#include "episcale/kernels/spatial_index.hpp"
#include "episcale/metrics/measures.hpp"

namespace episcale {

struct CommutatorField {
  std::size_t n = 0;
  double beta = 0.0;
  std::size_t population = 0;
  /// Cell-centre values, row-major.
  std::vector<double> values;

  double sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

/// C(x) = (1/N) sum_{k in S} theta_N(x - x_k) rhoI(x_k) - rhoS(x) rhoI(x)
/// where rhoI(y) = (1/N) sum_{j in I} theta_N(y - x_j): the mollified
/// infection term minus the product of the mollified densities, on the
/// cell centres of an n x n grid.
inline CommutatorField commutator_field(const std::vector<Point>& positions,
                                        const std::vector<HealthState>& states,
                                        const LocalKernel& kernel, std::size_t n) {
  const std::size_t count = positions.size();
  const double inv_n = 1.0 / static_cast<double>(count);
  SpatialIndex index(positions, kernel.support_radius());
  const double r2 = kernel.support_radius() * kernel.support_radius();

  // rhoI at every susceptible position, then mollified with weight 1/N.
  EmpiricalMeasure weighted;
  weighted.n = count;
  for (std::size_t k = 0; k < count; ++k) {
    if (states[k] != HealthState::S) continue;
    double rho_i = 0.0;
    index.for_each_candidate(positions[k], [&](std::uint32_t j) {
      if (states[j] != HealthState::I) return;
      const double d2 = squared_distance(positions[k], positions[j]);
      if (d2 < r2) rho_i += kernel.at_sq(d2);
    });
    rho_i *= inv_n;
    if (rho_i != 0.0) weighted[HealthState::S].add(positions[k], inv_n * rho_i);
  }
  const GridField mixed = mollified_density(weighted, kernel, n);
  const GridField rho = mollified_density(empirical_measure(positions, states), kernel, n);

  CommutatorField out;
  out.n = n;
  out.beta = kernel.beta();
  out.population = count;
  out.values.resize(n * n);
  for (std::size_t c = 0; c < n * n; ++c) {
    out.values[c] = mixed.at(HealthState::S, c) - rho.at(HealthState::S, c) * rho.at(HealthState::I, c);
  }
  return out;
}

}  // namespace episcale

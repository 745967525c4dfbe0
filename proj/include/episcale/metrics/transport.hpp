#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "episcale/core/types.hpp"
#include "episcale/fields/grid_field.hpp"
#include "episcale/kernels/local_kernel.hpp"
#include "episcale/metrics/measures.hpp"
#include "episcale/metrics/network_simplex.hpp"

namespace episcale {

/// Largest combined atom count handed to the exact solver.
inline constexpr std::size_t kMaxExactAtoms = 4096;

namespace detail {

inline AtomSet drop_empty(const AtomSet& a) {
  AtomSet out;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a.weights[k] < 0.0) throw std::invalid_argument("atom weights must be non-negative");
    if (a.weights[k] > 0.0) out.add(a.positions[k], a.weights[k]);
  }
  return out;
}

}  // namespace detail

/// Exact W1 between equal-mass atom sets with Euclidean ground cost.
inline double w1_exact(const AtomSet& mu_in, const AtomSet& nu_in,
                       TransportSolution* solution = nullptr) {
  const AtomSet mu = detail::drop_empty(mu_in);
  const AtomSet nu = detail::drop_empty(nu_in);
  const double ma = mu.mass(), mb = nu.mass();
  if (std::abs(ma - mb) > 1e-12 * std::max(1.0, std::max(ma, mb)))
    throw std::invalid_argument("w1_exact: masses differ; use bounded_lipschitz");
  if (mu.size() + nu.size() > kMaxExactAtoms)
    throw std::invalid_argument("w1_exact: more than 4096 atoms; aggregate first");
  if (mu.empty() || nu.empty()) return 0.0;

  std::vector<double> demand = nu.weights;
  for (double& w : demand) w *= ma / mb;  // absorb round-off so the problem balances
  auto cost = [&](std::size_t i, std::size_t j) { return distance(mu.positions[i], nu.positions[j]); };
  TransportSolution sol = solve_transport(std::span<const double>(mu.weights), demand, cost,
                                          solution != nullptr);
  const double value = sol.cost;
  if (solution) *solution = std::move(sol);
  return value;
}

/// Bounded-Lipschitz distance: sup of int phi d(mu - nu) over phi with
/// Lip(phi) <= 1 and |phi| <= 1. Computed exactly through its primal form,
/// an unbalanced transport where unmatched mass costs 1 per unit on either
/// side: a dummy source holds nu's mass, a dummy sink absorbs mu's mass.
inline double bounded_lipschitz(const AtomSet& mu_in, const AtomSet& nu_in) {
  const AtomSet mu = detail::drop_empty(mu_in);
  const AtomSet nu = detail::drop_empty(nu_in);
  if (mu.size() + nu.size() + 2 > kMaxExactAtoms + 2)
    throw std::invalid_argument("bounded_lipschitz: more than 4096 atoms; aggregate first");
  if (mu.empty() && nu.empty()) return 0.0;
  const double ma = mu.mass(), mb = nu.mass();

  std::vector<double> supply = mu.weights;
  supply.push_back(mb);
  std::vector<double> demand = nu.weights;
  demand.push_back(ma);
  const std::size_t m = mu.size(), n = nu.size();
  auto cost = [&](std::size_t i, std::size_t j) -> double {
    const bool dummy_i = i == m, dummy_j = j == n;
    if (dummy_i && dummy_j) return 0.0;
    if (dummy_i || dummy_j) return 1.0;
    return distance(mu.positions[i], nu.positions[j]);
  };
  return solve_transport(std::span<const double>(supply), demand, cost).cost;
}

/// Atoms moved to the centres of a uniform lattice of spacing 1/grid over
/// D and merged. Moves every unit of mass at most spacing / sqrt(2).
inline AtomSet aggregate(const AtomSet& a, std::size_t grid) {
  const double h = 1.0 / static_cast<double>(grid);
  std::vector<double> mass(grid * grid, 0.0);
  const auto last = static_cast<std::ptrdiff_t>(grid) - 1;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto ix = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::floor(a.positions[k].x / h)), 0, last);
    const auto iy = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::floor(a.positions[k].y / h)), 0, last);
    mass[static_cast<std::size_t>(iy) * grid + static_cast<std::size_t>(ix)] += a.weights[k];
  }
  AtomSet out;
  for (std::size_t c = 0; c < mass.size(); ++c) {
    if (mass[c] > 0.0) {
      out.add({(static_cast<double>(c % grid) + 0.5) * h, (static_cast<double>(c / grid) + 0.5) * h},
              mass[c]);
    }
  }
  return out;
}

/// Copy of `a` scaled to total mass `mass`; absorbs round-off gaps between
/// measures that agree mathematically.
inline AtomSet rescaled(AtomSet a, double mass) {
  const double m = a.mass();
  if (m > 0.0) {
    for (double& w : a.weights) w *= mass / m;
  }
  return a;
}

/// Distance with the transport error introduced by aggregation.
struct DistanceEstimate {
  double value = 0.0;
  /// Upper bound on |value - exact distance|; 0 when no aggregation was needed.
  double aggregation_error = 0.0;
  std::size_t grid = 0;
};

/// Runs `metric` on the inputs, aggregating both to a common lattice when
/// the combined atom count exceeds the cap. The lattice starts at
/// `grid` cells per side and is halved until the problem fits.
template <class Metric>
DistanceEstimate with_aggregation(const AtomSet& mu, const AtomSet& nu, Metric metric,
                                  std::size_t grid = 64, bool force = false) {
  if (!force && mu.size() + nu.size() <= kMaxExactAtoms) return {metric(mu, nu), 0.0, 0};
  for (std::size_t g = grid; g >= 1; g /= 2) {
    AtomSet a = aggregate(mu, g), b = aggregate(nu, g);
    if (a.size() + b.size() <= kMaxExactAtoms) {
      const double h = 1.0 / static_cast<double>(g);
      return {metric(a, b), h / std::numbers::sqrt2 * (mu.mass() + nu.mass()), g};
    }
  }
  throw std::logic_error("aggregation failed to reduce the atom count");
}

/// Sum over S, I, R of a per-component distance. Exact W1 where the
/// component masses agree within 1e-9, bounded-Lipschitz otherwise.
inline DistanceEstimate w1_triple(const std::array<AtomSet, 3>& mu, const std::array<AtomSet, 3>& nu,
                                  std::size_t grid = 64, bool force_aggregation = false) {
  DistanceEstimate total;
  for (std::size_t a = 0; a < 3; ++a) {
    const bool equal = std::abs(mu[a].mass() - nu[a].mass()) <= 1e-9;
    DistanceEstimate d;
    if (equal) {
      d = with_aggregation(
          mu[a], nu[a],
          [](const AtomSet& x, const AtomSet& y) {
            // Aggregation preserves each mass to round-off; rebalance the tiny gap.
            if (x.empty() || y.empty()) return 0.0;
            return w1_exact(x, rescaled(y, x.mass()));
          },
          grid, force_aggregation);
    } else {
      d = with_aggregation(mu[a], nu[a], bounded_lipschitz, grid, force_aggregation);
    }
    total.value += d.value;
    total.aggregation_error += d.aggregation_error;
    total.grid = std::max(total.grid, d.grid);
  }
  return total;
}

inline std::array<AtomSet, 3> atom_triple(const GridField& f) {
  return {atoms_from_grid(f, HealthState::S), atoms_from_grid(f, HealthState::I),
          atoms_from_grid(f, HealthState::R)};
}

/// theta_N * a discretized on the lattice {((i + 1/2) h, (j + 1/2) h)} over
/// the whole plane. Each atom's mass is split over the lattice points within
/// the support radius in proportion to theta_N and renormalized to the atom
/// weight, so no unit of mass moves farther than the support radius.
inline AtomSet mollify_on_lattice(const AtomSet& a, const LocalKernel& kernel, double h) {
  const double r = kernel.support_radius();
  const double r2 = r * r;
  std::map<std::pair<long, long>, double> acc;
  std::vector<std::pair<std::pair<long, long>, double>> pieces;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Point x = a.positions[k];
    const long i0 = static_cast<long>(std::floor((x.x - r) / h - 0.5));
    const long i1 = static_cast<long>(std::ceil((x.x + r) / h - 0.5));
    const long j0 = static_cast<long>(std::floor((x.y - r) / h - 0.5));
    const long j1 = static_cast<long>(std::ceil((x.y + r) / h - 0.5));
    pieces.clear();
    double total = 0.0;
    for (long j = j0; j <= j1; ++j) {
      const double dy = (static_cast<double>(j) + 0.5) * h - x.y;
      for (long i = i0; i <= i1; ++i) {
        const double dx = (static_cast<double>(i) + 0.5) * h - x.x;
        const double d2 = dx * dx + dy * dy;
        if (d2 >= r2) continue;
        const double w = kernel.at_sq(d2);
        if (w <= 0.0) continue;
        pieces.push_back({{i, j}, w});
        total += w;
      }
    }
    if (total <= 0.0) {
      // Radius below the lattice resolution: keep the atom in its own cell.
      const long i = static_cast<long>(std::floor(x.x / h));
      const long j = static_cast<long>(std::floor(x.y / h));
      acc[{i, j}] += a.weights[k];
      continue;
    }
    for (const auto& [key, w] : pieces) acc[key] += a.weights[k] * w / total;
  }
  AtomSet out;
  for (const auto& [key, m] : acc) {
    out.add({(static_cast<double>(key.first) + 0.5) * h, (static_cast<double>(key.second) + 0.5) * h}, m);
  }
  return out;
}

/// Estimate of W1(theta_N * mu, mu) summed over compartments. Both sides
/// are aggregated to the lattice of spacing 1/grid first; the mollified side
/// is then spread on the same lattice over the whole plane. The returned
/// value never exceeds the support radius times the total mass, matching
/// the exact geometric bound.
inline DistanceEstimate mollification_distance(const EmpiricalMeasure& mu, const LocalKernel& kernel,
                                               std::size_t grid) {
  const double h = 1.0 / static_cast<double>(grid);
  DistanceEstimate total;
  total.grid = grid;
  for (HealthState a : kHealthStates) {
    const AtomSet agg = aggregate(mu[a], grid);
    if (agg.empty()) continue;
    const AtomSet rho = mollify_on_lattice(agg, kernel, h);
    if (agg.size() + rho.size() > kMaxExactAtoms)
      throw std::invalid_argument("mollification_distance: lattice too fine for the exact solver");
    total.value += w1_exact(agg, rescaled(rho, agg.mass()));
    total.aggregation_error += 2.0 * h / std::numbers::sqrt2 * mu[a].mass();
  }
  return total;
}

}  // namespace episcale

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <variant>

#include "episcale/core/model.hpp"
#include "episcale/core/types.hpp"
#include "episcale/kernels/interaction.hpp"
#include "episcale/kernels/local_kernel.hpp"
#include "episcale/kernels/spatial_index.hpp"

namespace episcale {

/// Either a mean-field T or a scaled mollifier theta_N tied to one N.
using KernelSpec = std::variant<InteractionKernel, LocalKernel>;

inline KernelSpec make_kernel_spec(const ModelParams& params, std::size_t n) {
  if (const auto* local = std::get_if<LocalRegime>(&params.regime)) {
    return LocalKernel(local->beta, n, local->exponent_divisor);
  }
  return std::get<MeanFieldRegime>(params.regime).kernel;
}

inline bool is_local(const KernelSpec& spec) noexcept {
  return std::holds_alternative<LocalKernel>(spec);
}

inline double support_radius(const KernelSpec& spec) noexcept {
  if (const auto* local = std::get_if<LocalKernel>(&spec)) return local->support_radius();
  return std::numeric_limits<double>::infinity();
}

/// Unscaled interaction value: T(x_s, x_i) or theta_N(x_s - x_i).
inline double kernel_value(const KernelSpec& spec, Point s, Point i) {
  if (const auto* local = std::get_if<LocalKernel>(&spec)) return (*local)(s, i);
  return std::get<InteractionKernel>(spec)(s, i);
}

/// tau_N(i, j) = (q / N) K(x_i, x_j) with i the susceptible and j the infected.
inline double eval_tau(const KernelSpec& spec, const ModelParams& params, std::size_t n, Point xi,
                       Point xj) {
  return (params.q / static_cast<double>(n)) * kernel_value(spec, xi, xj);
}

/// Cell list for a local kernel. Mean-field kernels get a single cell.
inline SpatialIndex build_spatial_index(const PopulationState& pop, const KernelSpec& spec) {
  const double r = support_radius(spec);
  return SpatialIndex(pop.positions, std::isfinite(r) && r > 0.0 ? r : 1.0);
}

/// lambda_i = sum over infected j of tau_N(i, j), accumulated in increasing
/// j order. In the local regime only the 3 x 3 cell block is scanned; the
/// result is bit-identical to the full O(N) sum because skipped terms are 0.
inline double infection_pressure(const PopulationState& pop, const SpatialIndex& index,
                                 const KernelSpec& spec, const ModelParams& params,
                                 std::size_t i) {
  if (pop.states.at(i) != HealthState::S)
    throw std::invalid_argument("infection_pressure: individual is not susceptible");
  const std::size_t n = pop.size();
  const Point xi = pop.positions[i];
  double sum = 0.0;
  if (is_local(spec)) {
    for (std::size_t j : index.neighbors(pop.positions, xi)) {
      if (pop.states[j] == HealthState::I) sum += eval_tau(spec, params, n, xi, pop.positions[j]);
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      if (pop.states[j] == HealthState::I) sum += eval_tau(spec, params, n, xi, pop.positions[j]);
    }
  }
  return sum;
}

/// Fills pop.pressure from scratch (zero for non-susceptibles).
inline void initialize_pressure(PopulationState& pop, const SpatialIndex& index,
                                const KernelSpec& spec, const ModelParams& params) {
  pop.pressure.assign(pop.size(), 0.0);
  if (pop.count(HealthState::I) == 0) return;
  if (const auto* t = std::get_if<InteractionKernel>(&spec); t && t->is_constant()) {
    const double lambda = eval_tau(spec, params, pop.size(), {}, {}) *
                          static_cast<double>(pop.count(HealthState::I));
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (pop.states[i] == HealthState::S) pop.pressure[i] = lambda;
    }
    return;
  }
  // Scatter from each infected j in increasing order: every lambda_i then
  // accumulates its terms in the same order as infection_pressure().
  const std::size_t n = pop.size();
  const bool local = is_local(spec);
  for (std::size_t j = 0; j < n; ++j) {
    if (pop.states[j] != HealthState::I) continue;
    const Point xj = pop.positions[j];
    auto add = [&](std::size_t i) {
      if (pop.states[i] == HealthState::S) pop.pressure[i] += eval_tau(spec, params, n, pop.positions[i], xj);
    };
    if (local) {
      index.for_each_candidate(xj, add);
    } else {
      for (std::size_t i = 0; i < n; ++i) add(i);
    }
  }
}

}  // namespace episcale

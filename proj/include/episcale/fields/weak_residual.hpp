#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "episcale/core/test_function.hpp"
#include "episcale/fields/grid_field.hpp"
#include "episcale/fields/solvers.hpp"

namespace episcale {

/// <f, phi> with cell masses as atoms at cell centres.
inline double pairing(const GridField& f, const TestFunction& phi) {
  double sum = 0.0;
  for (std::size_t c = 0; c < f.cells(); ++c) {
    const Point x = f.center(c);
    for (HealthState a : kHealthStates) sum += f.at(a, c) * phi(a, x);
  }
  return sum * f.cell_area();
}

/// Weak-form residual of a grid trajectory for the non-local system:
///   |<f_T, phi> - <f_0, phi>
///    - int_0^T [ q <f^S (Q_T f^I), phi^I - phi^S> + p <f^I, phi^R - phi^I> ] ds|
/// with the time integral by the trapezoid rule over the recorded states.
inline double weak_residual(const std::vector<GridField>& traj, const TestFunction& phi,
                            const NonlocalRhs& rhs) {
  if (traj.empty()) throw std::invalid_argument("weak_residual needs a non-empty trajectory");
  const GridField& first = traj.front();
  const std::size_t cells = first.cells();
  std::vector<double> inf_jump(cells), rec_jump(cells), pressure(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const Point x = first.center(c);
    inf_jump[c] = phi.i(x) - phi.s(x);
    rec_jump[c] = phi.r(x) - phi.i(x);
  }
  auto integrand = [&](const GridField& f) {
    rhs.convolve(f.component(HealthState::I), pressure);
    auto fs = f.component(HealthState::S);
    auto fi = f.component(HealthState::I);
    double inf = 0.0, rec = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      inf += pressure[c] * fs[c] * inf_jump[c];
      rec += fi[c] * rec_jump[c];
    }
    return (rhs.q() * inf + rhs.p() * rec) * f.cell_area();
  };

  double integral = 0.0;
  double prev = integrand(first);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double cur = integrand(traj[k]);
    integral += 0.5 * (prev + cur) * (traj[k].time() - traj[k - 1].time());
    prev = cur;
  }
  return std::abs(pairing(traj.back(), phi) - pairing(first, phi) - integral);
}

}  // namespace episcale

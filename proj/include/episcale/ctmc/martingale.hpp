#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "episcale/core/test_function.hpp"
#include "episcale/core/types.hpp"
#include "episcale/ctmc/engine.hpp"
#include "episcale/ctmc/trajectory.hpp"
#include "episcale/kernels/kernel_spec.hpp"

namespace episcale {

/// Path of M_t = <mu_t, phi> - <mu_0, phi> - int_0^t L<mu_s, phi> ds and of
/// its predictable quadratic variation, both sampled just after each event
/// and at the horizon. Between events the drift and the QV integrand are
/// constant, so both time integrals are exact.
struct MartingaleDiagnostic {
  std::vector<double> times;
  std::vector<double> martingale;
  /// Cumulative <M>_t.
  std::vector<double> quadratic_variation;
  /// QV integrand on the interval ending at each sample time.
  std::vector<double> qv_integrand;

  double final_value() const { return martingale.empty() ? 0.0 : martingale.back(); }
  double final_qv() const { return quadratic_variation.empty() ? 0.0 : quadratic_variation.back(); }
};

/// Generator terms of the coupling at the current state:
///   drift = (p/N) sum_{k in I} (phi^R - phi^I)(x_k) + (1/N) sum_{k in S} lambda_k (phi^I - phi^S)(x_k)
///   qv    = (p/N^2) sum_{k in I} (phi^R - phi^I)^2 + (1/N^2) sum_{k in S} lambda_k (phi^I - phi^S)^2
/// The QV integrand is the jump rate times the squared jump of <mu, phi>.
struct GeneratorTerms {
  double drift = 0.0;
  double qv = 0.0;
};

/// Direct O(N) evaluation from a state with a valid pressure table; the
/// replay in martingale_path maintains the same sums incrementally.
inline GeneratorTerms generator_terms(const PopulationState& pop, const ModelParams& params,
                                      const TestFunction& phi) {
  const double n = static_cast<double>(pop.size());
  double rec1 = 0.0, rec2 = 0.0, inf1 = 0.0, inf2 = 0.0;
  for (std::size_t k = 0; k < pop.size(); ++k) {
    const Point x = pop.positions[k];
    if (pop.states[k] == HealthState::I) {
      const double d = phi.r(x) - phi.i(x);
      rec1 += d;
      rec2 += d * d;
    } else if (pop.states[k] == HealthState::S && pop.count(HealthState::I) > 0) {
      const double d = phi.i(x) - phi.s(x);
      inf1 += pop.pressure[k] * d;
      inf2 += pop.pressure[k] * d * d;
    }
  }
  return {params.p / n * rec1 + inf1 / n, params.p / (n * n) * rec2 + inf2 / (n * n)};
}

inline MartingaleDiagnostic martingale_path(const Trajectory& traj, const KernelSpec& spec,
                                            const TestFunction& phi) {
  const PopulationState& pop0 = traj.initial;
  const std::size_t n = pop0.size();
  const double nd = static_cast<double>(n);
  const double p = traj.params.p;

  std::vector<double> jump_inf(n), jump_rec(n);
  std::vector<double> jump_inf_sq(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Point x = pop0.positions[k];
    const double fs = phi.s(x), fi = phi.i(x), fr = phi.r(x);
    jump_inf[k] = fi - fs;
    jump_inf_sq[k] = jump_inf[k] * jump_inf[k];
    jump_rec[k] = fr - fi;
  }

  Engine engine(pop0, traj.params, spec, 0);
  const std::size_t ch1 = engine.add_channel(jump_inf);
  const std::size_t ch2 = engine.add_channel(jump_inf_sq);
  double rec1 = 0.0, rec2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (pop0.states[k] == HealthState::I) {
      rec1 += jump_rec[k];
      rec2 += jump_rec[k] * jump_rec[k];
    }
  }

  MartingaleDiagnostic out;
  double t_prev = 0.0;
  double jumps = 0.0;  // N (<mu_t, phi> - <mu_0, phi>)
  double compensator = 0.0;
  double qv = 0.0;
  auto advance = [&](double t) {
    const double dt = t - t_prev;
    const double drift = p / nd * rec1 + engine.channel(ch1) / nd;
    const double q_int = p / (nd * nd) * rec2 + engine.channel(ch2) / (nd * nd);
    compensator += drift * dt;
    qv += q_int * dt;
    t_prev = t;
    return q_int;
  };
  auto record = [&](double t, double q_int) {
    out.times.push_back(t);
    out.martingale.push_back(jumps / nd - compensator);
    out.quadratic_variation.push_back(qv);
    out.qv_integrand.push_back(q_int);
  };

  for (const Event& e : traj.events) {
    if (e.time > traj.horizon()) break;
    const double q_int = advance(e.time);
    const std::size_t k = e.individual;
    if (e.kind == EventKind::Infection) {
      jumps += jump_inf[k];
      rec1 += jump_rec[k];
      rec2 += jump_rec[k] * jump_rec[k];
    } else {
      jumps += jump_rec[k];
      rec1 -= jump_rec[k];
      rec2 -= jump_rec[k] * jump_rec[k];
    }
    engine.apply(e);
    if (engine.count(HealthState::I) == 0) rec1 = rec2 = 0.0;
    record(e.time, q_int);
  }
  record(traj.horizon(), advance(traj.horizon()));
  return out;
}

/// Weak-form residual of an empirical trajectory against the mean-field
/// limit equation: |<mu_T, phi> - <mu_0, phi> - int_0^T (drift) ds|. The
/// drift is the generator's action, so this equals |M_T|.
inline double weak_residual(const Trajectory& traj, const KernelSpec& spec,
                            const TestFunction& phi) {
  return std::abs(martingale_path(traj, spec, phi).final_value());
}

}  // namespace episcale

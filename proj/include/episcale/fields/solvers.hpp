#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "episcale/core/types.hpp"
#include "episcale/fields/grid_field.hpp"
#include "episcale/kernels/interaction.hpp"

namespace episcale {

/// Right-hand side of the non-local system on a grid:
///   dS = -q (Q_T f^I) f^S,  dI = q (Q_T f^I) f^S - p f^I,  dR = p f^I
/// with (Q_T g)(x) = h^2 sum over cells y of T(x, y) g(y) (midpoint rule).
///
/// Constant T reduces to a sum; the Gaussian kernel is separable and is
/// applied as G F G^T; other kernels use a dense matrix (cached for small
/// grids). Summation order is fixed in all three paths.
class NonlocalRhs {
 public:
  static constexpr std::size_t kMaxCachedCells = 1024;

  NonlocalRhs(InteractionKernel kernel, double p, double q, std::size_t n)
      : kernel_(std::move(kernel)), p_(p), q_(q), n_(n), h_(1.0 / static_cast<double>(n)) {
    const std::size_t cells = n * n;
    if (kernel_.kind() == InteractionKernel::Kind::Gaussian) {
      factor_.resize(n * n);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          factor_[a * n + b] = kernel_.gaussian_factor((static_cast<double>(a) - static_cast<double>(b)) * h_);
        }
      }
      scratch_.resize(cells);
    } else if (kernel_.kind() == InteractionKernel::Kind::Custom && cells <= kMaxCachedCells) {
      dense_.resize(cells * cells);
      for (std::size_t c = 0; c < cells; ++c) {
        for (std::size_t d = 0; d < cells; ++d) dense_[c * cells + d] = kernel_(center(c), center(d));
      }
    }
  }

  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  std::size_t n() const noexcept { return n_; }
  const InteractionKernel& kernel() const noexcept { return kernel_; }

  /// out = Q_T g.
  void convolve(std::span<const double> g, std::span<double> out) const {
    const std::size_t cells = n_ * n_;
    const double area = h_ * h_;
    switch (kernel_.kind()) {
      case InteractionKernel::Kind::Constant: {
        double sum = 0.0;
        for (double v : g) sum += v;
        const double value = kernel_.amplitude() * area * sum;
        for (double& o : out) o = value;
        return;
      }
      case InteractionKernel::Kind::Gaussian: {
        // scratch[y][x] = sum_b g[y][b] G[x][b]; out[y][x] = sum_a G[y][a] scratch[a][x]
        for (std::size_t y = 0; y < n_; ++y) {
          for (std::size_t x = 0; x < n_; ++x) {
            double s = 0.0;
            for (std::size_t b = 0; b < n_; ++b) s += g[y * n_ + b] * factor_[x * n_ + b];
            scratch_[y * n_ + x] = s;
          }
        }
        for (std::size_t y = 0; y < n_; ++y) {
          for (std::size_t x = 0; x < n_; ++x) out[y * n_ + x] = 0.0;
          for (std::size_t a = 0; a < n_; ++a) {
            const double w = factor_[y * n_ + a];
            for (std::size_t x = 0; x < n_; ++x) out[y * n_ + x] += w * scratch_[a * n_ + x];
          }
        }
        const double scale = kernel_.amplitude() * area;
        for (double& o : out) o *= scale;
        return;
      }
      case InteractionKernel::Kind::Custom: {
        for (std::size_t c = 0; c < cells; ++c) {
          double s = 0.0;
          if (!dense_.empty()) {
            for (std::size_t d = 0; d < cells; ++d) s += dense_[c * cells + d] * g[d];
          } else {
            const Point xc = center(c);
            for (std::size_t d = 0; d < cells; ++d) s += kernel_(xc, center(d)) * g[d];
          }
          out[c] = area * s;
        }
        return;
      }
    }
  }

  void operator()(const GridField& f, GridField& df) const {
    const std::size_t cells = n_ * n_;
    pressure_.resize(cells);
    convolve(f.component(HealthState::I), pressure_);
    auto fs = f.component(HealthState::S);
    auto fi = f.component(HealthState::I);
    auto ds = df.component(HealthState::S);
    auto di = df.component(HealthState::I);
    auto dr = df.component(HealthState::R);
    for (std::size_t c = 0; c < cells; ++c) {
      const double infection = q_ * pressure_[c] * fs[c];
      const double recovery = p_ * fi[c];
      ds[c] = -infection;
      di[c] = infection - recovery;
      dr[c] = recovery;
    }
  }

 private:
  Point center(std::size_t c) const noexcept {
    return {(static_cast<double>(c % n_) + 0.5) * h_, (static_cast<double>(c / n_) + 0.5) * h_};
  }

  InteractionKernel kernel_;
  double p_;
  double q_;
  std::size_t n_;
  double h_;
  std::vector<double> factor_;
  std::vector<double> dense_;
  mutable std::vector<double> scratch_;
  mutable std::vector<double> pressure_;
};

/// Pointwise SIR field: every cell evolves on its own.
///   dS = -q f^I f^S,  dI = q f^I f^S - p f^I,  dR = p f^I
class LocalRhs {
 public:
  LocalRhs(double p, double q) : p_(p), q_(q) {}

  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }

  void operator()(const GridField& f, GridField& df) const {
    auto fs = f.component(HealthState::S);
    auto fi = f.component(HealthState::I);
    auto ds = df.component(HealthState::S);
    auto di = df.component(HealthState::I);
    auto dr = df.component(HealthState::R);
    for (std::size_t c = 0; c < f.cells(); ++c) {
      const double infection = q_ * fi[c] * fs[c];
      const double recovery = p_ * fi[c];
      ds[c] = -infection;
      di[c] = infection - recovery;
      dr[c] = recovery;
    }
  }

 private:
  double p_;
  double q_;
};

/// Lower limit below which a component is reported as negative.
inline constexpr double kNegativityTolerance = -1e-9;

template <class State>
void check_state(const State& y, std::size_t step) {
  for (double v : y.values()) {
    if (std::isnan(v)) throw NumericalError("NaN after step " + std::to_string(step));
    if (v < kNegativityTolerance)
      throw NumericalError("negative density " + std::to_string(v) + " after step " +
                           std::to_string(step) + "; reduce dt");
  }
}

/// Classical fourth-order Runge-Kutta for autonomous systems whose state
/// exposes a contiguous values() span. Rhs is called as rhs(y, dy).
template <class State, class Rhs>
class Rk4 {
 public:
  Rk4(const Rhs& rhs, const State& shape) : rhs_(rhs), k1_(shape), k2_(shape), k3_(shape), k4_(shape), tmp_(shape) {}

  void step(State& y, double dt) {
    auto yv = y.values();
    rhs_(y, k1_);
    axpy(yv, 0.5 * dt, k1_);
    rhs_(tmp_, k2_);
    axpy(yv, 0.5 * dt, k2_);
    rhs_(tmp_, k3_);
    axpy(yv, dt, k3_);
    rhs_(tmp_, k4_);
    auto a = k1_.values();
    auto b = k2_.values();
    auto c = k3_.values();
    auto d = k4_.values();
    const double w = dt / 6.0;
    for (std::size_t k = 0; k < yv.size(); ++k) yv[k] += w * (a[k] + 2.0 * b[k] + 2.0 * c[k] + d[k]);
    if constexpr (requires { y.set_time(0.0); }) y.set_time(y.time() + dt);
  }

 private:
  // tmp = y + s k
  void axpy(std::span<const double> y, double s, const State& k) {
    auto t = tmp_.values();
    auto kv = k.values();
    for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] + s * kv[i];
  }

  const Rhs& rhs_;
  State k1_, k2_, k3_, k4_, tmp_;
};

/// Integrates n_steps of size dt, calling observer(step, state) after the
/// initial state and after every step. Returns the final state.
template <class State, class Rhs, class Observer>
State rk4_run(State y, const Rhs& rhs, double dt, std::size_t n_steps, Observer&& observer) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  check_state(y, 0);
  observer(std::size_t{0}, static_cast<const State&>(y));
  Rk4<State, Rhs> rk(rhs, y);
  for (std::size_t s = 1; s <= n_steps; ++s) {
    rk.step(y, dt);
    check_state(y, s);
    observer(s, static_cast<const State&>(y));
  }
  return y;
}

/// RK4 trajectory, keeping every `record_every`-th state and the last one.
template <class State, class Rhs>
std::vector<State> rk4_integrate(const State& y0, const Rhs& rhs, double dt, std::size_t n_steps,
                                 std::size_t record_every = 1) {
  if (record_every == 0) throw std::invalid_argument("record_every must be >= 1");
  std::vector<State> out;
  rk4_run(y0, rhs, dt, n_steps, [&](std::size_t s, const State& y) {
    if (s % record_every == 0 || s == n_steps) out.push_back(y);
  });
  return out;
}

/// Well-mixed SIR: S' = -b S I, I' = b S I - g I, R' = g I.
struct ClassicalSIRState {
  double s = 1.0;
  double i = 0.0;
  double r = 0.0;
  double contact = 1.0;
  double recovery = 1.0;
};

struct SirVector {
  std::array<double, 3> v{};
  std::span<double> values() noexcept { return v; }
  std::span<const double> values() const noexcept { return v; }
};

/// RK4 trajectory of (S, I, R): n_steps + 1 entries starting at the initial state.
inline std::vector<std::array<double, 3>> classical_sir(const ClassicalSIRState& state0, double dt,
                                                        std::size_t n_steps) {
  if (!(state0.s >= 0.0 && state0.i >= 0.0 && state0.r >= 0.0))
    throw std::invalid_argument("classical SIR state must be non-negative");
  const double b = state0.contact;
  const double g = state0.recovery;
  auto rhs = [b, g](const SirVector& y, SirVector& dy) {
    const double infection = b * y.v[0] * y.v[1];
    const double recovery = g * y.v[1];
    dy.v = {-infection, infection - recovery, recovery};
  };
  std::vector<std::array<double, 3>> out;
  out.reserve(n_steps + 1);
  rk4_run(SirVector{{state0.s, state0.i, state0.r}}, rhs, dt, n_steps,
          [&](std::size_t, const SirVector& y) { out.push_back(y.v); });
  return out;
}

}  // namespace episcale

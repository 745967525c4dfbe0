#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "episcale/core/model.hpp"
#include "episcale/core/random.hpp"
#include "episcale/core/types.hpp"
#include "episcale/ctmc/rate_tree.hpp"
#include "episcale/kernels/kernel_spec.hpp"

namespace episcale {

enum class EventKind : std::uint8_t { Recovery = 0, Infection = 1 };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::Recovery;
  std::uint32_t individual = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

/// R_tot = p n_I + sum over susceptibles of lambda_i, from the stored table.
inline double total_event_rate(const PopulationState& pop, const ModelParams& params) {
  double infection = 0.0;
  if (pop.count(HealthState::I) > 0) {
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (pop.states[i] == HealthState::S) infection += pop.pressure[i];
    }
  }
  return params.p * static_cast<double>(pop.count(HealthState::I)) + infection;
}

/// Exact direct-method simulation of the SIR chain.
///
/// Three execution paths share one interface:
///  - constant T: every susceptible has the same lambda = (q/N) c n_I, so an
///    infection picks a uniform susceptible; O(1) per event;
///  - general mean-field T: an event updates lambda for all susceptibles,
///    O(N) per event, with rates held in a sum tree;
///  - local kernel: an event updates only susceptibles in the 3 x 3 cell
///    block around the individual that changed.
///
/// The next event time is drawn once and kept until the event is applied,
/// so stopping at intermediate times does not alter the trajectory.
///
/// Weighted channels maintain sum over susceptibles of lambda_k w_k for
/// caller-supplied weights w; the martingale diagnostics read them.
class Engine {
 public:
  enum class Mode { Constant, Dense, Local };

  Engine(PopulationState pop, ModelParams params, KernelSpec spec, std::uint64_t seed)
      : pop_(std::move(pop)), params_(std::move(params)), spec_(std::move(spec)), rng_(seed) {
    const std::size_t n = pop_.size();
    if (n == 0) throw std::invalid_argument("engine needs a non-empty population");
    if (n > std::numeric_limits<std::uint32_t>::max())
      throw std::invalid_argument("population too large");
    if (pop_.states.size() != n) throw std::invalid_argument("positions/states size mismatch");
    if (const auto* local = std::get_if<LocalKernel>(&spec_); local && local->population() != n)
      throw std::invalid_argument("local kernel was built for a different N");
    pop_.counts = count_states(pop_.states);

    if (const auto* t = std::get_if<InteractionKernel>(&spec_)) {
      mode_ = t->is_constant() ? Mode::Constant : Mode::Dense;
    } else {
      mode_ = Mode::Local;
    }
    index_ = build_spatial_index(pop_, spec_);

    infected_pos_.assign(n, kNone);
    susceptible_pos_.assign(n, kNone);
    for (std::size_t i = 0; i < n; ++i) {
      if (pop_.states[i] == HealthState::I) push(infected_, infected_pos_, i);
      if (pop_.states[i] == HealthState::S && mode_ == Mode::Constant)
        push(susceptible_, susceptible_pos_, i);
    }
    initialize_pressure(pop_, index_, spec_, params_);
    if (mode_ != Mode::Constant) {
      tree_ = RateTree(n);
      tree_.assign(pop_.pressure);
    } else {
      constant_lambda_ = constant_tau() * static_cast<double>(pop_.count(HealthState::I));
    }
  }

  Mode mode() const noexcept { return mode_; }
  double clock() const noexcept { return pop_.clock; }
  std::uint64_t events() const noexcept { return events_; }
  std::size_t size() const noexcept { return pop_.size(); }
  std::size_t count(HealthState s) const noexcept { return pop_.count(s); }
  const StateCounts& counts() const noexcept { return pop_.counts; }
  const std::vector<HealthState>& states() const noexcept { return pop_.states; }
  const std::vector<Point>& positions() const noexcept { return pop_.positions; }
  const ModelParams& params() const noexcept { return params_; }
  const KernelSpec& spec() const noexcept { return spec_; }
  const SpatialIndex& index() const noexcept { return index_; }

  /// Current lambda_i (0 for non-susceptibles).
  double pressure(std::size_t i) const {
    if (pop_.states[i] != HealthState::S) return 0.0;
    return mode_ == Mode::Constant ? constant_lambda_ : pop_.pressure[i];
  }

  /// Snapshot of the full state with an up-to-date pressure table.
  const PopulationState& population() const {
    if (mode_ == Mode::Constant) {
      for (std::size_t i = 0; i < pop_.size(); ++i) pop_.pressure[i] = pressure(i);
    }
    return pop_;
  }

  double recovery_rate() const noexcept {
    return params_.p * static_cast<double>(pop_.count(HealthState::I));
  }

  double infection_rate() const noexcept {
    if (pop_.count(HealthState::I) == 0) return 0.0;
    if (mode_ == Mode::Constant)
      return constant_lambda_ * static_cast<double>(pop_.count(HealthState::S));
    return tree_.total();
  }

  double total_rate() const noexcept { return recovery_rate() + infection_rate(); }

  /// Time of the next event (infinity once absorbed), drawn on first request.
  double next_event_time() {
    if (!pending_) {
      const double rate = total_rate();
      next_time_ = rate > 0.0 ? pop_.clock + exponential(rng_, rate)
                              : std::numeric_limits<double>::infinity();
      pending_ = true;
    }
    return next_time_;
  }

  /// Performs one event; nullopt when no event can ever occur again.
  std::optional<Event> step() {
    const double t = next_event_time();
    if (!std::isfinite(t)) return std::nullopt;
    return fire(t);
  }

  /// Performs the next event if it happens at or before t_max. Otherwise the
  /// clock moves to t_max and nullopt is returned.
  std::optional<Event> step_until(double t_max) {
    const double t = next_event_time();
    if (t > t_max) {
      pop_.clock = std::max(pop_.clock, t_max);
      return std::nullopt;
    }
    return fire(t);
  }

  /// Applies a recorded event (replay). Discards any pending draw.
  void apply(const Event& e) {
    const std::size_t i = e.individual;
    if (i >= pop_.size()) throw std::invalid_argument("event individual out of range");
    if (e.time < pop_.clock) throw std::invalid_argument("event times must be non-decreasing");
    if (e.kind == EventKind::Recovery) {
      if (pop_.states[i] != HealthState::I) throw std::invalid_argument("recovery of non-infected");
      recover(i);
    } else {
      if (pop_.states[i] != HealthState::S)
        throw std::invalid_argument("infection of non-susceptible");
      infect(i);
    }
    pop_.clock = e.time;
    pending_ = false;
    ++events_;
  }

  /// Registers weights w (one per individual) and returns a channel id for
  /// sum over susceptibles k of lambda_k w_k.
  std::size_t add_channel(std::vector<double> weights) {
    if (weights.size() != pop_.size()) throw std::invalid_argument("channel weight size mismatch");
    channels_.push_back({std::move(weights), 0.0});
    resync_channel(channels_.back());
    return channels_.size() - 1;
  }

  double channel(std::size_t id) const {
    const Channel& c = channels_.at(id);
    if (pop_.count(HealthState::I) == 0) return 0.0;
    return mode_ == Mode::Constant ? constant_lambda_ * c.sum : c.sum;
  }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  struct Channel {
    std::vector<double> weights;
    // Constant mode: sum over susceptibles of w. Otherwise: of lambda * w.
    double sum = 0.0;
  };

  static void push(std::vector<std::uint32_t>& list, std::vector<std::uint32_t>& pos,
                   std::size_t i) {
    pos[i] = static_cast<std::uint32_t>(list.size());
    list.push_back(static_cast<std::uint32_t>(i));
  }

  static void erase(std::vector<std::uint32_t>& list, std::vector<std::uint32_t>& pos,
                    std::size_t i) {
    const std::uint32_t at = pos[i];
    const std::uint32_t last = list.back();
    list[at] = last;
    pos[last] = at;
    list.pop_back();
    pos[i] = kNone;
  }

  double constant_tau() const {
    return eval_tau(spec_, params_, pop_.size(), Point{}, Point{});
  }

  Event fire(double t) {
    const double recovery = recovery_rate();
    const double total = recovery + infection_rate();
    const double u = uniform01(rng_) * total;
    Event e{t, EventKind::Recovery, 0};
    if (u < recovery || infection_rate() <= 0.0) {
      e.individual = infected_[uniform_index(rng_, infected_.size())];
    } else {
      e.kind = EventKind::Infection;
      if (mode_ == Mode::Constant) {
        e.individual = susceptible_[uniform_index(rng_, susceptible_.size())];
      } else {
        e.individual = static_cast<std::uint32_t>(tree_.find(u - recovery));
      }
    }
    apply(e);
    return e;
  }

  void set_state(std::size_t i, HealthState to) {
    --pop_.counts[index_of(pop_.states[i])];
    ++pop_.counts[index_of(to)];
    pop_.states[i] = to;
  }

  void infect(std::size_t i) {
    const double old = pop_.pressure[i];
    set_state(i, HealthState::I);
    push(infected_, infected_pos_, i);
    if (mode_ == Mode::Constant) {
      erase(susceptible_, susceptible_pos_, i);
      for (Channel& c : channels_) c.sum -= c.weights[i];
      constant_lambda_ = constant_tau() * static_cast<double>(pop_.count(HealthState::I));
      pop_.pressure[i] = 0.0;
      after_event();
      return;
    }
    for (Channel& c : channels_) c.sum -= old * c.weights[i];
    pop_.pressure[i] = 0.0;
    tree_.stage(i, 0.0);
    spread(i, +1.0);
    tree_.commit();
    after_event();
  }

  void recover(std::size_t j) {
    set_state(j, HealthState::R);
    erase(infected_, infected_pos_, j);
    if (mode_ == Mode::Constant) {
      constant_lambda_ = constant_tau() * static_cast<double>(pop_.count(HealthState::I));
      after_event();
      return;
    }
    if (pop_.count(HealthState::I) == 0) {
      // No infected left: every rate is exactly zero.
      std::fill(pop_.pressure.begin(), pop_.pressure.end(), 0.0);
      tree_.assign(pop_.pressure);
      for (Channel& c : channels_) c.sum = 0.0;
      after_event();
      return;
    }
    spread(j, -1.0);
    tree_.commit();
    after_event();
  }

  /// Adds sign * tau(k, j) to lambda_k for every susceptible k in range of j.
  void spread(std::size_t j, double sign) {
    const Point xj = pop_.positions[j];
    const std::size_t n = pop_.size();
    auto touch = [&](std::size_t k) {
      if (pop_.states[k] != HealthState::S) return;
      const double tau = eval_tau(spec_, params_, n, pop_.positions[k], xj);
      if (tau == 0.0) return;
      const double before = pop_.pressure[k];
      const double after = std::max(before + sign * tau, 0.0);
      pop_.pressure[k] = after;
      for (Channel& c : channels_) c.sum += (after - before) * c.weights[k];
      tree_.stage(k, after);
    };
    if (mode_ == Mode::Local) {
      // Same product as eval_tau, with the support test ahead of the kernel.
      const LocalKernel& kernel = std::get<LocalKernel>(spec_);
      const double r2 = kernel.support_radius() * kernel.support_radius();
      const double scale = params_.q / static_cast<double>(n);
      index_.for_each_candidate(xj, [&](std::uint32_t k) {
        if (pop_.states[k] != HealthState::S) return;
        const double d2 = squared_distance(pop_.positions[k], xj);
        if (d2 >= r2) return;
        const double tau = scale * kernel.at_sq(d2);
        if (tau == 0.0) return;
        const double before = pop_.pressure[k];
        const double after = std::max(before + sign * tau, 0.0);
        pop_.pressure[k] = after;
        for (Channel& c : channels_) c.sum += (after - before) * c.weights[k];
        tree_.stage(k, after);
      });
    } else {
      for (std::size_t k = 0; k < n; ++k) touch(k);
    }
  }

  void after_event() {
    if (channels_.empty()) return;
    if (++since_resync_ >= pop_.size()) {
      since_resync_ = 0;
      for (Channel& c : channels_) resync_channel(c);
    }
  }

  void resync_channel(Channel& c) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < pop_.size(); ++k) {
      if (pop_.states[k] != HealthState::S) continue;
      sum += mode_ == Mode::Constant ? c.weights[k] : pop_.pressure[k] * c.weights[k];
    }
    c.sum = sum;
  }

  mutable PopulationState pop_;
  ModelParams params_;
  KernelSpec spec_;
  Rng rng_;
  Mode mode_ = Mode::Dense;
  SpatialIndex index_;
  RateTree tree_;
  double constant_lambda_ = 0.0;
  std::vector<std::uint32_t> infected_;
  std::vector<std::uint32_t> infected_pos_;
  std::vector<std::uint32_t> susceptible_;
  std::vector<std::uint32_t> susceptible_pos_;
  std::vector<Channel> channels_;
  std::size_t since_resync_ = 0;
  bool pending_ = false;
  double next_time_ = 0.0;
  std::uint64_t events_ = 0;
};

}  // namespace episcale

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "episcale/core/model.hpp"
#include "episcale/core/types.hpp"
#include "episcale/ctmc/engine.hpp"
#include "episcale/kernels/kernel_spec.hpp"

namespace episcale {

/// Health states at one instant, taken just after the last event at or
/// before `time`.
struct Snapshot {
  double time = 0.0;
  std::vector<HealthState> states;
  StateCounts counts{};

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct Trajectory {
  PopulationState initial;
  ModelParams params;
  std::uint64_t seed = 0;
  std::vector<Event> events;
  std::vector<Snapshot> snapshots;
  std::uint64_t event_count = 0;
  /// True when the chain ran out of events before the horizon.
  bool absorbed = false;

  double horizon() const noexcept { return params.horizon; }
};

struct SimulateOptions {
  bool record_events = true;
  /// Safety cap; exceeding it throws.
  std::uint64_t max_events = std::numeric_limits<std::uint64_t>::max();
};

inline void check_snapshot_times(const std::vector<double>& times, double horizon) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0 && times[k] <= horizon))
      throw std::invalid_argument("snapshot times must lie in [0, horizon]");
    if (k > 0 && times[k] < times[k - 1])
      throw std::invalid_argument("snapshot times must be sorted");
  }
}

/// Simulates one trajectory on [0, horizon]. The event log and snapshots
/// are a deterministic function of (pop0, params, spec, seed).
inline Trajectory simulate(const PopulationState& pop0, const ModelParams& params,
                           const KernelSpec& spec, const std::vector<double>& snapshot_times,
                           std::uint64_t seed, const SimulateOptions& options = {}) {
  params.validate();
  check_snapshot_times(snapshot_times, params.horizon);

  Trajectory traj;
  traj.initial = pop0;
  traj.initial.clock = 0.0;
  traj.params = params;
  traj.seed = seed;

  Engine engine(traj.initial, params, spec, seed);
  auto run_to = [&](double t) {
    while (auto e = engine.step_until(t)) {
      if (options.record_events) traj.events.push_back(*e);
      if (++traj.event_count > options.max_events)
        throw std::runtime_error("event cap exceeded before the horizon");
    }
  };
  for (double t : snapshot_times) {
    run_to(t);
    traj.snapshots.push_back({t, engine.states(), engine.counts()});
  }
  run_to(params.horizon);
  traj.absorbed = !std::isfinite(engine.next_event_time());
  return traj;
}

/// Re-applies the recorded events to the initial state and returns the
/// configuration at each requested time (cadlag evaluation).
inline std::vector<Snapshot> replay(const Trajectory& traj, const std::vector<double>& times) {
  check_snapshot_times(times, traj.horizon());
  std::vector<Snapshot> out;
  std::vector<HealthState> states = traj.initial.states;
  StateCounts counts = count_states(states);
  std::size_t next = 0;
  for (double t : times) {
    for (; next < traj.events.size() && traj.events[next].time <= t; ++next) {
      const Event& e = traj.events[next];
      const HealthState to = e.kind == EventKind::Recovery ? HealthState::R : HealthState::I;
      --counts[index_of(states[e.individual])];
      ++counts[index_of(to)];
      states[e.individual] = to;
    }
    out.push_back({t, states, counts});
  }
  return out;
}

}  // namespace episcale

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace episcale {

/// Health compartments. The numeric order S < I < R is part of every
/// serialized format.
enum class HealthState : std::uint8_t { S = 0, I = 1, R = 2 };

inline constexpr std::array<HealthState, 3> kHealthStates{HealthState::S, HealthState::I,
                                                          HealthState::R};

constexpr std::size_t index_of(HealthState s) noexcept { return static_cast<std::size_t>(s); }

constexpr char to_char(HealthState s) noexcept {
  switch (s) {
    case HealthState::S: return 'S';
    case HealthState::I: return 'I';
    case HealthState::R: return 'R';
  }
  return '?';
}

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr bool operator==(Point, Point) = default;
};

constexpr double squared_distance(Point a, Point b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(Point a, Point b) noexcept { return std::sqrt(squared_distance(a, b)); }

/// The spatial domain is the closed unit square.
constexpr bool in_domain(Point p) noexcept {
  return p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0;
}

struct Individual {
  Point position;
  HealthState state = HealthState::S;
};

using StateCounts = std::array<std::size_t, 3>;

inline StateCounts count_states(const std::vector<HealthState>& states) {
  StateCounts counts{};
  for (HealthState s : states) ++counts[index_of(s)];
  return counts;
}

/// Thrown when an integrator or solver produces NaN or a negative density.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The CTMC state: fixed positions, health states, compartment counts and
/// the per-individual infection pressure lambda_i (meaningful only while
/// individual i is susceptible).
struct PopulationState {
  std::vector<Point> positions;
  std::vector<HealthState> states;
  StateCounts counts{};
  std::vector<double> pressure;
  double clock = 0.0;

  std::size_t size() const noexcept { return positions.size(); }
  std::size_t count(HealthState s) const noexcept { return counts[index_of(s)]; }
  Individual individual(std::size_t i) const { return {positions.at(i), states.at(i)}; }
};

}  // namespace episcale

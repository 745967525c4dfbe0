#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "episcale/core/types.hpp"

namespace episcale {

/// Uniform cell list over the unit square. Cell side is at least the query
/// radius, so every point within the radius of a query lies in the 3 x 3
/// block of cells around it. Members of each cell are stored in increasing
/// index order.
class SpatialIndex {
 public:
  static constexpr std::size_t kMaxCellsPerSide = 64;

  SpatialIndex() { build({}, 1.0); }
  SpatialIndex(const std::vector<Point>& positions, double radius) { build(positions, radius); }

  std::size_t cells_per_side() const noexcept { return side_count_; }
  double cell_side() const noexcept { return 1.0 / static_cast<double>(side_count_); }
  double radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return cell_of_.size(); }

  std::size_t cell_coord(double v) const noexcept {
    const auto c = static_cast<std::ptrdiff_t>(std::floor(v * static_cast<double>(side_count_)));
    return static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(c, 0, static_cast<std::ptrdiff_t>(side_count_) - 1));
  }

  std::size_t cell_of(Point p) const noexcept {
    return cell_coord(p.y) * side_count_ + cell_coord(p.x);
  }

  /// Cell index of individual i.
  std::size_t cell_of_member(std::size_t i) const noexcept { return cell_of_[i]; }

  /// Members of one cell, increasing index order.
  std::pair<const std::uint32_t*, const std::uint32_t*> cell_members(std::size_t cell) const {
    return {members_.data() + start_[cell], members_.data() + start_[cell + 1]};
  }

  /// Calls f(j) for every member of the 3 x 3 block around q. The visiting
  /// order is cell by cell, not globally sorted.
  template <class F>
  void for_each_candidate(Point q, F&& f) const {
    const std::size_t cx = cell_coord(q.x);
    const std::size_t cy = cell_coord(q.y);
    const std::size_t x0 = cx == 0 ? 0 : cx - 1;
    const std::size_t y0 = cy == 0 ? 0 : cy - 1;
    const std::size_t x1 = std::min(cx + 1, side_count_ - 1);
    const std::size_t y1 = std::min(cy + 1, side_count_ - 1);
    for (std::size_t y = y0; y <= y1; ++y) {
      for (std::size_t x = x0; x <= x1; ++x) {
        const std::size_t cell = y * side_count_ + x;
        for (std::size_t k = start_[cell]; k < start_[cell + 1]; ++k) f(members_[k]);
      }
    }
  }

  /// Indices j with |positions[j] - q| < radius, sorted increasingly.
  std::vector<std::size_t> neighbors(const std::vector<Point>& positions, Point q) const {
    std::vector<std::size_t> out;
    const double r2 = radius_ * radius_;
    for_each_candidate(q, [&](std::uint32_t j) {
      if (squared_distance(positions[j], q) < r2) out.push_back(j);
    });
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void build(const std::vector<Point>& positions, double radius) {
    radius_ = radius;
    const double side = std::max(radius, 1.0 / static_cast<double>(kMaxCellsPerSide));
    side_count_ = side >= 1.0 ? 1 : static_cast<std::size_t>(std::floor(1.0 / side));
    side_count_ = std::clamp<std::size_t>(side_count_, 1, kMaxCellsPerSide);
    const std::size_t cells = side_count_ * side_count_;

    cell_of_.resize(positions.size());
    start_.assign(cells + 1, 0);
    for (std::size_t i = 0; i < positions.size(); ++i) {
      cell_of_[i] = static_cast<std::uint32_t>(cell_of(positions[i]));
      ++start_[cell_of_[i] + 1];
    }
    for (std::size_t c = 0; c < cells; ++c) start_[c + 1] += start_[c];
    members_.resize(positions.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < positions.size(); ++i) {
      members_[fill[cell_of_[i]]++] = static_cast<std::uint32_t>(i);
    }
  }

  double radius_ = 1.0;
  std::size_t side_count_ = 1;
  std::vector<std::uint32_t> cell_of_;
  std::vector<std::size_t> start_;
  std::vector<std::uint32_t> members_;
};

}  // namespace episcale

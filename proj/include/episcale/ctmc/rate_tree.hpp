#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace episcale {

/// Complete binary sum tree over non-negative leaf rates.
///
/// Every internal node is recomputed as left + right from its children, never
/// adjusted by differences, so the stored totals carry no accumulated drift.
/// Leaves can be staged in bulk and committed at once; large batches trigger
/// a single bottom-up rebuild instead of per-leaf walks.
class RateTree {
 public:
  RateTree() : RateTree(0) {}
  explicit RateTree(std::size_t n)
      : n_(n), cap_(std::bit_ceil(std::max<std::size_t>(n, 1))), node_(2 * cap_, 0.0) {
    log_cap_ = static_cast<std::size_t>(std::bit_width(cap_));
  }

  std::size_t size() const noexcept { return n_; }
  double total() const noexcept { return node_[1]; }
  double value(std::size_t i) const noexcept { return node_[cap_ + i]; }

  void assign(std::span<const double> values) {
    std::fill(node_.begin() + static_cast<std::ptrdiff_t>(cap_), node_.end(), 0.0);
    for (std::size_t i = 0; i < values.size() && i < n_; ++i) node_[cap_ + i] = std::max(values[i], 0.0);
    dirty_.clear();
    rebuild();
  }

  void set(std::size_t i, double v) {
    std::size_t k = cap_ + i;
    node_[k] = std::max(v, 0.0);
    for (k >>= 1; k >= 1; k >>= 1) node_[k] = node_[2 * k] + node_[2 * k + 1];
  }

  /// Writes a leaf without updating its ancestors; call commit() afterwards.
  void stage(std::size_t i, double v) {
    node_[cap_ + i] = std::max(v, 0.0);
    dirty_.push_back(i);
  }

  void commit() {
    if (dirty_.empty()) return;
    if (dirty_.size() * log_cap_ >= cap_) {
      rebuild();
    } else {
      for (std::size_t i : dirty_) {
        for (std::size_t k = (cap_ + i) >> 1; k >= 1; k >>= 1) node_[k] = node_[2 * k] + node_[2 * k + 1];
      }
    }
    dirty_.clear();
  }

  /// Leaf index whose cumulative interval contains u, for u in [0, total()).
  /// Never descends into an empty subtree, so the returned leaf is positive
  /// whenever total() > 0.
  std::size_t find(double u) const noexcept {
    std::size_t k = 1;
    while (k < cap_) {
      const double left = node_[2 * k];
      const double right = node_[2 * k + 1];
      if (right <= 0.0 || (u < left && left > 0.0)) {
        k = 2 * k;
      } else {
        u = std::min(u - left, std::nextafter(right, 0.0));
        k = 2 * k + 1;
      }
    }
    return k - cap_;
  }

 private:
  void rebuild() {
    for (std::size_t k = cap_ - 1; k >= 1; --k) node_[k] = node_[2 * k] + node_[2 * k + 1];
  }

  std::size_t n_;
  std::size_t cap_;
  std::size_t log_cap_ = 1;
  std::vector<double> node_;
  std::vector<std::size_t> dirty_;
};

}  // namespace episcale

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace episcale {

struct TransportArc {
  std::size_t source = 0;
  std::size_t sink = 0;
  double flow = 0.0;
};

struct TransportSolution {
  double cost = 0.0;
  std::size_t pivots = 0;
  std::vector<TransportArc> plan;
};

/// Primal network simplex for the balanced transportation problem
///
///   min sum_ij c(i, j) x_ij   s.t.  sum_j x_ij = a_i,  sum_i x_ij = b_j,  x >= 0
///
/// on the complete bipartite graph. Arc costs are never stored: c(i, j) is
/// recomputed on demand by the `cost` functor.
///
/// The basis is a spanning tree rooted at an artificial node joined to
/// every source (i -> root) and sink (root -> j) by big-M arcs. Entering
/// arcs come from block-search pricing; the leaving arc follows the
/// strongly-feasible rule, which rules out cycling under degeneracy.
template <class Cost>
class TransportSimplex {
 public:
  TransportSimplex(std::span<const double> supply, std::span<const double> demand, Cost cost)
      : m_(supply.size()), n_(demand.size()), cost_(std::move(cost)) {
    if (m_ == 0 || n_ == 0) throw std::invalid_argument("transport problem needs both sides");
    nodes_ = m_ + n_ + 1;
    root_ = m_ + n_;
    real_arcs_ = m_ * n_;

    double max_cost = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) max_cost = std::max(max_cost, cost_(i, j));
    }
    big_m_ = (max_cost + 1.0) * static_cast<double>(m_ + n_);
    eps_ = 1e-13 * big_m_;

    parent_.assign(nodes_, kNone);
    pred_.assign(nodes_, kNone);
    up_.assign(nodes_, 0);
    flow_.assign(nodes_, 0.0);
    pi_.assign(nodes_, 0.0);
    depth_.assign(nodes_, 0);
    first_child_.assign(nodes_, kNone);
    next_sib_.assign(nodes_, kNone);
    prev_sib_.assign(nodes_, kNone);

    for (std::size_t i = 0; i < m_; ++i) {
      init_leaf(i, real_arcs_ + i, true, supply[i], -big_m_);
    }
    for (std::size_t j = 0; j < n_; ++j) {
      init_leaf(m_ + j, real_arcs_ + m_ + j, false, demand[j], big_m_);
    }
    block_ = std::max<std::size_t>(
        10, static_cast<std::size_t>(std::sqrt(static_cast<double>(real_arcs_))));
  }

  TransportSolution solve(bool with_plan = false) {
    const std::size_t max_pivots = 1000 * (nodes_ + 10) + 20 * real_arcs_;
    std::size_t pivots = 0;
    std::size_t arc;
    while (find_entering(arc)) {
      pivot(arc);
      if (++pivots > max_pivots) throw std::runtime_error("network simplex: pivot limit exceeded");
    }
    TransportSolution out;
    out.pivots = pivots;
    double artificial = 0.0;
    for (std::size_t w = 0; w < nodes_; ++w) {
      if (w == root_) continue;
      const std::size_t a = pred_[w];
      if (a >= real_arcs_) {
        artificial += flow_[w];
        continue;
      }
      if (flow_[w] <= 0.0) continue;
      const std::size_t i = a / n_;
      const std::size_t j = a % n_;
      out.cost += flow_[w] * cost_(i, j);
      if (with_plan) out.plan.push_back({i, j, flow_[w]});
    }
    const double scale = total_supply_ > 0.0 ? total_supply_ : 1.0;
    if (artificial > 1e-9 * scale)
      throw std::runtime_error("network simplex: supplies and demands are not balanced");
    return out;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::size_t arc_source(std::size_t a) const noexcept {
    if (a < real_arcs_) return a / n_;
    if (a < real_arcs_ + m_) return a - real_arcs_;
    return root_;
  }
  std::size_t arc_target(std::size_t a) const noexcept {
    if (a < real_arcs_) return m_ + a % n_;
    if (a < real_arcs_ + m_) return root_;
    return m_ + (a - real_arcs_ - m_);
  }
  double arc_cost(std::size_t a) const {
    return a < real_arcs_ ? cost_(a / n_, a % n_) : big_m_;
  }

  void init_leaf(std::size_t w, std::size_t arc, bool up, double amount, double pi) {
    if (!(amount >= 0.0)) throw std::invalid_argument("transport masses must be non-negative");
    parent_[w] = root_;
    pred_[w] = arc;
    up_[w] = up ? 1 : 0;
    flow_[w] = amount;
    pi_[w] = pi;
    depth_[w] = 1;
    attach(w, root_);
    if (up) total_supply_ += amount;
  }

  void attach(std::size_t w, std::size_t p) noexcept {
    prev_sib_[w] = kNone;
    next_sib_[w] = first_child_[p];
    if (first_child_[p] != kNone) prev_sib_[first_child_[p]] = w;
    first_child_[p] = w;
  }

  void detach(std::size_t w) noexcept {
    const std::size_t p = parent_[w];
    if (prev_sib_[w] != kNone) {
      next_sib_[prev_sib_[w]] = next_sib_[w];
    } else {
      first_child_[p] = next_sib_[w];
    }
    if (next_sib_[w] != kNone) prev_sib_[next_sib_[w]] = prev_sib_[w];
    prev_sib_[w] = next_sib_[w] = kNone;
  }

  double reduced_cost(std::size_t i, std::size_t j) const {
    return cost_(i, j) + pi_[i] - pi_[m_ + j];
  }

  /// Block search over the real arcs, resuming where the last search ended.
  bool find_entering(std::size_t& arc) {
    double best = -eps_;
    std::size_t best_arc = kNone;
    std::size_t in_block = 0;
    for (std::size_t scanned = 0; scanned < real_arcs_; ++scanned) {
      const std::size_t a = next_arc_;
      next_arc_ = next_arc_ + 1 == real_arcs_ ? 0 : next_arc_ + 1;
      const double rc = reduced_cost(a / n_, a % n_);
      if (rc < best) {
        best = rc;
        best_arc = a;
      }
      if (++in_block == block_) {
        if (best_arc != kNone) break;
        in_block = 0;
      }
    }
    if (best_arc == kNone) return false;
    arc = best_arc;
    entering_rc_ = best;
    return true;
  }

  void pivot(std::size_t in_arc) {
    const std::size_t first = arc_source(in_arc);
    const std::size_t second = arc_target(in_arc);

    std::size_t a = first, b = second;
    while (a != b) {
      if (depth_[a] > depth_[b]) {
        a = parent_[a];
      } else if (depth_[b] > depth_[a]) {
        b = parent_[b];
      } else {
        a = parent_[a];
        b = parent_[b];
      }
    }
    const std::size_t join = a;

    // Flow enters along in_arc (first -> second) and returns to first
    // through the tree. On the first side an arc pointing up toward the
    // parent carries flow against the cycle; on the second side an arc
    // pointing down does.
    double delta = std::numeric_limits<double>::infinity();
    std::size_t u_out = kNone;
    int side = 0;
    for (std::size_t w = first; w != join; w = parent_[w]) {
      if (up_[w]) {
        const double d = std::max(flow_[w], 0.0);
        if (d < delta) {
          delta = d;
          u_out = w;
          side = 1;
        }
      }
    }
    for (std::size_t w = second; w != join; w = parent_[w]) {
      if (!up_[w]) {
        const double d = std::max(flow_[w], 0.0);
        if (d <= delta) {
          delta = d;
          u_out = w;
          side = 2;
        }
      }
    }
    if (u_out == kNone) throw std::runtime_error("network simplex: unbounded cycle");

    if (delta > 0.0) {
      for (std::size_t w = first; w != join; w = parent_[w]) flow_[w] += up_[w] ? -delta : delta;
      for (std::size_t w = second; w != join; w = parent_[w]) flow_[w] += up_[w] ? delta : -delta;
    }

    const std::size_t u_in = side == 1 ? first : second;
    const std::size_t v_in = side == 1 ? second : first;

    // Re-root the subtree hanging below u_out at u_in, reversing the path.
    path_.clear();
    for (std::size_t w = u_in;; w = parent_[w]) {
      path_.push_back(w);
      if (w == u_out) break;
    }
    old_pred_.resize(path_.size());
    old_up_.resize(path_.size());
    old_flow_.resize(path_.size());
    for (std::size_t t = 0; t < path_.size(); ++t) {
      old_pred_[t] = pred_[path_[t]];
      old_up_[t] = up_[path_[t]];
      old_flow_[t] = flow_[path_[t]];
    }
    for (std::size_t t = path_.size(); t-- > 0;) detach(path_[t]);

    parent_[u_in] = v_in;
    pred_[u_in] = in_arc;
    up_[u_in] = u_in == first ? 1 : 0;
    flow_[u_in] = delta;
    attach(u_in, v_in);
    for (std::size_t t = 1; t < path_.size(); ++t) {
      const std::size_t w = path_[t];
      parent_[w] = path_[t - 1];
      pred_[w] = old_pred_[t - 1];
      up_[w] = old_up_[t - 1] ? 0 : 1;
      flow_[w] = old_flow_[t - 1];
      attach(w, path_[t - 1]);
    }

    const double sigma = u_in == first ? -entering_rc_ : entering_rc_;
    stack_.clear();
    stack_.push_back(u_in);
    while (!stack_.empty()) {
      const std::size_t w = stack_.back();
      stack_.pop_back();
      pi_[w] += sigma;
      depth_[w] = depth_[parent_[w]] + 1;
      for (std::size_t c = first_child_[w]; c != kNone; c = next_sib_[c]) stack_.push_back(c);
    }
  }

  std::size_t m_, n_;
  Cost cost_;
  std::size_t nodes_ = 0, root_ = 0, real_arcs_ = 0;
  double big_m_ = 0.0, eps_ = 0.0, total_supply_ = 0.0;
  double entering_rc_ = 0.0;
  std::size_t block_ = 10, next_arc_ = 0;

  std::vector<std::size_t> parent_, pred_;
  std::vector<std::uint8_t> up_;
  std::vector<double> flow_, pi_;
  std::vector<std::size_t> depth_;
  std::vector<std::size_t> first_child_, next_sib_, prev_sib_;
  std::vector<std::size_t> path_, old_pred_, stack_;
  std::vector<std::uint8_t> old_up_;
  std::vector<double> old_flow_;
};

template <class Cost>
TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  Cost cost, bool with_plan = false) {
  TransportSimplex<Cost> simplex(supply, demand, std::move(cost));
  return simplex.solve(with_plan);
}

}  // namespace episcale

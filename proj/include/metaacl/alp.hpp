#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "metaacl/task.hpp"

namespace metaacl {

// Full episode history H plus the FIFO fitting window W. Absolute learning
// progress of a new outcome is measured against the Euclidean-nearest
// previously attempted task in H, normalized by the reward range and clamped
// to [0,1]. Nearest-neighbour ties resolve to the most recent entry.
//
// For 2-D task spaces lookups go through a uniform grid over the unit box
// (exact: candidate cells are pruned by rectangle distance, never skipped
// when they could contain the nearest point). Other dimensionalities fall
// back to a linear scan, which is exact but O(n) per query.
class AlpHistory {
 public:
  AlpHistory(std::size_t dim, RewardRange range,
             std::size_t window_capacity = 250)
      : dim_(dim), range_(range), window_cap_(window_capacity) {
    if (dim_ == 0) throw std::invalid_argument("AlpHistory: dim must be > 0");
    if (window_cap_ == 0)
      throw std::invalid_argument("AlpHistory: window capacity must be > 0");
    range_.validate();
    grid_enabled_ = (dim_ == 2);
    if (grid_enabled_) buckets_.resize(kGridSide * kGridSide);
    window_.resize(window_cap_ * (dim_ + 1));
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rewards_.size(); }
  const RewardRange& reward_range() const { return range_; }

  std::size_t window_size() const { return window_count_; }
  std::size_t window_capacity() const { return window_cap_; }

  double reward_at(std::size_t i) const { return rewards_.at(i); }

  TaskParams params_at(std::size_t i) const {
    if (i >= size()) throw std::out_of_range("AlpHistory: bad index");
    TaskParams p;
    p.coords.assign(coords_.begin() + static_cast<std::ptrdiff_t>(i * dim_),
                    coords_.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim_));
    return p;
  }

  // window rows (params..., alp), oldest first
  void copy_window(std::vector<double>& out) const {
    const std::size_t row = dim_ + 1;
    out.resize(window_count_ * row);
    for (std::size_t i = 0; i < window_count_; ++i) {
      const std::size_t slot = (window_head_ + i) % window_cap_;
      for (std::size_t j = 0; j < row; ++j)
        out[i * row + j] = window_[slot * row + j];
    }
  }

  std::optional<std::size_t> nearest(const TaskParams& p) const {
    check_query(p);
    if (size() == 0) return std::nullopt;
    return grid_enabled_ ? nearest_grid(p) : nearest_linear(p);
  }

  // reference implementation, used by the grid path's tests
  std::optional<std::size_t> nearest_linear(const TaskParams& p) const {
    check_query(p);
    const std::size_t n = size();
    if (n == 0) return std::nullopt;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        const double diff = coords_[i * dim_ + j] - p.coords[j];
        d2 += diff * diff;
      }
      if (d2 < best || (d2 == best && i > best_idx)) {
        best = d2;
        best_idx = i;
      }
    }
    return best_idx;
  }

  double compute_alp(const EpisodeOutcome& outcome) const {
    const auto idx = nearest(outcome.params);
    if (!idx) return 0.0;
    const double raw = std::fabs(outcome.reward - rewards_[*idx]);
    return clamp01(raw / range_.width());
  }

  // appends the outcome to H and W; returns the ALP it was recorded with
  double record(const EpisodeOutcome& outcome) {
    const double alp = compute_alp(outcome);
    const std::size_t idx = size();
    coords_.insert(coords_.end(), outcome.params.coords.begin(),
                   outcome.params.coords.end());
    rewards_.push_back(outcome.reward);
    if (grid_enabled_)
      buckets_[bucket_of(outcome.params.coords[0], outcome.params.coords[1])]
          .push_back(static_cast<std::uint32_t>(idx));
    push_window(outcome.params, alp);
    return alp;
  }

 private:
  static constexpr std::size_t kGridSide = 128;

  void check_query(const TaskParams& p) const {
    if (p.dim() != dim_)
      throw std::invalid_argument("AlpHistory: dimension mismatch");
  }

  static std::size_t cell_coord(double x) {
    if (x < 0.0) x = 0.0;
    const auto c = static_cast<std::size_t>(x * static_cast<double>(kGridSide));
    return c >= kGridSide ? kGridSide - 1 : c;
  }

  static std::size_t bucket_of(double x, double y) {
    return cell_coord(y) * kGridSide + cell_coord(x);
  }

  void push_window(const TaskParams& p, double alp) {
    const std::size_t row = dim_ + 1;
    std::size_t slot;
    if (window_count_ < window_cap_) {
      slot = (window_head_ + window_count_) % window_cap_;
      ++window_count_;
    } else {
      slot = window_head_;
      window_head_ = (window_head_ + 1) % window_cap_;
    }
    for (std::size_t j = 0; j < dim_; ++j) window_[slot * row + j] = p.coords[j];
    window_[slot * row + dim_] = alp;
  }

  void scan_bucket(std::size_t bx, std::size_t by, double qx, double qy,
                   double& best, std::size_t& best_idx) const {
    const double w = 1.0 / static_cast<double>(kGridSide);
    const double dx = std::max({0.0, static_cast<double>(bx) * w - qx,
                                qx - static_cast<double>(bx + 1) * w});
    const double dy = std::max({0.0, static_cast<double>(by) * w - qy,
                                qy - static_cast<double>(by + 1) * w});
    if (dx * dx + dy * dy > best) return;
    for (const std::uint32_t idx : buckets_[by * kGridSide + bx]) {
      const double ddx = coords_[idx * 2] - qx;
      const double ddy = coords_[idx * 2 + 1] - qy;
      const double d2 = ddx * ddx + ddy * ddy;
      if (d2 < best || (d2 == best && idx > best_idx)) {
        best = d2;
        best_idx = idx;
      }
    }
  }

  std::optional<std::size_t> nearest_grid(const TaskParams& p) const {
    const double qx = p.coords[0], qy = p.coords[1];
    const std::size_t cx = cell_coord(qx), cy = cell_coord(qy);
    const double w = 1.0 / static_cast<double>(kGridSide);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    const std::size_t max_ring =
        std::max({cx, kGridSide - 1 - cx, cy, kGridSide - 1 - cy});
    const double offx = qx - static_cast<double>(cx) * w;
    const double offy = qy - static_cast<double>(cy) * w;
    const double edge =
        std::max(0.0, std::min({offx, w - offx, offy, w - offy}));
    for (std::size_t ring = 0; ring <= max_ring; ++ring) {
      if (ring > 0 && best < std::numeric_limits<double>::infinity()) {
        // closest possible point in this ring's cells; ties must still scan
        const double lb = (static_cast<double>(ring) - 1.0) * w + edge;
        if (lb * lb > best) break;
      }
      const auto side = static_cast<std::ptrdiff_t>(kGridSide);
      const auto r = static_cast<std::ptrdiff_t>(ring);
      const std::ptrdiff_t lo_x = static_cast<std::ptrdiff_t>(cx) - r;
      const std::ptrdiff_t hi_x = static_cast<std::ptrdiff_t>(cx) + r;
      const std::ptrdiff_t lo_y = static_cast<std::ptrdiff_t>(cy) - r;
      const std::ptrdiff_t hi_y = static_cast<std::ptrdiff_t>(cy) + r;
      for (std::ptrdiff_t by = lo_y; by <= hi_y; ++by) {
        if (by < 0 || by >= side) continue;
        const bool y_edge = (by == lo_y || by == hi_y);
        for (std::ptrdiff_t bx = lo_x; bx <= hi_x; ++bx) {
          if (bx < 0 || bx >= side) continue;
          if (!y_edge && bx != lo_x && bx != hi_x) continue;
          scan_bucket(static_cast<std::size_t>(bx),
                      static_cast<std::size_t>(by), qx, qy, best, best_idx);
        }
      }
    }
    if (best == std::numeric_limits<double>::infinity()) return std::nullopt;
    return best_idx;
  }

  std::size_t dim_;
  RewardRange range_;
  std::size_t window_cap_;
  std::vector<double> coords_;
  std::vector<double> rewards_;
  std::vector<double> window_;
  std::size_t window_head_ = 0;
  std::size_t window_count_ = 0;
  bool grid_enabled_ = false;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

}  // namespace metaacl

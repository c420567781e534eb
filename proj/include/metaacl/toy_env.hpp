#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "metaacl/task.hpp"

namespace metaacl {

// Synthetic student over the unit square, discretized into a 20x20 grid of
// cells. Each cell is either locked or unlocked. An episode at a point in an
// unlocked cell bumps that cell's counter and pays min(counter, 100); once a
// counter reaches 75 the 4-neighbour cells unlock. Episodes in locked cells
// pay 0 and leave the counter untouched. A student's type is the cell it
// starts unlocked with, so different types need different curricula.
class ToyStudent {
 public:
  static constexpr std::size_t kGridSide = 20;
  static constexpr std::size_t kCellCount = kGridSide * kGridSide;
  static constexpr std::uint32_t kUnlockThreshold = 75;
  static constexpr double kRewardCap = 100.0;

  explicit ToyStudent(std::size_t start_cell) : start_cell_(start_cell) {
    if (start_cell_ >= kCellCount)
      throw std::invalid_argument("ToyStudent: start cell out of range");
    reset();
  }

  static std::size_t cell_index(std::size_t gx, std::size_t gy) {
    return gy * kGridSide + gx;
  }

  static std::size_t cell_of(const TaskParams& p) {
    if (p.dim() != 2)
      throw std::invalid_argument("ToyStudent: tasks are 2-D");
    const double x = p.coords[0], y = p.coords[1];
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
      throw std::invalid_argument("ToyStudent: task outside the unit square");
    auto gx = static_cast<std::size_t>(x * kGridSide);
    auto gy = static_cast<std::size_t>(y * kGridSide);
    if (gx >= kGridSide) gx = kGridSide - 1;
    if (gy >= kGridSide) gy = kGridSide - 1;
    return cell_index(gx, gy);
  }

  void reset() {
    unlocked_.fill(false);
    counters_.fill(0);
    unlocked_count_ = 1;
    unlocked_[start_cell_] = true;
    episodes_ = 0;
  }

  double episode(const TaskParams& p) {
    const std::size_t cell = cell_of(p);
    ++episodes_;
    if (!unlocked_[cell]) return 0.0;
    const std::uint32_t c = ++counters_[cell];
    if (c == kUnlockThreshold) unlock_neighbours(cell);
    return c < kRewardCap ? static_cast<double>(c) : kRewardCap;
  }

  // per-cell competence readout: the raw episode counters
  std::vector<double> kc_vector() const {
    return std::vector<double>(counters_.begin(), counters_.end());
  }

  // percentage of unlocked cells
  double performance() const {
    return 100.0 * static_cast<double>(unlocked_count_) /
           static_cast<double>(kCellCount);
  }

  std::size_t student_type() const { return start_cell_; }
  std::size_t episodes() const { return episodes_; }
  std::size_t unlocked_count() const { return unlocked_count_; }
  bool unlocked(std::size_t cell) const { return unlocked_.at(cell); }
  std::uint32_t counter(std::size_t cell) const { return counters_.at(cell); }

 private:
  void unlock_neighbours(std::size_t cell) {
    const std::size_t gx = cell % kGridSide;
    const std::size_t gy = cell / kGridSide;
    if (gx > 0) unlock(cell - 1);
    if (gx + 1 < kGridSide) unlock(cell + 1);
    if (gy > 0) unlock(cell - kGridSide);
    if (gy + 1 < kGridSide) unlock(cell + kGridSide);
  }

  void unlock(std::size_t cell) {
    if (!unlocked_[cell]) {
      unlocked_[cell] = true;
      ++unlocked_count_;
    }
  }

  std::size_t start_cell_;
  std::array<bool, kCellCount> unlocked_{};
  std::array<std::uint32_t, kCellCount> counters_{};
  std::size_t unlocked_count_ = 0;
  std::size_t episodes_ = 0;
};

inline std::size_t cell_index(std::size_t gx, std::size_t gy) {
  return ToyStudent::cell_index(gx, gy);
}

inline std::size_t cell_of(const TaskParams& p) {
  return ToyStudent::cell_of(p);
}

// The four canonical student types: start cells at the grid corners. Corner
// starts keep undirected (random/uniform) unlock diffusion slow — a quarter
// diamond instead of a full one — which is what gives the random-curriculum
// baseline its characteristically low final performance.
inline std::vector<std::size_t> default_student_types() {
  return {ToyStudent::cell_index(0, 0), ToyStudent::cell_index(19, 0),
          ToyStudent::cell_index(0, 19), ToyStudent::cell_index(19, 19)};
}

// Every cell as its own type (the large-classroom protocol).
inline std::vector<std::size_t> all_student_types() {
  std::vector<std::size_t> t(ToyStudent::kCellCount);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = i;
  return t;
}

// KC readout customization point used by the meta layer; the toy student
// exposes its competence directly, so the probe set is unused.
inline std::vector<double> kc_vector(const ToyStudent& s,
                                     const std::vector<TaskParams>&) {
  return s.kc_vector();
}

}  // namespace metaacl

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace metaacl {

// Point in the unit task box [0,1]^d.
struct TaskParams {
  std::vector<double> coords;

  TaskParams() = default;
  explicit TaskParams(std::vector<double> c) : coords(std::move(c)) {}
  TaskParams(double x, double y) : coords{x, y} {}

  std::size_t dim() const { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }

  bool operator==(const TaskParams&) const = default;
};

struct EpisodeOutcome {
  TaskParams params;
  double reward = 0.0;
};

struct RewardRange {
  double low = 0.0;
  double high = 100.0;

  double width() const { return high - low; }

  void validate() const {
    if (!(high > low))
      throw std::invalid_argument("RewardRange: high must exceed low");
  }
};

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

inline void check_unit_box(const TaskParams& p) {
  for (double c : p.coords)
    if (!(c >= 0.0 && c <= 1.0))
      throw std::invalid_argument("task parameters must lie in [0,1]^d");
}

}  // namespace metaacl

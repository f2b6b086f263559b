#pragma once

#include <cstddef>
#include <vector>

#include "palmtess/geometry.hpp"

namespace palmtess {

/// Uniform bucket grid over a 2-D configuration for range and nearest queries.
class GridIndex {
 public:
  GridIndex(const PointConfiguration& config, double cell_size);

  /// Indices of points in the closed box.
  std::vector<std::size_t> in_box(const Box& box) const;
  std::size_t count_in_box(const Box& box) const;
  /// Indices of points with |p - c| <= r (closed) or < r (open).
  std::vector<std::size_t> in_ball(Vec2 c, double r, bool closed = true) const;
  /// Distance from q to the nearest point; +inf on an empty index.
  double nearest_distance(Vec2 q) const;

 private:
  template <class F>
  void for_cells(double x0, double y0, double x1, double y1, F&& f) const;

  const PointConfiguration* config_;
  double x0_ = 0, y0_ = 0, h_ = 1;
  int nx_ = 1, ny_ = 1;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> items_;
};

}  // namespace palmtess

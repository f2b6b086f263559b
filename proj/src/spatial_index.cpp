#include "palmtess/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace palmtess {

GridIndex::GridIndex(const PointConfiguration& config, double cell_size) : config_(&config) {
  if (config.dim() != 2) throw Error(Errc::unsupported_dimension, "grid index is planar");
  const Box& w = config.window();
  x0_ = w.lo(0);
  y0_ = w.lo(1);
  h_ = cell_size > 0 ? cell_size : 1.0;
  nx_ = std::max(1, static_cast<int>(std::ceil(w.side() / h_)));
  ny_ = nx_;
  // Guard against absurd grids from tiny cell sizes.
  while (static_cast<double>(nx_) * ny_ > 4.0 * static_cast<double>(config.size()) + 64.0) {
    h_ *= 2.0;
    nx_ = std::max(1, static_cast<int>(std::ceil(w.side() / h_)));
    ny_ = nx_;
  }
  const std::size_t ncell = static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  std::vector<std::size_t> cell_of(config.size());
  start_.assign(ncell + 1, 0);
  for (std::size_t i = 0; i < config.size(); ++i) {
    int cx = std::clamp(static_cast<int>(std::floor((config[i][0] - x0_) / h_)), 0, nx_ - 1);
    int cy = std::clamp(static_cast<int>(std::floor((config[i][1] - y0_) / h_)), 0, ny_ - 1);
    cell_of[i] = static_cast<std::size_t>(cy) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(cx);
    ++start_[cell_of[i] + 1];
  }
  for (std::size_t c = 0; c < ncell; ++c) start_[c + 1] += start_[c];
  items_.resize(config.size());
  std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < config.size(); ++i) items_[fill[cell_of[i]]++] = i;
}

template <class F>
void GridIndex::for_cells(double x0, double y0, double x1, double y1, F&& f) const {
  int cx0 = std::clamp(static_cast<int>(std::floor((x0 - x0_) / h_)), 0, nx_ - 1);
  int cx1 = std::clamp(static_cast<int>(std::floor((x1 - x0_) / h_)), 0, nx_ - 1);
  int cy0 = std::clamp(static_cast<int>(std::floor((y0 - y0_) / h_)), 0, ny_ - 1);
  int cy1 = std::clamp(static_cast<int>(std::floor((y1 - y0_) / h_)), 0, ny_ - 1);
  for (int cy = cy0; cy <= cy1; ++cy)
    for (int cx = cx0; cx <= cx1; ++cx) {
      std::size_t c = static_cast<std::size_t>(cy) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(cx);
      for (std::size_t k = start_[c]; k < start_[c + 1]; ++k) f(items_[k]);
    }
}

std::vector<std::size_t> GridIndex::in_box(const Box& box) const {
  std::vector<std::size_t> out;
  for_cells(box.lo(0), box.lo(1), box.hi(0), box.hi(1), [&](std::size_t i) {
    if (box.contains((*config_)[i])) out.push_back(i);
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t GridIndex::count_in_box(const Box& box) const {
  std::size_t n = 0;
  for_cells(box.lo(0), box.lo(1), box.hi(0), box.hi(1), [&](std::size_t i) {
    if (box.contains((*config_)[i])) ++n;
  });
  return n;
}

std::vector<std::size_t> GridIndex::in_ball(Vec2 c, double r, bool closed) const {
  std::vector<std::size_t> out;
  for_cells(c.x - r, c.y - r, c.x + r, c.y + r, [&](std::size_t i) {
    double d = (to_vec2((*config_)[i]) - c).norm();
    if (closed ? d <= r : d < r) out.push_back(i);
  });
  std::sort(out.begin(), out.end());
  return out;
}

double GridIndex::nearest_distance(Vec2 q) const {
  if (config_->empty()) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  // Grow the search square until the ring distance exceeds the best hit.
  for (double r = h_;; r *= 2.0) {
    for_cells(q.x - r, q.y - r, q.x + r, q.y + r,
              [&](std::size_t i) { best = std::min(best, (to_vec2((*config_)[i]) - q).norm()); });
    bool covers_all = q.x - r <= x0_ && q.y - r <= y0_ && q.x + r >= x0_ + nx_ * h_ &&
                      q.y + r >= y0_ + ny_ * h_;
    if (best <= r || covers_all) return best;
  }
}

}  // namespace palmtess

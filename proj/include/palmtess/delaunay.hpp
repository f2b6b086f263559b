#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "palmtess/geometry.hpp"

namespace palmtess {

/// One (d-1)-face of a Voronoi cell, shared with neighbor `neighbor`.
/// `a`/`b` are the endpoints clipped to the window; `length` is the unclipped
/// length (infinite for rays).
struct VoronoiFace {
  std::size_t neighbor = 0;
  Vec2 a{};
  Vec2 b{};
  double length = 0.0;
  bool clipped_empty = false;  // face lies entirely outside the window
};

struct VoronoiCell {
  Point nucleus{};
  bool bounded = false;
  std::vector<Vec2> vertices;  // CCW, only for bounded cells
  std::vector<VoronoiFace> faces;
};

/// A Voronoi edge of the whole diagram: segment (p, q) or ray p + t*dir, t >= 0.
struct VoronoiEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  Vec2 p{};
  Vec2 q{};
  bool is_ray = false;
  bool is_line = false;  // full line, only for collinear configurations
  Vec2 dir{};
};

struct BuildOptions {
  /// Compute window-clipped cell polygons (needed by the percolation module).
  bool clipped_cells = true;
};

/// Voronoi cells and Delaunay adjacency (strict shared-face reading) of a planar configuration.
class DelaunayComplex {
 public:
  const PointConfiguration& config() const noexcept { return config_; }
  std::size_t size() const noexcept { return config_.size(); }
  const VoronoiCell& cell(std::size_t i) const { return cells_[i]; }
  const std::vector<VoronoiCell>& cells() const noexcept { return cells_; }

  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adj_[i]; }
  std::size_t degree(std::size_t i) const { return adj_[i].size(); }
  bool adjacent(std::size_t i, std::size_t j) const;
  /// Undirected edges (i < j), sorted.
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const noexcept { return edges_; }
  /// Index of edge {i, j} in edges(), if adjacent.
  std::optional<std::size_t> edge_index(std::size_t i, std::size_t j) const;

  bool interior_valid(std::size_t i) const { return interior_[i] != 0; }
  /// Triangulation neighbors, a superset of neighbors() that also includes degenerate contacts.
  const std::vector<std::size_t>& tri_neighbors(std::size_t i) const { return tri_adj_[i]; }
  /// Cell clipped to the window (requires BuildOptions::clipped_cells).
  const Polygon& clipped_cell(std::size_t i) const { return clipped_[i]; }
  bool has_clipped_cells() const noexcept { return !clipped_.empty() || size() == 0; }
  /// Every Voronoi edge between triangulation neighbors, including degenerate ones.
  const std::vector<VoronoiEdge>& voronoi_edges() const noexcept { return vedges_; }

  /// Live Delaunay triangles (CCW, real vertices only).
  const std::vector<std::array<std::size_t, 3>>& triangles() const noexcept { return triangles_; }
  /// Circumcenters of triangles(), i.e. the Voronoi vertices (with repeats on cocircular input).
  const std::vector<Vec2>& voronoi_vertices() const noexcept { return vvertices_; }
  double face_tolerance() const noexcept { return eps_face_; }
  /// Index of a point equal to p, if any (linear scan).
  std::optional<std::size_t> find_point(const Point& p) const;

 private:
  friend DelaunayComplex build_delaunay(const PointConfiguration& config, const BuildOptions& opts);

  PointConfiguration config_;
  std::vector<VoronoiCell> cells_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::vector<std::size_t>> tri_adj_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<unsigned char> interior_;
  std::vector<Polygon> clipped_;
  std::vector<std::array<std::size_t, 3>> triangles_;
  std::vector<VoronoiEdge> vedges_;
  std::vector<Vec2> vvertices_;
  double eps_face_ = 0.0;
};

DelaunayComplex build_delaunay(const PointConfiguration& config, const BuildOptions& opts = {});

Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c);

/// Union of closed balls centered at the Voronoi vertices of a bounded cell, radius reaching the nucleus.
struct FundamentalRegion {
  Point center{};
  std::vector<Ball> balls;

  bool contains(const Point& p) const;
  /// Largest |v - center| + radius, i.e. sup of |y - center| over the region.
  double reach() const;
  /// Smallest axis-aligned box around the region.
  Box bounding_box() const;
};

FundamentalRegion fundamental_region(std::size_t index, const DelaunayComplex& complex);

/// For every lattice x with |x|_inf <= range inside the window and every sign vector sigma,
/// the open orthant x + Q_sigma (within the window) must contain a point.
bool orthant_criterion(const PointConfiguration& config, int lattice_range);

/// Exhaustive search of I = {z : |z|_inf = d} for K_ell(z) strictly inside the ball.
/// The ball must have the origin on its boundary.
std::optional<std::vector<int>> cube_in_ball_witness(const Ball& ball, double ell, int d);

}  // namespace palmtess

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "palmtess/error.hpp"

namespace palmtess {

inline constexpr int kMaxDim = 4;

/// A point of R^d, 1 <= d <= kMaxDim, stored inline.
class Point {
 public:
  Point() = default;
  explicit Point(int dim);
  Point(double x, double y) : dim_(2), c_{x, y, 0.0, 0.0} {}
  static Point from(std::span<const double> coords);
  static Point origin(int dim) { return Point(dim); }

  int dim() const noexcept { return dim_; }
  double operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }
  double x() const noexcept { return c_[0]; }
  double y() const noexcept { return c_[1]; }

  Point operator-(const Point& o) const;
  Point operator+(const Point& o) const;
  Point scaled(double s) const;
  bool operator==(const Point& o) const noexcept;

  double norm() const noexcept;
  double norm_sq() const noexcept;
  double norm_inf() const noexcept;
  bool is_origin() const noexcept;

 private:
  int dim_ = 2;
  std::array<double, kMaxDim> c_{};
};

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

/// Axis-aligned closed cube center + [-half_side, half_side]^d.
class Box {
 public:
  Box() = default;
  Box(Point center, double half_side);
  /// K_ell(z) = z*ell + [-ell/2, ell/2]^d.
  static Box lattice_cube(std::span<const int> z, double ell);
  /// C_x = x*R + [0, R]^d.
  static Box lattice_box(std::span<const int> x, double R);

  const Point& center() const noexcept { return center_; }
  double half_side() const noexcept { return half_side_; }
  int dim() const noexcept { return center_.dim(); }
  double side() const noexcept { return 2.0 * half_side_; }
  double lo(int i) const noexcept { return center_[i] - half_side_; }
  double hi(int i) const noexcept { return center_[i] + half_side_; }
  double volume() const noexcept;

  bool contains(const Point& p) const noexcept;
  bool contains_strictly(const Point& p) const noexcept;
  bool contains(const Box& inner) const noexcept;
  Box expanded(double r) const { return Box(center_, half_side_ + r); }
  /// Euclidean distance from p to the box (0 inside).
  double distance_to(const Point& p) const noexcept;

 private:
  Point center_{};
  double half_side_ = 1.0;
};

/// Ball of radius r; closed or open membership.
struct Ball {
  Point center{};
  double radius = 0.0;
  bool closed = true;

  Ball() = default;
  Ball(Point c, double r, bool is_closed = true);
  bool contains(const Point& p) const noexcept;
  /// Closed box inside the open ball.
  bool contains_in_interior(const Box& box) const noexcept;
};

/// B_r(A) = {x : dist(x, A) < r} for a box A; a rounded box.
struct ThickenedSet {
  Box core{};
  double thickness = 0.0;

  ThickenedSet() = default;
  ThickenedSet(Box c, double r);
  bool contains(const Point& p) const noexcept { return core.distance_to(p) < thickness; }
  bool contains_closure(const Point& p) const noexcept {
    return core.distance_to(p) <= thickness;
  }
  /// Smallest axis-aligned box containing the closure.
  Box bounding_box() const { return core.expanded(thickness); }
};

/// Finite simple point set in a sampling window (a realisation of the process).
class PointConfiguration {
 public:
  PointConfiguration() = default;
  PointConfiguration(int dim, Box window);
  PointConfiguration(Box window, std::vector<Point> points);

  int dim() const noexcept { return dim_; }
  const Box& window() const noexcept { return window_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Point& operator[](std::size_t i) const noexcept { return points_[i]; }
  const std::vector<Point>& points() const noexcept { return points_; }

  /// Stable per-point labels used to key per-edge randomness; default is the index.
  std::uint64_t label(std::size_t i) const noexcept {
    return labels_.empty() ? static_cast<std::uint64_t>(i) : labels_[i];
  }

  void add(const Point& p);
  void add(const Point& p, std::uint64_t label);

  /// Throws invalid-configuration on out-of-window or duplicate points.
  void validate() const;
  bool has_duplicates() const;

  /// Points (with labels) whose index satisfies keep(i); window unchanged.
  template <class Pred>
  PointConfiguration filtered(Pred keep) const {
    PointConfiguration out(dim_, window_);
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (keep(i)) out.add(points_[i], label(i));
    return out;
  }

  /// Number of points in a closed box; linear scan.
  std::size_t count_in(const Box& box) const;
  std::size_t count_in(const Ball& ball) const;

  /// Same points translated by -shift, window translated too.
  PointConfiguration translated(const Point& shift) const;

 private:
  int dim_ = 2;
  Box window_{};
  std::vector<Point> points_;
  std::vector<std::uint64_t> labels_;
};

/// Line-oriented text format: `d=<int>`, `window=<c...> <half_side>`, one point per line.
PointConfiguration read_configuration(std::istream& in);
PointConfiguration read_configuration_file(const std::string& path);
void write_configuration(std::ostream& out, const PointConfiguration& config);
void write_configuration_file(const std::string& path, const PointConfiguration& config);

// ---- 2-D helpers shared by the geometric pipeline -------------------------

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double norm_sq() const { return x * x + y * y; }
};

inline Vec2 to_vec2(const Point& p) { return {p[0], p[1]}; }
inline Point to_point(Vec2 v) { return Point(v.x, v.y); }

/// Axis-aligned rectangle [x0,x1]x[y0,y1].
struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  static Rect of(const Box& b) { return {b.lo(0), b.lo(1), b.hi(0), b.hi(1)}; }
  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  double distance_to(Vec2 p) const;
  Rect expanded(double r) const { return {x0 - r, y0 - r, x1 + r, y1 + r}; }
  bool intersects(const Rect& o) const {
    return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1;
  }
};

double segment_rect_distance(Vec2 a, Vec2 b, const Rect& r);
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

using Polygon = std::vector<Vec2>;

/// Convex polygon (CCW) clipped by the half-plane {q : n.q <= c}.
Polygon clip_halfplane(const Polygon& poly, Vec2 n, double c);
/// Minimum distance between a convex polygon and a rectangle (0 on overlap).
double polygon_rect_distance(const Polygon& poly, const Rect& r);
/// Largest distance from a polygon vertex to the rectangle.
double polygon_rect_max_distance(const Polygon& poly, const Rect& r);
bool polygon_contains(const Polygon& poly, Vec2 p);

}  // namespace palmtess

#include "palmtess/geometry.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace palmtess {

Point::Point(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim)
    throw Error(Errc::unsupported_dimension, "dimension " + std::to_string(dim));
}

Point Point::from(std::span<const double> coords) {
  Point p(static_cast<int>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i])) throw Error(Errc::invalid_input, "non-finite coordinate");
    p.c_[i] = coords[i];
  }
  return p;
}

Point Point::operator-(const Point& o) const {
  Point r(dim_);
  for (int i = 0; i < dim_; ++i) r[i] = (*this)[i] - o[i];
  return r;
}

Point Point::operator+(const Point& o) const {
  Point r(dim_);
  for (int i = 0; i < dim_; ++i) r[i] = (*this)[i] + o[i];
  return r;
}

Point Point::scaled(double s) const {
  Point r(dim_);
  for (int i = 0; i < dim_; ++i) r[i] = (*this)[i] * s;
  return r;
}

bool Point::operator==(const Point& o) const noexcept {
  if (dim_ != o.dim_) return false;
  for (int i = 0; i < dim_; ++i)
    if ((*this)[i] != o[i]) return false;
  return true;
}

double Point::norm_sq() const noexcept {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += c_[static_cast<std::size_t>(i)] * c_[static_cast<std::size_t>(i)];
  return s;
}

double Point::norm() const noexcept { return std::sqrt(norm_sq()); }

double Point::norm_inf() const noexcept {
  double m = 0.0;
  for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs((*this)[i]));
  return m;
}

bool Point::is_origin() const noexcept {
  for (int i = 0; i < dim_; ++i)
    if ((*this)[i] != 0.0) return false;
  return true;
}

// ---------------------------------------------------------------------------

Box::Box(Point center, double half_side) : center_(center), half_side_(half_side) {
  if (!(half_side > 0.0) || !std::isfinite(half_side))
    throw Error(Errc::invalid_input, "box half_side must be positive");
}

Box Box::lattice_cube(std::span<const int> z, double ell) {
  Point c(static_cast<int>(z.size()));
  for (std::size_t i = 0; i < z.size(); ++i) c[static_cast<int>(i)] = z[i] * ell;
  return Box(c, ell / 2.0);
}

Box Box::lattice_box(std::span<const int> x, double R) {
  Point c(static_cast<int>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) c[static_cast<int>(i)] = x[i] * R + R / 2.0;
  return Box(c, R / 2.0);
}

double Box::volume() const noexcept { return std::pow(side(), dim()); }

bool Box::contains(const Point& p) const noexcept {
  for (int i = 0; i < dim(); ++i)
    if (p[i] < lo(i) || p[i] > hi(i)) return false;
  return true;
}

bool Box::contains_strictly(const Point& p) const noexcept {
  for (int i = 0; i < dim(); ++i)
    if (p[i] <= lo(i) || p[i] >= hi(i)) return false;
  return true;
}

bool Box::contains(const Box& inner) const noexcept {
  for (int i = 0; i < dim(); ++i)
    if (inner.lo(i) < lo(i) || inner.hi(i) > hi(i)) return false;
  return true;
}

double Box::distance_to(const Point& p) const noexcept {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) {
    double e = std::max({lo(i) - p[i], 0.0, p[i] - hi(i)});
    s += e * e;
  }
  return std::sqrt(s);
}

Ball::Ball(Point c, double r, bool is_closed) : center(c), radius(r), closed(is_closed) {
  if (!(r >= 0.0)) throw Error(Errc::invalid_input, "ball radius must be nonnegative");
}

bool Ball::contains(const Point& p) const noexcept {
  double d = distance(p, center);
  return closed ? d <= radius : d < radius;
}

bool Ball::contains_in_interior(const Box& box) const noexcept {
  // Farthest corner of the box from the center.
  double s = 0.0;
  for (int i = 0; i < box.dim(); ++i) {
    double e = std::max(std::abs(box.lo(i) - center[i]), std::abs(box.hi(i) - center[i]));
    s += e * e;
  }
  return s < radius * radius;
}

ThickenedSet::ThickenedSet(Box c, double r) : core(c), thickness(r) {
  if (!(r > 0.0)) throw Error(Errc::invalid_input, "thickness must be positive");
}

// ---------------------------------------------------------------------------

PointConfiguration::PointConfiguration(int dim, Box window) : dim_(dim), window_(window) {
  if (dim < 1 || dim > kMaxDim)
    throw Error(Errc::unsupported_dimension, "dimension " + std::to_string(dim));
  if (window.dim() != dim) throw Error(Errc::invalid_configuration, "window dimension mismatch");
}

PointConfiguration::PointConfiguration(Box window, std::vector<Point> points)
    : dim_(window.dim()), window_(window), points_(std::move(points)) {}

void PointConfiguration::add(const Point& p) {
  if (!labels_.empty()) labels_.push_back(static_cast<std::uint64_t>(points_.size()));
  points_.push_back(p);
}

void PointConfiguration::add(const Point& p, std::uint64_t label) {
  if (labels_.empty() && label != points_.size()) {
    labels_.resize(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) labels_[i] = i;
  }
  if (!labels_.empty()) labels_.push_back(label);
  points_.push_back(p);
}

bool PointConfiguration::has_duplicates() const {
  std::vector<std::size_t> idx(points_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto less = [&](std::size_t a, std::size_t b) {
    for (int k = 0; k < dim_; ++k) {
      if (points_[a][k] != points_[b][k]) return points_[a][k] < points_[b][k];
    }
    return false;
  };
  std::sort(idx.begin(), idx.end(), less);
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (points_[idx[i]] == points_[idx[i - 1]]) return true;
  return false;
}

void PointConfiguration::validate() const {
  for (const auto& p : points_) {
    if (p.dim() != dim_) throw Error(Errc::invalid_configuration, "point dimension mismatch");
    for (int k = 0; k < dim_; ++k)
      if (!std::isfinite(p[k])) throw Error(Errc::invalid_configuration, "non-finite coordinate");
    if (!window_.contains(p)) throw Error(Errc::invalid_configuration, "point outside window");
  }
  if (has_duplicates()) throw Error(Errc::invalid_configuration, "duplicate points");
}

std::size_t PointConfiguration::count_in(const Box& box) const {
  return static_cast<std::size_t>(
      std::count_if(points_.begin(), points_.end(), [&](const Point& p) { return box.contains(p); }));
}

std::size_t PointConfiguration::count_in(const Ball& ball) const {
  return static_cast<std::size_t>(std::count_if(
      points_.begin(), points_.end(), [&](const Point& p) { return ball.contains(p); }));
}

PointConfiguration PointConfiguration::translated(const Point& shift) const {
  PointConfiguration out(dim_, Box(window_.center() - shift, window_.half_side()));
  for (std::size_t i = 0; i < points_.size(); ++i) out.add(points_[i] - shift, label(i));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_numbers(const std::string& text, int line_no) {
  std::istringstream is(text);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(Errc::invalid_configuration,
                  "line " + std::to_string(line_no) + ": bad number '" + tok + "'");
    }
  }
  return out;
}

}  // namespace

PointConfiguration read_configuration(std::istream& in) {
  std::string line;
  int line_no = 0;
  int dim = -1;
  bool have_window = false;
  Box window;
  std::vector<Point> pts;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (dim < 0) {
      if (line.rfind("d=", 0) != 0)
        throw Error(Errc::invalid_configuration, "line 1 must be d=<int>");
      dim = std::stoi(line.substr(2));
      if (dim < 1 || dim > kMaxDim)
        throw Error(Errc::unsupported_dimension, "dimension " + std::to_string(dim));
      continue;
    }
    if (!have_window) {
      if (line.rfind("window=", 0) != 0)
        throw Error(Errc::invalid_configuration, "line 2 must be window=<center...> <half_side>");
      auto nums = parse_numbers(line.substr(7), line_no);
      if (nums.size() != static_cast<std::size_t>(dim) + 1)
        throw Error(Errc::invalid_configuration, "window needs d+1 numbers");
      window = Box(Point::from(std::span<const double>(nums.data(), static_cast<std::size_t>(dim))),
                   nums.back());
      have_window = true;
      continue;
    }
    auto nums = parse_numbers(line, line_no);
    if (nums.size() != static_cast<std::size_t>(dim))
      throw Error(Errc::invalid_configuration,
                  "line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                      " coordinates");
    pts.push_back(Point::from(nums));
  }
  if (!have_window) throw Error(Errc::invalid_configuration, "missing header");
  PointConfiguration config(dim, window);
  for (const auto& p : pts) config.add(p);
  config.validate();
  return config;
}

PointConfiguration read_configuration_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  return read_configuration(in);
}

void write_configuration(std::ostream& out, const PointConfiguration& config) {
  out << "d=" << config.dim() << '\n';
  out << std::setprecision(17) << "window=";
  for (int k = 0; k < config.dim(); ++k) out << config.window().center()[k] << ' ';
  out << config.window().half_side() << '\n';
  for (const auto& p : config.points()) {
    for (int k = 0; k < config.dim(); ++k) out << (k ? " " : "") << p[k];
    out << '\n';
  }
}

void write_configuration_file(const std::string& path, const PointConfiguration& config) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  write_configuration(out, config);
}

// ---------------------------------------------------------------------------

double Rect::distance_to(Vec2 p) const {
  double dx = std::max({x0 - p.x, 0.0, p.x - x1});
  double dy = std::max({y0 - p.y, 0.0, p.y - y1});
  return std::hypot(dx, dy);
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = ab.norm_sq();
  double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + ab * t - p).norm();
}

namespace {

bool segment_hits_rect(Vec2 a, Vec2 b, const Rect& r) {
  // Liang-Barsky clip of the parameter interval.
  double t0 = 0.0, t1 = 1.0;
  Vec2 d = b - a;
  const double p[4] = {-d.x, d.x, -d.y, d.y};
  const double q[4] = {a.x - r.x0, r.x1 - a.x, a.y - r.y0, r.y1 - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
    } else {
      double t = q[i] / p[i];
      if (p[i] < 0.0) t0 = std::max(t0, t);
      else t1 = std::min(t1, t);
      if (t0 > t1) return false;
    }
  }
  return true;
}

}  // namespace

double segment_rect_distance(Vec2 a, Vec2 b, const Rect& r) {
  if (segment_hits_rect(a, b, r)) return 0.0;
  double best = std::min(r.distance_to(a), r.distance_to(b));
  const Vec2 corners[4] = {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}};
  for (auto c : corners) best = std::min(best, point_segment_distance(c, a, b));
  return best;
}

Polygon clip_halfplane(const Polygon& poly, Vec2 n, double c) {
  Polygon out;
  const std::size_t m = poly.size();
  if (m == 0) return out;
  out.reserve(m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    Vec2 p = poly[i];
    Vec2 q = poly[(i + 1) % m];
    double fp = n.dot(p) - c;
    double fq = n.dot(q) - c;
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
      double t = fp / (fp - fq);
      out.push_back(p + (q - p) * t);
    }
  }
  return out;
}

bool polygon_contains(const Polygon& poly, Vec2 p) {
  const std::size_t m = poly.size();
  if (m < 3) return false;
  for (std::size_t i = 0; i < m; ++i) {
    Vec2 a = poly[i];
    Vec2 b = poly[(i + 1) % m];
    if ((b - a).cross(p - a) < 0.0) return false;
  }
  return true;
}

double polygon_rect_distance(const Polygon& poly, const Rect& r) {
  if (poly.empty()) return std::numeric_limits<double>::infinity();
  if (poly.size() == 1) return r.distance_to(poly[0]);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    best = std::min(best, segment_rect_distance(poly[i], poly[(i + 1) % poly.size()], r));
    if (best == 0.0) return 0.0;
  }
  // Rectangle entirely inside the polygon.
  if (polygon_contains(poly, {r.x0, r.y0})) return 0.0;
  return best;
}

double polygon_rect_max_distance(const Polygon& poly, const Rect& r) {
  double m = 0.0;
  for (auto v : poly) m = std::max(m, r.distance_to(v));
  return m;
}

}  // namespace palmtess

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "palmtess/delaunay.hpp"
#include "palmtess/harness.hpp"

namespace palmtess {

namespace {

// Pairs (i, j) whose bisector piece left after clipping by every other half-plane is longer
// than eps. Cubic in the number of points.
std::set<std::pair<std::size_t, std::size_t>> bruteforce_adjacency(const std::vector<Vec2>& p, double eps) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      Vec2 d = p[j] - p[i];
      Vec2 mid = (p[i] + p[j]) * 0.5;
      Vec2 dir = Vec2{-d.y, d.x} * (1.0 / d.norm());
      double lo = -inf, hi = inf;
      bool empty = false;
      for (std::size_t k = 0; k < p.size() && !empty; ++k) {
        if (k == i || k == j) continue;
        Vec2 n = p[k] - p[i];
        double a = n.dot(dir);
        double b = n.dot((p[i] + p[k]) * 0.5) - n.dot(mid);
        if (a == 0.0) empty = b < 0.0;
        else if (a > 0.0) hi = std::min(hi, b / a);
        else lo = std::max(lo, b / a);
        if (lo > hi) empty = true;
      }
      if (!empty && hi - lo > eps) out.emplace(i, j);
    }
  return out;
}

bool box_strictly_in_ball(const std::vector<int>& z, double ell, const Ball& b) {
  double s = 0.0;
  for (int k = 0; k < b.center.dim(); ++k) {
    double lo = z[static_cast<std::size_t>(k)] * ell - ell / 2, hi = lo + ell;
    double e = std::max(std::abs(lo - b.center[k]), std::abs(hi - b.center[k]));
    s += e * e;
  }
  return s < b.radius * b.radius;
}

}  // namespace

SelftestReport geometry_selftest(std::uint64_t seed) {
  SelftestReport rep;
  RngStream rng(seed, 0, Purpose::aux);

  const double ell = 1.0;
  for (int d = 1; d <= 3; ++d) {
    for (int t = 0; t < 1000; ++t) {
      Point dir(d);
      double n2 = 0.0;
      while (n2 < 1e-12) {
        n2 = 0.0;
        for (int k = 0; k < d; ++k) {
          // Box-Muller normal for an isotropic direction.
          double u1 = rng.uniform(), u2 = rng.uniform();
          dir[k] = std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
          n2 += dir[k] * dir[k];
        }
      }
      const double rmin = 3.0 * ell * d * d;
      const double radius = rng.uniform(rmin, 4.0 * rmin);
      Point c = dir.scaled(radius / std::sqrt(n2));
      Ball ball(c, c.norm(), true);
      ++rep.cube_witness_total;
      auto z = cube_in_ball_witness(ball, ell, d);
      if (!z) continue;
      int linf = 0;
      for (int v : *z) linf = std::max(linf, std::abs(v));
      if (linf == d && box_strictly_in_ball(*z, ell, ball)) ++rep.cube_witness_pass;
    }
  }

  PointConfiguration lat(2, Box(Point(0.0, 0.0), 5.0));
  for (int i = -5; i <= 5; ++i)
    for (int j = -5; j <= 5; ++j) lat.add(Point(i, j));
  auto dl = build_delaunay(lat, BuildOptions{false});
  for (std::size_t i = 0; i < dl.size(); ++i) {
    if (lat[i].norm_inf() > 3.0) continue;
    ++rep.lattice_points;
    if (dl.degree(i) == 4) ++rep.lattice_degree_four;
  }

  for (int t = 0; t < 200; ++t) {
    int n = 3 + static_cast<int>(rng.uniform() * 18.0);
    PointConfiguration c(2, Box(Point(0.0, 0.0), 1.0));
    std::vector<Vec2> pts;
    while (static_cast<int>(c.size()) < n) {
      Point p(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      c.add(p);
      pts.push_back(to_vec2(p));
    }
    auto dc = build_delaunay(c, BuildOptions{false});
    std::set<std::pair<std::size_t, std::size_t>> got(dc.edges().begin(), dc.edges().end());
    ++rep.duality_total;
    if (got == bruteforce_adjacency(pts, dc.face_tolerance())) ++rep.duality_match;
  }
  return rep;
}

}  // namespace palmtess

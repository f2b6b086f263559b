#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "doctest.h"
#include "palmtess/delaunay.hpp"
#include "palmtess/predicates.hpp"

using namespace palmtess;

namespace {

PointConfiguration lattice(int half, double window_half) {
  PointConfiguration c(2, Box(Point(0.0, 0.0), window_half));
  for (int i = -half; i <= half; ++i)
    for (int j = -half; j <= half; ++j) c.add(Point(i, j));
  return c;
}

PointConfiguration random_config(std::mt19937_64& gen, int n, double half) {
  std::uniform_real_distribution<double> u(-half, half);
  PointConfiguration c(2, Box(Point(0.0, 0.0), half));
  for (int i = 0; i < n; ++i) c.add(Point(u(gen), u(gen)));
  return c;
}

std::vector<Vec2> as_vec(const PointConfiguration& c) {
  std::vector<Vec2> v;
  for (const auto& p : c.points()) v.push_back(to_vec2(p));
  return v;
}

void check_against_oracle(const PointConfiguration& c) {
  auto dc = build_delaunay(c);
  auto expect = oracle::adjacency(as_vec(c), dc.face_tolerance());
  std::set<std::pair<std::size_t, std::size_t>> got(dc.edges().begin(), dc.edges().end());
  CHECK(got == expect);
}

}  // namespace

TEST_CASE("predicates on exact degeneracies") {
  CHECK(predicates::orient2d({0, 0}, {1, 0}, {0, 1}) == 1);
  CHECK(predicates::orient2d({0, 0}, {1, 1}, {3, 3}) == 0);
  CHECK(predicates::orient2d({0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3}) ==
        predicates::orient2d({0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3}));
  CHECK(predicates::incircle({1, 0}, {0, 1}, {-1, 0}, {0, -1}) == 0);
  CHECK(predicates::incircle({1, 0}, {0, 1}, {-1, 0}, {0, 0}) == 1);
  CHECK(predicates::incircle({1, 0}, {0, 1}, {-1, 0}, {0, -2}) == -1);
  // Nearly collinear points where naive evaluation is unreliable.
  double e = std::ldexp(1.0, -50);
  int s1 = predicates::orient2d({0.5, 0.5}, {12, 12}, {24, 24 + e * 24});
  CHECK(s1 == 1);
}

TEST_CASE("lattice has degree four in the interior") {
  auto dc = build_delaunay(lattice(5, 5.0));
  for (std::size_t i = 0; i < dc.size(); ++i) {
    const Point& p = dc.config()[i];
    if (p.norm_inf() <= 3.0) {
      CHECK(dc.degree(i) == 4);
    }
  }
}

TEST_CASE("five point cross") {
  PointConfiguration c(2, Box(Point(0.0, 0.0), 2.0));
  c.add(Point(0.0, 0.0));
  c.add(Point(1.0, 0.0));
  c.add(Point(-1.0, 0.0));
  c.add(Point(0.0, 1.0));
  c.add(Point(0.0, -1.0));
  auto dc = build_delaunay(c);
  CHECK(dc.degree(0) == 4);
  const auto& cell = dc.cell(0);
  REQUIRE(cell.bounded);
  REQUIRE(cell.vertices.size() == 4);
  for (auto v : cell.vertices) {
    CHECK(std::abs(v.x) == doctest::Approx(0.5));
    CHECK(std::abs(v.y) == doctest::Approx(0.5));
  }
  CHECK(dc.interior_valid(0));
  CHECK_FALSE(dc.interior_valid(1));
}

TEST_CASE("single point and small configurations") {
  PointConfiguration c(2, Box(Point(0.0, 0.0), 1.0));
  c.add(Point(0.0, 0.0));
  auto dc = build_delaunay(c);
  CHECK(dc.edges().empty());
  CHECK_FALSE(dc.cell(0).bounded);
  CHECK_FALSE(dc.interior_valid(0));
  CHECK(dc.clipped_cell(0).size() == 4);

  PointConfiguration line(2, Box(Point(0.0, 0.0), 5.0));
  for (int i = 0; i < 5; ++i) line.add(Point(i - 2.0, 0.5 * (i - 2.0)));
  auto dl = build_delaunay(line);
  CHECK(dl.edges().size() == 4);
  for (std::size_t i = 0; i < 5; ++i) CHECK_FALSE(dl.cell(i).bounded);

  PointConfiguration empty(2, Box(Point(0.0, 0.0), 1.0));
  CHECK(build_delaunay(empty).size() == 0);
}

TEST_CASE("construction errors") {
  PointConfiguration c3(3, Box(Point::origin(3), 1.0));
  CHECK_THROWS_AS(build_delaunay(c3), Error);
  try {
    build_delaunay(c3);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unsupported_dimension);
  }
  PointConfiguration dup(2, Box(Point(0.0, 0.0), 1.0));
  dup.add(Point(0.1, 0.1));
  dup.add(Point(0.1, 0.1));
  dup.add(Point(0.3, 0.1));
  try {
    build_delaunay(dup);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_configuration);
  }
}

TEST_CASE("adjacency matches the half-plane oracle") {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 200; ++rep) {
    int n = 3 + static_cast<int>(gen() % 18);
    check_against_oracle(random_config(gen, n, 1.0));
  }
  // Degenerate inputs: lattice subsets and cocircular points.
  for (int rep = 0; rep < 50; ++rep) {
    PointConfiguration c(2, Box(Point(0.0, 0.0), 4.0));
    for (int i = -3; i <= 3; ++i)
      for (int j = -3; j <= 3; ++j)
        if (gen() % 3 == 0) c.add(Point(i, j));
    if (c.size() >= 1) check_against_oracle(c);
  }
  PointConfiguration circ(2, Box(Point(0.0, 0.0), 2.0));
  for (int k = 0; k < 12; ++k) {
    double a = k * M_PI / 6.0;
    circ.add(Point(std::round(1e6 * std::cos(a)) / 1e6, std::round(1e6 * std::sin(a)) / 1e6));
  }
  circ.add(Point(0.0, 0.0));
  check_against_oracle(circ);
}

TEST_CASE("adjacency is symmetric and irreflexive; circumball is empty") {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 30; ++rep) {
    auto c = random_config(gen, 50, 2.0);
    auto dc = build_delaunay(c);
    auto pts = as_vec(c);
    for (std::size_t i = 0; i < dc.size(); ++i) {
      for (std::size_t j : dc.neighbors(i)) {
        CHECK(i != j);
        CHECK(dc.adjacent(j, i));
      }
    }
    for (auto [i, j] : dc.edges()) {
      auto f = oracle::bisector_face(pts, i, j);
      REQUIRE(f.has_value());
      double t = std::isfinite(f->lo) && std::isfinite(f->hi) ? 0.5 * (f->lo + f->hi)
                 : std::isfinite(f->lo)                      ? f->lo + 1.0
                 : std::isfinite(f->hi)                      ? f->hi - 1.0
                                                             : 0.0;
      Vec2 center = f->at(t);
      double r = (center - pts[i]).norm();
      for (std::size_t k = 0; k < pts.size(); ++k) {
        if (k == i || k == j) continue;
        CHECK((center - pts[k]).norm() > r);
      }
    }
  }
}

TEST_CASE("cells are convex and equidistant at vertices") {
  std::mt19937_64 gen(9);
  auto c = random_config(gen, 200, 3.0);
  auto dc = build_delaunay(c);
  auto pts = as_vec(c);
  for (std::size_t i = 0; i < dc.size(); ++i) {
    const auto& cell = dc.cell(i);
    if (!cell.bounded) continue;
    const auto& v = cell.vertices;
    REQUIRE(v.size() >= 3);
    CHECK(polygon_contains(v, pts[i]));
    for (std::size_t k = 0; k < v.size(); ++k) {
      Vec2 a = v[k], b = v[(k + 1) % v.size()], cc = v[(k + 2) % v.size()];
      CHECK((b - a).cross(cc - b) >= -1e-12);
      double r = (a - pts[i]).norm();
      int equal = 0;
      for (std::size_t m = 0; m < pts.size(); ++m) {
        if (m == i) continue;
        double dm = (a - pts[m]).norm();
        CHECK(dm >= r - 1e-9);
        if (std::abs(dm - r) < 1e-9) ++equal;
      }
      CHECK(equal >= 2);
    }
  }
}

TEST_CASE("fundamental region") {
  auto dc = build_delaunay(lattice(5, 5.0));
  auto origin = *dc.find_point(Point(0.0, 0.0));
  auto fr = fundamental_region(origin, dc);
  REQUIRE(fr.balls.size() == 4);
  for (const auto& b : fr.balls) {
    CHECK(b.radius == doctest::Approx(std::sqrt(2.0) / 2));
    CHECK(std::abs(b.center[0]) == doctest::Approx(0.5));
  }
  for (auto nb : dc.neighbors(origin)) CHECK(fr.contains(dc.config()[nb]));
  CHECK(fr.reach() <= 24.0);

  // Perturbed lattice, seed 7: every neighbor of every interior-valid point is in the region.
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  PointConfiguration pert(2, Box(Point(0.0, 0.0), 6.0));
  for (int i = -5; i <= 5; ++i)
    for (int j = -5; j <= 5; ++j) pert.add(Point(i + u(gen), j + u(gen)));
  auto dp = build_delaunay(pert);
  int checked = 0;
  for (std::size_t i = 0; i < dp.size(); ++i) {
    if (!dp.interior_valid(i)) continue;
    auto f = fundamental_region(i, dp);
    for (auto nb : dp.neighbors(i)) {
      // Brute-force distance check against each ball.
      bool in = false;
      for (const auto& b : f.balls) in = in || distance(b.center, dp.config()[nb]) <= b.radius * (1 + 1e-12);
      CHECK(in);
      ++checked;
    }
  }
  CHECK(checked > 100);

  PointConfiguration one(2, Box(Point(0.0, 0.0), 1.0));
  one.add(Point(0.0, 0.0));
  auto d1 = build_delaunay(one);
  try {
    fundamental_region(0, d1);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unbounded_cell);
  }
}

TEST_CASE("fundamental region containment on random configurations") {
  std::mt19937_64 gen(21);
  for (int rep = 0; rep < 20; ++rep) {
    auto c = random_config(gen, 300, 5.0);
    auto dc = build_delaunay(c);
    for (std::size_t i = 0; i < dc.size(); ++i) {
      if (!dc.interior_valid(i)) continue;
      auto f = fundamental_region(i, dc);
      for (auto nb : dc.neighbors(i)) {
        bool in = false;
        for (const auto& b : f.balls) in = in || distance(b.center, dc.config()[nb]) <= b.radius * (1 + 1e-12);
        CHECK(in);
      }
      for (const auto& b : f.balls) CHECK(c.window().contains(Box(b.center, b.radius)));
    }
  }
}

TEST_CASE("star containment when every index box is occupied") {
  std::mt19937_64 gen(33);
  std::poisson_distribution<int> pois(1600.0);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  int applicable = 0;
  for (int rep = 0; rep < 40; ++rep) {
    PointConfiguration c(2, Box(Point(0.0, 0.0), 10.0));
    c.add(Point(0.0, 0.0));
    int n = pois(gen);
    for (int k = 0; k < n; ++k) c.add(Point(u(gen), u(gen)));
    bool all = true;
    for (int a = -2; a <= 2; ++a)
      for (int b = -2; b <= 2; ++b) {
        if (std::max(std::abs(a), std::abs(b)) != 2) continue;
        int z[2] = {a, b};
        if (c.count_in(Box::lattice_cube(z, 1.0)) == 0) all = false;
      }
    auto dc = build_delaunay(c);
    if (!all || !dc.interior_valid(0)) continue;
    ++applicable;
    auto f = fundamental_region(0, dc);
    for (const auto& b : f.balls) CHECK(b.center.norm() + b.radius <= 24.0);
  }
  CHECK(applicable > 20);
}

TEST_CASE("orthant criterion") {
  PointConfiguration shifted(2, Box(Point(0.0, 0.0), 5.0));
  for (int i = -5; i < 5; ++i)
    for (int j = -5; j < 5; ++j) shifted.add(Point(i + 0.5, j + 0.5));
  CHECK(orthant_criterion(shifted, 3));
  PointConfiguration empty(2, Box(Point(0.0, 0.0), 5.0));
  CHECK_FALSE(orthant_criterion(empty, 3));

  std::mt19937_64 gen(1);
  std::poisson_distribution<int> pois(50.0 * 64.0);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  PointConfiguration dense(2, Box(Point(0.0, 0.0), 4.0));
  int n = pois(gen);
  for (int k = 0; k < n; ++k) dense.add(Point(u(gen), u(gen)));
  CHECK(orthant_criterion(dense, 2));

  // A missing quadrant is detected.
  PointConfiguration half(2, Box(Point(0.0, 0.0), 4.0));
  for (int k = 0; k < 200; ++k) {
    double x = u(gen), y = u(gen);
    if (x < 0 && y < 0) continue;
    half.add(Point(x, y));
  }
  CHECK_FALSE(orthant_criterion(half, 2));
}

TEST_CASE("cube in ball witness") {
  Ball b1(Point::from(std::vector<double>{3.0}), 3.0);
  auto w1 = cube_in_ball_witness(b1, 1.0, 1);
  REQUIRE(w1.has_value());
  CHECK((*w1)[0] == 1);

  Ball b2(Point(12.0, 0.0), 12.0);
  auto w2 = cube_in_ball_witness(b2, 1.0, 2);
  REQUIRE(w2.has_value());
  int z[2] = {(*w2)[0], (*w2)[1]};
  CHECK(std::max(std::abs(z[0]), std::abs(z[1])) == 2);
  CHECK(b2.contains_in_interior(Box::lattice_cube(z, 1.0)));

  CHECK_THROWS_AS(cube_in_ball_witness(Ball(Point(1.0, 0.0), 3.0), 1.0, 2), Error);

  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> rad(12.0, 50.0), ang(0.0, 2 * M_PI);
  for (int k = 0; k < 1000; ++k) {
    double r = rad(gen), a = ang(gen);
    Ball b(Point(r * std::cos(a), r * std::sin(a)), r);
    CHECK(cube_in_ball_witness(b, 1.0, 2).has_value());
  }
}

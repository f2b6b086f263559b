#include <sstream>

#include "doctest.h"
#include "palmtess/geometry.hpp"

using namespace palmtess;

TEST_CASE("box lattice constructors") {
  int z[2] = {1, -2};
  Box k = Box::lattice_cube(z, 2.0);
  CHECK(k.center()[0] == 2.0);
  CHECK(k.center()[1] == -4.0);
  CHECK(k.half_side() == 1.0);
  Box c = Box::lattice_box(z, 8.0);
  CHECK(c.lo(0) == 8.0);
  CHECK(c.hi(0) == 16.0);
  CHECK(c.lo(1) == -16.0);
  CHECK(c.volume() == doctest::Approx(64.0));
  CHECK_THROWS_AS(Box(Point(0.0, 0.0), 0.0), Error);
}

TEST_CASE("box distance and containment") {
  Box b(Point(0.0, 0.0), 1.0);
  CHECK(b.contains(Point(1.0, -1.0)));
  CHECK_FALSE(b.contains_strictly(Point(1.0, 0.0)));
  CHECK(b.distance_to(Point(4.0, 5.0)) == doctest::Approx(5.0));
  CHECK(b.distance_to(Point(0.5, 0.5)) == 0.0);
  ThickenedSet t(b, 1.0);
  CHECK(t.contains(Point(1.5, 1.5)));
  CHECK_FALSE(t.contains(Point(2.0, 0.0)));
  CHECK(t.contains_closure(Point(2.0, 0.0)));
}

TEST_CASE("ball membership and cube-in-ball") {
  Ball open(Point(0.0, 0.0), 1.0, false);
  CHECK_FALSE(open.contains(Point(1.0, 0.0)));
  Ball closed(Point(0.0, 0.0), 1.0, true);
  CHECK(closed.contains(Point(1.0, 0.0)));
  CHECK(closed.contains_in_interior(Box(Point(0.0, 0.0), 0.7)));
  CHECK_FALSE(closed.contains_in_interior(Box(Point(0.0, 0.0), 0.71)));
}

TEST_CASE("point configuration validation") {
  PointConfiguration c(2, Box(Point(0.0, 0.0), 1.0));
  c.add(Point(0.5, 0.5));
  c.add(Point(-0.5, 0.5));
  CHECK_NOTHROW(c.validate());
  c.add(Point(0.5, 0.5));
  CHECK_THROWS_AS(c.validate(), Error);
  PointConfiguration d(2, Box(Point(0.0, 0.0), 1.0));
  d.add(Point(2.0, 0.0));
  CHECK_THROWS_AS(d.validate(), Error);
  CHECK_THROWS_AS(PointConfiguration(5, Box()), Error);
}

TEST_CASE("labels survive filtering and translation") {
  PointConfiguration c(2, Box(Point(0.0, 0.0), 5.0));
  for (int i = 0; i < 5; ++i) c.add(Point(i - 2.0, 0.0));
  auto f = c.filtered([](std::size_t i) { return i % 2 == 0; });
  REQUIRE(f.size() == 3);
  CHECK(f.label(1) == 2);
  auto t = f.translated(Point(1.0, 0.0));
  CHECK(t[0][0] == -3.0);
  CHECK(t.label(2) == 4);
  CHECK(t.window().center()[0] == -1.0);
}

TEST_CASE("configuration text round trip") {
  PointConfiguration c(2, Box(Point(1.0, -1.0), 3.0));
  c.add(Point(0.1234567890123456, -2.5));
  c.add(Point(3.0, 1.0 / 3.0));
  std::stringstream ss;
  write_configuration(ss, c);
  auto back = read_configuration(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == c[0]);
  CHECK(back[1] == c[1]);
  CHECK(back.window().half_side() == 3.0);

  std::istringstream dup("d=2\nwindow=0 0 1\n0.5 0.5\n0.5 0.5\n");
  CHECK_THROWS_AS(read_configuration(dup), Error);
  std::istringstream out("d=2\nwindow=0 0 1\n3 0\n");
  CHECK_THROWS_AS(read_configuration(out), Error);
}

TEST_CASE("polygon helpers") {
  Polygon sq = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  auto half = clip_halfplane(sq, {1, 0}, 1.0);
  REQUIRE(half.size() == 4);
  double maxx = 0;
  for (auto v : half) maxx = std::max(maxx, v.x);
  CHECK(maxx == doctest::Approx(1.0));
  Rect r{3, 0, 4, 1};
  CHECK(polygon_rect_distance(sq, r) == doctest::Approx(1.0));
  CHECK(polygon_rect_distance(sq, Rect{0.5, 0.5, 1, 1}) == 0.0);
  CHECK(polygon_contains(sq, {1, 1}));
  CHECK(segment_rect_distance({0, 5}, {10, 5}, Rect{2, 0, 3, 1}) == doctest::Approx(4.0));
}

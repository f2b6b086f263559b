#include <algorithm>
#include <cmath>
#include <queue>

#include "doctest.h"
#include "palmtess/percolation.hpp"

using namespace palmtess;

namespace {

PointConfiguration grid_config(double spacing, const Box& window) {
  PointConfiguration c(2, window);
  int n = static_cast<int>(std::floor(window.side() / spacing + 1e-9));
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      Point p(window.lo(0) + i * spacing, window.lo(1) + j * spacing);
      if (window.contains(p)) c.add(p);
    }
  return c;
}

PointConfiguration poisson_config(double m, const Box& w, std::uint64_t seed, std::uint64_t rep = 0) {
  RngStream rng(seed, rep, Purpose::sample);
  return sample(ProcessSpec::poisson(m), w, rng);
}

// Number of components of the full Delaunay graph by BFS.
std::size_t bfs_components(const DelaunayComplex& dc) {
  std::vector<char> seen(dc.size(), 0);
  std::size_t comps = 0;
  for (std::size_t s = 0; s < dc.size(); ++s) {
    if (seen[s]) continue;
    ++comps;
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (auto v : dc.neighbors(u))
        if (!seen[v]) {
          seen[v] = 1;
          q.push(v);
        }
    }
  }
  return comps;
}

// Dense sampling of the closed rounded box; a lower bound for the maximum.
double sampled_max_distance(const PointConfiguration& c, const Box& box, double r, int steps) {
  double best = 0.0;
  Box bb = box.expanded(r);
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j <= steps; ++j) {
      Point y(bb.lo(0) + bb.side() * i / steps, bb.lo(1) + bb.side() * j / steps);
      if (box.distance_to(y) > r) continue;
      double d = std::numeric_limits<double>::infinity();
      for (const auto& p : c.points()) d = std::min(d, distance(p, y));
      best = std::max(best, d);
    }
  return best;
}

}  // namespace

TEST_CASE("bond sampling") {
  auto dc = build_delaunay(poisson_config(1.0, Box(Point(0.0, 0.0), 4.0), 1));
  RngStream rng(1, 0, Purpose::bonds);
  auto w0 = sample_bonds(dc, 0.0, rng);
  auto w1 = sample_bonds(dc, 1.0, rng);
  CHECK(w0.open_count() == 0);
  CHECK(w1.open_count() == dc.edges().size());
  CHECK_THROWS_AS(sample_bonds(dc, 1.5, rng), Error);
  for (auto [i, j] : dc.edges()) CHECK(w1.is_open(j, i));

  // Binomial mark count on the first 100 edges.
  REQUIRE(dc.edges().size() >= 100);
  RunningStats s;
  for (std::uint64_t r = 0; r < 2000; ++r) {
    auto w = sample_bonds(dc, 0.5, RngStream(2, r, Purpose::bonds));
    double k = 0;
    for (std::size_t e = 0; e < 100; ++e) k += w.edge_open(e) ? 1 : 0;
    s.add(k);
  }
  CHECK(std::abs(s.mean() - 50.0) <= 3 * s.stderr_mean());
  CHECK(std::abs(s.variance() - 25.0) < 3.0);
}

TEST_CASE("clusters") {
  auto cfg = poisson_config(4.0, Box(Point(0.0, 0.0), 4.0), 2);
  auto dc = build_delaunay(cfg);
  RngStream rng(2, 0, Purpose::bonds);
  auto c0 = clusters(dc, sample_bonds(dc, 0.0, rng));
  CHECK(c0.sizes.size() == dc.size());
  CHECK(c0.largest == 1);
  CHECK_FALSE(c0.spanning);
  auto c1 = clusters(dc, sample_bonds(dc, 1.0, rng));
  CHECK(c1.sizes.size() == bfs_components(dc));
  CHECK(c1.sizes.size() == 1);
  CHECK(c1.spanning);
  std::size_t total = 0;
  for (auto s : c1.sizes) total += s;
  CHECK(total == dc.size());

  PointConfiguration star(2, Box(Point(0.0, 0.0), 3.0));
  star.add(Point(0, 0));
  for (auto [x, y] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) star.add(Point(x, y));
  auto ds = build_delaunay(star);
  std::vector<unsigned char> marks(ds.edges().size(), 0);
  for (std::size_t e = 0; e < ds.edges().size(); ++e) marks[e] = ds.edges()[e].first == 0 ? 1 : 0;
  auto cs = clusters(ds, BondConfiguration(ds, marks));
  CHECK(cs.sizes.size() == 1);
  CHECK(cs.largest == 5);
  auto diam = cluster_diameters(ds, cs);
  CHECK(diam[0] == doctest::Approx(2.0));
}

TEST_CASE("maximal empty distance agrees with dense sampling") {
  for (std::uint64_t s = 0; s < 15; ++s) {
    auto cfg = poisson_config(1.5, Box(Point(1.0, 1.0), 4.0), 40, s);
    auto dc = build_delaunay(cfg);
    Box box(Point(1.0, 1.0), 1.0);
    const double r = 0.5 + 0.1 * static_cast<double>(s % 4);
    double exact = max_distance_to_points(dc, box, r);
    double approx = sampled_max_distance(cfg, box, r, 300);
    double step = box.expanded(r).side() / 300;
    CHECK(exact >= approx - 1e-12);
    CHECK(exact <= approx + step);
  }
  PointConfiguration one(2, Box(Point(0.0, 0.0), 4.0));
  one.add(Point(0.0, 0.0));
  auto d1 = build_delaunay(one);
  // Farthest point of B_1([-1,1]^2) from the origin is a corner pushed outward.
  CHECK(max_distance_to_points(d1, Box(Point(0.0, 0.0), 1.0), 1.0) == doctest::Approx(std::sqrt(2.0) + 1.0));
}

TEST_CASE("box_open examples") {
  const double R = 4.0;
  Box window(Point(R / 2, R / 2), R / 2 + R / 2 + 0.5);

  PointConfiguration far(2, window);
  far.add(Point(window.lo(0) + 0.1, window.lo(1) + 0.1));
  far.add(Point(window.hi(0) - 0.1, window.hi(1) - 0.1));
  far.add(Point(window.lo(0) + 0.1, window.hi(1) - 0.1));
  auto dfar = build_delaunay(far);
  auto res = box_open({0, 0}, R, dfar, sample_bonds(dfar, 0.0, RngStream()));
  CHECK(res.open);
  CHECK(res.via == OpenVia::empty_ball);

  auto fine = grid_config(R / 100, window);
  auto dc = build_delaunay(fine);
  auto closed = box_open({0, 0}, R, dc, sample_bonds(dc, 0.0, RngStream()));
  CHECK_FALSE(closed.open);
  CHECK(closed.via == OpenVia::closed);
  auto path = box_open({0, 0}, R, dc, sample_bonds(dc, 1.0, RngStream()));
  CHECK(path.open);
  CHECK(path.via == OpenVia::open_path);

  try {
    box_open({3, 0}, R, dc, sample_bonds(dc, 1.0, RngStream()));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::locality_violation);
  }

  auto ev = check_events_A123(build_delaunay(grid_config(R / 100, phi_window(R))), R);
  CHECK(ev.A1);
  CHECK(ev.A2);
  CHECK_FALSE(ev.A3);
  const double R8 = 8.0;
  auto ev8 = check_events_A123(build_delaunay(grid_config(R8 / 20, phi_window(R8))), R8);
  CHECK(ev8.A1);
  CHECK(ev8.A2);
  CHECK(ev8.A3);
  CHECK(ev8.boundary_cells >= 80);

  PointConfiguration sparse(2, phi_window(R));
  sparse.add(Point(phi_window(R).lo(0) + 0.1, 0.0));
  auto es = check_events_A123(build_delaunay(sparse), R);
  CHECK_FALSE(es.A1);
}

TEST_CASE("eta field and lattice components") {
  const double R = 4.0;
  LatticeWindow lw{0, 2, 0, 2};
  Box gw = lw.geometry_window(R, 0.5);
  PointConfiguration corner(2, gw);
  corner.add(Point(gw.lo(0) + 0.01, gw.lo(1) + 0.01));
  auto dc = build_delaunay(corner);
  auto eta = eta_field(dc, sample_bonds(dc, 0.0, RngStream()), R, lw);
  CHECK(eta.open_count() == lw.count());
  CHECK(eta.spanning());

  auto fine = build_delaunay(grid_config(R / 25, gw));
  auto eta0 = eta_field(fine, sample_bonds(fine, 0.0, RngStream()), R, lw);
  CHECK(eta0.open_count() == 0);
  CHECK_FALSE(eta0.spanning());

  LatticeField f;
  f.window = {0, 3, 0, 3};
  f.eta.assign(16, 0);
  for (int a = 0; a <= 3; ++a) f.eta[f.window.index(a, 1)] = 1;
  f.eta[f.window.index(0, 3)] = 1;
  std::vector<std::size_t> sizes;
  auto id = f.components(&sizes);
  CHECK(sizes.size() == 2);
  CHECK(std::max(sizes[0], sizes[1]) == 4);
  CHECK(id[f.window.index(2, 2)] == -1);
  CHECK(f.spanning());
}

TEST_CASE("locality of box_open") {
  const double R = 4.0;
  LatticeWindow lw{-1, 1, -1, 1};
  int tested = 0;
  for (std::uint64_t s = 0; s < 6; ++s) {
    auto cfg = poisson_config(1.0, lw.geometry_window(R, 1.0), 21, s);
    auto dc = build_delaunay(cfg);
    RngStream key(21, s, Purpose::bonds);
    for (double p : {0.2, 0.6}) {
      auto W = sample_bonds(dc, p, key);
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
          auto local = locality_restriction(cfg, {a, b}, R);
          auto dl = build_delaunay(local);
          auto Wl = sample_bonds(dl, p, key);
          CHECK(box_open({a, b}, R, dc, W).open == box_open({a, b}, R, dl, Wl).open);
          ++tested;
        }
    }
  }
  CHECK(tested == 108);
}

TEST_CASE("small cell radii and phi monotonicity") {
  MonteCarloOptions mc{30, 13, 1};
  std::vector<PhiReplicate> reps;
  std::vector<double> grid{0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
  auto rows = estimate_phi(ProcessSpec::poisson(1.0), grid, 4.0, mc, &reps);
  REQUIRE(rows.size() == grid.size());
  for (const auto& r : reps)
    for (std::size_t k = 1; k < grid.size(); ++k) {
      CHECK(r.open[k] >= r.open[k - 1]);
      CHECK(r.spanning[k] >= r.spanning[k - 1]);
      CHECK(r.largest[k] >= r.largest[k - 1]);
    }
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].phi >= rows[k - 1].phi);
  CHECK(rows.back().phi == 1.0);
  CHECK(rows[0].bound_applicable);
  CHECK_FALSE(rows.back().bound_applicable);

  for (std::uint64_t s = 0; s < 10; ++s) {
    auto dc = build_delaunay(poisson_config(1.0, phi_window(8.0), 14, s));
    CHECK(small_cells_check(dc, 8.0));
  }
}

TEST_CASE("inclusion surrogate") {
  const double R = 4.0;
  LatticeWindow lw = LatticeWindow::centered(2);
  auto cfg = poisson_config(1.0, lw.geometry_window(R, 1.0), 31);
  auto dc = build_delaunay(cfg);
  RngStream key(31, 0, Purpose::bonds);
  auto W0 = sample_bonds(dc, 0.0, key);
  auto r0 = inclusion_check(dc, W0, R, lw, eta_field(dc, W0, R, lw));
  CHECK(r0.pass);
  CHECK(r0.vacuous);
  auto W1 = sample_bonds(dc, 1.0, key);
  auto r1 = inclusion_check(dc, W1, R, lw, eta_field(dc, W1, R, lw));
  CHECK(r1.pass);
  CHECK_FALSE(r1.vacuous);
  CHECK_THROWS_AS(inclusion_check(dc, W1, R, lw, eta_field(dc, W1, R, lw), 1.0), Error);
}

TEST_CASE("sep check") {
  MonteCarloOptions mc{10, 17, 1};
  auto rows = sep_check(ProcessSpec::poisson(1.0), ConductanceLaw::constant(0.0), {0.1, 10.0}, 6.0, mc);
  for (const auto& r : rows) {
    CHECK(r.subcritical);
    CHECK(r.spanning_frequency == 0.0);
    CHECK(r.max_largest_diameter == 0.0);
  }
  auto hot = sep_check(ProcessSpec::poisson(1.0), ConductanceLaw::unit(), {50.0}, 6.0, mc);
  CHECK(hot[0].spanning_frequency == 1.0);
  CHECK(hot[0].keep_probability_max == doctest::Approx(1.0));
  try {
    sep_check(ProcessSpec::poisson(1.0), ConductanceLaw::lognormal(0.0, 1.0), {0.1}, 6.0, mc);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unsupported_law);
  }
}

TEST_CASE("eta covariance at lattice distance four") {
  const double R = 4.0;
  LatticeWindow lw{0, 4, 0, 0};
  Box gw(Point(2.5 * R, R / 2), 2.5 * R + R / 2 + 0.5);
  std::vector<double> x, y;
  for (std::uint64_t s = 0; s < 400; ++s) {
    auto dc = build_delaunay(poisson_config(1.0, gw, 50, s));
    auto W = sample_bonds(dc, 0.4, RngStream(50, s, Purpose::bonds));
    x.push_back(box_open({0, 0}, R, dc, W).open ? 1.0 : 0.0);
    y.push_back(box_open({4, 0}, R, dc, W).open ? 1.0 : 0.0);
  }
  double mx = summarize(x).mean(), my = summarize(y).mean();
  std::vector<double> prod;
  for (std::size_t i = 0; i < x.size(); ++i) prod.push_back((x[i] - mx) * (y[i] - my));
  auto c = summarize(prod);
  CHECK(std::abs(c.mean()) <= 3 * c.stderr_mean() + 1e-12);
}

#include <cmath>

#include "../support/oracles.hpp"
#include "doctest.h"
#include "palmtess/palm_moments.hpp"

using namespace palmtess;

namespace {

RootedConfiguration lattice_rooted(int half) {
  RootedConfiguration r;
  r.config = PointConfiguration(2, Box(Point(0.0, 0.0), half));
  for (int i = -half; i <= half; ++i)
    for (int j = -half; j <= half; ++j) {
      if (i == 0 && j == 0) r.root = r.config.size();
      r.config.add(Point(i, j));
    }
  return r;
}

}  // namespace

TEST_CASE("statistics helpers") {
  RunningStats a, b, all;
  for (int i = 0; i < 100; ++i) {
    double x = std::sin(i * 0.7);
    (i < 40 ? a : b).add(x);
    all.add(x);
  }
  a.merge(b);
  CHECK(a.mean() == doctest::Approx(all.mean()));
  CHECK(a.variance() == doctest::Approx(all.variance()));
  auto r = ratio_estimate({2, 4, 6}, {1, 2, 3});
  CHECK(r.value == doctest::Approx(2.0));
  CHECK(r.std_error == doctest::Approx(0.0));
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), 3, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
  CHECK_THROWS(parallel_for(10, 2, [](std::size_t i) {
    if (i == 5) throw Error(Errc::invalid_input, "boom");
  }));
}

TEST_CASE("rho gamma matches poisson moments") {
  MonteCarloOptions mc{20000, 4, 1};
  auto spec = ProcessSpec::poisson(1.0);
  for (int g = 1; g <= 3; ++g) {
    auto r = estimate_rho_gamma(spec, g, mc);
    CHECK(r.within(oracle::poisson_moment(1.0, g), 3.0));
    CHECK(r.n_replicates == 20000);
  }
  CHECK_THROWS_AS(estimate_rho_gamma(spec, 0.0, mc), Error);
}

TEST_CASE("void probabilities and fit") {
  MonteCarloOptions mc{20000, 5, 1};
  auto fit = estimate_void_probability(ProcessSpec::poisson(1.0), {0.05, 0.5, 1.0, 1.2}, mc);
  REQUIRE(fit.points.size() == 4);
  CHECK(fit.points[0].frequency > 0.98);
  CHECK(std::abs(fit.points[1].frequency - std::exp(-1.0)) <= 3 * fit.points[1].std_error);
  CHECK(std::abs(fit.points[2].frequency - std::exp(-4.0)) <= 3 * fit.points[2].std_error);
  CHECK(fit.points[3].censored == (fit.points[3].void_events < 10));
  CHECK(fit.alpha > 0.0);
  CHECK(fit.super_polynomial);
}

TEST_CASE("level events") {
  auto lat = lattice_rooted(8);
  auto ev = level_events(lat, 2.0, 2);
  CHECK(ev.A[0]);
  REQUIRE(ev.T_index.has_value());
  CHECK(*ev.T_index == 0);

  RootedConfiguration single;
  single.config = PointConfiguration(2, Box(Point(0.0, 0.0), 10.0));
  single.config.add(Point(0.0, 0.0));
  auto e2 = level_events(single, 2.0, 3);
  for (bool a : e2.A) CHECK_FALSE(a);
  CHECK_FALSE(e2.T_index.has_value());
  CHECK_THROWS_AS(level_events(single, 1.0, 2), Error);
}

TEST_CASE("degree chain") {
  auto lat = lattice_rooted(8);
  auto dc = build_delaunay(lat.config);
  auto rep = verify_degree_chain(lat, dc, 2.0, 2);
  CHECK(rep.pass);
  CHECK(rep.level == 0);
  CHECK(rep.degree == 4);
  CHECK(rep.gamma_radius == doctest::Approx(24.0));
  CHECK(rep.max_neighbor_distance == doctest::Approx(1.0));

  auto spec = ProcessSpec::poisson(1.0);
  Box w(Point(0.0, 0.0), 12.0);
  int checked = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    RngStream rng(3, r, Purpose::sample);
    auto rooted = palm_root_slivnyak(spec, w, rng);
    auto c = build_delaunay(rooted.config, BuildOptions{false});
    if (!c.interior_valid(rooted.root)) continue;
    ++checked;
    CHECK(verify_degree_chain(rooted, c, 2.0, 2).pass);
  }
  CHECK(checked > 190);
}

TEST_CASE("palm quantities: exact identities and errors") {
  MonteCarloOptions mc{300, 9, 1};
  auto spec = ProcessSpec::poisson(1.0);
  auto unit = ConductanceLaw::unit();
  auto deg = palm_slivnyak_values(PalmQuantity::deg_p, spec, unit, 1.0, mc);
  auto lam = palm_slivnyak_values(PalmQuantity::lambda0, spec, unit, 1.0, mc);
  auto z0 = palm_slivnyak_values(PalmQuantity::zeta_sum, spec, unit, 0.0, mc);
  for (std::size_t i = 0; i < deg.size(); ++i) {
    if (std::isnan(deg[i])) continue;
    CHECK(lam[i] == deg[i]);
    CHECK(z0[i] == deg[i]);
  }
  try {
    estimate_palm_moment(PalmQuantity::nu_p, spec, ConductanceLaw::uniform(0.0, 1.0), 1.0, PalmRoute::slivnyak, mc);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_combination);
  }
  CHECK_THROWS_AS(estimate_palm_moment(PalmQuantity::deg_p, ProcessSpec::matern_hardcore(1.0, 0.1), unit, 1.0,
                                       PalmRoute::slivnyak, mc),
                  Error);
  CHECK(palm_quantity_from_string("lambda2") == PalmQuantity::lambda2);
  CHECK(palm_route_from_string("campbell") == PalmRoute::campbell);
}

TEST_CASE("palm count by both routes") {
  MonteCarloOptions mc{4000, 10, 1};
  auto spec = ProcessSpec::poisson(1.0);
  auto s = estimate_palm_moment(PalmQuantity::count, spec, ConductanceLaw::unit(), 1.0, PalmRoute::slivnyak, mc);
  auto c = estimate_palm_moment(PalmQuantity::count, spec, ConductanceLaw::unit(), 1.0, PalmRoute::campbell, mc);
  CHECK(s.within(5.0, 3.0));
  CHECK(c.within(5.0, 3.0));
  CHECK(std::abs(s.estimate - c.estimate) <= 3 * combined_stderr(s.std_error, c.std_error));
  CHECK(c.running_mean.size() == 4);
  CHECK(std::abs(c.m_hat - 1.0) < 0.05);
}

TEST_CASE("moment inequalities hold for poisson") {
  MonteCarloOptions mc{4000, 12, 1};
  auto rows = check_moment_inequalities(ProcessSpec::poisson(1.0), {1, 2}, {1.0, 2.0}, mc);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.count_pass);
    CHECK(r.palm_pass);
    if (r.L == 1) CHECK(r.count_diff == doctest::Approx(0.0));
    if (r.L == 2 && r.gamma == 2.0) {
      CHECK(std::abs(r.count_left - 20.0) < 1.5);
      CHECK(std::abs(r.count_right - 32.0) < 2.0);
    }
  }
  CHECK_THROWS_AS(check_moment_inequalities(ProcessSpec::poisson(1.0), {0}, {1.0}, mc), Error);
}

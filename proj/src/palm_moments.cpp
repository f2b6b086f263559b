#include "palmtess/palm_moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace palmtess {

namespace {

constexpr int kDim = 2;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

Box centered(double half) { return Box(Point::origin(kDim), half); }

EstimateReport report_from(const std::string& name, const std::vector<double>& values,
                           const MonteCarloOptions& mc) {
  EstimateReport r;
  r.name = name;
  r.seed = mc.seed;
  RunningStats s;
  std::size_t discarded = 0;
  for (double v : values) {
    if (std::isnan(v)) ++discarded;
    else s.add(v);
  }
  r.estimate = s.mean();
  r.std_error = s.stderr_mean();
  r.n_replicates = s.count();
  r.discard_fraction = values.empty() ? 0.0 : static_cast<double>(discarded) / static_cast<double>(values.size());
  const std::size_t n = values.size();
  for (std::size_t k : {n / 8, n / 4, n / 2, n}) {
    RunningStats part;
    for (std::size_t i = 0; i < std::max<std::size_t>(k, 1) && i < n; ++i)
      if (!std::isnan(values[i])) part.add(values[i]);
    r.running_mean.push_back(part.mean());
  }
  return r;
}

// The d-dimensional index set {z : |z|_inf = d}.
std::vector<std::vector<int>> index_set(int d) {
  std::vector<std::vector<int>> out;
  std::vector<int> z(static_cast<std::size_t>(d), -d);
  for (;;) {
    int m = 0;
    for (int v : z) m = std::max(m, std::abs(v));
    if (m == d) out.push_back(z);
    int k = d - 1;
    while (k >= 0 && z[static_cast<std::size_t>(k)] == d) z[static_cast<std::size_t>(k--)] = -d;
    if (k < 0) break;
    ++z[static_cast<std::size_t>(k)];
  }
  return out;
}

double quantity_value(PalmQuantity q, const RootedLocalStats& s, double param) {
  switch (q) {
    case PalmQuantity::zeta_sum: return s.zeta_sum;
    case PalmQuantity::lambda0: return s.lambda0;
    case PalmQuantity::lambda2: return s.lambda2;
    case PalmQuantity::deg_p: return std::pow(static_cast<double>(s.degree), param);
    case PalmQuantity::mu_p: return std::pow(s.mu0, param);
    case PalmQuantity::nu_p: return s.nu_infinite ? std::numeric_limits<double>::infinity() : std::pow(s.nu0, param);
    case PalmQuantity::count: break;
  }
  return kNaN;
}

void check_quantity(PalmQuantity q, const ConductanceLaw& law, double param) {
  if (q == PalmQuantity::nu_p && law.admits_zero())
    throw Error(Errc::invalid_combination, "nu_p needs a conductance law bounded away from zero");
  if (q == PalmQuantity::count && !(param > 0.0))
    throw Error(Errc::invalid_parameter, "count needs a positive box half-side");
  if (!(param >= 0.0)) throw Error(Errc::invalid_parameter, "moment parameter must be >= 0");
  law.validate();
}

}  // namespace

EstimateReport estimate_rho_gamma(const ProcessSpec& spec, double gamma, const MonteCarloOptions& mc,
                                  double window_half_side) {
  if (!(gamma > 0.0)) throw Error(Errc::invalid_parameter, "gamma must be positive");
  spec.validate();
  const Box window = centered(std::max(window_half_side, 0.5));
  const Box unit = centered(0.5);
  std::vector<double> vals(mc.replicates);
  parallel_for(mc.replicates, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, i, Purpose::sample);
    auto cfg = sample(spec, window, rng);
    vals[i] = std::pow(static_cast<double>(cfg.count_in(unit)), gamma);
  });
  auto r = report_from("rho_gamma", vals, mc);
  r.m_hat = spec.theoretical_intensity();
  return r;
}

AlphaFit estimate_void_probability(const ProcessSpec& spec, const std::vector<double>& ell_grid,
                                   const MonteCarloOptions& mc) {
  if (ell_grid.empty()) throw Error(Errc::invalid_parameter, "empty ell grid");
  spec.validate();
  double lmax = 0.0;
  for (double l : ell_grid) {
    if (!(l > 0.0)) throw Error(Errc::invalid_parameter, "ell must be positive");
    lmax = std::max(lmax, l);
  }
  const Box window = centered(lmax);
  std::vector<double> min_inf(mc.replicates);
  parallel_for(mc.replicates, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, i, Purpose::sample);
    auto cfg = sample(spec, window, rng);
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : cfg.points()) m = std::min(m, p.norm_inf());
    min_inf[i] = m;
  });

  AlphaFit fit;
  fit.n_replicates = mc.replicates;
  fit.seed = mc.seed;
  const double n = static_cast<double>(mc.replicates);
  for (double l : ell_grid) {
    VoidPoint vp;
    vp.ell = l;
    for (double m : min_inf)
      if (m > l) ++vp.void_events;
    vp.frequency = static_cast<double>(vp.void_events) / n;
    vp.std_error = std::sqrt(vp.frequency * (1.0 - vp.frequency) / n);
    vp.censored = vp.void_events < 10;
    vp.upper_bound = vp.void_events == 0 ? 3.0 / n : vp.frequency;
    fit.points.push_back(vp);
  }

  // Weighted least squares of log frequency on log ell.
  std::vector<VoidPoint> used;
  for (const auto& vp : fit.points)
    if (!vp.censored) used.push_back(vp);
  std::sort(used.begin(), used.end(), [](const VoidPoint& a, const VoidPoint& b) { return a.ell < b.ell; });
  fit.used_points = used.size();
  if (used.size() >= 2) {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> w(used.size()), x(used.size()), y(used.size());
    for (std::size_t k = 0; k < used.size(); ++k) {
      double p = used[k].frequency;
      w[k] = n * p / std::max(1.0 - p, 1.0 / n);
      x[k] = std::log(used[k].ell);
      y[k] = std::log(p);
      sw += w[k];
      sx += w[k] * x[k];
      sy += w[k] * y[k];
      sxx += w[k] * x[k] * x[k];
      sxy += w[k] * x[k] * y[k];
    }
    double den = sw * sxx - sx * sx;
    if (den > 0.0) {
      double slope = (sw * sxy - sx * sy) / den;
      fit.intercept = (sy - slope * sx) / sw;
      fit.alpha = -slope;
      double rss = 0.0;
      for (std::size_t k = 0; k < used.size(); ++k) {
        double e = y[k] - fit.intercept - slope * x[k];
        rss += w[k] * e * e;
      }
      fit.residual = std::sqrt(rss / sw);
    }
    if (used.size() >= 3) {
      bool steepening = true;
      double prev = -1.0;
      for (std::size_t k = 0; k + 1 < used.size(); ++k) {
        double s = std::abs((y[k + 1] - y[k]) / (x[k + 1] - x[k]));
        if (!(s > prev)) steepening = false;
        prev = s;
      }
      fit.super_polynomial = steepening;
    }
  }
  return fit;
}

LevelEvents level_events(const RootedConfiguration& rooted, double beta, int n_max) {
  if (!(beta > 1.0)) throw Error(Errc::invalid_parameter, "beta must exceed 1");
  if (n_max < 0) throw Error(Errc::invalid_parameter, "n_max must be >= 0");
  const auto& cfg = rooted.config;
  const int d = cfg.dim();
  const Point& o = cfg[rooted.root];
  const auto I = index_set(d);
  LevelEvents ev;
  ev.beta = beta;
  for (int n = 0; n <= n_max; ++n) {
    double s = std::pow(beta, n);
    bool all = true, trunc = false;
    for (const auto& z : I) {
      Point c = o;
      for (int k = 0; k < d; ++k) c[k] += s * z[static_cast<std::size_t>(k)];
      Box K(c, s / 2.0);
      if (!cfg.window().contains(K)) trunc = true;
      if (cfg.count_in(K) == 0) {
        all = false;
        break;
      }
    }
    ev.A.push_back(all);
    ev.truncated.push_back(trunc);
    if (all && !ev.T_index) ev.T_index = n;
  }
  return ev;
}

DegreeChainReport verify_degree_chain(const RootedConfiguration& rooted, const DelaunayComplex& complex,
                                      double beta, int n_max) {
  const std::size_t root = rooted.root;
  if (root >= complex.size() || !complex.interior_valid(root))
    throw Error(Errc::boundary_contamination, "origin is not interior-valid");
  DegreeChainReport rep;
  auto ev = level_events(rooted, beta, n_max);
  if (!ev.T_index) {
    rep.vacuous = true;
    rep.pass = true;
    return rep;
  }
  const int d = rooted.config.dim();
  const Point& o = rooted.config[root];
  rep.level = *ev.T_index;
  rep.gamma_radius = 6.0 * std::pow(beta, rep.level) * d * d;
  rep.degree = complex.degree(root);
  rep.count_in_gamma = rooted.config.count_in(Ball(o, rep.gamma_radius, true));
  for (auto nb : complex.neighbors(root))
    rep.max_neighbor_distance = std::max(rep.max_neighbor_distance, distance(complex.config()[nb], o));
  auto fr = fundamental_region(root, complex);
  rep.neighbors_in_region = true;
  for (auto nb : complex.neighbors(root)) {
    const Point& y = complex.config()[nb];
    bool in = false;
    for (const auto& b : fr.balls)
      if (distance(b.center, y) <= b.radius * (1.0 + 1e-12)) in = true;
    rep.neighbors_in_region = rep.neighbors_in_region && in;
  }
  rep.region_in_gamma = true;
  for (const auto& b : fr.balls)
    if (distance(b.center, o) + b.radius > rep.gamma_radius) rep.region_in_gamma = false;
  rep.pass = rep.degree <= rep.count_in_gamma && rep.max_neighbor_distance <= rep.gamma_radius &&
             rep.neighbors_in_region && rep.region_in_gamma;
  return rep;
}

const char* to_string(PalmQuantity q) {
  switch (q) {
    case PalmQuantity::zeta_sum: return "zeta_sum";
    case PalmQuantity::lambda0: return "lambda0";
    case PalmQuantity::lambda2: return "lambda2";
    case PalmQuantity::deg_p: return "deg_p";
    case PalmQuantity::mu_p: return "mu_p";
    case PalmQuantity::nu_p: return "nu_p";
    case PalmQuantity::count: return "count";
  }
  return "unknown";
}

PalmQuantity palm_quantity_from_string(const std::string& s) {
  for (auto q : {PalmQuantity::zeta_sum, PalmQuantity::lambda0, PalmQuantity::lambda2, PalmQuantity::deg_p,
                 PalmQuantity::mu_p, PalmQuantity::nu_p, PalmQuantity::count})
    if (s == to_string(q)) return q;
  throw Error(Errc::invalid_parameter, "unknown quantity '" + s + "'");
}

const char* to_string(PalmRoute r) { return r == PalmRoute::slivnyak ? "slivnyak" : "campbell"; }

PalmRoute palm_route_from_string(const std::string& s) {
  if (s == "slivnyak") return PalmRoute::slivnyak;
  if (s == "campbell") return PalmRoute::campbell;
  throw Error(Errc::invalid_parameter, "unknown route '" + s + "'");
}

std::vector<double> palm_slivnyak_values(PalmQuantity q, const ProcessSpec& spec, const ConductanceLaw& law,
                                         double param, const MonteCarloOptions& mc, const PalmOptions& opt) {
  check_quantity(q, law, param);
  if (spec.kind != ProcessKind::poisson)
    throw Error(Errc::unsupported_process, "the Slivnyak route needs a Poisson process");
  const Box window = centered(opt.slivnyak_half_side);
  const double zeta = q == PalmQuantity::zeta_sum ? param : 2.0;
  std::vector<double> vals(mc.replicates);
  parallel_for(mc.replicates, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, i, Purpose::sample);
    auto rooted = palm_root_slivnyak(spec, window, rng);
    if (q == PalmQuantity::count) {
      vals[i] = static_cast<double>(rooted.config.count_in(centered(param)));
      return;
    }
    auto dc = build_delaunay(rooted.config, BuildOptions{false});
    if (!dc.interior_valid(rooted.root)) {
      vals[i] = kNaN;
      return;
    }
    auto field = assign_conductances(dc, law, RngStream(mc.seed, i, Purpose::conductance));
    vals[i] = quantity_value(q, rooted_local_stats(rooted.root, field, zeta), param);
  });
  return vals;
}

EstimateReport estimate_palm_moment(PalmQuantity q, const ProcessSpec& spec, const ConductanceLaw& law,
                                    double param, PalmRoute route, const MonteCarloOptions& mc,
                                    const PalmOptions& opt) {
  check_quantity(q, law, param);
  spec.validate();
  const std::string name = std::string("palm_") + to_string(q);
  if (route == PalmRoute::slivnyak) {
    auto vals = palm_slivnyak_values(q, spec, law, param, mc, opt);
    auto r = report_from(name, vals, mc);
    r.m_hat = spec.theoretical_intensity();
    return r;
  }

  const Box window = centered(opt.campbell_half_side);
  const Box core = centered(opt.campbell_core_half_side);
  const double zeta = q == PalmQuantity::zeta_sum ? param : 2.0;
  std::vector<double> sums(mc.replicates), counts(mc.replicates), skipped(mc.replicates);
  parallel_for(mc.replicates, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, i, Purpose::sample);
    auto cfg = sample(spec, window, rng);
    CampbellSum cs;
    if (q == PalmQuantity::count) {
      PalmFunctional F{[&](const RootedView& v) {
                         return static_cast<double>(v.config.count_in(Box(v.config[v.root], param)));
                       },
                       param, false};
      cs = campbell_palm_average(F, cfg, core, nullptr);
    } else {
      auto dc = build_delaunay(cfg, BuildOptions{false});
      auto field = assign_conductances(dc, law, RngStream(mc.seed, i, Purpose::conductance));
      PalmFunctional F{[&](const RootedView& v) {
                         return quantity_value(q, rooted_local_stats(v.root, field, zeta), param);
                       },
                       0.0, true};
      cs = campbell_palm_average(F, cfg, core, &dc);
    }
    sums[i] = cs.sum;
    counts[i] = static_cast<double>(cs.count);
    skipped[i] = static_cast<double>(cs.skipped);
  });

  EstimateReport r;
  r.name = name;
  r.seed = mc.seed;
  r.n_replicates = mc.replicates;
  auto ratio = ratio_estimate(sums, counts);
  r.estimate = ratio.value;
  r.std_error = ratio.std_error;
  double total = 0.0, skip = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    total += counts[i];
    skip += skipped[i];
  }
  r.m_hat = total / (static_cast<double>(mc.replicates) * core.volume());
  r.discard_fraction = total + skip > 0 ? skip / (total + skip) : 0.0;
  const std::size_t n = sums.size();
  for (std::size_t k : {n / 8, n / 4, n / 2, n}) {
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < std::max<std::size_t>(k, 1) && i < n; ++i) {
      s += sums[i];
      c += counts[i];
    }
    r.running_mean.push_back(c > 0 ? s / c : kNaN);
  }
  return r;
}

std::vector<InequalityRow> check_moment_inequalities(const ProcessSpec& spec, const std::vector<int>& L_grid,
                                                     const std::vector<double>& gamma_grid,
                                                     const MonteCarloOptions& mc) {
  if (L_grid.empty() || gamma_grid.empty()) throw Error(Errc::invalid_parameter, "empty grid");
  spec.validate();
  int lmax = 1;
  for (int L : L_grid) {
    if (L < 1) throw Error(Errc::invalid_parameter, "L must be an integer >= 1");
    lmax = std::max(lmax, L);
  }
  for (double g : gamma_grid)
    if (!(g > 0.0)) throw Error(Errc::invalid_parameter, "gamma must be positive");
  const std::size_t nL = L_grid.size();
  const std::size_t reps = mc.replicates;
  const bool poisson = spec.kind == ProcessKind::poisson;

  // Sample 1: counts in [0,L]^d (including L = 1) from one realisation.
  std::vector<std::vector<double>> box_counts(reps, std::vector<double>(nL + 1));
  // Sample 2: Palm counts in Lambda_L around a typical point (sum and number of roots).
  std::vector<std::vector<std::vector<double>>> palm_sum(
      gamma_grid.size(), std::vector<std::vector<double>>(nL, std::vector<double>(reps)));
  std::vector<double> palm_roots(reps);
  // Sample 3: unit-cube counts for rho on an independent stream.
  std::vector<double> unit_counts(reps);

  const Box count_window(Point(lmax / 2.0, lmax / 2.0), lmax / 2.0);
  const Box palm_window = centered(lmax + 2.0);
  const Box palm_core = centered(1.0);
  const Box rho_window = centered(1.5);
  parallel_for(reps, mc.workers, [&](std::size_t i) {
    RngStream r1(mc.seed, i, Purpose::sample);
    auto cfg = sample(spec, count_window, r1);
    box_counts[i][nL] = static_cast<double>(cfg.count_in(Box(Point(0.5, 0.5), 0.5)));
    for (std::size_t k = 0; k < nL; ++k) {
      double L = L_grid[k];
      box_counts[i][k] = static_cast<double>(cfg.count_in(Box(Point(L / 2, L / 2), L / 2)));
    }

    RngStream r2(mc.seed, i, Purpose::aux);
    if (poisson) {
      auto rooted = palm_root_slivnyak(spec, centered(static_cast<double>(lmax)), r2);
      palm_roots[i] = 1.0;
      for (std::size_t k = 0; k < nL; ++k) {
        double c = static_cast<double>(rooted.config.count_in(centered(L_grid[k])));
        for (std::size_t g = 0; g < gamma_grid.size(); ++g) palm_sum[g][k][i] = std::pow(c, gamma_grid[g]);
      }
    } else {
      auto pc = sample(spec, palm_window, r2);
      double roots = 0.0;
      for (std::size_t j = 0; j < pc.size(); ++j) {
        if (!palm_core.contains(pc[j])) continue;
        roots += 1.0;
        for (std::size_t k = 0; k < nL; ++k) {
          double c = static_cast<double>(pc.count_in(Box(pc[j], L_grid[k])));
          for (std::size_t g = 0; g < gamma_grid.size(); ++g) palm_sum[g][k][i] += std::pow(c, gamma_grid[g]);
        }
      }
      palm_roots[i] = roots;
    }

    RngStream r3(mc.seed, i, Purpose::placement);
    auto rc = sample(spec, rho_window, r3);
    unit_counts[i] = static_cast<double>(rc.count_in(centered(0.5)));
  });

  std::vector<InequalityRow> rows;
  const double d = kDim;
  for (std::size_t g = 0; g < gamma_grid.size(); ++g) {
    const double gam = gamma_grid[g];
    std::vector<double> rho_num(reps);
    for (std::size_t i = 0; i < reps; ++i) rho_num[i] = std::pow(unit_counts[i], 1.0 + gam);
    auto rho_ratio = ratio_estimate(rho_num, unit_counts);  // rho_{1+g} / m
    for (std::size_t k = 0; k < nL; ++k) {
      InequalityRow row;
      row.L = L_grid[k];
      row.gamma = gam;
      const double scale = std::pow(static_cast<double>(row.L), d * gam);
      RunningStats left, right, diff;
      for (std::size_t i = 0; i < reps; ++i) {
        double a = std::pow(box_counts[i][k], gam);
        double b = scale * std::pow(box_counts[i][nL], gam);
        left.add(a);
        right.add(b);
        diff.add(a - b);
      }
      row.count_left = left.mean();
      row.count_right = right.mean();
      row.count_diff = diff.mean();
      row.count_se = diff.stderr_mean();
      row.count_pass = row.count_diff <= 3.0 * row.count_se;

      auto pl = ratio_estimate(palm_sum[g][k], palm_roots);
      row.palm_left = pl.value;
      row.palm_left_se = pl.std_error;
      const double factor = std::pow(2.0 * row.L + 2.0, d * gam);
      row.palm_right = factor * rho_ratio.value;
      row.palm_right_se = factor * rho_ratio.std_error;
      row.palm_pass =
          row.palm_left - row.palm_right <= 3.0 * combined_stderr(row.palm_left_se, row.palm_right_se);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace palmtess

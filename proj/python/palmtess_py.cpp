#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "palmtess/harness.hpp"
#include "palmtess/palm_moments.hpp"
#include "palmtess/percolation.hpp"

namespace py = pybind11;
using namespace palmtess;

namespace {

using Params = std::map<std::string, double>;

double need(const Params& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw Error(Errc::invalid_spec, "missing parameter '" + key + "'");
  return it->second;
}

double get_or(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

ProcessSpec make_spec(const std::string& process, const Params& p) {
  ProcessSpec spec;
  switch (process_kind_from_string(process)) {
    case ProcessKind::poisson: spec = ProcessSpec::poisson(get_or(p, "m", 1.0)); break;
    case ProcessKind::matern_cluster:
      spec = ProcessSpec::matern_cluster(need(p, "kappa"), need(p, "mu"), need(p, "rc"));
      break;
    case ProcessKind::matern_hardcore: spec = ProcessSpec::matern_hardcore(need(p, "lambda"), need(p, "rhc")); break;
    case ProcessKind::gibbs: {
      GibbsSettings g;
      g.activity = get_or(p, "z", 1.0);
      g.beta = get_or(p, "beta", 0.0);
      if (p.count("hardcore")) g.potential = PairPotential::hard_core(p.at("hardcore"));
      else g.potential = PairPotential::strauss(get_or(p, "strauss_energy", 0.0), get_or(p, "strauss_range", 0.1));
      g.burn_in_sweeps = static_cast<int>(get_or(p, "burn_in", 1000));
      g.thinning_sweeps = static_cast<int>(get_or(p, "thinning", 10));
      spec = ProcessSpec::gibbs_process(g);
      break;
    }
  }
  spec.validate();
  return spec;
}

ConductanceLaw make_law(const std::string& law, const Params& p) {
  ConductanceLaw out;
  if (law == "unit") out = ConductanceLaw::unit();
  else if (law == "constant") out = ConductanceLaw::constant(need(p, "c"));
  else if (law == "uniform") out = ConductanceLaw::uniform(need(p, "a"), need(p, "b"));
  else if (law == "lognormal") out = ConductanceLaw::lognormal(need(p, "mu"), need(p, "sigma"));
  else throw Error(Errc::invalid_law, "unknown conductance law '" + law + "'");
  out.validate();
  return out;
}

PointConfiguration from_array(py::array_t<double, py::array::c_style | py::array::forcecast> pts, double half_side) {
  if (pts.ndim() != 2 || pts.shape(1) != 2) throw Error(Errc::unsupported_dimension, "points must have shape (n, 2)");
  PointConfiguration cfg(2, Box(Point(0.0, 0.0), half_side));
  auto r = pts.unchecked<2>();
  for (py::ssize_t i = 0; i < r.shape(0); ++i) cfg.add(Point(r(i, 0), r(i, 1)));
  cfg.validate();
  return cfg;
}

py::array_t<double> to_array(const PointConfiguration& cfg) {
  py::array_t<double> out({static_cast<py::ssize_t>(cfg.size()), static_cast<py::ssize_t>(2)});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    w(static_cast<py::ssize_t>(i), 0) = cfg[i][0];
    w(static_cast<py::ssize_t>(i), 1) = cfg[i][1];
  }
  return out;
}

py::dict report(const EstimateReport& r) {
  py::dict d;
  d["estimate"] = r.estimate;
  d["std_error"] = r.std_error;
  d["n_replicates"] = r.n_replicates;
  d["seed"] = r.seed;
  d["discard_fraction"] = r.discard_fraction;
  d["running_mean"] = r.running_mean;
  return d;
}

}  // namespace

PYBIND11_MODULE(_palmtess, m) {
  m.doc() = "Voronoi/Delaunay tessellations of stationary point processes: Palm moments and percolation";
  m.attr("__version__") = kVersion;
  py::register_exception<Error>(m, "PalmtessError", PyExc_ValueError);

  m.def(
      "sample",
      [](const std::string& process, const Params& params, double half_side, std::uint64_t seed,
         std::uint64_t replicate) {
        RngStream rng(seed, replicate, Purpose::sample);
        return to_array(sample(make_spec(process, params), Box(Point(0.0, 0.0), half_side), rng));
      },
      py::arg("process"), py::arg("params") = Params{}, py::arg("half_side") = 5.0, py::arg("seed") = 1,
      py::arg("replicate") = 0, "Draw one realisation on [-h, h]^2 as an (n, 2) array.");

  m.def(
      "delaunay",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> pts, double half_side) {
        auto dc = build_delaunay(from_array(pts, half_side), BuildOptions{false});
        py::list edges;
        for (auto [i, j] : dc.edges()) edges.append(py::make_tuple(i, j));
        std::vector<std::size_t> degree(dc.size());
        std::vector<bool> interior(dc.size());
        for (std::size_t i = 0; i < dc.size(); ++i) {
          degree[i] = dc.degree(i);
          interior[i] = dc.interior_valid(i);
        }
        py::dict d;
        d["edges"] = edges;
        d["degree"] = degree;
        d["interior_valid"] = interior;
        return d;
      },
      py::arg("points"), py::arg("half_side"),
      "Delaunay adjacency (shared Voronoi faces) of points in [-h, h]^2.");

  m.def(
      "rho_gamma",
      [](const std::string& process, const Params& params, double gamma, std::uint64_t replicates,
         std::uint64_t seed, unsigned workers) {
        return report(estimate_rho_gamma(make_spec(process, params), gamma, {replicates, seed, workers}));
      },
      py::arg("process"), py::arg("params") = Params{}, py::arg("gamma") = 1.0, py::arg("replicates") = 1000,
      py::arg("seed") = 1, py::arg("workers") = 0);

  m.def(
      "void_probability",
      [](const std::string& process, const Params& params, const std::vector<double>& ells,
         std::uint64_t replicates, std::uint64_t seed, unsigned workers) {
        auto fit = estimate_void_probability(make_spec(process, params), ells, {replicates, seed, workers});
        py::list pts;
        for (const auto& p : fit.points) {
          py::dict d;
          d["ell"] = p.ell;
          d["frequency"] = p.frequency;
          d["std_error"] = p.std_error;
          d["censored"] = p.censored;
          pts.append(d);
        }
        py::dict d;
        d["points"] = pts;
        d["alpha"] = fit.alpha;
        d["super_polynomial"] = fit.super_polynomial;
        return d;
      },
      py::arg("process"), py::arg("params") = Params{}, py::arg("ells") = std::vector<double>{0.5, 1.0},
      py::arg("replicates") = 1000, py::arg("seed") = 1, py::arg("workers") = 0);

  m.def(
      "palm_moment",
      [](const std::string& quantity, const std::string& process, const Params& params, const std::string& law,
         const Params& law_params, double param, const std::string& route, std::uint64_t replicates,
         std::uint64_t seed, unsigned workers) {
        return report(estimate_palm_moment(palm_quantity_from_string(quantity), make_spec(process, params),
                                           make_law(law, law_params), param, palm_route_from_string(route),
                                           {replicates, seed, workers}));
      },
      py::arg("quantity"), py::arg("process") = "poisson", py::arg("params") = Params{}, py::arg("law") = "unit",
      py::arg("law_params") = Params{}, py::arg("param") = 1.0, py::arg("route") = "slivnyak",
      py::arg("replicates") = 1000, py::arg("seed") = 1, py::arg("workers") = 0);

  m.def(
      "box_open",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> pts, double half_side, int a, int b,
         double R, double p, std::uint64_t seed) {
        auto dc = build_delaunay(from_array(pts, half_side));
        auto W = sample_bonds(dc, p, RngStream(seed, 0, Purpose::bonds));
        auto r = box_open({a, b}, R, dc, W);
        py::dict d;
        d["open"] = r.open;
        d["via"] = to_string(r.via);
        d["max_empty_distance"] = r.max_empty_distance;
        d["ambiguous"] = r.ambiguous;
        return d;
      },
      py::arg("points"), py::arg("half_side"), py::arg("a"), py::arg("b"), py::arg("R"), py::arg("p"),
      py::arg("seed") = 1, "Open/closed status of the box C_(a,b) under Bernoulli(p) bonds.");

  m.def(
      "estimate_phi",
      [](const std::vector<double>& p_grid, double R, std::uint64_t replicates, std::uint64_t seed,
         unsigned workers) {
        py::list rows;
        for (const auto& r : estimate_phi(ProcessSpec::poisson(1.0), p_grid, R, {replicates, seed, workers})) {
          py::dict d;
          d["p"] = r.p;
          d["R"] = r.R;
          d["phi"] = r.phi;
          d["phi_se"] = r.phi_se;
          d["p_not_A"] = r.p_not_A;
          d["bound"] = r.bound;
          d["bound_applicable"] = r.bound_applicable;
          d["bound_pass"] = r.bound_pass;
          rows.append(d);
        }
        return rows;
      },
      py::arg("p_grid"), py::arg("R"), py::arg("replicates") = 100, py::arg("seed") = 1, py::arg("workers") = 0);

  m.def(
      "sep_check",
      [](const std::vector<double>& t0_grid, double half_side, std::uint64_t replicates, std::uint64_t seed,
         unsigned workers) {
        py::list rows;
        for (const auto& r : sep_check(ProcessSpec::poisson(1.0), ConductanceLaw::unit(), t0_grid, half_side,
                                       {replicates, seed, workers})) {
          py::dict d;
          d["t0"] = r.t0;
          d["spanning_frequency"] = r.spanning_frequency;
          d["max_largest_diameter"] = r.max_largest_diameter;
          d["subcritical"] = r.subcritical;
          rows.append(d);
        }
        return rows;
      },
      py::arg("t0_grid"), py::arg("half_side") = 20.0, py::arg("replicates") = 100, py::arg("seed") = 1,
      py::arg("workers") = 0);

  m.def(
      "run_experiment",
      [](const std::string& config_text, const std::filesystem::path& output_dir) {
        std::istringstream in(config_text);
        auto res = run_experiment(parse_config(in), output_dir);
        return res.files;
      },
      py::arg("config_text"), py::arg("output_dir"),
      "Run a key=value experiment config; returns the CSV file names written.");

  m.def(
      "geometry_selftest",
      [](std::uint64_t seed) {
        auto r = geometry_selftest(seed);
        py::dict d;
        d["pass"] = r.pass();
        d["cube_witness"] = py::make_tuple(r.cube_witness_pass, r.cube_witness_total);
        d["lattice"] = py::make_tuple(r.lattice_degree_four, r.lattice_points);
        d["duality"] = py::make_tuple(r.duality_match, r.duality_total);
        return d;
      },
      py::arg("seed") = 1);
}

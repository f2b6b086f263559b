#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "palmtess/harness.hpp"

using namespace palmtess;

namespace {

int exit_code(const Error& e) {
  switch (e.code()) {
    case Errc::config_error:
    case Errc::schema_error: return 2;
    default: return 3;
  }
}

ProcessSpec spec_from_flags(const std::string& process, const std::map<std::string, double>& p) {
  auto get = [&](const char* k, double d) {
    auto it = p.find(k);
    return it == p.end() ? d : it->second;
  };
  switch (process_kind_from_string(process)) {
    case ProcessKind::poisson: return ProcessSpec::poisson(get("m", 1.0));
    case ProcessKind::matern_cluster:
      return ProcessSpec::matern_cluster(get("kappa", 0.5), get("mu", 2.0), get("rc", 0.5));
    case ProcessKind::matern_hardcore: return ProcessSpec::matern_hardcore(get("lambda", 1.0), get("rhc", 0.3));
    case ProcessKind::gibbs: {
      GibbsSettings g;
      g.activity = get("z", 1.0);
      g.beta = get("beta", 0.0);
      g.potential = PairPotential::strauss(get("strauss_energy", 0.0), get("strauss_range", 1.0));
      g.burn_in_sweeps = static_cast<int>(get("burn_in", 1000));
      return ProcessSpec::gibbs_process(g);
    }
  }
  return ProcessSpec::poisson(1.0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delaunay/Voronoi Palm-moment and percolation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment file");
  run->add_option("config", config_path, "experiment config")->required();

  std::string kind, csv, svg;
  auto* plot = app.add_subcommand("plot", "render a CSV as SVG");
  plot->add_option("--kind", kind, "loglog-void | phi-vs-p | cluster-cdf | palm-trace")->required();
  plot->add_option("csv", csv, "input CSV")->required();
  plot->add_option("--out,-o", svg, "output SVG (default: CSV path with .svg)");

  std::uint64_t st_seed = 1;
  auto* selftest = app.add_subcommand("selftest", "deterministic geometry self-test suite");
  selftest->add_option("--seed", st_seed);

  std::string process = "poisson", out_path;
  double half = 5.0;
  std::uint64_t seed = 1;
  std::vector<std::string> param_items;
  auto* smp = app.add_subcommand("sample", "draw one configuration");
  smp->add_option("--process", process, "poisson | matern_cluster | matern_hardcore | gibbs");
  smp->add_option("--param", param_items, "name=value process parameter")->delimiter(',');
  smp->add_option("--window", half, "window half-side");
  smp->add_option("--seed", seed);
  smp->add_option("--out", out_path, "output point file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      auto cfg = parse_config_file(config_path);
      auto res = run_experiment(cfg);
      for (const auto& f : res.files) std::cout << (res.output_dir / f).string() << "\n";
      std::cout << (res.output_dir / "run_manifest.json").string() << "\n";
    } else if (*plot) {
      PlotKind k;
      try {
        k = plot_kind_from_string(kind);
      } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
      }
      std::filesystem::path target = svg.empty() ? std::filesystem::path(csv).replace_extension(".svg") : std::filesystem::path(svg);
      plot_file(csv, k, target);
      std::cout << target.string() << "\n";
    } else if (*selftest) {
      auto r = geometry_selftest(st_seed);
      std::cout << "cube-in-ball witness " << r.cube_witness_pass << "/" << r.cube_witness_total << "\n"
                << "lattice degree 4    " << r.lattice_degree_four << "/" << r.lattice_points << "\n"
                << "duality brute force " << r.duality_match << "/" << r.duality_total << "\n"
                << (r.pass() ? "PASS" : "FAIL") << "\n";
      return r.pass() ? 0 : 3;
    } else if (*smp) {
      std::map<std::string, double> params;
      for (const auto& item : param_items) {
        auto eq = item.find('=');
        try {
          if (eq == std::string::npos) throw std::invalid_argument(item);
          params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
          std::cerr << "bad --param '" << item << "', expected name=value\n";
          return 1;
        }
      }
      ProcessSpec spec = spec_from_flags(process, params);
      spec.validate();
      RngStream rng(seed, 0, Purpose::sample);
      auto cfg = sample(spec, Box(Point(0.0, 0.0), half), rng);
      write_configuration_file(out_path, cfg);
      std::cout << cfg.size() << " points -> " << out_path << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

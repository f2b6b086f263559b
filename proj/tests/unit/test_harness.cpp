#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "palmtess/harness.hpp"

using namespace palmtess;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("palmtess_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("config parsing") {
  auto c = parse(
      "# moments run\n"
      "experiment=moments\n"
      "process = poisson\n"
      "param.m=2.5   # intensity\n"
      "grid.gamma=1, 2,3\n"
      "replicates=100000\n"
      "seed=42\n");
  CHECK(c.experiment == "moments");
  CHECK(c.process.intensity == 2.5);
  CHECK(c.grids.at("gamma") == std::vector<double>{1, 2, 3});
  CHECK(c.replicates == 100000);
  CHECK(c.seed == 42);

  auto g = parse("experiment=palm\nprocess=matern_hardcore\nparam.lambda=2\nparam.rhc=0.2\nconductance=uniform\n"
                 "conductance.a=0.5\nconductance.b=2\nquantity=lambda2\nroute=campbell\n");
  CHECK(g.process.kind == ProcessKind::matern_hardcore);
  CHECK(g.law.kind == LawKind::uniform);
  CHECK(g.law.p2 == 2.0);

  auto expect_error = [](const std::string& text, const std::string& where) {
    try {
      parse(text);
      CHECK_MESSAGE(false, "no error for: " << text);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::config_error);
      CHECK_MESSAGE(std::string(e.what()).find(where) != std::string::npos, e.what());
    }
  };
  expect_error("experiment=moments\nreplicates=abc\n", "line 2, column 12");
  expect_error("experiment=moments\nnonsense\n", "line 2, column 1");
  expect_error("experiment=nothing\n", "line 1, column 12");
  expect_error("experiment=moments\ngrid.p=0.1,,0.3\n", "line 2");
  expect_error("experiment=moments\nprocess=poisson\nparam.m=-1\n", "line 2");
  expect_error("experiment=moments\nreplicates=0\n", "replicates must be >= 1");
  expect_error("experiment=moments\nparam.kappa=1\n", "does not apply");
  expect_error("experiment=moments\ncolour=blue\n", "unknown key 'colour'");
  expect_error("experiment=palm\nconductance=distance_kernel\nconductance.kernel=/no/such/file\n", "file not found");
  expect_error("replicates=3\n", "missing required key 'experiment'");
}

TEST_CASE("shortest round-trip numbers") {
  CHECK(fmt(0.1) == "0.1");
  CHECK(fmt(1.0) == "1");
  CHECK(fmt(std::exp(-1.0)) == "0.36787944117144233");
  CHECK(std::stod(fmt(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(fmt(std::nan("")) == "nan");
}

TEST_CASE("runs are byte-deterministic and the manifest matches") {
  auto cfg = parse("experiment=moments\nprocess=poisson\nparam.m=1\ngrid.gamma=1,2,3\ngrid.L=1,2\nreplicates=300\n"
                   "seed=42\nworkers=2\n");
  auto a = run_experiment(cfg, scratch("det_a"));
  cfg.workers = 1;
  auto b = run_experiment(cfg, scratch("det_b"));
  REQUIRE(a.files == b.files);
  REQUIRE(a.files.size() == 2);
  for (const auto& f : a.files) CHECK(slurp(a.output_dir / f) == slurp(b.output_dir / f));

  auto m = nlohmann::json::parse(slurp(a.output_dir / "run_manifest.json"));
  CHECK(m["experiment"] == "moments");
  CHECK(m["config"]["seed"] == "42");
  for (const auto& o : m["outputs"]) CHECK(o["sha256"] == sha256_hex(a.output_dir / o["file"].get<std::string>()));
  CHECK_FALSE(fs::exists(a.output_dir / "run_manifest.json.tmp"));

  auto t = read_csv(a.output_dir / "moments.csv");
  CHECK(t.rows().size() == 3);
  CHECK(t.header()[0] == "name");
}

TEST_CASE("single replicate runs") {
  auto cfg = parse("experiment=moments\nreplicates=1\ngrid.gamma=2\n");
  auto r = run_experiment(cfg, scratch("single"));
  auto t = read_csv(r.output_dir / "moments.csv");
  REQUIRE(t.rows().size() == 1);
  CHECK(t.rows()[0][4] == "0");
  CHECK(t.rows()[0][8] == "1");
}

TEST_CASE("output directory override") {
  auto cfg = parse("experiment=geometry-selftest\noutput_dir=/nonexistent/elsewhere\n");
  fs::path target = scratch("env");
  setenv("PALMTESS_OUTPUT_DIR", target.c_str(), 1);
  CHECK(resolve_output_dir(cfg) == target);
  auto r = run_experiment(cfg);
  unsetenv("PALMTESS_OUTPUT_DIR");
  CHECK(fs::exists(target / "selftest.csv"));
  auto t = read_csv(target / "selftest.csv");
  for (const auto& row : t.rows()) CHECK(row[1] == row[2]);
  CHECK(resolve_output_dir(cfg) == fs::path("/nonexistent/elsewhere"));
}

TEST_CASE("plots") {
  CsvTable empty({"ell", "estimate", "stderr"});
  auto svg = render_plot(empty, PlotKind::loglog_void);
  CHECK(svg.find("id=\"axes\"") != std::string::npos);
  CHECK(count_of(svg, "class=\"mark\"") == 0);

  try {
    render_plot(CsvTable({"p", "phi"}), PlotKind::phi_vs_p);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::schema_error);
    CHECK(std::string(e.what()).find("R, phi_stderr, bound") != std::string::npos);
  }

  CsvTable v({"process", "intensity", "ell", "estimate", "stderr"});
  for (double l : {0.25, 0.5, 0.75, 1.0})
    v.add_row({"poisson", "1", fmt(l), fmt(std::exp(-4 * l * l)), fmt(0.001)});
  auto vs = render_plot(v, PlotKind::loglog_void);
  CHECK(count_of(vs, "class=\"mark\"") == 4);
  CHECK(vs.find("exp(-m (2 ell)^2)") != std::string::npos);

  auto cfg = parse("experiment=sepcheck\nconductance=unit\ngrid.t0=0.1,2\nwindow=4\nreplicates=3\n");
  auto r = run_experiment(cfg, scratch("plot"));
  auto cdf = render_plot(read_csv(r.output_dir / "sep_clusters.csv"), PlotKind::cluster_cdf);
  CHECK(count_of(cdf, "class=\"series\"") == 2);
  CHECK_THROWS_AS(plot_kind_from_string("pie"), Error);
}

TEST_CASE("every experiment runs at toy scale") {
  const char* configs[] = {
      "experiment=void\ngrid.ell=0.1,0.5\nreplicates=50\n",
      "experiment=palm\nquantity=deg_p\ngrid.p=1,2\nreplicates=20\nwindow=4\n",
      "experiment=palm\nprocess=matern_cluster\nparam.kappa=0.5\nparam.mu=2\nparam.rc=0.5\nquantity=lambda2\n"
      "replicates=5\n",
      "experiment=chain\ngrid.beta=2,3\nreplicates=20\nwindow=8\n",
      "experiment=percolation\ngrid.p=0,0.5,1\ngrid.R=4\nreplicates=4\n",
      "experiment=zdprocess\ngrid.p=0.5\ngrid.R=4\nlattice=1\nreplicates=2\n",
      "experiment=sepcheck\nconductance=uniform\ngrid.t0=0.5\nwindow=5\nreplicates=2\n",
  };
  int k = 0;
  for (const char* text : configs) {
    auto cfg = parse(text);
    auto r = run_experiment(cfg, scratch("toy" + std::to_string(k++)));
    for (const auto& f : r.files) {
      auto t = read_csv(r.output_dir / f);
      CHECK(!t.header().empty());
      bool has_seed = false;
      for (const auto& h : t.header()) has_seed = has_seed || h == "seed";
      CHECK(has_seed);
    }
  }
  auto bad = parse("experiment=palm\nprocess=matern_hardcore\nparam.lambda=1\nparam.rhc=0.1\nroute=slivnyak\n");
  CHECK_THROWS_AS(run_experiment(bad, scratch("bad")), Error);
}

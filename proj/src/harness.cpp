#include "palmtess/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "palmtess/palm_moments.hpp"
#include "palmtess/percolation.hpp"

namespace palmtess {

namespace fs = std::filesystem;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw Error(Errc::schema_error, "row width does not match header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void CsvTable::write(const fs::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << str();
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) return CsvTable({});
  CsvTable t(split(line));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header().size()) throw Error(Errc::schema_error, "ragged row in " + path.string());
    t.add_row(std::move(cells));
  }
  return t;
}

std::string sha256_hex(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + file.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

fs::path resolve_output_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("PALMTESS_OUTPUT_DIR"); env && *env) return fs::path(env);
  return fs::path(cfg.output_dir);
}

namespace {

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

MonteCarloOptions mc_of(const ExperimentConfig& c) { return {c.replicates, c.seed, c.workers}; }

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  std::size_t k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) ;
  return v[std::min(v.size() - 1, k == 0 ? 0 : k - 1)];
}

using Outputs = std::vector<std::pair<std::string, CsvTable>>;

Outputs run_moments(const ExperimentConfig& c) {
  Outputs out;
  CsvTable t({"name", "process", "gamma", "estimate", "stderr", "n_replicates", "seed", "discard_fraction",
              "single_replicate"});
  for (double g : c.grid("gamma", {1.0, 2.0, 3.0})) {
    auto r = estimate_rho_gamma(c.process, g, mc_of(c));
    t.add_row({"rho_gamma", c.process.tag(), fmt(g), fmt(r.estimate), fmt(r.std_error), fmt(r.n_replicates),
               fmt(r.seed), fmt(r.discard_fraction), fmt(r.n_replicates == 1)});
  }
  out.emplace_back("moments.csv", std::move(t));
  if (c.grids.count("L")) {
    std::vector<int> Ls;
    for (double L : c.grids.at("L")) Ls.push_back(static_cast<int>(L));
    CsvTable q({"name", "process", "L", "gamma", "count_left", "count_right", "count_diff", "count_stderr", "count_pass",
                "palm_left", "palm_left_stderr", "palm_right", "palm_right_stderr", "palm_pass",
                "n_replicates", "seed", "discard_fraction"});
    for (const auto& r : check_moment_inequalities(c.process, Ls, c.grid("gamma", {1.0, 2.0}), mc_of(c)))
      q.add_row({"moment_inequalities", c.process.tag(), fmt(r.L), fmt(r.gamma), fmt(r.count_left), fmt(r.count_right),
                 fmt(r.count_diff), fmt(r.count_se), fmt(r.count_pass), fmt(r.palm_left), fmt(r.palm_left_se),
                 fmt(r.palm_right), fmt(r.palm_right_se), fmt(r.palm_pass), fmt(c.replicates), fmt(c.seed),
                 fmt(0.0)});
    out.emplace_back("inequalities.csv", std::move(q));
  }
  return out;
}

Outputs run_void(const ExperimentConfig& c) {
  Outputs out;
  auto fit = estimate_void_probability(c.process, c.grid("ell", {0.25, 0.5, 0.75, 1.0}), mc_of(c));
  CsvTable t({"name", "process", "intensity", "ell", "estimate", "stderr", "void_events", "censored", "upper_bound",
              "n_replicates", "seed", "discard_fraction"});
  for (const auto& p : fit.points)
    t.add_row({"void_probability", c.process.tag(), fmt(c.process.theoretical_intensity()), fmt(p.ell),
               fmt(p.frequency), fmt(p.std_error), fmt(p.void_events), fmt(p.censored), fmt(p.upper_bound),
               fmt(fit.n_replicates), fmt(fit.seed), fmt(0.0)});
  out.emplace_back("void.csv", std::move(t));
  CsvTable f({"name", "process", "alpha", "intercept", "residual", "used_points", "super_polynomial", "n_replicates",
              "seed"});
  f.add_row({"alpha_fit", c.process.tag(), fmt(fit.alpha), fmt(fit.intercept), fmt(fit.residual),
             fmt(static_cast<std::uint64_t>(fit.used_points)), fmt(fit.super_polynomial), fmt(fit.n_replicates),
             fmt(fit.seed)});
  out.emplace_back("void_fit.csv", std::move(f));
  return out;
}

Outputs run_palm(const ExperimentConfig& c) {
  PalmQuantity q = palm_quantity_from_string(c.quantity);
  std::vector<double> params;
  switch (q) {
    case PalmQuantity::deg_p:
    case PalmQuantity::mu_p:
    case PalmQuantity::nu_p: params = c.grid("p", {1.0}); break;
    case PalmQuantity::zeta_sum: params = c.grid("zeta", {2.0}); break;
    case PalmQuantity::count: params = c.grid("L", {1.0}); break;
    default: params = {1.0};
  }
  std::vector<PalmRoute> routes;
  if (c.route != "campbell") routes.push_back(PalmRoute::slivnyak);
  if (c.route != "slivnyak") routes.push_back(PalmRoute::campbell);
  if (c.process.kind != ProcessKind::poisson) {
    if (c.route == "slivnyak") throw Error(Errc::unsupported_process, "the Slivnyak route needs a Poisson process");
    routes = {PalmRoute::campbell};
  }
  PalmOptions opt;
  if (c.window) {
    opt.slivnyak_half_side = *c.window;
    opt.campbell_half_side = *c.window + 3.0;
    opt.campbell_core_half_side = *c.window;
  }
  CsvTable t({"name", "process", "quantity", "route", "param", "estimate", "stderr", "n_replicates", "seed",
              "discard_fraction", "m_hat", "rm_1", "rm_2", "rm_3", "rm_4"});
  for (double p : params)
    for (auto route : routes) {
      auto r = estimate_palm_moment(q, c.process, c.law, p, route, mc_of(c), opt);
      std::vector<std::string> row{r.name, c.process.tag(), to_string(q), to_string(route), fmt(p), fmt(r.estimate),
                                   fmt(r.std_error), fmt(r.n_replicates), fmt(r.seed), fmt(r.discard_fraction),
                                   fmt(r.m_hat)};
      for (std::size_t k = 0; k < 4; ++k) row.push_back(k < r.running_mean.size() ? fmt(r.running_mean[k]) : "nan");
      t.add_row(std::move(row));
    }
  Outputs out;
  out.emplace_back("palm.csv", std::move(t));
  return out;
}

Outputs run_chain(const ExperimentConfig& c) {
  if (c.process.kind != ProcessKind::poisson) throw Error(Errc::unsupported_process, "chain runs on rooted Poisson samples");
  const double half = c.window.value_or(12.0);
  const Box window(Point(0.0, 0.0), half);
  CsvTable t({"name", "process", "beta", "n_max", "used", "discarded", "vacuous", "pass", "fail",
              "neighbors_in_region", "n_replicates", "seed", "discard_fraction"});
  CsvTable lv({"name", "process", "beta", "n", "p_A", "p_T", "truncated", "n_replicates", "seed"});
  for (double beta : c.grid("beta", {2.0})) {
    struct Rep {
      bool used = false, vacuous = false, pass = false, fr = false;
      std::vector<bool> A, trunc;
      int T = -1;
    };
    std::vector<Rep> reps(c.replicates);
    parallel_for(c.replicates, c.workers, [&](std::size_t i) {
      RngStream rng(c.seed, i, Purpose::sample);
      auto rooted = palm_root_slivnyak(c.process, window, rng);
      auto ev = level_events(rooted, beta, c.n_max);
      reps[i].A = ev.A;
      reps[i].trunc = ev.truncated;
      reps[i].T = ev.T_index ? *ev.T_index : -1;
      auto dc = build_delaunay(rooted.config, BuildOptions{false});
      if (!dc.interior_valid(rooted.root)) return;
      auto r = verify_degree_chain(rooted, dc, beta, c.n_max);
      reps[i].used = true;
      reps[i].vacuous = r.vacuous;
      reps[i].pass = r.pass;
      reps[i].fr = r.vacuous || r.neighbors_in_region;
    });
    std::uint64_t used = 0, vac = 0, pass = 0, fr = 0;
    for (const auto& r : reps) {
      used += r.used;
      vac += r.used && r.vacuous;
      pass += r.used && r.pass;
      fr += r.used && r.fr;
    }
    const double n = static_cast<double>(c.replicates);
    t.add_row({"degree_chain", c.process.tag(), fmt(beta), fmt(c.n_max), fmt(used), fmt(c.replicates - used),
               fmt(vac), fmt(pass), fmt(used - pass), fmt(fr), fmt(c.replicates), fmt(c.seed),
               fmt(static_cast<double>(c.replicates - used) / n)});
    for (int k = 0; k <= c.n_max; ++k) {
      double a = 0, tt = 0, tr = 0;
      for (const auto& r : reps) {
        a += r.A[static_cast<std::size_t>(k)];
        tt += r.T == k;
        tr += r.trunc[static_cast<std::size_t>(k)];
      }
      lv.add_row({"level_events", c.process.tag(), fmt(beta), fmt(k), fmt(a / n), fmt(tt / n), fmt(tr / n),
                  fmt(c.replicates), fmt(c.seed)});
    }
  }
  Outputs out;
  out.emplace_back("chain.csv", std::move(t));
  out.emplace_back("levels.csv", std::move(lv));
  return out;
}

Outputs run_percolation(const ExperimentConfig& c) {
  const auto& ps = c.grid("p", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  CsvTable t({"name", "process", "p", "R", "phi", "phi_stderr", "p_not_A", "bound", "diff", "diff_stderr",
              "bound_applicable", "bound_pass", "spanning_frequency", "P_A1", "P_A2", "P_A3", "largest_q50",
              "largest_q90", "largest_max", "n_replicates", "seed", "discard_fraction"});
  for (double R : c.grid("R", {4.0, 8.0})) {
    std::vector<PhiReplicate> reps;
    auto rows = estimate_phi(c.process, ps, R, mc_of(c), &reps);
    double a1 = 0, a2 = 0, a3 = 0;
    for (const auto& r : reps) {
      a1 += r.events.A1;
      a2 += r.events.A2;
      a3 += r.events.A3;
    }
    const double n = static_cast<double>(reps.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& row = rows[k];
      std::vector<double> largest;
      for (const auto& r : reps) largest.push_back(static_cast<double>(r.largest[k]));
      t.add_row({"phi", c.process.tag(), fmt(row.p), fmt(row.R), fmt(row.phi), fmt(row.phi_se), fmt(row.p_not_A),
                 fmt(row.bound), fmt(row.diff), fmt(row.diff_se), fmt(row.bound_applicable), fmt(row.bound_pass),
                 fmt(row.spanning_frequency), fmt(a1 / n), fmt(a2 / n), fmt(a3 / n), fmt(quantile(largest, 0.5)),
                 fmt(quantile(largest, 0.9)), fmt(quantile(largest, 1.0)), fmt(row.n_replicates), fmt(row.seed),
                 fmt(0.0)});
    }
  }
  Outputs out;
  out.emplace_back("phi.csv", std::move(t));
  return out;
}

Outputs run_zdprocess(const ExperimentConfig& c) {
  const LatticeWindow lw = LatticeWindow::centered(c.lattice_radius);
  CsvTable t({"name", "process", "p", "R", "lattice_sites", "eta_open_fraction", "eta_spanning_frequency",
              "eta_largest_mean", "inclusion_pass_fraction", "inclusion_vacuous_fraction", "threshold",
              "n_replicates", "seed", "discard_fraction"});
  const auto& ps = c.grid("p", {0.3, 0.6, 0.9});
  for (double R : c.grid("R", {8.0})) {
    const Box gw = lw.geometry_window(R, 1.0);
    struct Rep {
      std::vector<double> open, span, largest, pass, vacuous, threshold;
    };
    std::vector<Rep> reps(c.replicates);
    parallel_for(c.replicates, c.workers, [&](std::size_t i) {
      RngStream rng(c.seed, i, Purpose::sample);
      auto cfg = sample(c.process, gw, rng);
      auto dc = build_delaunay(cfg);
      auto u = edge_uniforms(dc, RngStream(c.seed, i, Purpose::bonds));
      for (double p : ps) {
        auto W = bonds_from_uniforms(dc, u, p);
        auto eta = eta_field(dc, W, R, lw);
        std::vector<std::size_t> sizes;
        eta.components(&sizes);
        auto inc = inclusion_check(dc, W, R, lw, eta, c.diameter_threshold);
        Rep& r = reps[i];
        r.open.push_back(static_cast<double>(eta.open_count()) / static_cast<double>(lw.count()));
        r.span.push_back(eta.spanning());
        r.largest.push_back(sizes.empty() ? 0.0 : static_cast<double>(*std::max_element(sizes.begin(), sizes.end())));
        r.pass.push_back(inc.pass);
        r.vacuous.push_back(inc.vacuous);
        r.threshold.push_back(inc.threshold);
      }
    });
    const double n = static_cast<double>(c.replicates);
    for (std::size_t k = 0; k < ps.size(); ++k) {
      double o = 0, s = 0, l = 0, pa = 0, v = 0;
      for (const auto& r : reps) {
        o += r.open[k];
        s += r.span[k];
        l += r.largest[k];
        pa += r.pass[k];
        v += r.vacuous[k];
      }
      t.add_row({"zdprocess", c.process.tag(), fmt(ps[k]), fmt(R), fmt(static_cast<std::uint64_t>(lw.count())),
                 fmt(o / n), fmt(s / n), fmt(l / n), fmt(pa / n), fmt(v / n), fmt(reps[0].threshold[k]),
                 fmt(c.replicates), fmt(c.seed), fmt(0.0)});
    }
  }
  Outputs out;
  out.emplace_back("zdprocess.csv", std::move(t));
  return out;
}

Outputs run_sepcheck(const ExperimentConfig& c) {
  const double half = c.window.value_or(20.0);
  auto rows = sep_check(c.process, c.law, c.grid("t0", {0.05, 0.1, 0.2, 0.3, 0.5, 1.0}), half, mc_of(c));
  CsvTable t({"name", "process", "t0", "keep_probability_max", "spanning_frequency", "max_largest_diameter",
              "mean_largest_size", "subcritical", "window_side", "n_replicates", "seed", "discard_fraction"});
  CsvTable h({"name", "t0", "size", "count", "n_replicates", "seed"});
  for (const auto& r : rows) {
    t.add_row({"sep_check", c.process.tag(), fmt(r.t0), fmt(r.keep_probability_max), fmt(r.spanning_frequency),
               fmt(r.max_largest_diameter), fmt(r.mean_largest_size), fmt(r.subcritical), fmt(2.0 * half),
               fmt(r.n_replicates), fmt(r.seed), fmt(0.0)});
    for (std::size_t s = 1; s < r.size_histogram.size(); ++s)
      if (r.size_histogram[s])
        h.add_row({"cluster_sizes", fmt(r.t0), fmt(static_cast<std::uint64_t>(s)),
                   fmt(static_cast<std::uint64_t>(r.size_histogram[s])), fmt(r.n_replicates), fmt(r.seed)});
  }
  Outputs out;
  out.emplace_back("sepcheck.csv", std::move(t));
  out.emplace_back("sep_clusters.csv", std::move(h));
  return out;
}

Outputs run_selftest(const ExperimentConfig& c) {
  auto r = geometry_selftest(c.seed);
  CsvTable t({"name", "total", "pass", "seed"});
  t.add_row({"cube_witness_witness", fmt(static_cast<std::uint64_t>(r.cube_witness_total)),
             fmt(static_cast<std::uint64_t>(r.cube_witness_pass)), fmt(c.seed)});
  t.add_row({"lattice_degree_four", fmt(static_cast<std::uint64_t>(r.lattice_points)),
             fmt(static_cast<std::uint64_t>(r.lattice_degree_four)), fmt(c.seed)});
  t.add_row({"duality_bruteforce", fmt(static_cast<std::uint64_t>(r.duality_total)),
             fmt(static_cast<std::uint64_t>(r.duality_match)), fmt(c.seed)});
  Outputs out;
  out.emplace_back("selftest.csv", std::move(t));
  return out;
}

void write_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(Errc::io_error, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, resolve_output_dir(cfg)); }

RunResult run_experiment(const ExperimentConfig& cfg, const fs::path& output_dir) {
  const std::string started = utc_now();
  Outputs outputs;
  const std::string& e = cfg.experiment;
  try {
    if (e == "moments") outputs = run_moments(cfg);
    else if (e == "void") outputs = run_void(cfg);
    else if (e == "palm") outputs = run_palm(cfg);
    else if (e == "chain") outputs = run_chain(cfg);
    else if (e == "percolation") outputs = run_percolation(cfg);
    else if (e == "zdprocess") outputs = run_zdprocess(cfg);
    else if (e == "sepcheck") outputs = run_sepcheck(cfg);
    else if (e == "geometry-selftest") outputs = run_selftest(cfg);
    else throw Error(Errc::config_error, "unknown experiment '" + e + "'");
  } catch (const Error& err) {
    throw Error(err.code(), "experiment '" + e + "': " + err.what());
  }

  fs::create_directories(output_dir);
  RunResult res;
  res.output_dir = output_dir;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, table] : outputs) {
    fs::path p = output_dir / name;
    write_atomic(p, table.str());
    res.files.push_back(name);
    files.push_back({{"file", name}, {"sha256", sha256_hex(p)}, {"bytes", fs::file_size(p)}});
  }
  nlohmann::json echo = nlohmann::json::object();
  for (const auto& [k, v] : cfg.echo) echo[k] = v;
  nlohmann::json manifest = {{"artifact", "palmtess"},  {"version", kVersion},
                             {"experiment", e},         {"config", echo},
                             {"started_utc", started},  {"finished_utc", utc_now()},
                             {"outputs", files}};
  write_atomic(output_dir / "run_manifest.json", manifest.dump(2) + "\n");
  return res;
}

}  // namespace palmtess

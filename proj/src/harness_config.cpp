#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "palmtess/harness.hpp"
#include "palmtess/palm_moments.hpp"

namespace palmtess {

namespace {

const std::set<std::string> kExperiments = {"moments",     "void",     "palm",     "chain",
                                            "percolation", "zdprocess", "sepcheck", "geometry-selftest"};
const std::set<std::string> kGrids = {"ell", "L", "gamma", "p", "R", "t0", "beta", "zeta"};

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct Entry {
  std::string value;
  int line = 0;
  int column = 0;
};

[[noreturn]] void fail(int line, int column, const std::string& msg) {
  throw Error(Errc::config_error, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg);
}

double to_double(const Entry& e, const std::string& key) {
  double v = 0.0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  auto [ptr, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || ptr != end) fail(e.line, e.column, "'" + key + "' expects a number, got '" + e.value + "'");
  return v;
}

std::uint64_t to_uint(const Entry& e, const std::string& key) {
  std::uint64_t v = 0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  auto [ptr, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || ptr != end)
    fail(e.line, e.column, "'" + key + "' expects a nonnegative integer, got '" + e.value + "'");
  return v;
}

std::vector<double> to_grid(const Entry& e, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  int col = e.column;
  while (std::getline(ss, item, ',')) {
    Entry part{trim(item), e.line, col};
    if (part.value.empty()) fail(e.line, col, "empty value in grid '" + key + "'");
    out.push_back(to_double(part, key));
    col += static_cast<int>(item.size()) + 1;
  }
  if (out.empty()) fail(e.line, e.column, "grid '" + key + "' is empty");
  return out;
}

std::filesystem::path existing_file(const Entry& e, const std::filesystem::path& base) {
  std::filesystem::path p(e.value);
  if (p.is_relative()) p = base / p;
  if (!std::filesystem::exists(p)) fail(e.line, e.column, "file not found: " + e.value);
  return p;
}

}  // namespace

std::vector<double> ExperimentConfig::grid(const std::string& name, const std::vector<double>& fallback) const {
  auto it = grids.find(name);
  return it == grids.end() ? fallback : it->second;
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  std::map<std::string, Entry> entries;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    int first = 1;
    while (first <= static_cast<int>(line.size()) && std::isspace(static_cast<unsigned char>(line[first - 1]))) ++first;
    if (eq == std::string::npos) fail(line_no, first, "expected key=value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail(line_no, first, "missing key");
    std::string value = trim(line.substr(eq + 1));
    int vcol = static_cast<int>(eq) + 2;
    while (vcol <= static_cast<int>(line.size()) && std::isspace(static_cast<unsigned char>(line[vcol - 1]))) ++vcol;
    if (entries.count(key)) fail(line_no, first, "duplicate key '" + key + "'");
    entries[key] = Entry{value, line_no, vcol};
    cfg.echo.emplace_back(key, value);
  }

  auto get = [&](const std::string& k) -> const Entry* {
    auto it = entries.find(k);
    return it == entries.end() ? nullptr : &it->second;
  };

  const Entry* exp = get("experiment");
  if (!exp) fail(line_no + 1, 1, "missing required key 'experiment'");
  if (!kExperiments.count(exp->value)) fail(exp->line, exp->column, "unknown experiment '" + exp->value + "'");
  cfg.experiment = exp->value;

  std::set<std::string> used = {"experiment"};
  auto take = [&](const std::string& k) {
    used.insert(k);
    return get(k);
  };

  if (auto e = take("replicates")) {
    cfg.replicates = to_uint(*e, "replicates");
    if (cfg.replicates < 1) fail(e->line, e->column, "replicates must be >= 1");
  }
  if (auto e = take("seed")) cfg.seed = to_uint(*e, "seed");
  if (auto e = take("workers")) cfg.workers = static_cast<unsigned>(to_uint(*e, "workers"));
  if (auto e = take("output_dir")) cfg.output_dir = e->value;
  if (auto e = take("window")) {
    cfg.window = to_double(*e, "window");
    if (!(*cfg.window > 0.0)) fail(e->line, e->column, "window half-side must be positive");
  }
  if (auto e = take("quantity")) {
    try {
      palm_quantity_from_string(e->value);
    } catch (const Error&) {
      fail(e->line, e->column, "unknown quantity '" + e->value + "'");
    }
    cfg.quantity = e->value;
  }
  if (auto e = take("route")) {
    if (e->value != "slivnyak" && e->value != "campbell" && e->value != "both")
      fail(e->line, e->column, "route must be slivnyak, campbell or both");
    cfg.route = e->value;
  }
  if (auto e = take("dimension")) {
    if (to_uint(*e, "dimension") != 2) fail(e->line, e->column, "unsupported-dimension: only d = 2 is implemented");
  }
  if (auto e = take("n_max")) cfg.n_max = static_cast<int>(to_uint(*e, "n_max"));
  if (auto e = take("lattice")) cfg.lattice_radius = static_cast<int>(to_uint(*e, "lattice"));
  if (auto e = take("D")) cfg.diameter_threshold = to_double(*e, "D");

  for (const auto& [k, e] : entries) {
    if (k.rfind("grid.", 0) != 0) continue;
    std::string name = k.substr(5);
    if (!kGrids.count(name)) fail(e.line, 1, "unknown grid '" + name + "'");
    cfg.grids[name] = to_grid(e, k);
    used.insert(k);
  }

  // Process.
  std::string tag = "poisson";
  const Entry* pe = take("process");
  if (pe) tag = pe->value;
  std::map<std::string, const Entry*> params;
  for (const auto& [k, e] : entries)
    if (k.rfind("param.", 0) == 0) {
      params[k.substr(6)] = &e;
      used.insert(k);
    }
  std::set<std::string> consumed;
  auto param = [&](const std::string& name, std::optional<double> fallback) -> double {
    consumed.insert(name);
    auto it = params.find(name);
    if (it == params.end()) {
      if (!fallback) fail(pe ? pe->line : 1, 1, "process '" + tag + "' needs param." + name);
      return *fallback;
    }
    return to_double(*it->second, "param." + name);
  };
  try {
    ProcessKind kind = process_kind_from_string(tag);
    switch (kind) {
      case ProcessKind::poisson: cfg.process = ProcessSpec::poisson(param("m", 1.0)); break;
      case ProcessKind::matern_cluster:
        cfg.process = ProcessSpec::matern_cluster(param("kappa", std::nullopt), param("mu", std::nullopt),
                                                  param("rc", std::nullopt));
        break;
      case ProcessKind::matern_hardcore:
        cfg.process = ProcessSpec::matern_hardcore(param("lambda", std::nullopt), param("rhc", std::nullopt));
        break;
      case ProcessKind::gibbs: {
        GibbsSettings g;
        g.activity = param("z", 1.0);
        g.beta = param("beta", 0.0);
        g.burn_in_sweeps = static_cast<int>(param("burn_in", 1000.0));
        g.thinning_sweeps = static_cast<int>(param("thinning", 10.0));
        g.move_step = param("move_step", 0.0);
        consumed.insert("potential");
        consumed.insert("boundary");
        if (params.count("potential")) {
          auto path = existing_file(*params["potential"], base_dir);
          g.potential = PairPotential::from_file(path.string(), param("r_max", std::nullopt));
        } else if (params.count("hardcore")) {
          g.potential = PairPotential::hard_core(param("hardcore", std::nullopt));
        } else {
          g.potential = PairPotential::strauss(param("strauss_energy", 0.0), param("strauss_range", 1.0));
        }
        if (params.count("boundary")) {
          auto path = existing_file(*params["boundary"], base_dir);
          g.boundary = read_configuration_file(path.string());
        }
        cfg.process = ProcessSpec::gibbs_process(std::move(g));
        break;
      }
    }
    cfg.process.validate();
  } catch (const Error& err) {
    if (err.code() == Errc::config_error) throw;
    fail(pe ? pe->line : 1, pe ? pe->column : 1, err.what());
  }
  for (const auto& [name, e] : params)
    if (!consumed.count(name)) fail(e->line, 1, "parameter '" + name + "' does not apply to process '" + tag + "'");

  // Conductance law.
  const Entry* ce = take("conductance");
  std::map<std::string, const Entry*> cparams;
  for (const auto& [k, e] : entries)
    if (k.rfind("conductance.", 0) == 0) {
      cparams[k.substr(12)] = &e;
      used.insert(k);
    }
  auto cparam = [&](const std::string& name, double fallback) {
    auto it = cparams.find(name);
    return it == cparams.end() ? fallback : to_double(*it->second, "conductance." + name);
  };
  try {
    std::string law = ce ? ce->value : "unit";
    if (law == "unit") cfg.law = ConductanceLaw::unit();
    else if (law == "constant") cfg.law = ConductanceLaw::constant(cparam("c", 1.0));
    else if (law == "uniform") cfg.law = ConductanceLaw::uniform(cparam("a", 0.5), cparam("b", 1.5));
    else if (law == "lognormal") cfg.law = ConductanceLaw::lognormal(cparam("mu", 0.0), cparam("sigma", 1.0));
    else if (law == "distance_kernel") {
      if (!cparams.count("kernel")) fail(ce->line, ce->column, "distance_kernel needs conductance.kernel");
      auto path = existing_file(*cparams["kernel"], base_dir);
      cfg.law = ConductanceLaw::kernel_from_file(path.string(), cparam("spread", 0.0));
    } else {
      fail(ce->line, ce->column, "unknown conductance law '" + law + "'");
    }
    cfg.law.validate();
  } catch (const Error& err) {
    if (err.code() == Errc::config_error) throw;
    fail(ce ? ce->line : 1, ce ? ce->column : 1, err.what());
  }

  for (const auto& [k, e] : entries)
    if (!used.count(k)) fail(e.line, 1, "unknown key '" + k + "'");
  return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config_error, "cannot open config file " + path.string());
  return parse_config(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace palmtess

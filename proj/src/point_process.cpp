#include "palmtess/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "palmtess/delaunay.hpp"

namespace palmtess {

namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

Point uniform_in_box(const Box& b, RngStream& rng) {
  Point p(b.dim());
  for (int k = 0; k < b.dim(); ++k) p[k] = rng.uniform(b.lo(k), b.hi(k));
  return p;
}

// Uniform point in the d-ball of radius r by rejection from the cube.
Point uniform_in_ball(const Point& c, double r, RngStream& rng) {
  const int d = c.dim();
  for (;;) {
    Point off(d);
    for (int k = 0; k < d; ++k) off[k] = rng.uniform(-1.0, 1.0);
    if (off.norm_sq() <= 1.0) return c + off.scaled(r);
  }
}

std::vector<Point> poisson_points(double m, const Box& b, RngStream& rng) {
  std::poisson_distribution<long> count(m * b.volume());
  long n = count(rng);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) pts.push_back(uniform_in_box(b, rng));
  return pts;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw Error(Errc::invalid_spec, std::string(name) + " must be positive and finite");
}

}  // namespace

// ---------------------------------------------------------------------------

PairPotential::PairPotential(std::vector<std::pair<double, double>> table, double r_max)
    : table_(std::move(table)), r_max_(r_max) {
  if (table_.empty()) throw Error(Errc::invalid_spec, "empty pair-potential table");
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw Error(Errc::invalid_spec, "pair potential needs a finite positive r_max");
  for (std::size_t i = 0; i < table_.size(); ++i) {
    auto [r, v] = table_[i];
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error(Errc::invalid_spec, "bad r in potential table");
    if (i > 0 && r < table_[i - 1].first)
      throw Error(Errc::invalid_spec, "potential table r values must be nondecreasing");
    if (std::isnan(v) || v == -kInfD)
      throw Error(Errc::rejected_spec, "potential table is unbounded below or undefined");
  }
  min_value_ = kInfD;
  for (auto [r, v] : table_)
    if (r <= r_max_) min_value_ = std::min(min_value_, v);
  if (min_value_ == kInfD) min_value_ = 0.0;
  min_value_ = std::min(min_value_, 0.0);
  // Hard core: the first table abscissa after which the value stays finite.
  hard_core_ = 0.0;
  for (std::size_t i = 0; i < table_.size(); ++i)
    if (table_[i].second == kInfD)
      hard_core_ = (i + 1 < table_.size()) ? table_[i + 1].first : r_max_;
}

PairPotential PairPotential::strauss(double energy, double range) {
  return PairPotential({{0.0, energy}, {range, energy}}, range);
}

PairPotential PairPotential::hard_core(double radius) {
  return PairPotential({{0.0, kInfD}, {radius, 0.0}}, radius);
}

PairPotential PairPotential::from_file(const std::string& path, double r_max) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open potential table " + path);
  std::vector<std::pair<double, double>> t;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream is(line);
    std::string rs, vs;
    if (!(is >> rs)) continue;
    if (!(is >> vs)) throw Error(Errc::invalid_spec, "potential table line needs two columns");
    t.emplace_back(std::stod(rs), std::stod(vs));
  }
  return PairPotential(std::move(t), r_max);
}

double PairPotential::operator()(double r) const {
  if (table_.empty() || r >= r_max_) return 0.0;
  if (r < table_.front().first) return table_.front().second;
  // Last entry with r_i <= r.
  auto it = std::upper_bound(table_.begin(), table_.end(), r,
                             [](double x, const std::pair<double, double>& e) { return x < e.first; });
  std::size_t i = static_cast<std::size_t>(it - table_.begin()) - 1;
  if (i + 1 >= table_.size()) return table_[i].second;
  auto [r0, v0] = table_[i];
  auto [r1, v1] = table_[i + 1];
  if (v0 == kInfD || v1 == kInfD) return kInfD;
  if (r1 == r0) return v1;
  return v0 + (v1 - v0) * (r - r0) / (r1 - r0);
}

double PairPotential::stability_constant(int dim) const {
  if (min_value_ >= 0.0) return 0.0;
  if (hard_core_ <= 0.0) return kInfD;
  return -min_value_ * std::pow(1.0 + 2.0 * r_max_ / hard_core_, dim);
}

// ---------------------------------------------------------------------------

const char* to_string(ProcessKind k) {
  switch (k) {
    case ProcessKind::poisson: return "poisson";
    case ProcessKind::matern_cluster: return "matern_cluster";
    case ProcessKind::matern_hardcore: return "matern_hardcore";
    case ProcessKind::gibbs: return "gibbs";
  }
  return "unknown";
}

ProcessKind process_kind_from_string(const std::string& s) {
  if (s == "poisson") return ProcessKind::poisson;
  if (s == "matern_cluster") return ProcessKind::matern_cluster;
  if (s == "matern_hardcore") return ProcessKind::matern_hardcore;
  if (s == "gibbs") return ProcessKind::gibbs;
  throw Error(Errc::invalid_spec, "unknown process '" + s + "'");
}

ProcessSpec ProcessSpec::poisson(double m) {
  ProcessSpec s;
  s.kind = ProcessKind::poisson;
  s.intensity = m;
  return s;
}

ProcessSpec ProcessSpec::matern_cluster(double kappa, double mu, double radius) {
  ProcessSpec s;
  s.kind = ProcessKind::matern_cluster;
  s.parent_intensity = kappa;
  s.mean_offspring = mu;
  s.cluster_radius = radius;
  return s;
}

ProcessSpec ProcessSpec::matern_hardcore(double lambda, double radius) {
  ProcessSpec s;
  s.kind = ProcessKind::matern_hardcore;
  s.proposal_intensity = lambda;
  s.hardcore_radius = radius;
  return s;
}

ProcessSpec ProcessSpec::gibbs_process(GibbsSettings g) {
  ProcessSpec s;
  s.kind = ProcessKind::gibbs;
  s.gibbs = std::move(g);
  return s;
}

void ProcessSpec::validate() const {
  switch (kind) {
    case ProcessKind::poisson:
      require_positive(intensity, "intensity m");
      break;
    case ProcessKind::matern_cluster:
      require_positive(parent_intensity, "parent intensity kappa");
      require_positive(mean_offspring, "mean offspring");
      require_positive(cluster_radius, "cluster radius");
      break;
    case ProcessKind::matern_hardcore:
      require_positive(proposal_intensity, "proposal intensity");
      require_positive(hardcore_radius, "hard-core radius");
      break;
    case ProcessKind::gibbs:
      require_positive(gibbs.activity, "activity z");
      if (!(gibbs.beta >= 0.0) || !std::isfinite(gibbs.beta))
        throw Error(Errc::invalid_spec, "inverse temperature must be >= 0");
      if (gibbs.burn_in_sweeps < 0 || gibbs.thinning_sweeps < 1)
        throw Error(Errc::invalid_spec, "bad sweep counts");
      if (gibbs.beta > 0.0 && !gibbs.potential.empty() &&
          !std::isfinite(gibbs.potential.stability_constant(2)))
        throw Error(Errc::rejected_spec,
                    "attractive pair potential without a hard core is not locally stable");
      break;
  }
}

double ProcessSpec::theoretical_intensity() const {
  constexpr double pi = 3.14159265358979323846;
  switch (kind) {
    case ProcessKind::poisson: return intensity;
    case ProcessKind::matern_cluster: return parent_intensity * mean_offspring;
    case ProcessKind::matern_hardcore: {
      double a = pi * hardcore_radius * hardcore_radius;  // d = 2
      return (1.0 - std::exp(-proposal_intensity * a)) / a;
    }
    case ProcessKind::gibbs:
      return gibbs.beta == 0.0 ? gibbs.activity : std::numeric_limits<double>::quiet_NaN();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------

GibbsChain::GibbsChain(const GibbsSettings& g, const Box& window, RngStream rng)
    : g_(g), window_(window), rng_(rng), state_(window.dim(), window), vol_(window.volume()) {
  step_ = g_.move_step > 0.0 ? g_.move_step : 0.1 * window.side();
  if (g_.boundary) {
    for (const auto& p : g_.boundary->points())
      if (!window_.contains_strictly(p)) boundary_.push_back(p);
  }
}

double GibbsChain::interaction(const Point& u, std::size_t skip) const {
  if (g_.beta == 0.0 || g_.potential.empty()) return 0.0;
  const double rmax = g_.potential.r_max();
  double h = 0.0;
  for (std::size_t i = 0; i < state_.size(); ++i) {
    if (i == skip) continue;
    double d = distance(u, state_[i]);
    if (d < rmax) h += g_.potential(d);
  }
  for (const auto& y : boundary_) {
    double d = distance(u, y);
    if (d < rmax) h += g_.potential(d);
  }
  return h;
}

double GibbsChain::energy() const {
  double h = 0.0;
  if (g_.potential.empty()) return 0.0;
  for (std::size_t i = 0; i < state_.size(); ++i) {
    for (std::size_t j = i + 1; j < state_.size(); ++j) h += g_.potential(distance(state_[i], state_[j]));
    for (const auto& y : boundary_) h += g_.potential(distance(state_[i], y));
  }
  return h;
}

void GibbsChain::step() {
  ++proposed_;
  const double u = rng_.uniform();
  const double n = static_cast<double>(state_.size());
  const double zV = g_.activity * vol_;
  if (u < 1.0 / 3.0) {
    Point x = uniform_in_box(window_, rng_);
    double dh = interaction(x, static_cast<std::size_t>(-1));
    double ratio = zV / (n + 1.0) * (dh == kInfD ? 0.0 : std::exp(-g_.beta * dh));
    if (rng_.uniform() < ratio) {
      state_.add(x);
      ++accepted_;
    }
  } else if (u < 2.0 / 3.0) {
    if (state_.empty()) return;
    std::size_t i = static_cast<std::size_t>(rng_.uniform() * n);
    double dh = interaction(state_[i], i);
    double ratio = n / zV * std::exp(g_.beta * dh);
    if (rng_.uniform() < ratio) {
      const std::size_t keep_out = i;
      state_ = state_.filtered([keep_out](std::size_t k) { return k != keep_out; });
      ++accepted_;
    }
  } else {
    if (state_.empty()) return;
    std::size_t i = static_cast<std::size_t>(rng_.uniform() * n);
    Point y = state_[i];
    for (int k = 0; k < y.dim(); ++k) y[k] += rng_.uniform(-step_, step_);
    if (!window_.contains(y)) return;
    double before = interaction(state_[i], i);
    double after = interaction(y, i);
    double ratio = after == kInfD ? 0.0 : std::exp(-g_.beta * (after - before));
    if (rng_.uniform() < ratio) {
      std::vector<Point> pts = state_.points();
      pts[i] = y;
      state_ = PointConfiguration(window_, std::move(pts));
      ++accepted_;
    }
  }
}

void GibbsChain::run(int sweeps) {
  const long per_sweep = std::max(1L, static_cast<long>(std::ceil(g_.activity * vol_)));
  for (int s = 0; s < sweeps; ++s)
    for (long k = 0; k < per_sweep; ++k) step();
}

double GibbsChain::acceptance_rate() const {
  return proposed_ ? static_cast<double>(accepted_) / static_cast<double>(proposed_) : 0.0;
}

// ---------------------------------------------------------------------------

PointConfiguration sample(const ProcessSpec& spec, const Box& window, RngStream& rng) {
  spec.validate();
  const int d = window.dim();
  PointConfiguration out(d, window);
  switch (spec.kind) {
    case ProcessKind::poisson: {
      for (const auto& p : poisson_points(spec.intensity, window, rng)) out.add(p);
      break;
    }
    case ProcessKind::matern_cluster: {
      Box ext = window.expanded(spec.cluster_radius);
      auto parents = poisson_points(spec.parent_intensity, ext, rng);
      std::poisson_distribution<long> kids(spec.mean_offspring);
      for (const auto& c : parents) {
        long k = kids(rng);
        for (long j = 0; j < k; ++j) {
          Point x = uniform_in_ball(c, spec.cluster_radius, rng);
          if (window.contains(x)) out.add(x);
        }
      }
      break;
    }
    case ProcessKind::matern_hardcore: {
      const double r = spec.hardcore_radius;
      Box ext = window.expanded(r);
      auto prop = poisson_points(spec.proposal_intensity, ext, rng);
      std::vector<double> mark(prop.size());
      for (auto& m : mark) m = rng.uniform();
      // Bucket grid over the enlarged window with cell side r.
      const int nc = std::max(1, static_cast<int>(std::ceil(ext.side() / r)));
      auto cell = [&](const Point& p, int k) {
        return std::clamp(static_cast<int>(std::floor((p[k] - ext.lo(k)) / r)), 0, nc - 1);
      };
      if (d != 2) throw Error(Errc::unsupported_dimension, "hard-core sampler is planar");
      std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(nc * nc));
      for (std::size_t i = 0; i < prop.size(); ++i)
        buckets[static_cast<std::size_t>(cell(prop[i], 1) * nc + cell(prop[i], 0))].push_back(i);
      for (std::size_t i = 0; i < prop.size(); ++i) {
        if (!window.contains(prop[i])) continue;
        bool keep = true;
        int cx = cell(prop[i], 0), cy = cell(prop[i], 1);
        for (int gy = std::max(0, cy - 1); gy <= std::min(nc - 1, cy + 1) && keep; ++gy)
          for (int gx = std::max(0, cx - 1); gx <= std::min(nc - 1, cx + 1) && keep; ++gx)
            for (std::size_t j : buckets[static_cast<std::size_t>(gy * nc + gx)])
              if (j != i && mark[j] < mark[i] && distance(prop[i], prop[j]) < r) {
                keep = false;
                break;
              }
        if (keep) out.add(prop[i]);
      }
      break;
    }
    case ProcessKind::gibbs: {
      RngStream chain_rng(rng(), rng.replicate(), Purpose::gibbs);
      GibbsChain chain(spec.gibbs, window, chain_rng);
      chain.run(spec.gibbs.burn_in_sweeps);
      out = chain.state();
      break;
    }
  }
  return out;
}

RootedConfiguration palm_root_slivnyak(const ProcessSpec& spec, const Box& window, RngStream& rng) {
  if (spec.kind != ProcessKind::poisson)
    throw Error(Errc::unsupported_process, "Slivnyak rooting needs a Poisson process, got " + spec.tag());
  spec.validate();
  Point o = Point::origin(window.dim());
  if (!window.contains(o)) throw Error(Errc::invalid_input, "window must contain the origin");
  RootedConfiguration rc;
  rc.config = PointConfiguration(window.dim(), window);
  rc.config.add(o);
  for (const auto& p : poisson_points(spec.intensity, window, rng))
    if (!p.is_origin()) rc.config.add(p);
  rc.root = 0;
  rc.provenance = RootProvenance::slivnyak;
  return rc;
}

CampbellSum campbell_palm_average(const PalmFunctional& F, const PointConfiguration& config,
                                  const Box& core, const DelaunayComplex* complex) {
  CampbellSum out;
  if (F.needs_complex && complex == nullptr)
    throw Error(Errc::invalid_input, "functional needs a Delaunay complex");
  const Box& w = config.window();
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (!core.contains(config[i])) continue;
    bool ok = true;
    if (F.margin > 0.0 && !w.contains(Box(config[i], F.margin))) ok = false;
    if (ok && complex != nullptr && !complex->interior_valid(i)) ok = false;
    if (!ok) {
      ++out.skipped;
      continue;
    }
    out.sum += F.f(RootedView{config, complex, i});
    ++out.count;
  }
  return out;
}

}  // namespace palmtess

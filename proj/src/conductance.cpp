#include "palmtess/conductance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace palmtess {

const char* to_string(LawKind k) {
  switch (k) {
    case LawKind::constant: return "constant";
    case LawKind::unit: return "unit";
    case LawKind::uniform: return "uniform";
    case LawKind::lognormal: return "lognormal";
    case LawKind::distance_kernel: return "distance_kernel";
  }
  return "unknown";
}

ConductanceLaw ConductanceLaw::constant(double c) {
  ConductanceLaw l;
  l.kind = LawKind::constant;
  l.p1 = c;
  l.validate();
  return l;
}

ConductanceLaw ConductanceLaw::unit() { return ConductanceLaw{}; }

ConductanceLaw ConductanceLaw::uniform(double a, double b) {
  ConductanceLaw l;
  l.kind = LawKind::uniform;
  l.p1 = a;
  l.p2 = b;
  l.validate();
  return l;
}

ConductanceLaw ConductanceLaw::lognormal(double mu, double sigma) {
  ConductanceLaw l;
  l.kind = LawKind::lognormal;
  l.p1 = mu;
  l.p2 = sigma;
  l.validate();
  return l;
}

ConductanceLaw ConductanceLaw::distance_kernel(std::vector<std::pair<double, double>> table, double spread) {
  ConductanceLaw l;
  l.kind = LawKind::distance_kernel;
  l.kernel = std::move(table);
  l.spread = spread;
  l.validate();
  return l;
}

ConductanceLaw ConductanceLaw::kernel_from_file(const std::string& path, double spread) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open kernel table " + path);
  std::vector<std::pair<double, double>> t;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream is(line);
    double r, g;
    if (is >> r >> g) t.emplace_back(r, g);
  }
  return distance_kernel(std::move(t), spread);
}

void ConductanceLaw::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  switch (kind) {
    case LawKind::unit: break;
    case LawKind::constant:
      if (!finite(p1) || p1 < 0.0) throw Error(Errc::invalid_law, "constant conductance must be >= 0");
      break;
    case LawKind::uniform:
      if (!finite(p1) || !finite(p2) || p1 < 0.0 || p2 < p1)
        throw Error(Errc::invalid_law, "uniform law needs 0 <= a <= b");
      break;
    case LawKind::lognormal:
      if (!finite(p1) || !finite(p2) || p2 < 0.0) throw Error(Errc::invalid_law, "lognormal needs sigma >= 0");
      break;
    case LawKind::distance_kernel:
      if (kernel.empty()) throw Error(Errc::invalid_law, "empty distance kernel");
      for (std::size_t i = 0; i < kernel.size(); ++i) {
        if (!finite(kernel[i].first) || !finite(kernel[i].second))
          throw Error(Errc::invalid_law, "non-finite kernel entry");
        if (kernel[i].second < 0.0) throw Error(Errc::invalid_law, "kernel values must be >= 0");
        if (i > 0 && kernel[i].first < kernel[i - 1].first)
          throw Error(Errc::invalid_law, "kernel r values must be nondecreasing");
      }
      if (!(spread >= 0.0 && spread <= 1.0)) throw Error(Errc::invalid_law, "kernel spread must be in [0,1]");
      break;
  }
}

double ConductanceLaw::kernel_at(double r) const {
  if (r <= kernel.front().first) return kernel.front().second;
  if (r >= kernel.back().first) return kernel.back().second;
  auto it = std::upper_bound(kernel.begin(), kernel.end(), r,
                             [](double x, const std::pair<double, double>& e) { return x < e.first; });
  auto [r1, g1] = *it;
  auto [r0, g0] = *(it - 1);
  if (r1 == r0) return g1;
  return g0 + (g1 - g0) * (r - r0) / (r1 - r0);
}

double ConductanceLaw::draw(double r, double u1, double u2) const {
  double c = 0.0;
  switch (kind) {
    case LawKind::unit: c = 1.0; break;
    case LawKind::constant: c = p1; break;
    case LawKind::uniform: c = p1 + (p2 - p1) * u1; break;
    case LawKind::lognormal: {
      // Box-Muller on the two keyed uniforms.
      double z = std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
      c = std::exp(p1 + p2 * z);
      break;
    }
    case LawKind::distance_kernel: c = kernel_at(r) * (1.0 - spread + 2.0 * spread * u1); break;
  }
  if (!(c >= 0.0)) throw Error(Errc::invalid_law, "conductance draw is negative or NaN");
  return c;
}

bool ConductanceLaw::admits_zero() const {
  switch (kind) {
    case LawKind::unit: return false;
    case LawKind::constant: return p1 == 0.0;
    case LawKind::uniform: return p1 == 0.0;
    case LawKind::lognormal: return false;
    case LawKind::distance_kernel:
      return spread == 1.0 ||
             std::any_of(kernel.begin(), kernel.end(), [](const auto& e) { return e.second <= 0.0; });
  }
  return true;
}

double ConductanceLaw::upper_bound() const {
  switch (kind) {
    case LawKind::unit: return 1.0;
    case LawKind::constant: return p1;
    case LawKind::uniform: return p2;
    case LawKind::lognormal:
      throw Error(Errc::unsupported_law, "lognormal conductances are unbounded");
    case LawKind::distance_kernel: {
      double g = 0.0;
      for (const auto& e : kernel) g = std::max(g, e.second);
      return g * (1.0 + spread);
    }
  }
  return std::numeric_limits<double>::infinity();
}

double ConductanceLaw::mean(double r) const {
  switch (kind) {
    case LawKind::unit: return 1.0;
    case LawKind::constant: return p1;
    case LawKind::uniform: return 0.5 * (p1 + p2);
    case LawKind::lognormal: return std::exp(p1 + 0.5 * p2 * p2);
    case LawKind::distance_kernel: return kernel_at(r);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double ConductanceField::weight(std::size_t i, std::size_t j) const {
  auto e = complex_->edge_index(i, j);
  return e ? w_[*e] : 0.0;
}

ConductanceField assign_conductances(const DelaunayComplex& complex, const ConductanceLaw& law,
                                     const RngStream& rng) {
  law.validate();
  const auto& cfg = complex.config();
  std::vector<double> w;
  w.reserve(complex.edges().size());
  for (auto [i, j] : complex.edges()) {
    std::uint64_t a = cfg.label(i), b = cfg.label(j);
    if (a > b) std::swap(a, b);
    double u1 = rng.uniform_for(a, b, 1);
    double u2 = rng.uniform_for(a, b, 2);
    w.push_back(law.draw(distance(cfg[i], cfg[j]), u1, u2));
  }
  return ConductanceField(complex, std::move(w));
}

RootedLocalStats rooted_local_stats(std::size_t root, const ConductanceField& field, double zeta) {
  const DelaunayComplex& dc = field.complex();
  if (root >= dc.size()) throw Error(Errc::invalid_input, "root index out of range");
  if (!dc.interior_valid(root))
    throw Error(Errc::boundary_contamination, "root is not interior-valid; enlarge the window");
  if (!(zeta >= 0.0)) throw Error(Errc::invalid_input, "zeta must be >= 0");
  RootedLocalStats s;
  const Point& o = dc.config()[root];
  for (std::size_t nb : dc.neighbors(root)) {
    double c = field.weight(root, nb);
    double r = distance(dc.config()[nb], o);
    ++s.degree;
    s.lambda0 += c;
    s.lambda2 += c * r * r;
    if (c > 0.0) s.nu0 += 1.0 / c;
    else s.nu_infinite = true;
    s.max_neighbor_distance = std::max(s.max_neighbor_distance, r);
    s.zeta_sum += std::pow(r, zeta);
  }
  s.mu0 = s.lambda0;
  if (s.nu_infinite) s.nu0 = std::numeric_limits<double>::infinity();
  return s;
}

RootedLocalStats rooted_local_stats(const RootedConfiguration& rooted, const ConductanceField& field,
                                    double zeta) {
  if (rooted.root >= field.complex().size() ||
      !(field.complex().config()[rooted.root] == rooted.config[rooted.root]))
    throw Error(Errc::invalid_input, "field was not built over the rooted configuration");
  return rooted_local_stats(rooted.root, field, zeta);
}

}  // namespace palmtess

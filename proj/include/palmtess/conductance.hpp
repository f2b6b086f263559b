#pragma once

#include <string>
#include <utility>
#include <vector>

#include "palmtess/delaunay.hpp"
#include "palmtess/point_process.hpp"
#include "palmtess/rng.hpp"

namespace palmtess {

enum class LawKind { constant, unit, uniform, lognormal, distance_kernel };

const char* to_string(LawKind k);

/// Law of the conductance of an edge of length r, drawn from two uniforms.
struct ConductanceLaw {
  LawKind kind = LawKind::unit;
  double p1 = 1.0;  // constant: c; uniform: a; lognormal: mu
  double p2 = 0.0;  // uniform: b; lognormal: sigma
  std::vector<std::pair<double, double>> kernel;  // distance_kernel: table r -> g(r)
  double spread = 0.0;  // distance_kernel: c = g(r) * (1 - s + 2 s U)

  static ConductanceLaw constant(double c);
  static ConductanceLaw unit();
  static ConductanceLaw uniform(double a, double b);
  static ConductanceLaw lognormal(double mu, double sigma);
  static ConductanceLaw distance_kernel(std::vector<std::pair<double, double>> table, double spread);
  static ConductanceLaw kernel_from_file(const std::string& path, double spread);

  /// Throws invalid-law on malformed parameters.
  void validate() const;
  /// c for an edge of length r given uniforms u1, u2 in [0, 1).
  double draw(double r, double u1, double u2) const;
  /// True when a zero conductance has positive probability.
  bool admits_zero() const;
  /// Almost-sure upper bound C_*; throws unsupported-law for unbounded families.
  double upper_bound() const;
  /// Conditional mean given the edge length.
  double mean(double r) const;
  double kernel_at(double r) const;
};

/// Symmetric weights on the Delaunay edges, indexed like DelaunayComplex::edges().
class ConductanceField {
 public:
  ConductanceField() = default;
  ConductanceField(const DelaunayComplex& complex, std::vector<double> weights)
      : complex_(&complex), w_(std::move(weights)) {}

  const DelaunayComplex& complex() const { return *complex_; }
  /// c_{i,j}; zero when i and j are not adjacent.
  double weight(std::size_t i, std::size_t j) const;
  double edge_weight(std::size_t e) const { return w_[e]; }
  const std::vector<double>& weights() const noexcept { return w_; }

 private:
  const DelaunayComplex* complex_ = nullptr;
  std::vector<double> w_;
};

/// One keyed draw per undirected edge, addressed by the sorted endpoint labels.
ConductanceField assign_conductances(const DelaunayComplex& complex, const ConductanceLaw& law,
                                     const RngStream& rng);

struct RootedLocalStats {
  std::size_t degree = 0;
  double lambda0 = 0.0;
  double lambda2 = 0.0;
  double mu0 = 0.0;
  double nu0 = 0.0;
  bool nu_infinite = false;
  double max_neighbor_distance = 0.0;
  double zeta_sum = 0.0;
};

/// Weighted degree statistics of point `root` over its Delaunay neighbors.
RootedLocalStats rooted_local_stats(std::size_t root, const ConductanceField& field, double zeta = 2.0);
RootedLocalStats rooted_local_stats(const RootedConfiguration& rooted, const ConductanceField& field,
                                    double zeta = 2.0);

}  // namespace palmtess

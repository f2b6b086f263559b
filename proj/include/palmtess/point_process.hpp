#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "palmtess/geometry.hpp"
#include "palmtess/rng.hpp"

namespace palmtess {

class DelaunayComplex;

/// Radial pair potential given as a table (r_i, v_i) with linear interpolation.
/// Repeated r values encode jumps (right-continuous). Beyond r_max the potential is 0.
/// A segment touching +inf is +inf on its whole half-open interval.
class PairPotential {
 public:
  PairPotential() = default;
  PairPotential(std::vector<std::pair<double, double>> table, double r_max);

  static PairPotential strauss(double energy, double range);
  static PairPotential hard_core(double radius);
  static PairPotential from_file(const std::string& path, double r_max);

  double operator()(double r) const;
  double r_max() const noexcept { return r_max_; }
  double min_value() const noexcept { return min_value_; }
  /// Largest r with v = +inf just below it (0 if there is no hard core).
  double hard_core_radius() const noexcept { return hard_core_; }
  /// Upper bound C on -sum_y v(|x - y|) over admissible configurations (local stability);
  /// +inf when no bound follows from the table.
  double stability_constant(int dim) const;
  bool empty() const noexcept { return table_.empty(); }

 private:
  std::vector<std::pair<double, double>> table_;
  double r_max_ = 0.0;
  double min_value_ = 0.0;
  double hard_core_ = 0.0;
};

enum class ProcessKind { poisson, matern_cluster, matern_hardcore, gibbs };

const char* to_string(ProcessKind k);
ProcessKind process_kind_from_string(const std::string& s);

struct GibbsSettings {
  double activity = 1.0;  // z
  double beta = 0.0;
  PairPotential potential{};
  std::optional<PointConfiguration> boundary;  // empty boundary if unset
  int burn_in_sweeps = 1000;
  int thinning_sweeps = 10;
  double move_step = 0.0;  // 0 selects a tenth of the window side
};

struct ProcessSpec {
  ProcessKind kind = ProcessKind::poisson;
  double intensity = 1.0;       // poisson m
  double parent_intensity = 0;  // matern_cluster kappa
  double mean_offspring = 0;    // matern_cluster mu
  double cluster_radius = 0;    // matern_cluster r_c
  double proposal_intensity = 0;  // matern_hardcore lambda
  double hardcore_radius = 0;     // matern_hardcore r_hc
  GibbsSettings gibbs{};

  static ProcessSpec poisson(double m);
  static ProcessSpec matern_cluster(double kappa, double mean_offspring, double radius);
  static ProcessSpec matern_hardcore(double lambda, double radius);
  static ProcessSpec gibbs_process(GibbsSettings g);

  /// Throws invalid-spec or rejected-spec.
  void validate() const;
  /// Intensity of the stationary process where it is known in closed form; NaN otherwise.
  double theoretical_intensity() const;
  std::string tag() const { return to_string(kind); }
};

/// Draws one realisation restricted to `window`. Deterministic in (spec, window, rng state).
PointConfiguration sample(const ProcessSpec& spec, const Box& window, RngStream& rng);

/// Gibbs chain that yields successive thinned states after burn-in.
class GibbsChain {
 public:
  GibbsChain(const GibbsSettings& g, const Box& window, RngStream rng);
  /// Advances `sweeps` sweeps (one sweep = max(1, ceil(z vol)) proposals).
  void run(int sweeps);
  const PointConfiguration& state() const noexcept { return state_; }
  /// Energy H(sigma | eta) of the current state.
  double energy() const;
  double acceptance_rate() const;

 private:
  double interaction(const Point& u, std::size_t skip) const;
  void step();

  GibbsSettings g_;
  Box window_;
  RngStream rng_;
  PointConfiguration state_;
  std::vector<Point> boundary_;
  double vol_;
  double step_;
  unsigned long long proposed_ = 0, accepted_ = 0;
};

enum class RootProvenance { slivnyak, campbell_shift };

/// A configuration containing the origin at index `root`.
struct RootedConfiguration {
  PointConfiguration config;
  std::size_t root = 0;
  RootProvenance provenance = RootProvenance::slivnyak;
};

/// Poisson sample on the window with the origin adjoined (the Palm version of a Poisson process).
RootedConfiguration palm_root_slivnyak(const ProcessSpec& spec, const Box& window, RngStream& rng);

/// View of a configuration seen from point `root`; coordinates relative to it realise the shift.
struct RootedView {
  const PointConfiguration& config;
  const DelaunayComplex* complex;
  std::size_t root;

  Point relative(std::size_t i) const { return config[i] - config[root]; }
};

/// A functional of the rooted configuration. `margin` is the radius around the root that the
/// functional reads; `needs_complex` requires the root to be interior-valid.
struct PalmFunctional {
  std::function<double(const RootedView&)> f;
  double margin = 0.0;
  bool needs_complex = false;
};

struct CampbellSum {
  double sum = 0.0;
  std::size_t count = 0;    // contributing points
  std::size_t skipped = 0;  // points in core rejected by the margin check
};

/// Sum of F over points of the core (seen from each point), skipping points whose
/// fundamental region or read margin leaves the window.
CampbellSum campbell_palm_average(const PalmFunctional& F, const PointConfiguration& config,
                                  const Box& core, const DelaunayComplex* complex = nullptr);

}  // namespace palmtess

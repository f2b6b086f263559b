#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "palmtess/conductance.hpp"
#include "palmtess/delaunay.hpp"
#include "palmtess/palm_moments.hpp"
#include "palmtess/point_process.hpp"
#include "palmtess/rng.hpp"

namespace palmtess {

/// {0,1} marks on the Delaunay edges, indexed like DelaunayComplex::edges().
class BondConfiguration {
 public:
  BondConfiguration() = default;
  BondConfiguration(const DelaunayComplex& complex, std::vector<unsigned char> open)
      : complex_(&complex), open_(std::move(open)) {}

  const DelaunayComplex& complex() const { return *complex_; }
  bool is_open(std::size_t i, std::size_t j) const;
  bool edge_open(std::size_t e) const { return open_[e] != 0; }
  std::size_t open_count() const;
  const std::vector<unsigned char>& marks() const noexcept { return open_; }

 private:
  const DelaunayComplex* complex_ = nullptr;
  std::vector<unsigned char> open_;
};

/// One uniform per edge, keyed by the sorted endpoint labels (shared across p).
std::vector<double> edge_uniforms(const DelaunayComplex& complex, const RngStream& rng);
/// Edge open iff U_e < p.
BondConfiguration bonds_from_uniforms(const DelaunayComplex& complex, const std::vector<double>& u, double p);
BondConfiguration sample_bonds(const DelaunayComplex& complex, double p, const RngStream& rng);

struct ClusterDecomposition {
  std::vector<std::size_t> component;  // dense ids 0..k-1
  std::vector<std::size_t> sizes;
  bool spanning = false;
  std::size_t largest = 0;
};

/// Components of the open-edge graph; spanning means one component reaches two opposite
/// faces of `core` (default: the window shrunk by 10%). With `interior_only`, edges with an
/// endpoint that is not interior-valid are ignored, so long hull edges created by the window
/// cut never join clusters.
ClusterDecomposition clusters(const DelaunayComplex& complex, const BondConfiguration& W,
                              std::optional<Box> core = std::nullopt, bool interior_only = false);

/// Euclidean diameter of each component (0 for singletons).
std::vector<double> cluster_diameters(const DelaunayComplex& complex, const ClusterDecomposition& cd);

enum class OpenVia { empty_ball, open_path, closed };
const char* to_string(OpenVia v);

struct BoxOpenResult {
  bool open = false;
  OpenVia via = OpenVia::closed;
  double max_empty_distance = 0.0;  // max of dist(y, xi) over the closure of B_{R/4}(C_x)
  bool ambiguous = false;           // that maximum lies within R/512 of R/4
};

/// Largest distance to the configuration over the closure of B_r(box); exact candidate search.
double max_distance_to_points(const DelaunayComplex& complex, const Box& box, double r);

/// Decides whether C_x = xR + [0,R]^2 is open for (xi, W).
BoxOpenResult box_open(std::array<int, 2> x, double R, const DelaunayComplex& complex,
                       const BondConfiguration& W);

struct LatticeWindow {
  int lo0 = -5, hi0 = 5, lo1 = -5, hi1 = 5;
  static LatticeWindow centered(int radius) { return {-radius, radius, -radius, radius}; }
  int width() const { return hi0 - lo0 + 1; }
  int height() const { return hi1 - lo1 + 1; }
  std::size_t count() const { return static_cast<std::size_t>(width()) * static_cast<std::size_t>(height()); }
  bool contains(int a, int b) const { return a >= lo0 && a <= hi0 && b >= lo1 && b <= hi1; }
  std::size_t index(int a, int b) const {
    return static_cast<std::size_t>(b - lo1) * static_cast<std::size_t>(width()) + static_cast<std::size_t>(a - lo0);
  }
  /// Union of the boxes C_x over the window.
  Box region(double R) const;
  /// Smallest centred geometry window covering every B_{R/2}(C_x) plus `margin`.
  Box geometry_window(double R, double margin) const;
};

struct LatticeField {
  double R = 1.0;
  LatticeWindow window{};
  std::vector<unsigned char> eta;
  bool at(int a, int b) const { return eta[window.index(a, b)] != 0; }
  std::size_t open_count() const;
  /// Nearest-neighbour components of open sites: per-site id (or -1) and sizes.
  std::vector<long> components(std::vector<std::size_t>* sizes = nullptr) const;
  /// Some open component touches two opposite sides of the lattice window.
  bool spanning() const;
};

LatticeField eta_field(const DelaunayComplex& complex, const BondConfiguration& W, double R,
                       const LatticeWindow& window = {});

struct EventsA123 {
  bool A1 = false, A2 = false, A3 = false;
  double max_empty_distance = 0.0;  // over the closure of B_{3R/4}(C_0)
  std::size_t max_degree = 0;       // over cells meeting B_{R/4}(C_0)
  std::size_t boundary_cells = 0;   // cells meeting the boundary of C_0
  bool all() const { return A1 && A2 && A3; }
};

EventsA123 check_events_A123(const DelaunayComplex& complex, double R);

/// When A1 holds: cells with nucleus in B_{5R/8}(C_0) have radius <= R/8 and every cell meeting
/// B_{R/2}(C_0) has its nucleus in B_{5R/8}(C_0).
bool small_cells_check(const DelaunayComplex& complex, double R);

struct InclusionReport {
  bool pass = true;
  bool vacuous = true;            // no component reached the diameter threshold
  double threshold = 0.0;         // D
  std::size_t large_components = 0;
};

/// Every large open component (diameter >= D) inside the lattice region is covered by open boxes
/// forming one eta-component of lattice diameter >= D/R - 2.
InclusionReport inclusion_check(const DelaunayComplex& complex, const BondConfiguration& W, double R,
                                const LatticeWindow& window, const LatticeField& eta,
                                std::optional<double> D = std::nullopt);

struct PhiRow {
  double p = 0.0;
  double R = 0.0;
  double phi = 0.0, phi_se = 0.0;
  double p_not_A = 0.0;        // P(A1^c or A2^c or A3^c)
  double bound = 0.0;          // p_not_A + 2 p R^{d+1}
  double diff = 0.0, diff_se = 0.0;  // mean of 1[open] - 1[A^c]
  bool bound_applicable = false;     // p R^{d+1} <= 1/2
  bool bound_pass = true;
  double spanning_frequency = 0.0;
  std::uint64_t n_replicates = 0;
  std::uint64_t seed = 0;
};

struct PhiReplicate {
  std::vector<unsigned char> open;      // per p
  std::vector<unsigned char> spanning;  // per p
  std::vector<std::size_t> largest;     // per p
  EventsA123 events;
};

/// phi(p, R) over a p grid with shared uniforms, plus the per-replicate indicators. Cluster
/// statistics use interior-valid edges and measure spanning on the window shrunk by a margin.
std::vector<PhiRow> estimate_phi(const ProcessSpec& spec, const std::vector<double>& p_grid, double R,
                                 const MonteCarloOptions& mc, std::vector<PhiReplicate>* per_replicate = nullptr);

/// Box for the origin-box experiments: covers B_{7R/8}(C_0) with a margin of R/4.
Box phi_window(double R);

struct SepRow {
  double t0 = 0.0;
  double keep_probability_max = 0.0;  // 1 - exp(-t0 C_*)
  double spanning_frequency = 0.0;
  double max_largest_diameter = 0.0;
  double mean_largest_size = 0.0;
  bool subcritical = false;
  std::vector<std::size_t> size_histogram;  // cluster sizes pooled over replicates, index = size
  std::uint64_t n_replicates = 0;
  std::uint64_t seed = 0;
};

/// Thinning keeps edge e with probability 1 - exp(-t0 c_e), uniforms shared across t0. The sample
/// covers the window plus a margin; clusters use interior-valid edges and spanning is measured
/// on 90% of the requested window.
std::vector<SepRow> sep_check(const ProcessSpec& spec, const ConductanceLaw& law, const std::vector<double>& t0_grid,
                              double window_half_side, const MonteCarloOptions& mc);

/// Points kept for the locality check: dist(p, C_x) < R/2.
PointConfiguration locality_restriction(const PointConfiguration& config, std::array<int, 2> x, double R);

}  // namespace palmtess

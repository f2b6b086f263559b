#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "palmtess/conductance.hpp"
#include "palmtess/delaunay.hpp"
#include "palmtess/point_process.hpp"
#include "palmtess/statistics.hpp"

namespace palmtess {

struct MonteCarloOptions {
  std::uint64_t replicates = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

/// E[count in a unit cube ^ gamma], one cube per replicate centred in the window.
EstimateReport estimate_rho_gamma(const ProcessSpec& spec, double gamma, const MonteCarloOptions& mc,
                                  double window_half_side = 1.5);

struct VoidPoint {
  double ell = 0.0;
  double frequency = 0.0;
  double std_error = 0.0;
  std::uint64_t void_events = 0;
  bool censored = false;       // fewer than 10 observed voids
  double upper_bound = 0.0;    // one-sided 95% bound when no void was observed
};

struct AlphaFit {
  std::vector<VoidPoint> points;
  double alpha = std::nan("");
  double intercept = std::nan("");
  double residual = std::nan("");
  std::size_t used_points = 0;
  bool super_polynomial = false;  // local log-log slopes steepen along the grid
  std::uint64_t n_replicates = 0;
  std::uint64_t seed = 0;
};

/// Void frequency of Lambda_ell = [-ell, ell]^d for each ell, plus a weighted log-log fit.
AlphaFit estimate_void_probability(const ProcessSpec& spec, const std::vector<double>& ell_grid,
                                   const MonteCarloOptions& mc);

struct LevelEvents {
  double beta = 2.0;
  std::vector<bool> A;          // A_n, n = 0..n_max
  std::vector<bool> truncated;  // K^n(z) left the window for some z
  std::optional<int> T_index;   // min{n : A_n}
};

/// Exact box counts for A_n = all K^n(z), z in I, occupied, with K^n(z) = Lambda_{beta^n/2}(beta^n z).
LevelEvents level_events(const RootedConfiguration& rooted, double beta, int n_max);

struct DegreeChainReport {
  bool vacuous = false;  // no n with A_n up to n_max
  int level = -1;
  std::size_t degree = 0;
  std::size_t count_in_gamma = 0;   // xi(Gamma^n) within the window
  double max_neighbor_distance = 0.0;
  double gamma_radius = 0.0;        // 6 beta^n d^2
  bool neighbors_in_region = false;
  bool region_in_gamma = false;
  bool pass = false;
};

DegreeChainReport verify_degree_chain(const RootedConfiguration& rooted, const DelaunayComplex& complex,
                                      double beta, int n_max);

enum class PalmQuantity { zeta_sum, lambda0, lambda2, deg_p, mu_p, nu_p, count };
enum class PalmRoute { slivnyak, campbell };

const char* to_string(PalmQuantity q);
PalmQuantity palm_quantity_from_string(const std::string& s);
const char* to_string(PalmRoute r);
PalmRoute palm_route_from_string(const std::string& s);

struct PalmOptions {
  double slivnyak_half_side = 5.0;
  double campbell_half_side = 8.0;
  double campbell_core_half_side = 5.0;
};

/// Palm expectation of a rooted quantity. `param` is p for the *_p tags, zeta for zeta_sum and
/// the box half-side for count.
EstimateReport estimate_palm_moment(PalmQuantity q, const ProcessSpec& spec, const ConductanceLaw& law,
                                    double param, PalmRoute route, const MonteCarloOptions& mc,
                                    const PalmOptions& opt = {});

/// Per-replicate values of the Slivnyak route (NaN marks a discarded replicate).
std::vector<double> palm_slivnyak_values(PalmQuantity q, const ProcessSpec& spec, const ConductanceLaw& law,
                                         double param, const MonteCarloOptions& mc, const PalmOptions& opt = {});

struct InequalityRow {
  int L = 1;
  double gamma = 1.0;
  double count_left = 0.0, count_right = 0.0, count_diff = 0.0, count_se = 0.0;
  bool count_pass = false;
  double palm_left = 0.0, palm_left_se = 0.0;
  double palm_right = 0.0, palm_right_se = 0.0;
  bool palm_pass = false;
};

/// Checks E[xi([0,L]^d)^g] <= L^{dg} rho_g and E_0[xi(Lambda_L)^g] <= (2L+2)^{dg} rho_{1+g} / m.
std::vector<InequalityRow> check_moment_inequalities(const ProcessSpec& spec, const std::vector<int>& L_grid,
                                                     const std::vector<double>& gamma_grid,
                                                     const MonteCarloOptions& mc);

}  // namespace palmtess

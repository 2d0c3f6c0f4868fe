#pragma once

#include "crystal_heat/covariance.hpp"
#include "crystal_heat/model.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace crystal_heat {

/// Linear map from imposed to kinetic temperatures, V_ii = sum_j M_ij T_j.
struct KineticMap {
  Matrix m;
  double q_norm = 0.0;  ///< ||P_W M P_W||, W = {x_1 = x_N = 0}
  double c_g = 0.0;     ///< constant with G(x, y) <= c_g / 2 on [-1, 1]^2
};

/// 2 * max G over a 401 x 401 grid of [-1, 1]^2, times 1.01.
double g_upper_constant(const ChainParams& params);

/// Builds M for uniform coupling and checks that it is symmetric,
/// non-negative, doubly stochastic and contracting on W.
KineticMap kinetic_map(const ChainParams& params);

/// Same checks for an externally assembled M (e.g. a transverse-mode average).
KineticMap make_kinetic_map(Matrix m, double c_g);

/// Spectral norm of M restricted to the interior sites.
double contraction_norm(const KineticMap& map);

/// x^T (I - M) x - ||D x||^2 / c_G; non-negative for every x.
double quadratic_form_margin(const KineticMap& map, const Vector& x);

enum class SolveMethod { neumann, direct, fixed_point };

std::string_view method_name(SolveMethod m);

struct SelfConsistentSolution {
  TemperatureProfile profile;
  SolveMethod method = SolveMethod::direct;
  int iterations = 0;
  double residual = 0.0;      ///< max |T_i - V_ii| over coupled interior sites
  std::vector<bool> coupled;  ///< false where lambda_i = 0
};

struct SolverOptions {
  /// Neumann: stop once the a-posteriori error bound increment * q / (1 - q)
  /// falls below this.
  double increment_tolerance = 1e-12;
  /// Residual the solution must reach; defaults per method when empty.
  std::optional<double> residual_tolerance;
  int max_iterations = 10'000'000;
  /// Initial full profile for iterative methods (boundary entries ignored).
  std::optional<Vector> initial;
};

SelfConsistentSolution solve_profile(const KineticMap& map, double t_left,
                                     double t_right, SolveMethod method,
                                     const SolverOptions& options = {});

SelfConsistentSolution solve_profile(const ChainParams& params, double t_left,
                                     double t_right, SolveMethod method,
                                     const SolverOptions& options = {});

// --- general (non-uniform / lattice) self-consistency ----------------------

struct LatticeProblem {
  Matrix phi;                       ///< force matrix
  Vector lambdas;                   ///< per-site couplings
  std::vector<int> left_sites;      ///< held at t_left (0-based)
  std::vector<int> right_sites;     ///< held at t_right (0-based)
};

struct LatticeSolution {
  Vector temps;  ///< reservoir temperatures; uncoupled sites carry the kinetic temperature
  CovarianceBlocks covariance;
  std::vector<bool> coupled;
  int iterations = 0;
  double residual = 0.0;
};

struct FixedPointOptions {
  double tolerance = 1e-9;
  int max_iterations = 10'000;
  double initial_damping = 0.5;
};

/// Solves T_i = V_ii at every coupled non-boundary site. SolveMethod::direct
/// assembles the temperature response by unit-reservoir Lyapunov solves and
/// solves the linear system; SolveMethod::fixed_point iterates
/// T <- T + theta (V - T) with damping halved on oscillation.
LatticeSolution solve_lattice(const LatticeProblem& problem, double t_left,
                              double t_right, SolveMethod method,
                              const FixedPointOptions& options = {});

struct GeneralSolution {
  SelfConsistentSolution solution;
  CovarianceBlocks covariance;
};

/// Chain with per-site couplings; uncoupled sites are reported by linear
/// interpolation between the nearest coupled sites.
GeneralSolution solve_profile_general(const ChainParams& params,
                                      const CouplingProfile& couplings,
                                      double t_left, double t_right,
                                      SolveMethod method = SolveMethod::direct,
                                      const FixedPointOptions& options = {});

/// Largest max - min of the reported profile over any maximal run of
/// consecutive uncoupled sites; 0 when there is none.
double uncoupled_stretch_spread(const SelfConsistentSolution& solution);

/// Transverse-mode average (1/N') sum_k M(k), k over all transverse wavevectors.
KineticMap kinetic_map_highdim(const ChainParams& params,
                               std::span<const int> n_transverse);

SelfConsistentSolution solve_profile_highdim(const ChainParams& params,
                                             std::span<const int> n_transverse,
                                             double t_left, double t_right,
                                             SolveMethod method = SolveMethod::direct);

}  // namespace crystal_heat

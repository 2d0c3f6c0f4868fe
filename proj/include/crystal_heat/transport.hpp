#pragma once

#include "crystal_heat/covariance.hpp"
#include "crystal_heat/model.hpp"
#include "crystal_heat/selfconsistency.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace crystal_heat {

enum class KappaRoute { closed_form, integral, finite_n_extrapolation, green_kubo, mode_average };

std::string_view route_name(KappaRoute r);

struct KappaResult {
  double kappa = 0.0;
  double nu2 = 0.0;
  KappaRoute route = KappaRoute::closed_form;
};

/// kappa = omega^2/lambda / (2 + nu^2 + sqrt(nu^2 (4 + nu^2))).
KappaResult kappa_closed_form(const ChainParams& params);

/// (omega^2/lambda) int_0^1 sin^2(pi x) / (nu^2 + 4 sin^2(pi x / 2)) dx.
KappaResult kappa_integral(const ChainParams& params);

/// The same integrand over [lo, hi], relative tolerance 1e-12.
double kappa_integrand_integral(double nu2, double lo, double hi);

/// Large-N limit of (Phi^{-1})_11.
double phi_inverse_11_limit(const ChainParams& params);

/// Bond currents J_i = omega^2 Z_{i,i+1}, i = 1..N-1. Cross-checked against
/// (lambda_i + lambda_{i+1}) Z_{i,i+1} = omega^2 (U_ii + U_{i,i+2} - U_{i-1,i+1} - U_{i+1,i+1}).
std::vector<double> currents_from_covariance(const CovarianceBlocks& s,
                                             const ChainParams& params);
std::vector<double> currents_from_covariance(const CovarianceBlocks& s,
                                             const ChainParams& params,
                                             const CouplingProfile& couplings);

/// Bond currents from the U block alone.
std::vector<double> currents_from_positions(const CovarianceBlocks& s,
                                            const ChainParams& params,
                                            const CouplingProfile& couplings);

/// R_i = lambda_i (T_i - V_ii); the sum vanishes in any stationary state.
std::vector<double> reservoir_fluxes(const CovarianceBlocks& s,
                                     const TemperatureProfile& temps,
                                     const CouplingProfile& couplings);

struct TransportReport {
  std::vector<double> currents;
  std::vector<double> reservoir_fluxes;
  std::vector<double> temperatures;
  double j_n = 0.0;
  double current_spread = 0.0;
  double epsilon_n = 0.0;
  double kappa_estimate = 0.0;  ///< (N-1) J / (T_L - T_R); 0 at equilibrium
  double linearity_residual = 0.0;
};

/// Full report for a uniform-coupling self-consistent state.
TransportReport transport_report(const ChainParams& params,
                                 const SelfConsistentSolution& solution,
                                 const CovarianceBlocks& s);

struct ConductivityRow {
  int n = 0;
  double j_n = 0.0;
  double kappa_estimate = 0.0;  ///< (N-1) J / (T_L - T_R)
  double kappa_u_route = 0.0;   ///< (omega^4/2 lambda)(U_11 - U_NN) / (T_L - T_R)
  double epsilon_n = 0.0;
  double bound = 0.0;
  double linearity_residual = 0.0;
};

struct ConductivityScan {
  std::vector<ConductivityRow> rows;
  double extrapolated = 0.0;
  double order = 0.0;  ///< empirical order of the finite-size correction
  double target = 0.0;
};

/// Self-consistent solve at each N, current and U_11 - U_NN routes
/// (must agree to 1e-9), and Richardson extrapolation in 1/N.
ConductivityScan finite_n_conductivity(const ChainParams& params, double t_left,
                                       double t_right, std::span<const int> n_values);

struct EpsilonBound {
  double epsilon_n = 0.0;
  double j_n = 0.0;    ///< lambda (T_L - (M T)_1)
  double bound = 0.0;  ///< sqrt(c_G / lambda (T_L - T_R) J)
  double ratio = 0.0;  ///< epsilon_n / bound, 0 when both vanish
};

EpsilonBound epsilon_and_bounds(const SelfConsistentSolution& solution,
                                const KineticMap& map, const ChainParams& params);

/// Fitted p in epsilon_N ~ N^{-p}.
double epsilon_decay_exponent(std::span<const int> n_values,
                              std::span<const double> epsilons);

struct LinearityReport {
  double residual = 0.0;           ///< max_j |T_j - linear interpolant|
  double identity_residual = 0.0;  ///< max_j |Phi^-1_{j-1,j+1} - Phi^-1_jj + Phi^-1_11|
};

LinearityReport profile_linearity(const SelfConsistentSolution& solution,
                                  const ChainParams& params);

struct NonuniformReport {
  GeneralSolution state;
  double j_n = 0.0;
  double lambda_bar = 0.0;
  double kappa_bar = 0.0;          ///< (N-1) J / (T_L - T_R)
  double identity_residual = 0.0;  ///< |2(N-1) lambda_bar J / omega^4 - (U_11 - U_NN)|
  double current_spread = 0.0;
  std::vector<double> staircase;   ///< Lambda(i/N) = (1/N) sum_{k<=i} lambda_k
  std::vector<double> predicted;   ///< T_L - (T_L - T_R) Lambda(x)/Lambda(1)
  double profile_deviation = 0.0;  ///< max over coupled sites |T_i - predicted_i|
};

NonuniformReport nonuniform_transport(const ChainParams& params,
                                      const CouplingProfile& couplings,
                                      double t_left, double t_right);

}  // namespace crystal_heat

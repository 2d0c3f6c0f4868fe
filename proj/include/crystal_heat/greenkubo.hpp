#pragma once

#include "crystal_heat/covariance.hpp"
#include "crystal_heat/model.hpp"
#include "crystal_heat/transport.hpp"

#include <span>
#include <utility>
#include <vector>

namespace crystal_heat {

/// g_N(t) = (1/2(N+1)) Tr[Kc exp(-tA) E Kc E exp(-tA^T)] with
/// Kc = [[0, K^T], [K, 0]] and E = diag(Phi^{-1}, I), evaluated mode by
/// mode in the sine basis; g_N(-t) = g_N(t).
double correlation_g(const ChainParams& params, double t);

/// Same trace with dense 2N x 2N matrices and a supplied exp(-tA).
double correlation_g_dense(const ChainParams& params, const Matrix& propagator);

/// Bound (Tr I / 2(N+1)) ||exp(-tA)||^2 ||Kc||^2 ||E||^2 using the
/// per-mode envelope for ||exp(-tA)||.
double correlation_envelope(const ChainParams& params, double t);

/// antisym(F^T K F) = (K~ - K~^T)/2.
Matrix k_tilde_minus_product(int n);

/// Explicit form: -(2/(N+1)) [k-l odd] s_k s_l / (sin(pi(k-l)/2(N+1)) sin(pi(k+l)/2(N+1))).
Matrix k_tilde_minus_explicit(int n);

struct GkQuadrature {
  double kappa = 0.0;
  double error = 0.0;       ///< quadrature error estimate plus tail bound
  double tail_bound = 0.0;  ///< analytic bound on the omitted [t_max, inf) part
  double t_max = 0.0;
};

/// (omega^4/4) int_0^t_max g_N(t) dt with t_max = 40 / decay floor.
GkQuadrature kappa_gk_quadrature(const ChainParams& params, double rel_tol = 1e-10);

struct GkLyapunov {
  double kappa = 0.0;            ///< (omega^4/8)(1/(N+1)) Tr[Kc S']
  double trace_full = 0.0;       ///< Tr[Kc S']
  double trace_tilde = 0.0;      ///< 2 Tr[K~_- Z~']
  double z_antisymmetry = 0.0;   ///< max |Z~' + Z~'^T|
  double z_formula_error = 0.0;  ///< max |Z~' + (lambda/omega^4) K~_- / G|
};

/// Auxiliary Lyapunov solve with noise blocks b = Phi^{-1} K^T, d = 0.
GkLyapunov kappa_gk_lyapunov(const ChainParams& params);

/// (lambda / 4(N+1)) sum_{k,l} (K~_-)_{kl}^2 / G(c_k, c_l).
double kappa_gk_spectral(const ChainParams& params);

struct GreenKuboReport {
  int n = 0;
  double kappa_gk_lyapunov = 0.0;
  double kappa_gk_spectral = 0.0;
  double kappa_gk_quadrature = 0.0;
  double quadrature_error = 0.0;
  double kappa_target = 0.0;
  double max_route_gap = 0.0;
  std::vector<std::pair<double, double>> g_samples;
};

GreenKuboReport green_kubo_report(const ChainParams& params,
                                  std::span<const double> t_samples);

struct GkExtrapolation {
  std::vector<int> n_values;
  std::vector<double> values;  ///< spectral route per N
  KappaResult extrapolated;
};

GkExtrapolation kappa_gk_extrapolate(const ChainParams& params,
                                     std::span<const int> n_values);

}  // namespace crystal_heat

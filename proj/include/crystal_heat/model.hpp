#pragma once

#include "crystal_heat/numerics.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace crystal_heat {

inline constexpr int kDefaultMaxSites = 2000;

/// Physical parameters of a pinned harmonic chain with N sites:
/// nearest-neighbour frequency omega, pinning frequency gamma and
/// uniform bath coupling lambda.
class ChainParams {
 public:
  ChainParams(double omega, double gamma, double lambda, int n,
              int max_sites = kDefaultMaxSites);

  double omega() const noexcept { return omega_; }
  double gamma() const noexcept { return gamma_; }
  double lambda() const noexcept { return lambda_; }
  int n() const noexcept { return n_; }
  /// gamma^2 / omega^2
  double nu2() const noexcept { return nu2_; }

  ChainParams with_n(int n) const;
  ChainParams with_lambda(double lambda) const;
  ChainParams with_omega(double omega) const;
  /// Same omega, lambda and N with the pinning shifted so that nu^2 = nu2.
  ChainParams with_nu2(double nu2) const;

  /// min{lambda/2, gamma^2/lambda}; the uniform decay floor of exp(-tA).
  double decay_floor() const;

 private:
  double omega_;
  double gamma_;
  double lambda_;
  int n_;
  int max_sites_;
  double nu2_;
};

/// Per-site bath couplings lambda_i (at least one positive).
class CouplingProfile {
 public:
  explicit CouplingProfile(std::vector<double> lambdas);

  static CouplingProfile uniform(double lambda, int n);
  /// lambda at sites 1, 1+m, 1+2m, ... (1-based), zero elsewhere.
  static CouplingProfile every_m(double lambda, int m, int n);

  const std::vector<double>& lambdas() const noexcept { return lambdas_; }
  double operator[](std::size_t i) const { return lambdas_[i]; }
  int size() const noexcept { return static_cast<int>(lambdas_.size()); }
  bool is_uniform() const noexcept;
  Vector as_vector() const;

 private:
  std::vector<double> lambdas_;
};

/// Reservoir temperatures T_i; the end points are the boundary temperatures.
class TemperatureProfile {
 public:
  explicit TemperatureProfile(std::vector<double> temps);

  static TemperatureProfile uniform(double t, int n);
  static TemperatureProfile linear(double t_left, double t_right, int n);

  const std::vector<double>& temps() const noexcept { return temps_; }
  double operator[](std::size_t i) const { return temps_[i]; }
  int size() const noexcept { return static_cast<int>(temps_.size()); }
  double t_left() const { return temps_.front(); }
  double t_right() const { return temps_.back(); }
  Vector as_vector() const;

  /// max_i |T_i - T_{i+1}|
  double max_jump() const;

 private:
  std::vector<double> temps_;
};

/// Sine eigenbasis of the pinned Dirichlet chain.
struct SpectralData {
  Matrix f;   ///< F_kl = sqrt(2/(N+1)) sin(pi k l/(N+1)); symmetric, orthogonal
  Vector mu;  ///< eigenvalues of Phi, increasing
  Vector c;   ///< c_k = cos(pi k/(N+1))
};

/// Phi = omega^2 (-Laplacian_Dirichlet + nu^2 I).
Matrix build_phi(const ChainParams& params);

SpectralData spectral_data(const ChainParams& params);

/// A = [[0, -I], [Phi, diag(lambda_i)]].
Matrix build_drift(const ChainParams& params, const CouplingProfile& couplings);

/// Sigma^2 with lower-right block diag(2 lambda_i T_i).
Matrix build_noise(const CouplingProfile& couplings,
                   const TemperatureProfile& temps);

/// Current matrix K with p^T K q = sum_i (q_i - q_{i+1})(p_i + p_{i+1}).
Matrix build_current_matrix(int n);

/// exp(-t A_k) for the single-mode drift A_k = [[0,-1],[mu,lambda]].
Eigen::Matrix2d mode_propagator(double mu, double lambda, double t);

/// exp(-tA) for uniform couplings, assembled from the per-mode closed forms
/// in the sine basis.
Matrix propagator_matrix(const ChainParams& params, double t);

/// ||exp(-tA)|| = max_k ||exp(-t A_k)|| for uniform couplings.
double propagator_norm(const ChainParams& params, double t);

struct PropagatorBoundRow {
  double t = 0.0;
  double norm = 0.0;      ///< ||exp(-tA)||
  double envelope = 0.0;  ///< exp(-t a) [1 + t(1 + gamma^2 + 4 omega^2 + lambda/2)]
  bool holds = false;
};

struct PropagatorBoundReport {
  double decay_floor = 0.0;
  std::vector<PropagatorBoundRow> rows;
  bool all_hold() const;
};

PropagatorBoundReport propagator_bound_report(const ChainParams& params,
                                              std::span<const double> t_grid);

}  // namespace crystal_heat

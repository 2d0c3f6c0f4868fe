#pragma once

#include "crystal_heat/model.hpp"
#include "crystal_heat/numerics.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string_view>
#include <vector>

namespace crystal_heat {

enum class Block { u, v, z };

std::string_view block_name(Block b);

/// Position-position (U), momentum-momentum (V) and cross (Z) blocks of a
/// 2N x 2N covariance S = [[U, Z], [Z^T, V]].
struct CovarianceBlocks {
  Matrix u;
  Matrix v;
  Matrix z;

  int n() const { return static_cast<int>(u.rows()); }
  Matrix full() const;
  static CovarianceBlocks from_full(const Matrix& s);

  const Matrix& block(Block which) const;
};

/// G(x,y) = (x-y)^2 + lambda^2/omega^2 (nu^2 + 2 - x - y) on [-1,1]^2.
double g_function(double x, double y, const ChainParams& params);

/// Kernel f^(B)(x, y) of the closed-form covariance.
double f_block(Block block, double x, double y, const ChainParams& params);

// --- Lyapunov equations --------------------------------------------------

/// Solves A S + S A^T = C for a fixed stable A by the Bartels-Stewart
/// method on the complex Schur form. The factorization is reused across
/// right-hand sides.
class LyapunovSolver {
 public:
  /// Throws unstable_drift_error if min Re(eig A) <= stability_tol.
  explicit LyapunovSolver(const Matrix& a, double stability_tol = 1e-12);

  Matrix solve(const Matrix& c) const;

  const Eigen::VectorXcd& eigenvalues() const noexcept { return eigenvalues_; }
  double min_real_eigenvalue() const;

 private:
  Matrix a_;
  Eigen::MatrixXcd q_;
  Eigen::MatrixXcd t_;
  Eigen::VectorXcd eigenvalues_;
};

/// Unique S with a S + S a^T = sigma2 for stable a.
Matrix lyapunov_dense(const Matrix& a, const Matrix& sigma2);

/// Spectral norm of a S + S a^T - sigma2 (symmetric part; any asymmetry is
/// added in Frobenius norm, so the value is an upper bound).
double lyapunov_residual(const Matrix& a, const Matrix& s, const Matrix& sigma2);

// --- closed forms -----------------------------------------------------------

/// Stationary covariance for uniform coupling params.lambda() > 0 and an
/// arbitrary temperature profile, from the sine-basis spectral sums.
CovarianceBlocks covariance_closed_form(const ChainParams& params,
                                        const TemperatureProfile& temps);

/// Stationary solution for the noise [[0, b], [b^T, 2 lambda d]] with uniform
/// coupling, from the mode-basis formulas. Also returns the tilde (mode
/// basis) blocks when requested.
CovarianceBlocks lyapunov_spectral_general(const ChainParams& params,
                                           const Matrix& b, const Matrix& d,
                                           CovarianceBlocks* tilde = nullptr);

/// Gibbs covariance T * diag(Phi^{-1}, I).
CovarianceBlocks equilibrium_covariance(const ChainParams& params, double t);

/// Throws numerical_error if the blocks violate Z = -Z^T, PSD of U and V,
/// or the Lyapunov residual bound rel_tol * ||sigma2||.
void check_stationary(const CovarianceBlocks& s, const Matrix& a,
                      const Matrix& sigma2, double rel_tol = 1e-8);

// --- folded Fourier coefficients and correlation decay ----------------------

/// Coefficients fhat_N(m, n) of f^(B)(cos x, cos y), folded with period
/// 2(N+1), stored for m, n in {-N, ..., N+1}.
class FoldedCoefficients {
 public:
  FoldedCoefficients(Block block, int n, Matrix values, int resolution_log2,
                     double residual);

  Block block() const noexcept { return block_; }
  int n() const noexcept { return n_; }
  int resolution_log2() const noexcept { return resolution_log2_; }
  /// Max |B^(r)_ij(reconstructed) - B^(r)_ij(direct)| over the checked set.
  double residual() const noexcept { return residual_; }

  /// Representative of m modulo 2(N+1) in {-N, ..., N+1}.
  int reduce(int m) const;
  double operator()(int m, int n) const;

  /// B^(r)_ij from the four-term combination; indices are 1-based.
  double reconstruct(int i, int j, int r) const;

 private:
  Block block_;
  int n_;
  Matrix values_;  // (2N+2) x (2N+2), offset N
  int resolution_log2_;
  double residual_;
};

FoldedCoefficients folded_coefficients(Block block, const ChainParams& params);

/// B^(r) = F (f o (F_r F_r^T)) F^T for one reservoir r (1-based).
Matrix unit_response_direct(Block block, const ChainParams& params,
                            const SpectralData& sd, int r);

struct DecayEstimate {
  double a = 0.0;        ///< prefactor making the bound hold on the grid
  double alpha = 0.0;    ///< fitted decay rate
  double a_prime = 0.0;  ///< max_{ij} sum_r |i-r| |B^(r)_ij|
  Block block = Block::u;
};

DecayEstimate decay_estimate(Block block, const ChainParams& params);

struct LocalEquilibriumDeviation {
  double deviation = 0.0;  ///< max over blocks, i, j of |B_ij - T_i B^(eq,1)_ij|
  double epsilon_n = 0.0;  ///< max nearest-neighbour temperature jump
};

LocalEquilibriumDeviation local_equilibrium_deviation(
    const CovarianceBlocks& s, const TemperatureProfile& temps,
    const ChainParams& params);

}  // namespace crystal_heat

#pragma once

#include "crystal_heat/model.hpp"
#include "crystal_heat/selfconsistency.hpp"
#include "crystal_heat/transport.hpp"

#include <span>
#include <vector>

namespace crystal_heat {

inline constexpr int kDefaultOracleCap = 4096;

/// Lattice with N sites along the Dirichlet direction and periodic
/// transverse sizes N', N'', ...
class LatticeSpec {
 public:
  LatticeSpec(ChainParams params, std::vector<int> n_transverse,
              int oracle_cap = kDefaultOracleCap);

  const ChainParams& params() const noexcept { return params_; }
  int n_long() const noexcept { return params_.n(); }
  const std::vector<int>& n_transverse() const noexcept { return n_transverse_; }
  int transverse_count() const;
  int total_sites() const { return n_long() * transverse_count(); }
  int oracle_cap() const noexcept { return oracle_cap_; }

 private:
  ChainParams params_;
  std::vector<int> n_transverse_;
  int oracle_cap_;
};

/// Distinct shifted pinning values nu(k)^2 = nu^2 + 2 sum_i (1 - cos(2 pi k_i / N_i)),
/// with k and N_i - k merged into one entry of multiplicity 2.
struct ModeSet {
  std::vector<double> nus2;
  std::vector<int> multiplicity;
  int total() const;
};

ModeSet transverse_modes(double nu2, std::span<const int> n_transverse);
ModeSet mode_set(const LatticeSpec& spec);

/// Multiplicity-weighted mean of the per-mode closed-form kappa.
KappaResult kappa_highdim_sum(const LatticeSpec& spec);

/// Tensor periodic trapezoid over [0,1]^{d-1}, refined until two
/// successive grids agree to 1e-10 relative; d <= 4.
double kappa_highdim_tensor(const ChainParams& params, int d);

/// d <= 4: tensor route, cross-checked against the one-dimensional
/// representation to 1e-7; d > 4: one-dimensional representation only.
KappaResult kappa_highdim_integral(const ChainParams& params, int d);

struct InnerIntegrals {
  double i0 = 0.0;  ///< int_0^1 exp(-4 t sin^2(pi y)) dy
  double i1 = 0.0;  ///< int_0^1 sin^2(2 pi y) exp(-4 t sin^2(pi y)) dy
};

InnerIntegrals inner_integrals(double t);

/// I = int_0^inf exp(-t nu^2) I1(t) I0(t)^{d-1} dt, so that kappa = (omega^2/lambda) I.
double appendix_c_representation(const ChainParams& params, int d);

struct AsymptoticRow {
  int d = 0;
  double d_i = 0.0;
  double error = 0.0;  ///< |d I - 1/4|
};

std::vector<AsymptoticRow> asymptotic_check(const ChainParams& params,
                                            std::span<const int> d_values);

/// Checks I0(t) <= 1/sqrt(1+t) on the given t values; returns the largest
/// I0(t) sqrt(1+t).
double inner_bound_ratio(std::span<const double> t_values);

struct FullLatticeResult {
  Matrix temperatures;         ///< N x N' (coupled sites: reservoir, uncoupled: kinetic)
  Matrix longitudinal;         ///< (N-1) x N', omega^2 Z_{(i,j),(i+1,j)}
  Matrix transverse;           ///< N x N', omega^2 Z_{(i,j),(i,j+1 mod N')}
  std::vector<double> mode_current;  ///< (1/N') sum_k omega^2 Z^(k)_{i,i+1} at the lattice profile
  double longitudinal_mismatch = 0.0;  ///< max |J1_{i,j} - mode_current_i|
  double transverse_max = 0.0;
  double transverse_spread = 0.0;      ///< max_i (max_j T_ij - min_j T_ij)
  double residual = 0.0;
};

/// Direct self-consistent solve of the full two-dimensional lattice
/// (sites ordered i * N' + j, i longitudinal).
FullLatticeResult full_lattice_oracle(const LatticeSpec& spec, double t_left,
                                      double t_right,
                                      SolveMethod method = SolveMethod::direct);

}  // namespace crystal_heat

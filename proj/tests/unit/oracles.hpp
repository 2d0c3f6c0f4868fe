#pragma once

// Independent reference computations used only by the tests.

#include "crystal_heat/covariance.hpp"
#include "crystal_heat/model.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <random>

namespace oracle {

using crystal_heat::Matrix;
using crystal_heat::Vector;

/// Solves a S + S a^T = c through the n^2 x n^2 Kronecker system.
inline Matrix lyapunov_kronecker(const Matrix& a, const Matrix& c) {
  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  Matrix k = Matrix::Zero(n * n, n * n);
  // column-major vec: vec(aS) = (I kron a) vec S, vec(S a^T) = (a kron I) vec S
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) += id(i, j) * a + a(i, j) * id;
    }
  }
  const Vector rhs = Eigen::Map<const Vector>(c.data(), n * n);
  const Vector s = k.partialPivLu().solve(rhs);
  return Eigen::Map<const Matrix>(s.data(), n, n);
}

inline Matrix expm(const Matrix& m) { return m.exp(); }

/// int_0^tmax exp(-tA) c exp(-tA^T) dt by composite Simpson with step h,
/// using exact exp(-hA) powers.
inline Matrix lyapunov_time_quadrature(const Matrix& a, const Matrix& c, double tmax, double h) {
  const long steps = 2 * static_cast<long>(std::ceil(tmax / (2 * h)));
  const Matrix step = expm(-h * a);
  Matrix p = Matrix::Identity(a.rows(), a.cols());
  Matrix sum = Matrix::Zero(a.rows(), a.cols());
  for (long k = 0; k <= steps; ++k) {
    const double w = (k == 0 || k == steps) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    sum += w * p * c * p.transpose();
    p = step * p;
  }
  return sum * h / 3.0;
}

/// M_ij = V_ii for the reservoir at j alone at unit temperature, by dense solves.
inline Matrix kinetic_map_naive(const crystal_heat::ChainParams& p) {
  const int n = p.n();
  const auto couplings = crystal_heat::CouplingProfile::uniform(p.lambda(), n);
  const Matrix a = crystal_heat::build_drift(p, couplings);
  Matrix m(n, n);
  for (int j = 0; j < n; ++j) {
    std::vector<double> t(static_cast<std::size_t>(n), 0.0);
    t[static_cast<std::size_t>(j)] = 1.0;
    const Matrix s = lyapunov_kronecker(a, crystal_heat::build_noise(couplings, crystal_heat::TemperatureProfile(t)));
    for (int i = 0; i < n; ++i) m(i, j) = s(n + i, n + i);
  }
  return m;
}

inline std::vector<double> random_temps(int n, double lo, double hi, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> t(static_cast<std::size_t>(n));
  for (auto& x : t) x = u(rng);
  return t;
}

inline Matrix random_matrix(int r, int c, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

}  // namespace oracle

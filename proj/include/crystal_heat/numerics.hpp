#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace crystal_heat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// Largest absolute entry.
double max_abs(const Matrix& m);

/// Antisymmetric part (m - m^T) / 2.
Matrix antisymmetric_part(const Matrix& m);

/// Symmetric part (m + m^T) / 2.
Matrix symmetric_part(const Matrix& m);

/// Smallest eigenvalue of the symmetric part of m.
double min_symmetric_eigenvalue(const Matrix& m);

/// True when the symmetric matrix has no eigenvalue below
/// -rel_tol * max(|trace|, scale_floor).
bool is_positive_semidefinite(const Matrix& m, double rel_tol = 1e-10);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Richardson extrapolation of values sampled at sizes n_values, assuming
/// value(N) = limit + sum_{k=1}^{m-1} c_k / N^k where m is the number of
/// samples used (the last `points` entries).
double richardson_extrapolate(std::span<const int> n_values,
                              std::span<const double> values, int points = 3);

/// Empirical order p of the leading correction c / N^p estimated from the
/// last three samples (assumes geometric spacing of N).
double richardson_order(std::span<const int> n_values,
                        std::span<const double> values);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod integration of f over [a, b]. Throws
/// numerical_error when the error estimate exceeds max(abs_tol, rel_tol*|I|).
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double rel_tol,
                                    double abs_tol = 0.0);

}  // namespace crystal_heat

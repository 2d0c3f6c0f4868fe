#include "crystal_heat/numerics.hpp"

#include "crystal_heat/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>

namespace crystal_heat {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

Matrix antisymmetric_part(const Matrix& m) {
  return 0.5 * (m - m.transpose());
}

Matrix symmetric_part(const Matrix& m) {
  return 0.5 * (m + m.transpose());
}

double min_symmetric_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric_part(m),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool is_positive_semidefinite(const Matrix& m, double rel_tol) {
  const double scale = std::max(std::abs(m.trace()), max_abs(m));
  if (scale == 0.0) return true;
  return min_symmetric_eigenvalue(m) >= -rel_tol * scale;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw validation_error("fit_line needs at least two matching samples");
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw validation_error("fit_line: degenerate abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

double richardson_extrapolate(std::span<const int> n_values,
                              std::span<const double> values, int points) {
  if (n_values.size() != values.size() || points < 1 ||
      n_values.size() < static_cast<std::size_t>(points)) {
    throw validation_error("richardson_extrapolate: not enough samples");
  }
  const std::size_t first = n_values.size() - static_cast<std::size_t>(points);
  Matrix system(points, points);
  Vector rhs(points);
  for (int row = 0; row < points; ++row) {
    const double h = 1.0 / n_values[first + row];
    for (int col = 0; col < points; ++col) system(row, col) = std::pow(h, col);
    rhs(row) = values[first + row];
  }
  const Vector coeffs = system.fullPivLu().solve(rhs);
  return coeffs(0);
}

double richardson_order(std::span<const int> n_values,
                        std::span<const double> values) {
  const std::size_t k = values.size();
  if (k < 3 || n_values.size() != k) {
    throw validation_error("richardson_order: need at least three samples");
  }
  const double d1 = values[k - 2] - values[k - 3];
  const double d2 = values[k - 1] - values[k - 2];
  const double ratio = static_cast<double>(n_values[k - 1]) / n_values[k - 2];
  if (d2 == 0.0 || d1 == 0.0) return 0.0;
  return std::log(std::abs(d1 / d2)) / std::log(ratio);
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double rel_tol,
                                    double abs_tol) {
  using boost::math::quadrature::gauss_kronrod;
  QuadratureResult out;
  double l1 = 0.0;
  out.value =
      gauss_kronrod<double, 61>::integrate(f, a, b, 30, rel_tol, &out.error, &l1);
  const double allowed =
      std::max({abs_tol, rel_tol * std::abs(out.value), 1e-15 * l1});
  if (!std::isfinite(out.value) || out.error > allowed) {
    throw numerical_error("adaptive quadrature failed to converge: error " +
                          std::to_string(out.error) + " > " +
                          std::to_string(allowed));
  }
  return out;
}

}  // namespace crystal_heat

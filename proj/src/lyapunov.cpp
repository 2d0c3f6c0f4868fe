#include "crystal_heat/covariance.hpp"
#include "crystal_heat/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace crystal_heat {

LyapunovSolver::LyapunovSolver(const Matrix& a, double stability_tol) : a_(a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw validation_error("Lyapunov drift must be a non-empty square matrix");
  }
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(a.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) {
    throw numerical_error("Schur decomposition of the drift failed");
  }
  q_ = schur.matrixU();
  t_ = schur.matrixT();
  eigenvalues_ = t_.diagonal();
  const double min_re = min_real_eigenvalue();
  if (!(min_re > stability_tol)) throw unstable_drift_error(min_re);
}

double LyapunovSolver::min_real_eigenvalue() const {
  return eigenvalues_.real().minCoeff();
}

Matrix LyapunovSolver::solve(const Matrix& c) const {
  const Eigen::Index n = a_.rows();
  if (c.rows() != n || c.cols() != n) {
    throw validation_error("Lyapunov right-hand side has the wrong shape");
  }
  // A = Q T Q^H; with X = Q^H S Q the equation becomes T X + X T^H = Q^H C Q.
  const Eigen::MatrixXcd ct = q_.adjoint() * c.cast<std::complex<double>>() * q_;
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd shifted = t_;
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = ct.col(j);
    const Eigen::Index tail = n - 1 - j;
    if (tail > 0) {
      rhs.noalias() -=
          x.rightCols(tail) * t_.row(j).tail(tail).conjugate().transpose();
    }
    shifted.diagonal() = t_.diagonal().array() + std::conj(t_(j, j));
    x.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  Matrix s = (q_ * x * q_.adjoint()).real();
  return symmetric_part(s);
}

Matrix lyapunov_dense(const Matrix& a, const Matrix& sigma2) {
  return LyapunovSolver(a).solve(sigma2);
}

double lyapunov_residual(const Matrix& a, const Matrix& s, const Matrix& sigma2) {
  const Matrix r = a * s + s * a.transpose() - sigma2;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric_part(r),
                                           Eigen::EigenvaluesOnly);
  const double sym = es.eigenvalues().cwiseAbs().maxCoeff();
  return sym + antisymmetric_part(r).norm();
}

}  // namespace crystal_heat

#include "crystal_heat/covariance.hpp"

#include "crystal_heat/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

namespace crystal_heat {

namespace {

constexpr double kDomainSlack = 1e-14;

void require_positive_lambda(const ChainParams& params, const char* what) {
  if (params.lambda() <= 0.0) {
    throw validation_error(std::string(what) +
                           " requires lambda > 0 (stationary state not unique)");
  }
}

// Kernel matrix f_kl = f^(B)(c_k, c_l) on the spectral grid.
Matrix kernel_matrix(Block block, const ChainParams& params, const Vector& c) {
  const Eigen::Index n = c.size();
  Matrix f(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) {
      f(k, l) = f_block(block, c(k), c(l), params);
    }
  }
  return f;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Two-dimensional Fourier coefficients fhat(m, n), 0 <= m, n <= L/2, of the
// even function f(cos x, cos y) sampled on an L x L grid, L = 2^p.
Matrix sampled_coefficients(Block block, const ChainParams& params, int p) {
  const int half = 1 << (p - 1);
  const int pts = half + 1;
  const double pi = std::numbers::pi;
  std::vector<double> in(static_cast<std::size_t>(pts) * pts);
  std::vector<double> out(in.size());
  std::vector<double> cosines(static_cast<std::size_t>(pts));
  for (int a = 0; a < pts; ++a) {
    cosines[static_cast<std::size_t>(a)] =
        std::clamp(std::cos(pi * a / half), -1.0, 1.0);
  }
  for (int a = 0; a < pts; ++a) {
    for (int b = 0; b < pts; ++b) {
      in[static_cast<std::size_t>(a) * pts + b] =
          f_block(block, cosines[static_cast<std::size_t>(a)],
                  cosines[static_cast<std::size_t>(b)], params);
    }
  }
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_r2r_2d(pts, pts, in.data(), out.data(), FFTW_REDFT00,
                            FFTW_REDFT00, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  // REDFT00 of the half grid equals the full periodic DFT of the even
  // extension; divide by L^2 for the Fourier coefficients.
  const double scale = 1.0 / (4.0 * half * static_cast<double>(half));
  Matrix coeffs(pts, pts);
  for (int a = 0; a < pts; ++a) {
    for (int b = 0; b < pts; ++b) {
      coeffs(a, b) = out[static_cast<std::size_t>(a) * pts + b] * scale;
    }
  }
  return coeffs;
}

Matrix fold(const Matrix& coeffs, int n) {
  const int period = 2 * (n + 1);
  const int size = 2 * n + 2;
  const int cap = static_cast<int>(coeffs.rows()) - 1;
  constexpr int kFoldRange = 3;
  Matrix folded = Matrix::Zero(size, size);
  for (int m = -n; m <= n + 1; ++m) {
    for (int q = -n; q <= n + 1; ++q) {
      double sum = 0.0;
      for (int k = -kFoldRange; k <= kFoldRange; ++k) {
        const int mm = std::abs(m + period * k);
        if (mm > cap) continue;
        for (int l = -kFoldRange; l <= kFoldRange; ++l) {
          const int qq = std::abs(q + period * l);
          if (qq > cap) continue;
          sum += coeffs(mm, qq);
        }
      }
      folded(m + n, q + n) = sum;
    }
  }
  return folded;
}

std::vector<int> residual_check_sites(int n) {
  std::vector<int> rs;
  if (n <= 32) {
    for (int r = 1; r <= n; ++r) rs.push_back(r);
  } else {
    rs = {1, 2, n / 3, n / 2, n - 1, n};
  }
  return rs;
}

}  // namespace

std::string_view block_name(Block b) {
  switch (b) {
    case Block::u:
      return "U";
    case Block::v:
      return "V";
    case Block::z:
      return "Z";
  }
  return "?";
}

Matrix CovarianceBlocks::full() const {
  const Eigen::Index n = u.rows();
  Matrix s(2 * n, 2 * n);
  s.topLeftCorner(n, n) = u;
  s.topRightCorner(n, n) = z;
  s.bottomLeftCorner(n, n) = z.transpose();
  s.bottomRightCorner(n, n) = v;
  return s;
}

CovarianceBlocks CovarianceBlocks::from_full(const Matrix& s) {
  if (s.rows() != s.cols() || s.rows() % 2 != 0) {
    throw validation_error("covariance must be square with even dimension");
  }
  const Eigen::Index n = s.rows() / 2;
  return {s.topLeftCorner(n, n), s.bottomRightCorner(n, n),
          s.topRightCorner(n, n)};
}

const Matrix& CovarianceBlocks::block(Block which) const {
  switch (which) {
    case Block::u:
      return u;
    case Block::v:
      return v;
    case Block::z:
      return z;
  }
  return u;
}

double g_function(double x, double y, const ChainParams& params) {
  if (x < -1.0 - kDomainSlack || x > 1.0 + kDomainSlack ||
      y < -1.0 - kDomainSlack || y > 1.0 + kDomainSlack) {
    throw validation_error("G(x, y) is defined on [-1, 1]^2");
  }
  const double ratio = params.lambda() / params.omega();
  return (x - y) * (x - y) + ratio * ratio * (params.nu2() + 2.0 - x - y);
}

double f_block(Block block, double x, double y, const ChainParams& params) {
  const double g = g_function(x, y, params);
  const double w2 = params.omega() * params.omega();
  const double lam = params.lambda();
  switch (block) {
    case Block::u:
      return lam * lam / (w2 * w2) / g;
    case Block::v:
      return 1.0 - (x - y) * (x - y) / g;
    case Block::z:
      return lam / w2 * (y - x) / g;
  }
  return 0.0;
}

CovarianceBlocks covariance_closed_form(const ChainParams& params,
                                        const TemperatureProfile& temps) {
  require_positive_lambda(params, "closed-form covariance");
  const int n = params.n();
  if (temps.size() != n) {
    throw validation_error("temperature profile length does not match N");
  }
  const SpectralData sd = spectral_data(params);
  // T~ = F^T diag(T) F; B = F (f^(B) o T~) F^T
  const Matrix t_tilde = sd.f.transpose() * temps.as_vector().asDiagonal() * sd.f;
  auto rotate = [&](Block b) -> Matrix {
    const Matrix inner = kernel_matrix(b, params, sd.c).cwiseProduct(t_tilde);
    return sd.f * inner * sd.f.transpose();
  };
  CovarianceBlocks s{symmetric_part(rotate(Block::u)),
                     symmetric_part(rotate(Block::v)),
                     antisymmetric_part(rotate(Block::z))};
  const CouplingProfile couplings = CouplingProfile::uniform(params.lambda(), n);
  check_stationary(s, build_drift(params, couplings), build_noise(couplings, temps));
  return s;
}

CovarianceBlocks lyapunov_spectral_general(const ChainParams& params,
                                           const Matrix& b, const Matrix& d,
                                           CovarianceBlocks* tilde) {
  require_positive_lambda(params, "spectral Lyapunov solution");
  const int n = params.n();
  if (b.rows() != n || b.cols() != n || d.rows() != n || d.cols() != n) {
    throw validation_error("noise blocks must be N x N");
  }
  const SpectralData sd = spectral_data(params);
  const double lam = params.lambda();
  const double w4 = std::pow(params.omega(), 4);
  const Matrix bt = sd.f.transpose() * b * sd.f;
  const Matrix dt = sd.f.transpose() * symmetric_part(d) * sd.f;
  const Matrix bt_plus = symmetric_part(bt);
  const Matrix bt_minus = antisymmetric_part(bt);

  Matrix ut(n, n), vt(n, n), zt(n, n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const double mk = sd.mu(k);
      const double ml = sd.mu(l);
      const double g = 4.0 * w4 * g_function(sd.c(k), sd.c(l), params);
      const double cross = mk * bt(k, l) - ml * bt(l, k);
      ut(k, l) = 2.0 / g *
                 (2.0 * lam * lam * (dt(k, l) + bt_plus(k, l)) -
                  (mk - ml) * bt_minus(k, l));
      vt(k, l) = (2.0 * lam * lam * (mk + ml) * dt(k, l) - (mk - ml) * cross) / g;
      zt(k, l) = 2.0 * lam / g * ((mk - ml) * dt(k, l) + cross);
    }
  }
  if (tilde != nullptr) *tilde = CovarianceBlocks{ut, vt, zt};
  return {sd.f * ut * sd.f.transpose(), sd.f * vt * sd.f.transpose(),
          sd.f * zt * sd.f.transpose()};
}

CovarianceBlocks equilibrium_covariance(const ChainParams& params, double t) {
  if (!std::isfinite(t) || t < 0.0) {
    throw validation_error("equilibrium temperature must be >= 0");
  }
  const int n = params.n();
  const SpectralData sd = spectral_data(params);
  const Matrix phi_inv =
      sd.f * sd.mu.cwiseInverse().asDiagonal() * sd.f.transpose();
  return {t * symmetric_part(phi_inv), t * Matrix::Identity(n, n),
          Matrix::Zero(n, n)};
}

void check_stationary(const CovarianceBlocks& s, const Matrix& a,
                      const Matrix& sigma2, double rel_tol) {
  const double scale = std::max(max_abs(s.u) + max_abs(s.v), 1e-300);
  if (max_abs(s.z + s.z.transpose()) > 1e-10 * std::max(scale, 1.0)) {
    throw numerical_error("covariance cross block is not antisymmetric");
  }
  if (!is_positive_semidefinite(s.u) || !is_positive_semidefinite(s.v)) {
    throw numerical_error("covariance diagonal block is not PSD");
  }
  const double res = lyapunov_residual(a, s.full(), sigma2);
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric_part(sigma2),
                                           Eigen::EigenvaluesOnly);
  const double noise = es.eigenvalues().cwiseAbs().maxCoeff();
  if (res > rel_tol * std::max(noise, 1e-300) && res > 1e-14) {
    throw numerical_error("Lyapunov residual " + std::to_string(res) +
                          " exceeds tolerance");
  }
}

// --- folded coefficients -----------------------------------------------------

FoldedCoefficients::FoldedCoefficients(Block block, int n, Matrix values,
                                       int resolution_log2, double residual)
    : block_(block),
      n_(n),
      values_(std::move(values)),
      resolution_log2_(resolution_log2),
      residual_(residual) {}

int FoldedCoefficients::reduce(int m) const {
  const int period = 2 * (n_ + 1);
  int r = m % period;
  if (r < 0) r += period;
  if (r > n_ + 1) r -= period;
  return r;
}

double FoldedCoefficients::operator()(int m, int n) const {
  return values_(reduce(m) + n_, reduce(n) + n_);
}

double FoldedCoefficients::reconstruct(int i, int j, int r) const {
  const auto& f = *this;
  return f(i - r, j - r) + f(i + r, j + r) - f(i - r, j + r) - f(i + r, j - r);
}

Matrix unit_response_direct(Block block, const ChainParams& params,
                            const SpectralData& sd, int r) {
  const Vector fr = sd.f.row(r - 1).transpose();
  const Matrix inner = kernel_matrix(block, params, sd.c).cwiseProduct(fr * fr.transpose());
  return sd.f * inner * sd.f.transpose();
}

FoldedCoefficients folded_coefficients(Block block, const ChainParams& params) {
  require_positive_lambda(params, "folded coefficients");
  const int n = params.n();
  const SpectralData sd = spectral_data(params);
  const std::vector<int> check = residual_check_sites(n);
  std::vector<Matrix> direct;
  direct.reserve(check.size());
  for (int r : check) direct.push_back(unit_response_direct(block, params, sd, r));

  constexpr int kStartLog2 = 8;
  constexpr int kMaxLog2 = 12;
  constexpr double kTarget = 1e-8;
  double residual = 0.0;
  for (int p = kStartLog2; p <= kMaxLog2; ++p) {
    Matrix folded = fold(sampled_coefficients(block, params, p), n);
    const FoldedCoefficients fc(block, n, folded, p, 0.0);
    residual = 0.0;
    for (std::size_t c = 0; c < check.size(); ++c) {
      for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
          residual = std::max(residual, std::abs(fc.reconstruct(i, j, check[c]) -
                                                 direct[c](i - 1, j - 1)));
        }
      }
    }
    if (residual <= kTarget) {
      return FoldedCoefficients(block, n, std::move(folded), p, residual);
    }
  }
  throw resolution_error("folded coefficient reconstruction did not reach 1e-8",
                         residual);
}

DecayEstimate decay_estimate(Block block, const ChainParams& params) {
  const FoldedCoefficients fc = folded_coefficients(block, params);
  const int n = params.n();
  std::vector<double> xs, ys;
  for (int m = -n; m <= n + 1; ++m) {
    for (int q = -n; q <= n + 1; ++q) {
      const double v = std::abs(fc(m, q));
      if (v > 1e-14) {
        xs.push_back(std::abs(m) + std::abs(q));
        ys.push_back(std::log(v));
      }
    }
  }
  DecayEstimate est;
  est.block = block;
  if (xs.size() >= 2) {
    est.alpha = -fit_line(xs, ys).slope;
  }
  for (int m = -n; m <= n + 1; ++m) {
    for (int q = -n; q <= n + 1; ++q) {
      est.a = std::max(est.a, std::abs(fc(m, q)) *
                                  std::exp(est.alpha * (std::abs(m) + std::abs(q))));
    }
  }
  const SpectralData sd = spectral_data(params);
  Matrix weighted = Matrix::Zero(n, n);
  for (int r = 1; r <= n; ++r) {
    const Matrix br = unit_response_direct(block, params, sd, r);
    for (int i = 1; i <= n; ++i) {
      weighted.row(i - 1) += std::abs(i - r) * br.row(i - 1).cwiseAbs();
    }
  }
  est.a_prime = weighted.maxCoeff();
  return est;
}

LocalEquilibriumDeviation local_equilibrium_deviation(
    const CovarianceBlocks& s, const TemperatureProfile& temps,
    const ChainParams& params) {
  const int n = params.n();
  if (s.n() != n || temps.size() != n) {
    throw validation_error("covariance, profile and params disagree on N");
  }
  const CovarianceBlocks eq = equilibrium_covariance(params, 1.0);
  const Vector t = temps.as_vector();
  double dev = 0.0;
  for (Block b : {Block::u, Block::v, Block::z}) {
    const Matrix diff = s.block(b) - t.asDiagonal() * eq.block(b);
    dev = std::max(dev, max_abs(diff));
  }
  return {dev, temps.max_jump()};
}

}  // namespace crystal_heat

#include "crystal_heat/greenkubo.hpp"

#include "crystal_heat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crystal_heat {

namespace {

void require_gk(const ChainParams& params) {
  if (params.n() < 2) throw validation_error("Green-Kubo needs N >= 2");
  if (params.lambda() <= 0.0) throw validation_error("Green-Kubo needs lambda > 0");
}

// K~ = F^T K F in the sine basis.
Matrix k_tilde(const SpectralData& sd, int n) {
  return sd.f.transpose() * build_current_matrix(n) * sd.f;
}

double envelope_slope(const ChainParams& p) {
  return 1.0 + p.gamma() * p.gamma() + 4.0 * p.omega() * p.omega() + p.lambda() / 2.0;
}

double envelope_prefactor(const ChainParams& p, const SpectralData& sd) {
  const int n = p.n();
  const double k_norm = spectral_norm(build_current_matrix(n));
  const double e_norm = std::max(1.0, 1.0 / sd.mu(0));
  return 2.0 * n / (2.0 * (n + 1)) * k_norm * k_norm * e_norm * e_norm;
}

}  // namespace

double correlation_g(const ChainParams& params, double t) {
  require_gk(params);
  t = std::abs(t);
  const int n = params.n();
  const SpectralData sd = spectral_data(params);
  const Matrix kt = k_tilde(sd, n);
  std::vector<Eigen::Matrix2d> prop(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    prop[static_cast<std::size_t>(k)] = mode_propagator(sd.mu(k), params.lambda(), t);
  }
  // E Kc E has mode blocks [[0, B_kl], [B_lk, 0]] with B = Y^{-1} K~^T
  double trace = 0.0;
  for (int k = 0; k < n; ++k) {
    const Eigen::Matrix2d& pk = prop[static_cast<std::size_t>(k)];
    for (int l = 0; l < n; ++l) {
      const double b_kl = kt(l, k) / sd.mu(k);
      const double b_lk = kt(k, l) / sd.mu(l);
      if (b_kl == 0.0 && b_lk == 0.0) continue;
      Eigen::Matrix2d x;
      x << 0.0, b_kl, b_lk, 0.0;
      const Eigen::Matrix2d w = pk * x * prop[static_cast<std::size_t>(l)].transpose();
      trace += kt(k, l) * w(1, 0) + kt(l, k) * w(0, 1);
    }
  }
  return trace / (2.0 * (n + 1));
}

double correlation_g_dense(const ChainParams& params, const Matrix& propagator) {
  require_gk(params);
  const int n = params.n();
  const Matrix k = build_current_matrix(n);
  Matrix kc = Matrix::Zero(2 * n, 2 * n);
  kc.topRightCorner(n, n) = k.transpose();
  kc.bottomLeftCorner(n, n) = k;
  Matrix e = Matrix::Identity(2 * n, 2 * n);
  e.topLeftCorner(n, n) = build_phi(params).llt().solve(Matrix::Identity(n, n));
  const Matrix prod = kc * propagator * e * kc * e * propagator.transpose();
  return prod.trace() / (2.0 * (n + 1));
}

double correlation_envelope(const ChainParams& params, double t) {
  require_gk(params);
  t = std::abs(t);
  const SpectralData sd = spectral_data(params);
  const double env = std::exp(-t * params.decay_floor()) * (1.0 + t * envelope_slope(params));
  return envelope_prefactor(params, sd) * env * env;
}

Matrix k_tilde_minus_product(int n) {
  const ChainParams unit(1.0, 1.0, 1.0, n);
  const Matrix kt = k_tilde(spectral_data(unit), n);
  return antisymmetric_part(kt);
}

Matrix k_tilde_minus_explicit(int n) {
  if (n < 2) throw validation_error("current matrix needs N >= 2");
  const double np1 = n + 1.0;
  const double pi = std::numbers::pi;
  Matrix out = Matrix::Zero(n, n);
  for (int k = 1; k <= n; ++k) {
    for (int l = 1; l <= n; ++l) {
      if ((k - l) % 2 == 0) continue;
      out(k - 1, l - 1) = -(2.0 / np1) * std::sin(pi * k / np1) * std::sin(pi * l / np1) /
                          (std::sin(pi * (k - l) / (2.0 * np1)) * std::sin(pi * (k + l) / (2.0 * np1)));
    }
  }
  return out;
}

GkQuadrature kappa_gk_quadrature(const ChainParams& params, double rel_tol) {
  require_gk(params);
  GkQuadrature out;
  const double a = params.decay_floor();
  out.t_max = 40.0 / a;
  // fixed spectral data; only the propagators depend on t
  const QuadratureResult q = integrate_adaptive(
      [&params](double t) { return correlation_g(params, t); }, 0.0, out.t_max, rel_tol, 1e-15);
  const double omega4 = std::pow(params.omega(), 4);
  // int_T^inf e^{-st}(1+ct)^2 dt with s = 2a
  const double s = 2.0 * a;
  const double c = envelope_slope(params);
  const double tt = out.t_max;
  const double tail = std::exp(-s * tt) *
                      ((1.0 + c * tt) * (1.0 + c * tt) / s + 2.0 * c * (1.0 + c * tt) / (s * s) +
                       2.0 * c * c / (s * s * s));
  out.tail_bound = omega4 / 4.0 * envelope_prefactor(params, spectral_data(params)) * tail;
  out.kappa = omega4 / 4.0 * q.value;
  out.error = omega4 / 4.0 * q.error + out.tail_bound;
  return out;
}

GkLyapunov kappa_gk_lyapunov(const ChainParams& params) {
  require_gk(params);
  const int n = params.n();
  const Matrix k = build_current_matrix(n);
  const Matrix b = build_phi(params).llt().solve(k.transpose());
  CovarianceBlocks tilde;
  const CovarianceBlocks s = lyapunov_spectral_general(params, b, Matrix::Zero(n, n), &tilde);

  GkLyapunov out;
  // Tr[Kc S'] = Tr[K^T Z'^T] + Tr[K Z'] = 2 Tr[K Z']
  out.trace_full = (k.transpose() * s.z.transpose()).trace() + (k * s.z).trace();
  const Matrix km = k_tilde_minus_product(n);
  out.trace_tilde = 2.0 * (km * tilde.z).trace();
  out.z_antisymmetry = max_abs(tilde.z + tilde.z.transpose());
  const SpectralData sd = spectral_data(params);
  const double coef = params.lambda() / std::pow(params.omega(), 4);
  for (int a = 0; a < n; ++a) {
    for (int c = 0; c < n; ++c) {
      const double expected = -coef * km(a, c) / g_function(sd.c(a), sd.c(c), params);
      out.z_formula_error = std::max(out.z_formula_error, std::abs(tilde.z(a, c) - expected));
    }
  }
  out.kappa = std::pow(params.omega(), 4) / 8.0 / (n + 1) * out.trace_full;
  return out;
}

double kappa_gk_spectral(const ChainParams& params) {
  require_gk(params);
  const int n = params.n();
  const Matrix expl = k_tilde_minus_explicit(n);
  const Matrix prod = k_tilde_minus_product(n);
  if (max_abs(expl - prod) > 1e-10) {
    throw numerical_error("explicit and product forms of the antisymmetric current disagree");
  }
  const SpectralData sd = spectral_data(params);
  // row sums first, then across rows, for a stable reduction order
  Vector rows(n);
  for (int a = 0; a < n; ++a) {
    double r = 0.0;
    for (int c = 0; c < n; ++c) {
      if (expl(a, c) == 0.0) continue;
      r += expl(a, c) * expl(a, c) / g_function(sd.c(a), sd.c(c), params);
    }
    rows(a) = r;
  }
  return params.lambda() / (4.0 * (n + 1)) * rows.sum();
}

GreenKuboReport green_kubo_report(const ChainParams& params,
                                  std::span<const double> t_samples) {
  GreenKuboReport rep;
  rep.n = params.n();
  rep.kappa_gk_lyapunov = kappa_gk_lyapunov(params).kappa;
  rep.kappa_gk_spectral = kappa_gk_spectral(params);
  const GkQuadrature q = kappa_gk_quadrature(params);
  rep.kappa_gk_quadrature = q.kappa;
  rep.quadrature_error = q.error;
  rep.kappa_target = kappa_closed_form(params).kappa;
  rep.max_route_gap = std::max({std::abs(rep.kappa_gk_lyapunov - rep.kappa_gk_spectral),
                                std::abs(rep.kappa_gk_lyapunov - rep.kappa_gk_quadrature),
                                std::abs(rep.kappa_gk_spectral - rep.kappa_gk_quadrature)});
  for (double t : t_samples) {
    if (t < 0.0) throw validation_error("g samples are reported for t >= 0");
    rep.g_samples.emplace_back(t, correlation_g(params, t));
  }
  return rep;
}

GkExtrapolation kappa_gk_extrapolate(const ChainParams& params,
                                     std::span<const int> n_values) {
  if (n_values.empty()) throw validation_error("empty N list");
  GkExtrapolation out;
  for (int n : n_values) {
    out.n_values.push_back(n);
    out.values.push_back(kappa_gk_spectral(params.with_n(n)));
  }
  const int pts = static_cast<int>(std::min<std::size_t>(3, out.values.size()));
  out.extrapolated = {richardson_extrapolate(out.n_values, out.values, pts), params.nu2(),
                      KappaRoute::green_kubo};
  return out;
}

}  // namespace crystal_heat

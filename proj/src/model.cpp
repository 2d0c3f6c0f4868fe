#include "crystal_heat/model.hpp"

#include "crystal_heat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace crystal_heat {

namespace {

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

// Largest singular value of a 2x2 matrix.
double norm2x2(const Eigen::Matrix2d& m) {
  const double fro2 = m.squaredNorm();
  const double det = m.determinant();
  const double disc = std::max(0.0, fro2 * fro2 - 4.0 * det * det);
  return std::sqrt(0.5 * (fro2 + std::sqrt(disc)));
}

}  // namespace

ChainParams::ChainParams(double omega, double gamma, double lambda, int n,
                         int max_sites)
    : omega_(omega),
      gamma_(gamma),
      lambda_(lambda),
      n_(n),
      max_sites_(max_sites),
      nu2_(0.0) {
  if (!finite_positive(omega)) throw validation_error("omega must be > 0");
  if (!finite_positive(gamma)) throw validation_error("gamma must be > 0");
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw validation_error("lambda must be >= 0");
  }
  if (n < 1) throw validation_error("chain length must be >= 1");
  if (n > max_sites) {
    throw validation_error("chain length " + std::to_string(n) +
                           " exceeds the site cap " + std::to_string(max_sites));
  }
  nu2_ = (gamma * gamma) / (omega * omega);
}

ChainParams ChainParams::with_n(int n) const {
  return ChainParams(omega_, gamma_, lambda_, n, max_sites_);
}

ChainParams ChainParams::with_lambda(double lambda) const {
  return ChainParams(omega_, gamma_, lambda, n_, max_sites_);
}

ChainParams ChainParams::with_omega(double omega) const {
  return ChainParams(omega, gamma_, lambda_, n_, max_sites_);
}

ChainParams ChainParams::with_nu2(double nu2) const {
  if (!finite_positive(nu2)) throw validation_error("nu^2 must be > 0");
  return ChainParams(omega_, omega_ * std::sqrt(nu2), lambda_, n_, max_sites_);
}

double ChainParams::decay_floor() const {
  if (lambda_ <= 0.0) throw validation_error("decay floor needs lambda > 0");
  return std::min(lambda_ / 2.0, gamma_ * gamma_ / lambda_);
}

CouplingProfile::CouplingProfile(std::vector<double> lambdas)
    : lambdas_(std::move(lambdas)) {
  if (lambdas_.empty()) throw validation_error("empty coupling profile");
  bool any_positive = false;
  for (double l : lambdas_) {
    if (!std::isfinite(l) || l < 0.0) {
      throw validation_error("bath couplings must be finite and >= 0");
    }
    any_positive = any_positive || l > 0.0;
  }
  if (!any_positive) {
    throw validation_error("at least one bath coupling must be positive");
  }
}

CouplingProfile CouplingProfile::uniform(double lambda, int n) {
  if (n < 1) throw validation_error("coupling profile length must be >= 1");
  return CouplingProfile(std::vector<double>(static_cast<std::size_t>(n), lambda));
}

CouplingProfile CouplingProfile::every_m(double lambda, int m, int n) {
  if (m < 1) throw validation_error("coupling period m must be >= 1");
  if (n < 1) throw validation_error("coupling profile length must be >= 1");
  std::vector<double> l(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; i += m) l[static_cast<std::size_t>(i)] = lambda;
  return CouplingProfile(std::move(l));
}

bool CouplingProfile::is_uniform() const noexcept {
  return std::all_of(lambdas_.begin(), lambdas_.end(),
                     [&](double l) { return l == lambdas_.front(); });
}

Vector CouplingProfile::as_vector() const {
  return Eigen::Map<const Vector>(lambdas_.data(),
                                  static_cast<Eigen::Index>(lambdas_.size()));
}

TemperatureProfile::TemperatureProfile(std::vector<double> temps)
    : temps_(std::move(temps)) {
  if (temps_.empty()) throw validation_error("empty temperature profile");
  for (double t : temps_) {
    if (!std::isfinite(t) || t < 0.0) {
      throw validation_error("temperatures must be finite and >= 0");
    }
  }
}

TemperatureProfile TemperatureProfile::uniform(double t, int n) {
  if (n < 1) throw validation_error("temperature profile length must be >= 1");
  return TemperatureProfile(std::vector<double>(static_cast<std::size_t>(n), t));
}

TemperatureProfile TemperatureProfile::linear(double t_left, double t_right,
                                              int n) {
  if (n < 2) throw validation_error("linear profile needs at least two sites");
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    t[static_cast<std::size_t>(i)] =
        t_left + (t_right - t_left) * static_cast<double>(i) / (n - 1);
  }
  t.back() = t_right;
  return TemperatureProfile(std::move(t));
}

Vector TemperatureProfile::as_vector() const {
  return Eigen::Map<const Vector>(temps_.data(),
                                  static_cast<Eigen::Index>(temps_.size()));
}

double TemperatureProfile::max_jump() const {
  double eps = 0.0;
  for (std::size_t i = 0; i + 1 < temps_.size(); ++i) {
    eps = std::max(eps, std::abs(temps_[i] - temps_[i + 1]));
  }
  return eps;
}

Matrix build_phi(const ChainParams& params) {
  const int n = params.n();
  const double w2 = params.omega() * params.omega();
  Matrix phi = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    phi(i, i) = w2 * (2.0 + params.nu2());
    if (i + 1 < n) {
      phi(i, i + 1) = -w2;
      phi(i + 1, i) = -w2;
    }
  }
  return phi;
}

SpectralData spectral_data(const ChainParams& params) {
  const int n = params.n();
  const double np1 = n + 1.0;
  const double pi = std::numbers::pi;
  const double norm = std::sqrt(2.0 / np1);
  const double w2 = params.omega() * params.omega();

  SpectralData out;
  out.f.resize(n, n);
  out.mu.resize(n);
  out.c.resize(n);
  for (int k = 1; k <= n; ++k) {
    for (int l = k; l <= n; ++l) {
      // reduce k*l modulo 2(N+1) so the sine argument stays small
      const long kl = (static_cast<long>(k) * l) % (2L * (n + 1));
      const double v = norm * std::sin(pi * static_cast<double>(kl) / np1);
      out.f(k - 1, l - 1) = v;
      out.f(l - 1, k - 1) = v;
    }
    const double s = std::sin(pi * k / (2.0 * np1));
    out.mu(k - 1) = w2 * (params.nu2() + 4.0 * s * s);
    out.c(k - 1) = std::cos(pi * k / np1);
  }
  return out;
}

Matrix build_drift(const ChainParams& params, const CouplingProfile& couplings) {
  const int n = params.n();
  if (couplings.size() != n) {
    throw validation_error("coupling profile length " +
                           std::to_string(couplings.size()) +
                           " does not match N = " + std::to_string(n));
  }
  Matrix a = Matrix::Zero(2 * n, 2 * n);
  a.topRightCorner(n, n) = -Matrix::Identity(n, n);
  a.bottomLeftCorner(n, n) = build_phi(params);
  a.bottomRightCorner(n, n) = couplings.as_vector().asDiagonal();
  return a;
}

Matrix build_noise(const CouplingProfile& couplings,
                   const TemperatureProfile& temps) {
  const int n = couplings.size();
  if (temps.size() != n) {
    throw validation_error("temperature and coupling profiles differ in length");
  }
  Matrix s2 = Matrix::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    s2(n + i, n + i) = 2.0 * couplings[static_cast<std::size_t>(i)] *
                       temps[static_cast<std::size_t>(i)];
  }
  return s2;
}

Matrix build_current_matrix(int n) {
  if (n < 2) throw validation_error("current matrix needs N >= 2");
  Matrix k = Matrix::Zero(n, n);
  k(0, 0) = 1.0;
  k(0, 1) = -1.0;
  k(n - 1, n - 2) = 1.0;
  k(n - 1, n - 1) = -1.0;
  for (int i = 1; i + 1 < n; ++i) {
    k(i, i - 1) = 1.0;
    k(i, i + 1) = -1.0;
  }
  return k;
}

Eigen::Matrix2d mode_propagator(double mu, double lambda, double t) {
  // exp(-tA_k) = e^{-t lambda/2} [cosh(rho t) I + sinh(rho t)/rho B],
  // B = [[lambda/2, 1], [-mu, -lambda/2]], rho^2 = lambda^2/4 - mu.
  const double rho2 = lambda * lambda / 4.0 - mu;
  const double rho = std::sqrt(std::abs(rho2));
  double ch = 0.0;
  double sh_over_rho = 0.0;
  if (rho < 1e-7) {
    // series in x = rho^2 t^2, valid for either sign of rho^2
    const double x = rho2 * t * t;
    ch = 1.0 + x / 2.0 + x * x / 24.0 + x * x * x / 720.0;
    sh_over_rho = t * (1.0 + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0);
  } else if (rho2 > 0.0) {
    // overdamped: combine the decaying prefactor before exponentiating
    const double ep = std::exp((rho - lambda / 2.0) * t);
    const double em = std::exp((-rho - lambda / 2.0) * t);
    Eigen::Matrix2d b;
    b << lambda / 2.0, 1.0, -mu, -lambda / 2.0;
    return 0.5 * (ep + em) * Eigen::Matrix2d::Identity() +
           0.5 * (ep - em) / rho * b;
  } else {
    ch = std::cos(rho * t);
    sh_over_rho = std::sin(rho * t) / rho;
  }
  Eigen::Matrix2d b;
  b << lambda / 2.0, 1.0, -mu, -lambda / 2.0;
  return std::exp(-lambda * t / 2.0) *
         (ch * Eigen::Matrix2d::Identity() + sh_over_rho * b);
}

Matrix propagator_matrix(const ChainParams& params, double t) {
  const int n = params.n();
  const SpectralData sd = spectral_data(params);
  Matrix qq(n, n), qp(n, n), pq(n, n), pp(n, n);
  Vector d_qq(n), d_qp(n), d_pq(n), d_pp(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::Matrix2d pk = mode_propagator(sd.mu(k), params.lambda(), t);
    d_qq(k) = pk(0, 0);
    d_qp(k) = pk(0, 1);
    d_pq(k) = pk(1, 0);
    d_pp(k) = pk(1, 1);
  }
  Matrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = sd.f * d_qq.asDiagonal() * sd.f.transpose();
  out.topRightCorner(n, n) = sd.f * d_qp.asDiagonal() * sd.f.transpose();
  out.bottomLeftCorner(n, n) = sd.f * d_pq.asDiagonal() * sd.f.transpose();
  out.bottomRightCorner(n, n) = sd.f * d_pp.asDiagonal() * sd.f.transpose();
  return out;
}

double propagator_norm(const ChainParams& params, double t) {
  if (t < 0.0) throw validation_error("propagator time must be >= 0");
  const SpectralData sd = spectral_data(params);
  double norm = 0.0;
  for (int k = 0; k < params.n(); ++k) {
    norm = std::max(norm, norm2x2(mode_propagator(sd.mu(k), params.lambda(), t)));
  }
  return norm;
}

bool PropagatorBoundReport::all_hold() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const PropagatorBoundRow& r) { return r.holds; });
}

PropagatorBoundReport propagator_bound_report(const ChainParams& params,
                                              std::span<const double> t_grid) {
  PropagatorBoundReport report;
  report.decay_floor = params.decay_floor();
  const double slope = 1.0 + params.gamma() * params.gamma() +
                       4.0 * params.omega() * params.omega() +
                       params.lambda() / 2.0;
  for (double t : t_grid) {
    PropagatorBoundRow row;
    row.t = t;
    row.norm = propagator_norm(params, t);
    row.envelope = std::exp(-t * report.decay_floor) * (1.0 + t * slope);
    row.holds = row.norm <= row.envelope * (1.0 + 1e-12);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace crystal_heat

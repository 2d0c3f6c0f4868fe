#include "crystal_heat/transport.hpp"

#include "crystal_heat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crystal_heat {

namespace {

double u_at(const Matrix& u, int i, int j) {
  const int n = static_cast<int>(u.rows());
  if (i < 0 || j < 0 || i >= n || j >= n) return 0.0;
  return u(i, j);
}

double spread(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

void require_gradient(double t_left, double t_right) {
  if (t_left < 0.0 || t_right < 0.0) {
    throw validation_error("boundary temperatures must be >= 0");
  }
  if (t_left == t_right) throw validation_error("conductivity needs t_left != t_right");
}

}  // namespace

std::string_view route_name(KappaRoute r) {
  switch (r) {
    case KappaRoute::closed_form:
      return "closed_form";
    case KappaRoute::integral:
      return "integral";
    case KappaRoute::finite_n_extrapolation:
      return "finite_n_extrapolation";
    case KappaRoute::green_kubo:
      return "green_kubo";
    case KappaRoute::mode_average:
      return "mode_average";
  }
  return "?";
}

KappaResult kappa_closed_form(const ChainParams& params) {
  if (params.lambda() <= 0.0) throw validation_error("kappa needs lambda > 0");
  const double nu2 = params.nu2();
  const double omega2 = params.omega() * params.omega();
  const double kappa =
      omega2 / params.lambda() / (2.0 + nu2 + std::sqrt(nu2 * (4.0 + nu2)));
  return {kappa, nu2, KappaRoute::closed_form};
}

double kappa_integrand_integral(double nu2, double lo, double hi) {
  const auto f = [nu2](double x) {
    const double s = std::sin(std::numbers::pi * x);
    const double h = std::sin(0.5 * std::numbers::pi * x);
    return s * s / (nu2 + 4.0 * h * h);
  };
  return integrate_adaptive(f, lo, hi, 1e-12).value;
}

KappaResult kappa_integral(const ChainParams& params) {
  if (params.lambda() <= 0.0) throw validation_error("kappa needs lambda > 0");
  const double omega2 = params.omega() * params.omega();
  const double i = kappa_integrand_integral(params.nu2(), 0.0, 1.0);
  return {omega2 / params.lambda() * i, params.nu2(), KappaRoute::integral};
}

double phi_inverse_11_limit(const ChainParams& params) {
  const double omega2 = params.omega() * params.omega();
  return 2.0 / omega2 * kappa_integrand_integral(params.nu2(), 0.0, 1.0);
}

std::vector<double> currents_from_positions(const CovarianceBlocks& s,
                                            const ChainParams& params,
                                            const CouplingProfile& couplings) {
  const int n = s.n();
  if (couplings.size() != n) throw validation_error("coupling profile length mismatch");
  const double omega2 = params.omega() * params.omega();
  std::vector<double> j(static_cast<std::size_t>(std::max(0, n - 1)));
  for (int i = 0; i + 1 < n; ++i) {
    const double lam = couplings[static_cast<std::size_t>(i)] +
                       couplings[static_cast<std::size_t>(i + 1)];
    const double bracket = u_at(s.u, i, i) + u_at(s.u, i, i + 2) -
                           u_at(s.u, i - 1, i + 1) - u_at(s.u, i + 1, i + 1);
    // bonds between two uncoupled sites carry no U-route information
    j[static_cast<std::size_t>(i)] =
        lam > 0.0 ? omega2 * omega2 * bracket / lam
                  : std::numeric_limits<double>::quiet_NaN();
  }
  return j;
}

std::vector<double> currents_from_covariance(const CovarianceBlocks& s,
                                             const ChainParams& params,
                                             const CouplingProfile& couplings) {
  const int n = s.n();
  const double omega2 = params.omega() * params.omega();
  std::vector<double> j(static_cast<std::size_t>(std::max(0, n - 1)));
  for (int i = 0; i + 1 < n; ++i) j[static_cast<std::size_t>(i)] = omega2 * s.z(i, i + 1);

  const std::vector<double> alt = currents_from_positions(s, params, couplings);
  const double scale = std::max(1.0, omega2 * omega2 * max_abs(s.u) /
                                         std::max(1e-300, couplings.as_vector().maxCoeff()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (std::isnan(alt[i])) continue;
    if (std::abs(j[i] - alt[i]) > 1e-9 * scale) {
      throw numerical_error("current routes disagree at bond " + std::to_string(i + 1));
    }
  }
  return j;
}

std::vector<double> currents_from_covariance(const CovarianceBlocks& s,
                                             const ChainParams& params) {
  return currents_from_covariance(s, params, CouplingProfile::uniform(params.lambda(), s.n()));
}

std::vector<double> reservoir_fluxes(const CovarianceBlocks& s,
                                     const TemperatureProfile& temps,
                                     const CouplingProfile& couplings) {
  const int n = s.n();
  if (temps.size() != n || couplings.size() != n) {
    throw validation_error("profile lengths do not match the covariance");
  }
  std::vector<double> r(static_cast<std::size_t>(n));
  double total = 0.0;
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    r[k] = couplings[k] * (temps[k] - s.v(i, i));
    total += r[k];
    scale = std::max(scale, couplings[k] * std::max(temps[k], s.v(i, i)));
  }
  if (std::abs(total) > 1e-9 * std::max(1.0, scale)) {
    throw numerical_error("reservoir fluxes do not balance");
  }
  return r;
}

TransportReport transport_report(const ChainParams& params,
                                 const SelfConsistentSolution& solution,
                                 const CovarianceBlocks& s) {
  const int n = params.n();
  const CouplingProfile couplings = CouplingProfile::uniform(params.lambda(), n);
  TransportReport rep;
  rep.currents = currents_from_covariance(s, params, couplings);
  rep.reservoir_fluxes = reservoir_fluxes(s, solution.profile, couplings);
  rep.temperatures = solution.profile.temps();
  rep.j_n = rep.currents.empty() ? 0.0 : rep.currents.front();
  rep.current_spread = spread(rep.currents);
  rep.epsilon_n = solution.profile.max_jump();
  const double dt = solution.profile.t_left() - solution.profile.t_right();
  rep.kappa_estimate = dt != 0.0 ? (n - 1) * rep.j_n / dt : 0.0;
  rep.linearity_residual = profile_linearity(solution, params).residual;
  return rep;
}

ConductivityScan finite_n_conductivity(const ChainParams& params, double t_left,
                                       double t_right, std::span<const int> n_values) {
  require_gradient(t_left, t_right);
  if (n_values.empty()) throw validation_error("empty N list");
  ConductivityScan scan;
  const double dt = t_left - t_right;
  const double omega4 = std::pow(params.omega(), 4);
  std::vector<double> estimates;
  for (int n : n_values) {
    const ChainParams p = params.with_n(n);
    const KineticMap map = kinetic_map(p);
    const SelfConsistentSolution sol = solve_profile(map, t_left, t_right, SolveMethod::direct);
    const CovarianceBlocks s = covariance_closed_form(p, sol.profile);
    const std::vector<double> j = currents_from_covariance(s, p);
    ConductivityRow row;
    row.n = n;
    row.j_n = j.front();
    row.kappa_estimate = (n - 1) * row.j_n / dt;
    row.kappa_u_route = omega4 / (2.0 * p.lambda()) * (s.u(0, 0) - s.u(n - 1, n - 1)) / dt;
    if (std::abs(row.kappa_estimate - row.kappa_u_route) > 1e-9) {
      throw numerical_error("(N-1)J and U_11 - U_NN routes disagree at N=" + std::to_string(n));
    }
    const EpsilonBound eb = epsilon_and_bounds(sol, map, p);
    row.epsilon_n = eb.epsilon_n;
    row.bound = eb.bound;
    row.linearity_residual = profile_linearity(sol, p).residual;
    scan.rows.push_back(row);
    estimates.push_back(row.kappa_estimate);
  }
  const int pts = static_cast<int>(std::min<std::size_t>(3, estimates.size()));
  scan.extrapolated = richardson_extrapolate(n_values, estimates, pts);
  scan.order = estimates.size() >= 3 ? richardson_order(n_values, estimates) : 0.0;
  scan.target = kappa_closed_form(params).kappa;
  return scan;
}

EpsilonBound epsilon_and_bounds(const SelfConsistentSolution& solution,
                                const KineticMap& map, const ChainParams& params) {
  const Vector t = solution.profile.as_vector();
  if (t.size() != map.m.rows()) throw validation_error("profile does not match map");
  EpsilonBound eb;
  eb.epsilon_n = solution.profile.max_jump();
  const double t_left = solution.profile.t_left();
  const double t_right = solution.profile.t_right();
  eb.j_n = params.lambda() * (t_left - map.m.row(0).dot(t));
  const double product = map.c_g / params.lambda() * (t_left - t_right) * eb.j_n;
  eb.bound = std::sqrt(std::max(0.0, product));
  eb.ratio = eb.bound > 0.0 ? eb.epsilon_n / eb.bound : 0.0;
  return eb;
}

double epsilon_decay_exponent(std::span<const int> n_values,
                              std::span<const double> epsilons) {
  if (n_values.size() != epsilons.size() || n_values.size() < 2) {
    throw validation_error("need at least two (N, epsilon) samples");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    x.push_back(std::log(static_cast<double>(n_values[i])));
    y.push_back(std::log(epsilons[i]));
  }
  return -fit_line(x, y).slope;
}

LinearityReport profile_linearity(const SelfConsistentSolution& solution,
                                  const ChainParams& params) {
  const int n = solution.profile.size();
  LinearityReport rep;
  const double tl = solution.profile.t_left();
  const double tr = solution.profile.t_right();
  for (int j = 0; j < n; ++j) {
    const double lin = n > 1 ? tl + static_cast<double>(j) / (n - 1) * (tr - tl) : tl;
    rep.residual = std::max(rep.residual, std::abs(solution.profile[static_cast<std::size_t>(j)] - lin));
  }
  const ChainParams p = params.with_n(n);
  const Matrix inv = build_phi(p).llt().solve(Matrix::Identity(n, n));
  for (int j = 1; j + 1 < n; ++j) {
    rep.identity_residual = std::max(
        rep.identity_residual, std::abs(inv(j - 1, j + 1) - inv(j, j) + inv(0, 0)));
  }
  if (rep.identity_residual > 1e-10 * std::max(1.0, max_abs(inv))) {
    throw numerical_error("inverse force-matrix identity violated");
  }
  return rep;
}

NonuniformReport nonuniform_transport(const ChainParams& params,
                                      const CouplingProfile& couplings,
                                      double t_left, double t_right) {
  require_gradient(t_left, t_right);
  const int n = params.n();
  NonuniformReport rep{solve_profile_general(params, couplings, t_left, t_right), 0.0, 0.0,
                       0.0, 0.0, 0.0, {}, {}, 0.0};
  const CovarianceBlocks& s = rep.state.covariance;
  const std::vector<double> j = currents_from_covariance(s, params, couplings);
  rep.j_n = j.front();
  rep.current_spread = spread(j);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += couplings[static_cast<std::size_t>(i)];
  rep.lambda_bar =
      (sum - 0.5 * (couplings[0] + couplings[static_cast<std::size_t>(n - 1)])) / (n - 1);
  const double dt = t_left - t_right;
  rep.kappa_bar = (n - 1) * rep.j_n / dt;
  const double omega4 = std::pow(params.omega(), 4);
  rep.identity_residual = std::abs(2.0 * (n - 1) * rep.lambda_bar * rep.j_n / omega4 -
                                   (s.u(0, 0) - s.u(n - 1, n - 1)));
  if (rep.identity_residual > 1e-8 * std::max(1.0, max_abs(s.u))) {
    throw numerical_error("mean-coupling current identity violated");
  }

  rep.staircase.resize(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += couplings[static_cast<std::size_t>(i)];
    rep.staircase[static_cast<std::size_t>(i)] = acc / n;
  }
  // Lambda measured from the first bath so that the endpoints are pinned
  const double first = rep.staircase.front();
  const double total = rep.staircase.back() - first;
  rep.predicted.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double frac = total > 0.0 ? (rep.staircase[static_cast<std::size_t>(i)] - first) / total : 0.0;
    rep.predicted[static_cast<std::size_t>(i)] = t_left - dt * frac;
  }
  const auto& temps = rep.state.solution.profile.temps();
  for (int i = 0; i < n; ++i) {
    if (!rep.state.solution.coupled[static_cast<std::size_t>(i)]) continue;
    rep.profile_deviation = std::max(
        rep.profile_deviation,
        std::abs(temps[static_cast<std::size_t>(i)] - rep.predicted[static_cast<std::size_t>(i)]));
  }
  return rep;
}

}  // namespace crystal_heat

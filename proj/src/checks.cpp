#include "crystal_heat/checks.hpp"

#include "crystal_heat/covariance.hpp"
#include "crystal_heat/errors.hpp"
#include "crystal_heat/greenkubo.hpp"
#include "crystal_heat/highdim.hpp"
#include "crystal_heat/model.hpp"
#include "crystal_heat/montecarlo.hpp"
#include "crystal_heat/selfconsistency.hpp"
#include "crystal_heat/transport.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace crystal_heat::checks {

namespace {

class Detail {
 public:
  template <class T>
  Detail& kv(const std::string& key, const T& value) {
    if (!first_) out_ << ' ';
    first_ = false;
    out_ << key << '=' << value;
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_ = [] {
    std::ostringstream o;
    o << std::setprecision(6);
    return o;
  }();
  bool first_ = true;
};

CheckResult result(bool passed, const Detail& d) {
  CheckResult r;
  r.passed = passed;
  r.detail = d.str();
  return r;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

const ChainParams kUnit(1.0, 1.0, 1.0, 2);

// --- acceptance criteria ---------------------------------------------------

CheckResult conductivity_convergence() {
  const std::vector<int> ns{16, 32, 64, 128};
  const ConductivityScan scan = finite_n_conductivity(kUnit, 2.0, 1.0, ns);
  bool monotone = true;
  for (std::size_t i = 1; i < scan.rows.size(); ++i) {
    monotone = monotone && std::abs(scan.rows[i].kappa_estimate - scan.target) <
                               std::abs(scan.rows[i - 1].kappa_estimate - scan.target);
  }
  const double err = rel(scan.extrapolated, scan.target);
  Detail d;
  d.kv("est128", scan.rows.back().kappa_estimate)
      .kv("extrapolated", scan.extrapolated)
      .kv("target", scan.target)
      .kv("rel_err", err)
      .kv("order", scan.order)
      .kv("monotone", monotone);
  return result(monotone && err < 1e-3, d);
}

CheckResult green_kubo_equality() {
  const ChainParams p = kUnit.with_n(64);
  const GreenKuboReport rep = green_kubo_report(p, {});
  const std::vector<int> ns{32, 64, 128};
  const GkExtrapolation ex = kappa_gk_extrapolate(kUnit, ns);
  const double target = kappa_closed_form(kUnit).kappa;
  const double err = rel(ex.extrapolated.kappa, target);
  Detail d;
  d.kv("lyapunov", rep.kappa_gk_lyapunov)
      .kv("spectral", rep.kappa_gk_spectral)
      .kv("quadrature", rep.kappa_gk_quadrature)
      .kv("max_gap", rep.max_route_gap)
      .kv("extrapolated", ex.extrapolated.kappa)
      .kv("rel_err", err);
  return result(rep.max_route_gap <= 1e-6 && err < 1e-3, d);
}

CheckResult self_consistency_structure() {
  const ChainParams p = kUnit.with_n(64);
  const KineticMap map = kinetic_map(p);
  const int n = p.n();
  const double row_err = (map.m.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double col_err = (map.m.colwise().sum().array() - 1.0).abs().maxCoeff();
  const double min_entry = map.m.minCoeff();

  std::vector<Vector> starts;
  starts.push_back(Vector::Constant(n, 1.0));
  starts.push_back(Vector::Constant(n, 2.0));
  Vector lin(n);
  for (int i = 0; i < n; ++i) lin(i) = 2.0 - static_cast<double>(i) / (n - 1);
  starts.push_back(lin);
  std::vector<Vector> sols;
  for (const Vector& s : starts) {
    SolverOptions opt;
    opt.initial = s;
    sols.push_back(solve_profile(map, 2.0, 1.0, SolveMethod::neumann, opt).profile.as_vector());
  }
  double spread = 0.0;
  for (std::size_t i = 1; i < sols.size(); ++i) {
    spread = std::max(spread, (sols[i] - sols[0]).cwiseAbs().maxCoeff());
  }
  const bool bracketed = sols[0].minCoeff() >= 1.0 && sols[0].maxCoeff() <= 2.0;
  const double lin32 =
      profile_linearity(solve_profile(kUnit.with_n(32), 2.0, 1.0, SolveMethod::direct), kUnit).residual;
  const double lin128 =
      profile_linearity(solve_profile(kUnit.with_n(128), 2.0, 1.0, SolveMethod::direct), kUnit).residual;
  Detail d;
  d.kv("stochastic_err", std::max(row_err, col_err))
      .kv("min_entry", min_entry)
      .kv("q_norm", map.q_norm)
      .kv("init_spread", spread)
      .kv("bracketed", bracketed)
      .kv("lin32", lin32)
      .kv("lin128", lin128);
  const bool ok = std::max(row_err, col_err) <= 1e-10 && min_entry >= -1e-12 &&
                  map.q_norm < 1.0 && spread <= 1e-9 && bracketed && lin128 < lin32;
  return result(ok, d);
}

CheckResult route_equivalence() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  double worst = 0.0;
  for (int n : {4, 8, 16}) {
    const ChainParams p = kUnit.with_n(n);
    const Matrix a = build_drift(p, CouplingProfile::uniform(p.lambda(), n));
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> t(static_cast<std::size_t>(n));
      for (double& x : t) x = u(rng);
      const TemperatureProfile temps(t);
      const Matrix closed = covariance_closed_form(p, temps).full();
      const Matrix dense =
          lyapunov_dense(a, build_noise(CouplingProfile::uniform(p.lambda(), n), temps));
      const Matrix general =
          lyapunov_spectral_general(p, Matrix::Zero(n, n), Matrix(temps.as_vector().asDiagonal()))
              .full();
      worst = std::max({worst, spectral_norm(closed - dense), spectral_norm(closed - general),
                        spectral_norm(dense - general)});
    }
  }
  Detail d;
  d.kv("max_spectral_gap", worst).kv("profiles", 30);
  return result(worst <= 1e-8, d);
}

CheckResult epsilon_scaling() {
  const std::vector<int> ns{16, 32, 64, 128, 256};
  std::vector<double> eps;
  double worst_ratio = 0.0;
  for (int n : ns) {
    const ChainParams p = kUnit.with_n(n);
    const KineticMap map = kinetic_map(p);
    const SelfConsistentSolution sol = solve_profile(map, 2.0, 1.0, SolveMethod::direct);
    const EpsilonBound eb = epsilon_and_bounds(sol, map, p);
    eps.push_back(eb.epsilon_n);
    worst_ratio = std::max(worst_ratio, eb.ratio);
  }
  const double p_fit = epsilon_decay_exponent(ns, eps);
  Detail d;
  d.kv("max_eps_over_bound", worst_ratio).kv("fitted_exponent", p_fit).kv("observed_O(1/N)", p_fit > 0.9);
  return result(worst_ratio <= 1.0 && p_fit >= 0.5, d);
}

CheckResult high_dimensional_reduction() {
  const LatticeSpec spec(kUnit.with_n(8), {4});
  const FullLatticeResult r = full_lattice_oracle(spec, 2.0, 1.0);
  Detail d;
  d.kv("longitudinal_mismatch", r.longitudinal_mismatch)
      .kv("transverse_max", r.transverse_max)
      .kv("transverse_spread", r.transverse_spread);
  return result(r.longitudinal_mismatch <= 1e-7 && r.transverse_max <= 1e-9 &&
                    r.transverse_spread <= 1e-9,
                d);
}

CheckResult appendix_c_asymptotics() {
  const std::vector<int> ds{2, 4, 8, 16, 32, 64};
  const std::vector<AsymptoticRow> rows = asymptotic_check(kUnit, ds);
  bool decreasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i) decreasing = decreasing && rows[i].error < rows[i - 1].error;
  const InnerIntegrals at0 = inner_integrals(0.0);
  std::vector<double> grid;
  for (int k = 0; k <= 60; ++k) grid.push_back(std::pow(10.0, -3.0 + 0.1 * k));
  const double ratio = inner_bound_ratio(grid);
  Detail d;
  d.kv("dI64", rows.back().d_i)
      .kv("err64", rows.back().error)
      .kv("err2", rows.front().error)
      .kv("decreasing", decreasing)
      .kv("I0(0)-1", at0.i0 - 1.0)
      .kv("I1(0)-0.5", at0.i1 - 0.5)
      .kv("max_I0_sqrt(1+t)", ratio);
  return result(decreasing && rows.back().error < 0.01 && std::abs(at0.i0 - 1.0) <= 1e-12 &&
                    std::abs(at0.i1 - 0.5) <= 1e-12 && ratio <= 1.0,
                d);
}

CheckResult nonuniform_couplings() {
  const int n = 65;
  const ChainParams p = kUnit.with_n(n);
  const NonuniformReport rep = nonuniform_transport(p, CouplingProfile::every_m(1.0, 2, n), 2.0, 1.0);
  const double kappa = kappa_closed_form(p).kappa;
  const double ratio = rep.kappa_bar / (2.0 * kappa);
  const double stretch = uncoupled_stretch_spread(rep.state.solution);

  // macroscopic gap (middle third uncoupled): drop across the gap, reported only
  auto gap_drop = [](int size) {
    std::vector<double> lam(static_cast<std::size_t>(size), 1.0);
    for (int i = size / 3; i < 2 * size / 3; ++i) lam[static_cast<std::size_t>(i)] = 0.0;
    const GeneralSolution g = solve_profile_general(kUnit.with_n(size), CouplingProfile(lam), 2.0, 1.0);
    const auto& t = g.solution.profile.temps();
    return t[static_cast<std::size_t>(size / 3 - 1)] - t[static_cast<std::size_t>(2 * size / 3)];
  };
  Detail d;
  d.kv("kappa_ratio_to_2kappa", ratio)
      .kv("current_spread", rep.current_spread)
      .kv("zero_stretch_spread", stretch)
      .kv("gap_drop_N33", gap_drop(33))
      .kv("gap_drop_N65", gap_drop(65));
  return result(std::abs(ratio - 1.0) <= 0.05 && stretch <= 1e-8, d);
}

CheckResult monte_carlo_oracle() {
  const int n = 4;
  const ChainParams p = kUnit.with_n(n);
  SimulationConfig cfg;
  cfg.seed = 7;
  cfg.total_time = 1e4;
  cfg.step = 0.1;
  const EstimatedMoments m = estimate_stationary(cfg, p, CouplingProfile::uniform(1.0, n),
                                                 TemperatureProfile::uniform(1.0, n));
  Vector x0 = Vector::Zero(2 * n);
  x0(0) = 1.0;
  const double mean_err = mean_decay_error(p, x0, 0.1, 200);
  Detail d;
  d.kv("within_4sigma", m.within_4sigma).kv("max_z", m.max_z_scores).kv("mean_path_err", mean_err);
  return result(m.within_4sigma >= 0.95 && mean_err <= 1e-10, d);
}

CheckResult propagator_bound() {
  double worst_exp = 0.0;
  for (int n : {1, 5, 30}) {
    const ChainParams p = kUnit.with_n(n);
    const Matrix a = build_drift(p, CouplingProfile::uniform(p.lambda(), n));
    for (double t : {0.5, 1.0, 2.0, 5.0}) {
      const Matrix dense = (-t * a).exp();
      worst_exp = std::max(worst_exp, max_abs(propagator_matrix(p, t) - dense));
    }
  }
  // rho = 0 exactly up to 1e-10 relative: lambda^2/4 = mu_1 = 3 at N = 1
  const ChainParams degenerate(1.0, 1.0, 2.0 * std::sqrt(3.0) * (1.0 + 1e-10), 1);
  {
    const Matrix a = build_drift(degenerate, CouplingProfile::uniform(degenerate.lambda(), 1));
    for (double t : {0.5, 1.0, 2.0, 5.0}) {
      worst_exp = std::max(worst_exp, max_abs(propagator_matrix(degenerate, t) - (-t * a).exp()));
    }
  }
  std::vector<double> grid;
  for (int k = 0; k <= 200; ++k) grid.push_back(0.1 * k);
  const std::vector<ChainParams> sets{kUnit.with_n(30), ChainParams(2.0, 0.5, 0.3, 20), degenerate};
  bool holds = true;
  for (const ChainParams& p : sets) holds = holds && propagator_bound_report(p, grid).all_hold();
  Detail d;
  d.kv("max_exp_error", worst_exp).kv("envelope_holds", holds).kv("parameter_sets", sets.size());
  return result(worst_exp <= 1e-9 && holds, d);
}

// --- quick invariants --------------------------------------------------------

CheckResult spectral_basis() {
  const ChainParams p(1.3, 0.7, 1.0, 20);
  const SpectralData sd = spectral_data(p);
  const int n = p.n();
  const double orth = max_abs(sd.f.transpose() * sd.f - Matrix::Identity(n, n));
  const double diag = max_abs(sd.f * sd.mu.asDiagonal() * sd.f.transpose() - build_phi(p));
  Detail d;
  d.kv("orthogonality", orth).kv("diagonalization", diag);
  return result(orth <= 1e-12 && diag <= 1e-10, d);
}

CheckResult kinetic_map_structure() {
  const ChainParams p = kUnit.with_n(12);
  const KineticMap map = kinetic_map(p);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  double worst = INFINITY;
  for (int k = 0; k < 100; ++k) {
    Vector x(p.n());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
    worst = std::min(worst, quadratic_form_margin(map, x) / x.squaredNorm());
  }
  Detail d;
  d.kv("q_norm", map.q_norm).kv("min_quadratic_margin", worst);
  return result(map.q_norm < 1.0 && worst >= -1e-12, d);
}

CheckResult kappa_routes() {
  const double a = kappa_closed_form(kUnit).kappa;
  const double b = kappa_integral(kUnit).kappa;
  Detail d;
  d.kv("closed_form", a).kv("integral", b).kv("target", 1.0 / (3.0 + std::sqrt(5.0)));
  return result(std::abs(a - b) <= 1e-10 && std::abs(a - 1.0 / (3.0 + std::sqrt(5.0))) <= 1e-14, d);
}

CheckResult current_routes() {
  const ChainParams p = kUnit.with_n(32);
  const SelfConsistentSolution sol = solve_profile(p, 2.0, 1.0, SolveMethod::direct);
  const CovarianceBlocks s = covariance_closed_form(p, sol.profile);
  const TransportReport rep = transport_report(p, sol, s);
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < rep.reservoir_fluxes.size(); ++i) {
    interior = std::max(interior, std::abs(rep.reservoir_fluxes[i]));
  }
  const double rel_spread = rep.current_spread / std::abs(rep.j_n);
  Detail d;
  d.kv("relative_spread", rel_spread)
      .kv("max_interior_flux", interior)
      .kv("R1-J", rep.reservoir_fluxes.front() - rep.j_n);
  return result(rel_spread <= 1e-10 && interior <= 1e-11 &&
                    std::abs(rep.reservoir_fluxes.front() - rep.j_n) <= 1e-10,
                d);
}

}  // namespace

std::vector<Check> acceptance_checks() {
  return {
      {"A1", "conductivity convergence", 60.0, conductivity_convergence},
      {"A2", "Green-Kubo equality", 120.0, green_kubo_equality},
      {"A3", "self-consistency structure", 0.0, self_consistency_structure},
      {"A4", "covariance route equivalence", 30.0, route_equivalence},
      {"A5", "epsilon_N scaling", 0.0, epsilon_scaling},
      {"A6", "high-dimensional reduction", 60.0, high_dimensional_reduction},
      {"A7", "conductivity integral asymptotics", 0.0, appendix_c_asymptotics},
      {"A8", "non-uniform couplings", 0.0, nonuniform_couplings},
      {"A9", "Monte Carlo oracle", 120.0, monte_carlo_oracle},
      {"A10", "propagator bound", 0.0, propagator_bound},
  };
}

std::vector<Check> invariant_checks() {
  return {
      {"I1", "sine basis diagonalizes Phi", 0.0, spectral_basis},
      {"I2", "kinetic map quadratic form bound", 0.0, kinetic_map_structure},
      {"I3", "kappa closed form vs integral", 0.0, kappa_routes},
      {"I4", "current constancy and flux balance", 0.0, current_routes},
  };
}

CheckResult run_check(const Check& check) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = check.run();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.id = check.id;
  r.title = check.title;
  r.budget = check.budget;
  if (r.budget > 0.0 && r.seconds > r.budget) {
    r.passed = false;
    r.detail += " (over runtime budget)";
  }
  return r;
}

}  // namespace crystal_heat::checks

#include "oracles.hpp"

#include "crystal_heat/numerics.hpp"
#include "crystal_heat/selfconsistency.hpp"
#include "crystal_heat/transport.hpp"

#include <doctest.h>

#include <cmath>

using namespace crystal_heat;

namespace {
const double kKappa = 1.0 / (3.0 + std::sqrt(5.0));
}

TEST_CASE("currents") {
  const ChainParams p(1, 1, 1, 6);
  for (double j : currents_from_covariance(equilibrium_covariance(p, 1.3), p)) CHECK(j == 0.0);

  const ChainParams p2(1, 1, 1, 2);
  const CovarianceBlocks s = covariance_closed_form(p2, TemperatureProfile({1, 0}));
  const auto jz = currents_from_covariance(s, p2);
  const auto ju = currents_from_positions(s, p2, CouplingProfile::uniform(1, 2));
  CHECK(std::abs(jz[0] - ju[0]) < 1e-10);
  CHECK(jz[0] > 0);

  const ChainParams p32(1, 1, 1, 32);
  const SelfConsistentSolution sol = solve_profile(p32, 2, 1, SolveMethod::direct);
  const auto js = currents_from_covariance(covariance_closed_form(p32, sol.profile), p32);
  const auto [lo, hi] = std::minmax_element(js.begin(), js.end());
  CHECK(*hi - *lo <= 1e-10 * std::abs(*hi));
}

TEST_CASE("reservoir fluxes") {
  const ChainParams p(1, 1, 1, 16);
  const CouplingProfile cp = CouplingProfile::uniform(1, 16);
  const auto eq = TemperatureProfile::uniform(2, 16);
  for (double r : reservoir_fluxes(equilibrium_covariance(p, 2), eq, cp)) CHECK(std::abs(r) < 1e-14);

  const SelfConsistentSolution sol = solve_profile(p, 2, 1, SolveMethod::direct);
  const CovarianceBlocks s = covariance_closed_form(p, sol.profile);
  const auto r = reservoir_fluxes(s, sol.profile, cp);
  const double j = currents_from_covariance(s, p).front();
  CHECK(std::abs(r.front() - j) < 1e-12);
  CHECK(std::abs(r.back() + j) < 1e-12);
  for (std::size_t i = 1; i + 1 < r.size(); ++i) CHECK(std::abs(r[i]) < 1e-12);

  const auto lin = TemperatureProfile::linear(2, 1, 16);
  const auto rl = reservoir_fluxes(covariance_closed_form(p, lin), lin, cp);
  double sum = 0.0, interior = 0.0;
  for (std::size_t i = 0; i < rl.size(); ++i) {
    sum += rl[i];
    if (i > 0 && i + 1 < rl.size()) interior = std::max(interior, std::abs(rl[i]));
  }
  CHECK(std::abs(sum) < 1e-9);
  CHECK(interior > 1e-6);
}

TEST_CASE("conductivity closed form and integral") {
  const ChainParams p(1, 1, 1, 2);
  CHECK(kappa_closed_form(p).kappa == doctest::Approx(kKappa).epsilon(1e-14));
  CHECK(std::abs(kappa_integral(p).kappa - kKappa) < 1e-10);

  const ChainParams q(1.3, 0.8, 0.7, 2);
  const double k = kappa_closed_form(q).kappa;
  CHECK(kappa_closed_form(q.with_omega(2.6).with_nu2(q.nu2())).kappa == doctest::Approx(4 * k).epsilon(1e-13));
  CHECK(kappa_closed_form(q.with_lambda(1.4)).kappa == doctest::Approx(k / 2).epsilon(1e-13));

  const ChainParams soft = p.with_nu2(1e-12);
  CHECK(std::abs(kappa_closed_form(soft).kappa - 0.5) < 1e-5 * 0.5);

  // the denominator breaks the x -> 1 - x symmetry, so only additivity holds
  for (double nu2 : {0.3, 1.0, 4.0}) {
    const double halves = kappa_integrand_integral(nu2, 0, 0.5) + kappa_integrand_integral(nu2, 0.5, 1);
    CHECK(std::abs(halves - kappa_integrand_integral(nu2, 0, 1)) < 1e-12);
    CHECK(kappa_integrand_integral(nu2, 0, 0.5) > kappa_integrand_integral(nu2, 0.5, 1));
  }

  const ChainParams big(1, 1, 1, 400);
  const double phi11 = build_phi(big).inverse()(0, 0);
  CHECK(std::abs(phi11 - phi_inverse_11_limit(big)) < 1e-2);
}

TEST_CASE("finite-N conductivity") {
  const ChainParams p(1, 1, 1, 2);
  const std::vector<int> ns{16, 32, 64, 128};
  const ConductivityScan scan = finite_n_conductivity(p, 2, 1, ns);
  for (std::size_t i = 1; i < scan.rows.size(); ++i) {
    CHECK(std::abs(scan.rows[i].kappa_estimate - kKappa) < std::abs(scan.rows[i - 1].kappa_estimate - kKappa));
  }
  for (const auto& r : scan.rows) CHECK(std::abs(r.kappa_estimate - r.kappa_u_route) < 1e-9);
  CHECK(std::abs(scan.extrapolated - kKappa) < 1e-4 * kKappa);

  const std::vector<int> one{24};
  const auto fwd = finite_n_conductivity(p, 2, 1, one).rows[0];
  const auto rev = finite_n_conductivity(p, 1, 2, one).rows[0];
  CHECK(fwd.j_n == doctest::Approx(-rev.j_n).epsilon(1e-12));
  CHECK(fwd.kappa_estimate == doctest::Approx(rev.kappa_estimate).epsilon(1e-12));
  CHECK((2 - 1) * fwd.j_n >= 0);
}

TEST_CASE("epsilon bound") {
  const ChainParams p(1, 1, 1, 24);
  const KineticMap map = kinetic_map(p);
  const EpsilonBound eq = epsilon_and_bounds(solve_profile(map, 1.5, 1.5, SolveMethod::direct), map, p);
  CHECK(eq.epsilon_n == 0.0);
  CHECK(eq.bound == 0.0);

  const ChainParams p64(1, 1, 1, 64);
  const KineticMap m64 = kinetic_map(p64);
  const EpsilonBound b = epsilon_and_bounds(solve_profile(m64, 2, 1, SolveMethod::direct), m64, p64);
  CHECK(b.epsilon_n <= b.bound);

  std::vector<int> ns{16, 32, 64, 128, 256};
  std::vector<double> eps;
  for (int n : ns) eps.push_back(solve_profile(p.with_n(n), 2, 1, SolveMethod::direct).profile.max_jump());
  CHECK(epsilon_decay_exponent(ns, eps) >= 0.5);
}

TEST_CASE("profile linearity") {
  const ChainParams p20(1, 1, 1, 20);
  CHECK(profile_linearity(solve_profile(p20, 2, 1, SolveMethod::direct), p20).identity_residual <= 1e-10);

  const ChainParams p3(1, 1, 1, 3);
  CHECK(profile_linearity(solve_profile(p3, 2, 1, SolveMethod::direct), p3).residual < 1e-14);

  const auto r32 = profile_linearity(solve_profile(p20.with_n(32), 2, 1, SolveMethod::direct), p20.with_n(32));
  const auto r128 = profile_linearity(solve_profile(p20.with_n(128), 2, 1, SolveMethod::direct), p20.with_n(128));
  CHECK(r128.residual < r32.residual);
}

TEST_CASE("non-uniform transport") {
  const ChainParams p(1, 1, 1, 20);
  const NonuniformReport u = nonuniform_transport(p, CouplingProfile::uniform(1, 20), 2, 1);
  const double direct = finite_n_conductivity(p, 2, 1, std::vector<int>{20}).rows[0].kappa_estimate;
  CHECK(u.kappa_bar == doctest::Approx(direct).epsilon(1e-9));
  CHECK(u.identity_residual < 1e-9);

  const NonuniformReport m2 = nonuniform_transport(p.with_n(65), CouplingProfile::every_m(1, 2, 65), 2, 1);
  CHECK(std::abs(m2.kappa_bar / (2 * kKappa) - 1) < 0.05);
  CHECK(m2.current_spread <= 1e-10 * std::abs(m2.j_n));

  auto halves = [](int n) {
    std::vector<double> lam(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) lam[static_cast<std::size_t>(i)] = i < n / 2 ? 0.5 : 1.5;
    return nonuniform_transport(ChainParams(1, 1, 1, n), CouplingProfile(lam), 2, 1).profile_deviation;
  };
  CHECK(halves(128) < halves(64));
}

#include "oracles.hpp"

#include "crystal_heat/montecarlo.hpp"
#include "crystal_heat/selfconsistency.hpp"

#include <doctest.h>

#include <cmath>

using namespace crystal_heat;

TEST_CASE("zero temperature from rest stays at rest") {
  const ChainParams p(1, 1, 1, 3);
  const ExactPropagator prop(p, CouplingProfile::uniform(1, 3), TemperatureProfile::uniform(0, 3), 0.1);
  auto rng = make_stream(5, 0);
  Vector x = Vector::Zero(6);
  for (int k = 0; k < 100; ++k) x = exact_step(x, prop, rng);
  CHECK(x.isZero(0));
}

TEST_CASE("mean decay") {
  const ChainParams p(1, 1, 1, 4);
  Vector e1 = Vector::Zero(8);
  e1(0) = 1;
  CHECK(mean_decay_error(p, e1, 0.05, 200) <= 1e-10);
}

TEST_CASE("transition matrices") {
  const ChainParams p(1, 1, 1, 5);
  const CouplingProfile u = CouplingProfile::uniform(1, 5);
  const CouplingProfile nu({1, 0, 0.5, 0, 2});
  for (const auto& cp : {u, nu}) {
    const Matrix a = build_drift(p, cp);
    CHECK(max_abs(transition_matrix(p, cp, 0.3) - oracle::expm(-0.3 * a)) < 1e-12);
  }
  // two half steps equal one full step in law
  const auto t = TemperatureProfile::linear(2, 1, 5);
  const ExactPropagator full(p, u, t, 0.2);
  const ExactPropagator half(p, u, t, 0.1);
  const Matrix p2 = half.transition() * half.transition();
  CHECK(max_abs(p2 - full.transition()) < 1e-12);
  const Matrix inc2 = half.transition() * half.increment_covariance() * half.transition().transpose() +
                      half.increment_covariance();
  CHECK(max_abs(inc2 - full.increment_covariance()) < 1e-12);
  CHECK(max_abs(full.factor() * full.factor().transpose() - full.increment_covariance()) < 1e-12);
}

TEST_CASE("single site equilibrium") {
  const ChainParams p(1, 1, 1, 1);
  SimulationConfig cfg;
  cfg.total_time = 1e4;
  const EstimatedMoments m = estimate_stationary(cfg, p, CouplingProfile::uniform(1, 1), TemperatureProfile::uniform(1, 1));
  CHECK(m.samples >= 100000);
  CHECK(std::abs(m.cov(1, 1) - 1.0) <= 3 * m.stderr_(1, 1) + 1e-12);
}

TEST_CASE("stationary moments against the analytic covariance") {
  const ChainParams p(1, 1, 1, 4);
  SimulationConfig cfg;
  cfg.total_time = 1e4;
  const auto eq = TemperatureProfile::uniform(1, 4);
  const EstimatedMoments m = estimate_stationary(cfg, p, CouplingProfile::uniform(1, 4), eq);
  CHECK(m.within_4sigma >= 0.95);
  CHECK(std::abs(m.flux_sum) <= 4 * m.flux_sum_stderr);
  const Matrix z = m.cov.topRightCorner(4, 4);
  const Matrix zse = m.stderr_.topRightCorner(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(z(i, j) + z(j, i)) <= 4 * (zse(i, j) + zse(j, i)) + 1e-12);

  const ChainParams p8(1, 1, 1, 8);
  const auto sc = solve_profile(p8, 2, 1, SolveMethod::direct).profile;
  const EstimatedMoments m8 = estimate_stationary(cfg, p8, CouplingProfile::uniform(1, 8), sc);
  const double exact = covariance_closed_form(p8, sc).z(0, 1);
  CHECK(std::abs(m8.currents[0] - exact) <= 4 * m8.current_stderr[0]);
}

TEST_CASE("seeded runs are reproducible") {
  const ChainParams p(1, 1, 1, 3);
  SimulationConfig cfg;
  cfg.total_time = 200;
  cfg.trajectories = 3;
  const auto t = TemperatureProfile::linear(2, 1, 3);
  const auto cp = CouplingProfile::uniform(1, 3);
  const EstimatedMoments a = estimate_stationary(cfg, p, cp, t);
  cfg.threads = 3;
  const EstimatedMoments b = estimate_stationary(cfg, p, cp, t);
  CHECK(max_abs(a.cov - b.cov) == 0.0);
  cfg.seed = 2;
  const EstimatedMoments c = estimate_stationary(cfg, p, cp, t);
  CHECK(max_abs(a.cov - c.cov) > 0.0);
}

TEST_CASE("relaxation rate") {
  const ChainParams p(1, 1, 1, 4);
  const ConvergenceRate r1 = convergence_rate(p, TemperatureProfile::uniform(1, 4), 10, 40);
  CHECK(r1.rate >= 0.9 * 2 * p.decay_floor());
  const ConvergenceRate r10 = convergence_rate(p, TemperatureProfile::uniform(10, 4), 10, 40);
  CHECK(std::abs(r1.rate - r10.rate) <= 1e-6);
  const double tl = 60 / p.decay_floor();
  CHECK(convergence_rate(p, TemperatureProfile::uniform(1, 4), tl - 1, tl, 2).final_gap < 1e-8);
}

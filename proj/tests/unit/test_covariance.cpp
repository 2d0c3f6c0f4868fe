#include "oracles.hpp"

#include "crystal_heat/covariance.hpp"
#include "crystal_heat/errors.hpp"
#include "crystal_heat/selfconsistency.hpp"

#include <doctest.h>

#include <cmath>

using namespace crystal_heat;

namespace {
const ChainParams kUnit(1, 1, 1, 2);
}

TEST_CASE("G function") {
  CHECK(g_function(1, 1, kUnit) == doctest::Approx(1.0));
  CHECK(g_function(1, -1, kUnit) == doctest::Approx(7.0));
  const ChainParams p(1, 0.5, 2, 2);
  double lo = 1e300;
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j <= 200; ++j) lo = std::min(lo, g_function(-1 + i / 100.0, -1 + j / 100.0, p));
  CHECK(lo >= 1.0 - 1e-12);
}

TEST_CASE("kernels") {
  for (double x : {-1.0, -0.3, 0.0, 0.8}) {
    CHECK(f_block(Block::z, x, x, kUnit) == 0.0);
    CHECK(f_block(Block::v, x, x, kUnit) == doctest::Approx(1.0));
  }
  CHECK(f_block(Block::u, 1, 0, kUnit) == doctest::Approx(1.0 / 3));
  CHECK(f_block(Block::v, 1, 0, kUnit) == doctest::Approx(2.0 / 3));
  CHECK(f_block(Block::z, 1, 0, kUnit) == doctest::Approx(-1.0 / 3));

  const ChainParams p(1.1, 0.7, 1.3, 24);
  const SpectralData sd = spectral_data(p);
  for (int k = 0; k < 24; ++k)
    for (int l = 0; l < 24; ++l) {
      const double f = f_block(Block::v, sd.c(k), sd.c(l), p);
      CHECK(f >= -1e-15);
      CHECK(f <= 1 + 1e-15);
    }
}

TEST_CASE("dense Lyapunov solver") {
  Matrix s = lyapunov_dense(Matrix::Identity(3, 3), 2 * Matrix::Identity(3, 3));
  CHECK(max_abs(s - Matrix::Identity(3, 3)) < 1e-14);

  Matrix a = Vector::LinSpaced(2, 1, 2).asDiagonal();
  Matrix c(2, 2);
  c << 2, 3, 3, 4;
  CHECK(max_abs(lyapunov_dense(a, c) - Matrix::Ones(2, 2)) < 1e-14);

  SUBCASE("against the Kronecker system") {
    const ChainParams p(1.2, 0.9, 0.7, 4);
    const CouplingProfile cp({0.7, 0.0, 1.4, 0.3});
    const Matrix drift = build_drift(p, cp);
    const Matrix noise = build_noise(cp, TemperatureProfile(oracle::random_temps(4, 0.5, 2, 3)));
    CHECK(max_abs(lyapunov_dense(drift, noise) - oracle::lyapunov_kronecker(drift, noise)) < 1e-11);
  }

  SUBCASE("against time quadrature") {
    const ChainParams p(1, 1, 1, 6);
    const CouplingProfile cp = CouplingProfile::uniform(1, 6);
    const Matrix drift = build_drift(p, cp);
    const Matrix noise = build_noise(cp, TemperatureProfile(oracle::random_temps(6, 0.5, 1.5, 4)));
    const Matrix quad = oracle::lyapunov_time_quadrature(drift, noise, 60 / p.decay_floor(), 1e-3);
    CHECK(max_abs(lyapunov_dense(drift, noise) - quad) < 1e-6);
  }

  CHECK_THROWS_AS(lyapunov_dense(-Matrix::Identity(2, 2), Matrix::Identity(2, 2)), unstable_drift_error);
}

TEST_CASE("closed-form covariance") {
  SUBCASE("uniform temperature is Gibbs") {
    const ChainParams p(1.3, 0.6, 0.8, 20);
    const CovarianceBlocks s = covariance_closed_form(p, TemperatureProfile::uniform(1.7, 20));
    const CovarianceBlocks e = equilibrium_covariance(p, 1.7);
    CHECK(max_abs(s.u - e.u) < 1e-10);
    CHECK(max_abs(s.v - e.v) < 1e-10);
    CHECK(max_abs(s.z) < 1e-10);
    CHECK(max_abs(e.u - 1.7 * build_phi(p).inverse()) < 1e-12);
  }

  SUBCASE("residual at N=2") {
    const ChainParams p = kUnit;
    const CouplingProfile cp = CouplingProfile::uniform(1, 2);
    const TemperatureProfile t({1, 0});
    CHECK(lyapunov_residual(build_drift(p, cp), covariance_closed_form(p, t).full(), build_noise(cp, t)) < 1e-10);
  }

  SUBCASE("matches the dense solver") {
    for (int n : {3, 8, 16}) {
      const ChainParams p(1, 1, 1, n);
      const CouplingProfile cp = CouplingProfile::uniform(1, n);
      const TemperatureProfile t(oracle::random_temps(n, 0.5, 1.5, 10 + n));
      const Matrix dense = lyapunov_dense(build_drift(p, cp), build_noise(cp, t));
      CHECK(spectral_norm(covariance_closed_form(p, t).full() - dense) < 1e-8);
    }
  }

  SUBCASE("linear in the temperatures") {
    const ChainParams p(1, 1, 1, 9);
    const auto a = oracle::random_temps(9, 0, 2, 1);
    const auto b = oracle::random_temps(9, 0, 2, 2);
    std::vector<double> sum(9), scaled(9);
    for (int i = 0; i < 9; ++i) {
      sum[i] = a[i] + b[i];
      scaled[i] = 3.5 * a[i];
    }
    const Matrix sa = covariance_closed_form(p, TemperatureProfile(a)).full();
    const Matrix sb = covariance_closed_form(p, TemperatureProfile(b)).full();
    CHECK(max_abs(covariance_closed_form(p, TemperatureProfile(sum)).full() - sa - sb) < 1e-10);
    CHECK(max_abs(covariance_closed_form(p, TemperatureProfile(scaled)).full() - 3.5 * sa) < 1e-10);
  }

  SUBCASE("structure") {
    const ChainParams p(1, 1, 1, 12);
    const CovarianceBlocks s = covariance_closed_form(p, TemperatureProfile(oracle::random_temps(12, 0, 3, 7)));
    CHECK(max_abs(s.z + s.z.transpose()) < 1e-12);
    CHECK(is_positive_semidefinite(s.u));
    CHECK(is_positive_semidefinite(s.v));
  }
}

TEST_CASE("general-noise spectral solve") {
  const ChainParams p(1, 1, 1, 7);
  const TemperatureProfile t(oracle::random_temps(7, 0.5, 1.5, 5));
  const Matrix d = t.as_vector().asDiagonal();
  const CovarianceBlocks g = lyapunov_spectral_general(p, Matrix::Zero(7, 7), d);
  const CovarianceBlocks c = covariance_closed_form(p, t);
  CHECK(max_abs(g.full() - c.full()) < 1e-12);

  SUBCASE("random b and symmetric d") {
    const ChainParams q(1, 1, 1, 5);
    const Matrix b = oracle::random_matrix(5, 5, 8);
    Matrix dd = oracle::random_matrix(5, 5, 9);
    dd = (dd + dd.transpose()).eval();
    const CovarianceBlocks s = lyapunov_spectral_general(q, b, dd);
    Matrix noise = Matrix::Zero(10, 10);
    noise.topRightCorner(5, 5) = b;
    noise.bottomLeftCorner(5, 5) = b.transpose();
    noise.bottomRightCorner(5, 5) = 2 * q.lambda() * dd;
    CHECK(lyapunov_residual(build_drift(q, CouplingProfile::uniform(1, 5)), s.full(), noise) < 1e-9);
  }
}

TEST_CASE("equilibrium covariance") {
  const ChainParams p(1, 1, 1, 5);
  const CovarianceBlocks z = equilibrium_covariance(p, 0);
  CHECK(max_abs(z.full()) == 0.0);
  const CovarianceBlocks one = equilibrium_covariance(ChainParams(1, 1, 1, 1), 2);
  CHECK(one.u(0, 0) == doctest::Approx(2.0 / 3));
  CHECK(one.v(0, 0) == 2.0);
  CHECK(one.z(0, 0) == 0.0);
  const ChainParams q(0.7, 1.4, 2.2, 11);
  const CouplingProfile cp = CouplingProfile::uniform(2.2, 11);
  CHECK(lyapunov_residual(build_drift(q, cp), equilibrium_covariance(q, 1.3).full(),
                          build_noise(cp, TemperatureProfile::uniform(1.3, 11))) < 1e-10);
}

TEST_CASE("folded coefficients") {
  const ChainParams p(1, 1, 1, 8);
  const FoldedCoefficients fz = folded_coefficients(Block::z, p);
  CHECK(std::abs(fz(0, 0)) < 1e-14);

  const FoldedCoefficients fu = folded_coefficients(Block::u, p);
  const Matrix b3 = unit_response_direct(Block::u, p, spectral_data(p), 3);
  CHECK(std::abs(fu.reconstruct(2, 5, 3) - b3(1, 4)) < 1e-8);
  CHECK(fu.residual() < 1e-8);
  CHECK(fu.reduce(-9) == fu.reduce(9));
}

TEST_CASE("decay estimates") {
  const ChainParams p(1, 1, 1, 16);
  for (Block b : {Block::u, Block::v, Block::z}) CHECK(decay_estimate(b, p).alpha > 0);
  const double a16 = decay_estimate(Block::u, p).a_prime;
  const double a32 = decay_estimate(Block::u, p.with_n(32)).a_prime;
  CHECK(std::abs(a16 - a32) < 0.1 * a32);
}

TEST_CASE("local equilibrium deviation") {
  const ChainParams p(1, 1, 1, 16);
  const auto eq = TemperatureProfile::uniform(1.5, 16);
  const LocalEquilibriumDeviation d0 = local_equilibrium_deviation(covariance_closed_form(p, eq), eq, p);
  CHECK(d0.deviation < 1e-12);
  CHECK(d0.epsilon_n == 0.0);

  auto deviation = [](int n) {
    const ChainParams q(1, 1, 1, n);
    const SelfConsistentSolution sol = solve_profile(q, 2, 1, SolveMethod::direct);
    return local_equilibrium_deviation(covariance_closed_form(q, sol.profile), sol.profile, q);
  };
  const LocalEquilibriumDeviation d32 = deviation(32);
  double a_prime = 0.0;
  for (Block b : {Block::u, Block::v, Block::z}) a_prime = std::max(a_prime, decay_estimate(b, p.with_n(32)).a_prime);
  CHECK(d32.deviation <= a_prime * d32.epsilon_n);
  CHECK(deviation(64).deviation < deviation(16).deviation);
}

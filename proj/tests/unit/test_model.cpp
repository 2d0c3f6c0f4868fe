#include "oracles.hpp"

#include "crystal_heat/errors.hpp"
#include "crystal_heat/model.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace crystal_heat;

TEST_CASE("force matrix small cases") {
  Matrix expect(3, 3);
  expect << 3, -1, 0, -1, 3, -1, 0, -1, 3;
  CHECK(max_abs(build_phi(ChainParams(1, 1, 1, 3)) - expect) == 0.0);

  Matrix two(2, 2);
  two << 8.25, -4, -4, 8.25;
  CHECK(max_abs(build_phi(ChainParams(2, 0.5, 1, 2)) - two) < 1e-14);
}

TEST_CASE("smallest eigenvalue of Phi is mu_1") {
  const ChainParams p(1, 1, 1, 50);
  Eigen::SelfAdjointEigenSolver<Matrix> es(build_phi(p));
  CHECK(std::abs(es.eigenvalues()(0) - spectral_data(p).mu(0)) < 1e-10);
  const SpectralData sd = spectral_data(p);
  const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  CHECK(std::abs(cond - sd.mu(49) / sd.mu(0)) < 1e-9 * cond);
}

TEST_CASE("spectral data") {
  CHECK(std::abs(spectral_data(ChainParams(1, 1, 1, 1)).mu(0) - 3.0) < 1e-14);
  const SpectralData s3 = spectral_data(ChainParams(1, 1, 1, 3));
  CHECK(std::abs(s3.c(0) - std::sqrt(0.5)) < 1e-15);
  CHECK(std::abs(s3.c(1)) < 1e-15);
  CHECK(std::abs(s3.c(2) + std::sqrt(0.5)) < 1e-15);

  const ChainParams p(1.3, 0.7, 1, 20);
  const SpectralData sd = spectral_data(p);
  const Matrix d = sd.f.transpose() * build_phi(p) * sd.f;
  CHECK(max_abs(d - Matrix(sd.mu.asDiagonal())) < 1e-10);
  CHECK(max_abs(sd.f * sd.f - Matrix::Identity(20, 20)) < 1e-13);
}

TEST_CASE("drift matrix") {
  Matrix expect(2, 2);
  expect << 0, -1, 3, 1;
  CHECK(max_abs(build_drift(ChainParams(1, 1, 1, 1), CouplingProfile::uniform(1, 1)) - expect) == 0.0);

  SUBCASE("lambda = 0 gives imaginary pairs") {
    // CouplingProfile needs one positive entry, so assemble the conservative drift here
    const ChainParams p(1, 1, 1, 6);
    Matrix a = Matrix::Zero(12, 12);
    a.topRightCorner(6, 6) = -Matrix::Identity(6, 6);
    a.bottomLeftCorner(6, 6) = build_phi(p);
    const Eigen::VectorXcd ev = a.eigenvalues();
    const SpectralData sd = spectral_data(p);
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
      CHECK(std::abs(ev(k).real()) < 1e-10);
      double best = 1e9;
      for (int j = 0; j < 6; ++j) best = std::min(best, std::abs(std::abs(ev(k).imag()) - std::sqrt(sd.mu(j))));
      CHECK(best < 1e-10);
    }
  }

  SUBCASE("decay floor") {
    const ChainParams p(1, 1, 0.5, 10);
    const Eigen::VectorXcd ev = build_drift(p, CouplingProfile::uniform(0.5, 10)).eigenvalues();
    for (Eigen::Index k = 0; k < ev.size(); ++k) CHECK(ev(k).real() >= p.decay_floor() - 1e-10);
  }

  SUBCASE("eigenvalues alpha_k^pm") {
    for (int n : {5, 20, 50}) {
      const ChainParams p(1, 0.8, 1.7, n);
      const SpectralData sd = spectral_data(p);
      Eigen::VectorXcd ev = build_drift(p, CouplingProfile::uniform(1.7, n)).eigenvalues();
      const double l = p.lambda();
      for (int k = 0; k < n; ++k) {
        for (double sgn : {1.0, -1.0}) {
          const std::complex<double> alpha = l / 2 + sgn * std::sqrt(std::complex<double>(l * l / 4 - sd.mu(k)));
          double best = 1e9;
          for (Eigen::Index j = 0; j < ev.size(); ++j) best = std::min(best, std::abs(ev(j) - alpha));
          CHECK(best < 1e-8);
        }
      }
    }
  }
}

TEST_CASE("noise matrix") {
  Matrix n2 = build_noise(CouplingProfile::uniform(1, 2), TemperatureProfile::uniform(1, 2));
  CHECK(max_abs(n2.bottomRightCorner(2, 2) - 2 * Matrix::Identity(2, 2)) == 0.0);
  CHECK(max_abs(build_noise(CouplingProfile::uniform(1, 4), TemperatureProfile::uniform(0, 4))) == 0.0);
  Matrix n3 = build_noise(CouplingProfile({1, 0, 2}), TemperatureProfile({1, 5, 0.5}));
  CHECK(n3(3, 3) == 2.0);
  CHECK(n3(4, 4) == 0.0);
  CHECK(n3(5, 5) == 2.0);
  CHECK(max_abs(n3.topRows(3)) == 0.0);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ChainParams(1, 0, 1, 4), validation_error);
  CHECK_THROWS_AS(ChainParams(0, 1, 1, 4), validation_error);
  CHECK_THROWS_AS(ChainParams(1, 1, -1, 4), validation_error);
  CHECK_THROWS_AS(ChainParams(1, 1, 1, 0), validation_error);
  CHECK_THROWS_AS(ChainParams(1, 1, 1, 3000), validation_error);
  CHECK_THROWS_AS(CouplingProfile({0, 0}), validation_error);
  CHECK_THROWS_AS(build_current_matrix(1), validation_error);
}

TEST_CASE("current matrix") {
  Matrix k3(3, 3);
  k3 << 1, -1, 0, 1, 0, -1, 0, 1, -1;
  CHECK(max_abs(build_current_matrix(3) - k3) == 0.0);
  Matrix k2(2, 2);
  k2 << 1, -1, 1, -1;
  CHECK(max_abs(build_current_matrix(2) - k2) == 0.0);

  for (int n : {2, 5, 17}) {
    const Matrix k = build_current_matrix(n);
    for (unsigned s = 0; s < 20; ++s) {
      const Vector q = oracle::random_matrix(n, 1, 100 + s);
      const Vector pm = oracle::random_matrix(n, 1, 200 + s);
      double direct = 0.0;
      for (int i = 0; i + 1 < n; ++i) direct += (q(i) - q(i + 1)) * (pm(i) + pm(i + 1));
      CHECK(std::abs(pm.dot(k * q) - direct) < 1e-12);
    }
  }
}

TEST_CASE("propagator") {
  const ChainParams p(1, 1, 1, 30);
  std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 5.0};
  const PropagatorBoundReport r = propagator_bound_report(p, grid);
  CHECK(r.rows[0].norm == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.all_hold());

  const ChainParams one(1, 1, 1, 1);
  const Matrix a = build_drift(one, CouplingProfile::uniform(1, 1));
  CHECK(std::abs(propagator_norm(one, 1.0) - spectral_norm(oracle::expm(-a))) < 1e-9);

  for (double t : {0.1, 1.0, 4.0}) {
    const ChainParams q(1.2, 0.6, 0.9, 12);
    const Matrix aq = build_drift(q, CouplingProfile::uniform(0.9, 12));
    CHECK(max_abs(propagator_matrix(q, t) - oracle::expm(-t * aq)) < 1e-10);
  }
}

TEST_CASE("mode propagator near the critical damping point") {
  // lambda^2 = 4 mu exactly and slightly off
  for (double eps : {0.0, 1e-16, 1e-10, 1e-6, 1e-3}) {
    const double lambda = 2.0;
    const double mu = 1.0 + eps;
    Matrix a(2, 2);
    a << 0, -1, mu, lambda;
    for (double t : {0.01, 1.0, 10.0}) {
      const Matrix expect = oracle::expm(-t * a);
      CHECK(max_abs(Matrix(mode_propagator(mu, lambda, t)) - expect) < 1e-12);
    }
  }
}

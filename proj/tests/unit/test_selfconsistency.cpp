#include "oracles.hpp"

#include "crystal_heat/highdim.hpp"
#include "crystal_heat/selfconsistency.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace crystal_heat;

TEST_CASE("kinetic map against unit-reservoir solves") {
  for (int n : {2, 4, 7}) {
    const ChainParams p(1.1, 0.8, 1.3, n);
    CHECK(max_abs(kinetic_map(p).m - oracle::kinetic_map_naive(p)) < 1e-11);
  }
}

TEST_CASE("kinetic map structure") {
  const KineticMap m10 = kinetic_map(ChainParams(1, 1, 1, 10));
  CHECK((m10.m.rowwise().sum().array() - 1).abs().maxCoeff() < 1e-10);

  const Matrix m2 = kinetic_map(ChainParams(1, 1, 1, 2)).m;
  CHECK(std::abs(m2(0, 0) - m2(1, 1)) < 1e-14);
  CHECK(std::abs(m2(0, 1) - (1 - m2(0, 0))) < 1e-14);

  const KineticMap m12 = kinetic_map(ChainParams(1, 1, 1, 12));
  for (unsigned s = 0; s < 100; ++s) CHECK(quadratic_form_margin(m12, oracle::random_matrix(12, 1, s)) >= -1e-12);

  // ||Q|| <= 1 - min_{x in W, |x| = 1} |Dx|^2 / c_G; the minimum is the smallest Dirichlet Laplacian eigenvalue
  const double lap_min = 4 * std::pow(std::sin(M_PI / (2 * 11)), 2);
  CHECK(contraction_norm(m12) <= 1 - lap_min / m12.c_g + 1e-12);
}

TEST_CASE("contraction norm") {
  const KineticMap m3 = kinetic_map(ChainParams(1, 1, 1, 3));
  CHECK(contraction_norm(m3) == doctest::Approx(m3.m(1, 1)).epsilon(1e-14));
  double last = 0.0;
  for (int n = 10; n <= 80; n += 10) {
    const double q = contraction_norm(kinetic_map(ChainParams(1, 1, 1, n)));
    CHECK(q > last);
    CHECK(q < 1.0);
    last = q;
  }
}

TEST_CASE("profile solve") {
  const ChainParams p(1, 1, 1, 12);
  const SelfConsistentSolution eq = solve_profile(p, 1.5, 1.5, SolveMethod::direct);
  for (double t : eq.profile.temps()) CHECK(std::abs(t - 1.5) < 1e-13);
  CHECK(eq.residual <= 1e-13);

  const SelfConsistentSolution three = solve_profile(ChainParams(1.7, 0.4, 2.1, 3), 1, 0, SolveMethod::neumann);
  CHECK(std::abs(three.profile[1] - 0.5) < 1e-12);

  const ChainParams p64(1, 1, 1, 64);
  const auto d = solve_profile(p64, 2, 1, SolveMethod::direct).profile.temps();
  const auto nm = solve_profile(p64, 2, 1, SolveMethod::neumann).profile.temps();
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(std::abs(d[i] - nm[i]) < 1e-9);
    CHECK(d[i] >= 1.0);
    CHECK(d[i] <= 2.0);
    if (i > 0) CHECK(d[i] < d[i - 1]);
  }
}

TEST_CASE("profile symmetries") {
  const ChainParams p(1.2, 0.9, 0.8, 20);
  const auto base = solve_profile(p, 2, 1, SolveMethod::direct).profile.temps();

  SUBCASE("mirror") {
    auto flipped = solve_profile(p, 1, 2, SolveMethod::direct).profile.temps();
    std::reverse(flipped.begin(), flipped.end());
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(std::abs(base[i] - flipped[i]) < 1e-10);
  }
  SUBCASE("affine") {
    const double a = 2.5, b = 0.75;
    const auto shifted = solve_profile(p, a * 2 + b, a * 1 + b, SolveMethod::direct).profile.temps();
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(std::abs(shifted[i] - (a * base[i] + b)) < 1e-10);
  }
  SUBCASE("unique fixed point") {
    const KineticMap map = kinetic_map(p);
    std::vector<Vector> starts{Vector::Constant(20, 1.0), Vector::Constant(20, 2.0), Vector::LinSpaced(20, 2, 1)};
    for (const Vector& x : starts) {
      SolverOptions opt;
      opt.initial = x;
      const auto sol = solve_profile(map, 2, 1, SolveMethod::neumann, opt).profile.temps();
      for (std::size_t i = 0; i < base.size(); ++i) CHECK(std::abs(sol[i] - base[i]) < 1e-9);
    }
  }
}

TEST_CASE("general couplings") {
  const ChainParams p(1, 1, 1, 10);
  const auto uni = solve_profile(p, 2, 1, SolveMethod::direct).profile.temps();
  const auto gen = solve_profile_general(p, CouplingProfile::uniform(1, 10), 2, 1).solution.profile.temps();
  for (std::size_t i = 0; i < uni.size(); ++i) CHECK(std::abs(uni[i] - gen[i]) < 1e-9);

  const GeneralSolution m2 = solve_profile_general(p.with_n(9), CouplingProfile::every_m(1, 2, 9), 2, 1);
  CHECK(uncoupled_stretch_spread(m2.solution) < 1e-8);
  CHECK_FALSE(m2.solution.coupled[1]);

  SUBCASE("alternating couplings, both methods") {
    std::vector<double> lam(16);
    for (int i = 0; i < 16; ++i) lam[i] = i % 2 ? 1.5 : 0.5;
    const ChainParams q(1, 1, 1, 16);
    const GeneralSolution d = solve_profile_general(q, CouplingProfile(lam), 2, 1, SolveMethod::direct);
    FixedPointOptions tight;
    tight.tolerance = 1e-13;
    const GeneralSolution f = solve_profile_general(q, CouplingProfile(lam), 2, 1, SolveMethod::fixed_point, tight);
    CHECK(f.solution.residual <= 1e-9);
    CHECK(d.solution.residual <= 1e-9);
    const auto td = d.solution.profile.temps();
    const auto tf = f.solution.profile.temps();
    for (std::size_t i = 0; i < td.size(); ++i) {
      CHECK(td[i] >= 1 - 1e-12);
      CHECK(td[i] <= 2 + 1e-12);
      CHECK(std::abs(td[i] - tf[i]) < 1e-7);
    }
  }
}

TEST_CASE("higher-dimensional profile") {
  const ChainParams p(1, 1, 1, 12);
  const std::vector<int> one{1};
  const auto a = solve_profile(p, 2, 1, SolveMethod::direct).profile.temps();
  const auto b = solve_profile_highdim(p, one, 2, 1).profile.temps();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);

  const std::vector<int> eight{8};
  const auto h = solve_profile_highdim(p.with_n(16), eight, 2, 1).profile.temps();
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(h[i] >= 1.0);
    CHECK(h[i] <= 2.0);
    if (i > 0) CHECK(h[i] < h[i - 1]);
  }

  const std::vector<int> four{4};
  const auto s = solve_profile_highdim(p.with_n(8), four, 2, 1).profile.temps();
  const FullLatticeResult full = full_lattice_oracle(LatticeSpec(p.with_n(8), four), 2, 1);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(full.temperatures(i, 0) - s[static_cast<std::size_t>(i)]) < 1e-8);
}

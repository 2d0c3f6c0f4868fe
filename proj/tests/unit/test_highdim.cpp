#include "crystal_heat/highdim.hpp"
#include "crystal_heat/transport.hpp"

#include <doctest.h>

#include <cmath>

using namespace crystal_heat;

namespace {
const ChainParams kUnit(1, 1, 1, 8);
const double kKappa = 1.0 / (3.0 + std::sqrt(5.0));
}

TEST_CASE("transverse modes") {
  const std::vector<int> one{1};
  CHECK(transverse_modes(1.0, one).nus2 == std::vector<double>{1.0});
  const std::vector<int> two{2};
  const ModeSet m2 = transverse_modes(1.0, two);
  CHECK(m2.total() == 2);
  CHECK(m2.nus2.front() == doctest::Approx(1.0));
  CHECK(m2.nus2.back() == doctest::Approx(5.0));
  const std::vector<int> four{4, 4};
  const ModeSet m4 = transverse_modes(1.0, four);
  CHECK(m4.total() == 16);
  CHECK(*std::min_element(m4.nus2.begin(), m4.nus2.end()) == doctest::Approx(1.0));
  CHECK(*std::max_element(m4.nus2.begin(), m4.nus2.end()) == doctest::Approx(9.0));
}

TEST_CASE("mode-sum conductivity") {
  CHECK(kappa_highdim_sum(LatticeSpec(kUnit, {1})).kappa == doctest::Approx(kKappa).epsilon(1e-14));
  const double k64 = kappa_highdim_sum(LatticeSpec(kUnit, {64})).kappa;
  CHECK(std::abs(k64 - kappa_highdim_integral(kUnit, 2).kappa) < 1e-3);
  CHECK(kappa_highdim_sum(LatticeSpec(kUnit, {4})).kappa < kKappa);
  for (double nu2 : mode_set(LatticeSpec(kUnit, {6, 3})).nus2) {
    CHECK(kappa_closed_form(kUnit.with_nu2(nu2)).kappa <= kKappa + 1e-15);
  }
}

TEST_CASE("integral conductivity") {
  CHECK(kappa_highdim_integral(kUnit, 1).kappa == doctest::Approx(kKappa).epsilon(1e-12));
  CHECK(std::abs(kappa_highdim_tensor(kUnit, 2) - appendix_c_representation(kUnit, 2)) < 1e-7);
  double last = 1.0;
  for (int d = 1; d <= 6; ++d) {
    const double k = kappa_highdim_integral(kUnit, d).kappa;
    CHECK(k < last);
    last = k;
  }
}

TEST_CASE("inner integrals") {
  CHECK(std::abs(inner_integrals(0).i0 - 1.0) < 1e-12);
  CHECK(std::abs(inner_integrals(0).i1 - 0.5) < 1e-12);
  for (double t : {1e-3, 0.1, 1.0, 10.0, 100.0, 300.0}) {
    const InnerIntegrals in = inner_integrals(t);
    CHECK(std::abs(in.i0 - std::exp(-2 * t) * std::cyl_bessel_i(0.0, 2 * t)) < 1e-13);
    CHECK(std::abs(in.i1 - std::exp(-2 * t) * std::cyl_bessel_i(1.0, 2 * t) / (2 * t)) < 1e-13);
  }
  const std::vector<double> ts{0.1, 1, 10, 100};
  CHECK(inner_bound_ratio(ts) <= 1.0);
  CHECK(std::abs(appendix_c_representation(kUnit, 1) - kKappa) < 1e-8);
}

TEST_CASE("large-d asymptotics") {
  const std::vector<int> ds{2, 4, 8, 16, 32, 64};
  const auto rows = asymptotic_check(kUnit, ds);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].d_i > 0);
    CHECK(rows[i].d_i < 0.25 + 1e-12);
    if (i > 0) CHECK(rows[i].error < rows[i - 1].error);
  }
}

TEST_CASE("full lattice oracle") {
  const LatticeSpec spec(kUnit, {4});
  const FullLatticeResult r = full_lattice_oracle(spec, 2, 1);
  CHECK(r.longitudinal_mismatch <= 1e-7);
  CHECK(r.transverse_max <= 1e-9);

  const FullLatticeResult one = full_lattice_oracle(LatticeSpec(kUnit, {1}), 2, 1);
  const auto chain = solve_profile(kUnit, 2, 1, SolveMethod::direct).profile.temps();
  for (int i = 0; i < 8; ++i) CHECK(std::abs(one.temperatures(i, 0) - chain[static_cast<std::size_t>(i)]) < 1e-9);
}

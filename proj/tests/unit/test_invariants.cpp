#include "crystal_heat/checks.hpp"

#include <doctest.h>

TEST_CASE("built-in invariant checks pass") {
  for (const auto& c : crystal_heat::checks::invariant_checks()) {
    const auto r = crystal_heat::checks::run_check(c);
    INFO(r.id << " " << r.detail);
    CHECK(r.passed);
  }
}

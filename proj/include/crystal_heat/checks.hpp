#pragma once

#include <functional>
#include <string>
#include <vector>

namespace crystal_heat::checks {

struct CheckResult {
  std::string id;
  std::string title;
  bool passed = false;
  std::string detail;     ///< key measured quantities
  double seconds = 0.0;
  double budget = 0.0;    ///< runtime budget in seconds; 0 means none
};

struct Check {
  std::string id;
  std::string title;
  double budget = 0.0;
  std::function<CheckResult()> run;
};

/// The ten end-to-end acceptance criteria.
std::vector<Check> acceptance_checks();

/// Quick invariant checks (small sizes) used by `selftest` alongside the
/// acceptance criteria.
std::vector<Check> invariant_checks();

/// Runs one check, timing it and turning exceptions into failures.
CheckResult run_check(const Check& check);

}  // namespace crystal_heat::checks

#pragma once

#include <stdexcept>
#include <string>

namespace crystal_heat {

/// Invalid input: bad parameters, mismatched dimensions, domain violations.
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed or produced a result violating its contract.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The drift matrix has an eigenvalue with non-positive real part.
class unstable_drift_error : public numerical_error {
 public:
  explicit unstable_drift_error(double min_real_part)
      : numerical_error("drift matrix is not stable: min Re(eigenvalue) = " +
                        std::to_string(min_real_part)),
        min_real_part_(min_real_part) {}

  double min_real_part() const noexcept { return min_real_part_; }

 private:
  double min_real_part_;
};

/// An iterative method did not reach its tolerance.
class convergence_error : public numerical_error {
 public:
  convergence_error(const std::string& what, int iterations, double residual)
      : numerical_error(what + " (iterations=" + std::to_string(iterations) +
                        ", residual=" + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// A discretized computation could not reach the requested accuracy.
class resolution_error : public numerical_error {
 public:
  resolution_error(const std::string& what, double achieved)
      : numerical_error(what + " (achieved residual " +
                        std::to_string(achieved) + ")"),
        achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

}  // namespace crystal_heat

#pragma once

#include "crystal_heat/covariance.hpp"
#include "crystal_heat/model.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace crystal_heat {

struct SimulationConfig {
  std::uint64_t seed = 1;
  double step = 0.1;         ///< sampling interval h
  double burn_in = 0.0;      ///< discarded time; 0 selects 10 / decay floor
  double total_time = 1e4;   ///< sampled time per trajectory
  int trajectories = 1;
  int batches = 20;
  int threads = 1;
};

/// One stream per trajectory, seeded from (seed, trajectory).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t trajectory);

/// Exact Gaussian transition X(t+h) = exp(-hA) X(t) + L xi with
/// L L^T = S - exp(-hA) S exp(-hA)^T, S the stationary covariance.
class ExactPropagator {
 public:
  ExactPropagator(const ChainParams& params, const CouplingProfile& couplings,
                  const TemperatureProfile& temps, double h);

  double step() const noexcept { return h_; }
  const Matrix& transition() const noexcept { return transition_; }
  const Matrix& increment_covariance() const noexcept { return increment_; }
  const Matrix& factor() const noexcept { return factor_; }
  const Matrix& stationary() const noexcept { return stationary_; }

  Vector advance(const Vector& x, std::mt19937_64& rng) const;

 private:
  double h_;
  Matrix transition_;
  Matrix stationary_;
  Matrix increment_;
  Matrix factor_;
};

/// exp(-hA): per-mode closed form for uniform couplings, dense
/// exponential otherwise.
Matrix transition_matrix(const ChainParams& params, const CouplingProfile& couplings, double h);

Vector exact_step(const Vector& state, const ExactPropagator& prop, std::mt19937_64& rng);

struct EstimatedMoments {
  Vector mean;
  Matrix cov;      ///< sample second moments E[X X^T]
  Matrix stderr_;  ///< batch-means standard errors of cov
  std::vector<double> currents;         ///< omega^2 <-(q_{i+1}-q_i)(p_i+p_{i+1})/2>
  std::vector<double> current_stderr;
  double flux_sum = 0.0;                ///< time average of sum_i lambda_i (T_i - p_i^2)
  double flux_sum_stderr = 0.0;
  long samples = 0;
  long effective_samples = 0;
  double within_4sigma = 0.0;           ///< fraction of upper-triangle entries within 4 stderr of S
  double max_z_scores = 0.0;            ///< max |cov - S| / stderr
};

EstimatedMoments estimate_stationary(const SimulationConfig& config, const ChainParams& params,
                                     const CouplingProfile& couplings,
                                     const TemperatureProfile& temps);

/// Deterministic mean path exp(-tA) x0 sampled by chaining exact steps with
/// zero temperature; returns max |X(t) - exp(-tA) x0| over the path.
double mean_decay_error(const ChainParams& params, const Vector& x0, double h, int steps);

struct ConvergenceRate {
  double rate = 0.0;      ///< fitted -d/dt log ||C(t,t) - S||
  double final_gap = 0.0; ///< ||C(t_end) - S||
  std::vector<std::pair<double, double>> samples;
};

/// Cold start C_0 = 0: C(t,t) - S = -exp(-tA) S exp(-tA^T). Uniform couplings.
ConvergenceRate convergence_rate(const ChainParams& params, const TemperatureProfile& temps,
                                 double t_start, double t_end, int points = 60);

}  // namespace crystal_heat

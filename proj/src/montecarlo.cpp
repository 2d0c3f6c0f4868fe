#include "crystal_heat/montecarlo.hpp"

#include "crystal_heat/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <thread>

namespace crystal_heat {

namespace {

Matrix stationary_full(const ChainParams& params, const CouplingProfile& couplings,
                       const TemperatureProfile& temps) {
  if (couplings.is_uniform() && params.lambda() > 0.0 &&
      couplings[0] == params.lambda()) {
    return covariance_closed_form(params, temps).full();
  }
  const LyapunovSolver solver(build_drift(params, couplings));
  return symmetric_part(solver.solve(build_noise(couplings, temps)));
}

// L with L L^T = c for a symmetric PSD c, tolerating roundoff negatives.
bool psd_factor(const Matrix& c, Matrix& out) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  const Vector& ev = es.eigenvalues();
  const double scale = std::max(1e-300, std::max(std::abs(c.trace()), max_abs(c)));
  if (ev.minCoeff() < -1e-10 * scale) return false;
  out = es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  return true;
}

struct BatchSums {
  Vector x;
  Matrix xx;
  Vector j;
  double flux = 0.0;
  double p1_2 = 0.0;
  double p1_4 = 0.0;
  long count = 0;
};

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t trajectory) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trajectory),
                    static_cast<std::uint32_t>(trajectory >> 32)};
  return std::mt19937_64(seq);
}

Matrix transition_matrix(const ChainParams& params, const CouplingProfile& couplings, double h) {
  if (couplings.size() != params.n()) throw validation_error("coupling profile length mismatch");
  if (couplings.is_uniform() && couplings[0] == params.lambda()) {
    return propagator_matrix(params, h);
  }
  const Matrix a = build_drift(params, couplings);
  return (-h * a).exp();
}

ExactPropagator::ExactPropagator(const ChainParams& params, const CouplingProfile& couplings,
                                 const TemperatureProfile& temps, double h)
    : h_(h) {
  if (!(h > 0.0)) throw validation_error("step must be positive");
  if (temps.size() != params.n()) throw validation_error("temperature profile length mismatch");
  transition_ = transition_matrix(params, couplings, h);
  stationary_ = stationary_full(params, couplings, temps);
  increment_ = stationary_ - transition_ * stationary_ * transition_.transpose();
  if (!psd_factor(increment_, factor_)) {
    increment_ = symmetric_part(increment_);
    if (!psd_factor(increment_, factor_)) {
      throw numerical_error("increment covariance is not positive semidefinite");
    }
  }
}

Vector ExactPropagator::advance(const Vector& x, std::mt19937_64& rng) const {
  std::normal_distribution<double> normal;
  Vector xi(x.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = normal(rng);
  return transition_ * x + factor_ * xi;
}

Vector exact_step(const Vector& state, const ExactPropagator& prop, std::mt19937_64& rng) {
  if (state.size() != prop.transition().rows()) throw validation_error("state dimension mismatch");
  return prop.advance(state, rng);
}

EstimatedMoments estimate_stationary(const SimulationConfig& config, const ChainParams& params,
                                     const CouplingProfile& couplings,
                                     const TemperatureProfile& temps) {
  if (config.trajectories < 1) throw validation_error("trajectories must be >= 1");
  if (config.batches < 20) throw validation_error("at least 20 batches are required");
  if (!(config.total_time > 0.0) || !(config.step > 0.0) || config.burn_in < 0.0) {
    throw validation_error("times must be positive");
  }
  const int n = params.n();
  const int dim = 2 * n;
  const ExactPropagator prop(params, couplings, temps, config.step);
  double burn = config.burn_in;
  if (burn == 0.0) {
    const double floor = couplings.is_uniform() && couplings[0] == params.lambda()
                             ? params.decay_floor()
                             : LyapunovSolver(build_drift(params, couplings)).min_real_eigenvalue();
    burn = 10.0 / floor;
  }
  const long burn_steps = static_cast<long>(std::ceil(burn / config.step));
  const long samples = static_cast<long>(std::llround(config.total_time / config.step));
  if (samples < config.batches) throw validation_error("total_time too short for the batch count");
  const double omega2 = params.omega() * params.omega();

  const int nb = config.batches;
  std::vector<std::vector<BatchSums>> per_traj(static_cast<std::size_t>(config.trajectories));
  auto run = [&](int traj) {
    std::mt19937_64 rng = make_stream(config.seed, static_cast<std::uint64_t>(traj));
    std::vector<BatchSums> sums(static_cast<std::size_t>(nb));
    for (auto& s : sums) {
      s.x = Vector::Zero(dim);
      s.xx = Matrix::Zero(dim, dim);
      s.j = Vector::Zero(std::max(0, n - 1));
    }
    Vector x = Vector::Zero(dim);
    for (long k = 0; k < burn_steps; ++k) x = prop.advance(x, rng);
    for (long k = 0; k < samples; ++k) {
      x = prop.advance(x, rng);
      BatchSums& s = sums[static_cast<std::size_t>(k * nb / samples)];
      s.x += x;
      s.xx.selfadjointView<Eigen::Upper>().rankUpdate(x);
      for (int i = 0; i + 1 < n; ++i) {
        s.j(i) += -0.5 * omega2 * (x(i + 1) - x(i)) * (x(n + i) + x(n + i + 1));
      }
      double flux = 0.0;
      for (int i = 0; i < n; ++i) {
        flux += couplings[static_cast<std::size_t>(i)] *
                (temps[static_cast<std::size_t>(i)] - x(n + i) * x(n + i));
      }
      s.flux += flux;
      const double p2 = x(n) * x(n);
      s.p1_2 += p2;
      s.p1_4 += p2 * p2;
      ++s.count;
    }
    per_traj[static_cast<std::size_t>(traj)] = std::move(sums);
  };
  const int threads = std::max(1, std::min(config.threads, config.trajectories));
  for (int base = 0; base < config.trajectories; base += threads) {
    std::vector<std::thread> pool;
    const int hi = std::min(config.trajectories, base + threads);
    for (int t = base + 1; t < hi; ++t) pool.emplace_back(run, t);
    run(base);
    for (auto& th : pool) th.join();
  }

  // batch means; reduction in trajectory order keeps results deterministic
  std::vector<Matrix> cov_means;
  std::vector<Vector> x_means, j_means;
  std::vector<double> flux_means;
  double p2 = 0.0, p4 = 0.0;
  long total = 0;
  for (const auto& sums : per_traj) {
    for (const auto& s : sums) {
      const double c = static_cast<double>(s.count);
      Matrix m = s.xx.selfadjointView<Eigen::Upper>();
      cov_means.push_back(m / c);
      x_means.push_back(s.x / c);
      j_means.push_back(s.j / c);
      flux_means.push_back(s.flux / c);
      p2 += s.p1_2;
      p4 += s.p1_4;
      total += s.count;
    }
  }
  const auto nbt = static_cast<double>(cov_means.size());
  EstimatedMoments out;
  out.samples = total;
  out.mean = Vector::Zero(dim);
  out.cov = Matrix::Zero(dim, dim);
  Vector jbar = Vector::Zero(std::max(0, n - 1));
  for (std::size_t b = 0; b < cov_means.size(); ++b) {
    out.mean += x_means[b] / nbt;
    out.cov += cov_means[b] / nbt;
    jbar += j_means[b] / nbt;
    out.flux_sum += flux_means[b] / nbt;
  }
  Matrix var = Matrix::Zero(dim, dim);
  Vector jvar = Vector::Zero(jbar.size());
  double fvar = 0.0;
  for (std::size_t b = 0; b < cov_means.size(); ++b) {
    var += (cov_means[b] - out.cov).cwiseAbs2();
    jvar += (j_means[b] - jbar).cwiseAbs2();
    fvar += (flux_means[b] - out.flux_sum) * (flux_means[b] - out.flux_sum);
  }
  const double denom = nbt * (nbt - 1.0);
  out.stderr_ = (var / denom).cwiseSqrt();
  out.currents.assign(jbar.data(), jbar.data() + jbar.size());
  for (Eigen::Index i = 0; i < jvar.size(); ++i) out.current_stderr.push_back(std::sqrt(jvar(i) / denom));
  out.flux_sum_stderr = std::sqrt(fvar / denom);

  const double m2 = p2 / total;
  const double sample_var = p4 / total - m2 * m2;
  const double se = out.stderr_(n, n);
  out.effective_samples = se > 0.0 ? std::llround(sample_var / (se * se)) : total;

  const Matrix& s = prop.stationary();
  long pass = 0, count = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      const double diff = std::abs(out.cov(i, j) - s(i, j));
      const double sd = out.stderr_(i, j);
      const double z = sd > 0.0 ? diff / sd : (diff == 0.0 ? 0.0 : INFINITY);
      out.max_z_scores = std::max(out.max_z_scores, z);
      if (z <= 4.0) ++pass;
      ++count;
    }
  }
  out.within_4sigma = static_cast<double>(pass) / count;
  return out;
}

double mean_decay_error(const ChainParams& params, const Vector& x0, double h, int steps) {
  const int n = params.n();
  if (x0.size() != 2 * n) throw validation_error("state dimension mismatch");
  const CouplingProfile couplings = CouplingProfile::uniform(params.lambda(), n);
  const ExactPropagator prop(params, couplings, TemperatureProfile::uniform(0.0, n), h);
  std::mt19937_64 rng = make_stream(0, 0);
  Vector x = x0;
  double worst = 0.0;
  for (int k = 1; k <= steps; ++k) {
    x = prop.advance(x, rng);
    const Vector exact = propagator_matrix(params, k * h) * x0;
    worst = std::max(worst, (x - exact).cwiseAbs().maxCoeff());
  }
  return worst;
}

ConvergenceRate convergence_rate(const ChainParams& params, const TemperatureProfile& temps,
                                 double t_start, double t_end, int points) {
  if (!(t_end > t_start) || t_start < 0.0 || points < 2) {
    throw validation_error("need 0 <= t_start < t_end and at least two points");
  }
  const Matrix s = covariance_closed_form(params, temps).full();
  ConvergenceRate out;
  std::vector<double> ts, logs;
  for (int k = 0; k < points; ++k) {
    const double t = t_start + (t_end - t_start) * k / (points - 1);
    const Matrix p = propagator_matrix(params, t);
    const double gap = spectral_norm(p * s * p.transpose());
    out.samples.emplace_back(t, gap);
    if (gap > 0.0) {
      ts.push_back(t);
      logs.push_back(std::log(gap));
    }
  }
  if (ts.size() < 2) throw numerical_error("covariance gap vanished; no rate to fit");
  out.rate = -fit_line(ts, logs).slope;
  out.final_gap = out.samples.back().second;
  return out;
}

}  // namespace crystal_heat

#include "crystal_heat/selfconsistency.hpp"

#include "crystal_heat/errors.hpp"
#include "crystal_heat/highdim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crystal_heat {

namespace {

constexpr double kDirectTolerance = 1e-12;
constexpr double kNeumannTolerance = 1e-10;

Matrix interior_block(const Matrix& m) {
  const Eigen::Index n = m.rows();
  if (n <= 2) return Matrix(0, 0);
  return m.block(1, 1, n - 2, n - 2);
}

double interior_residual(const Matrix& m, const Vector& t) {
  const Eigen::Index n = t.size();
  if (n <= 2) return 0.0;
  const Vector kinetic = m * t;
  return (t - kinetic).segment(1, n - 2).cwiseAbs().maxCoeff();
}

// Interior part of the (1,0) profile by (I - Q) a = b.
Vector unit_profile_direct(const Matrix& m) {
  const Eigen::Index n = m.rows();
  const Matrix q = interior_block(m);
  const Vector b = m.col(0).segment(1, n - 2);
  const Matrix system = Matrix::Identity(n - 2, n - 2) - q;
  return system.llt().solve(b);
}

// Interior part of the (1,0) profile by the Neumann series a = sum Q^k b.
Vector unit_profile_neumann(const Matrix& m, double q_norm, const Vector& start,
                            const SolverOptions& options, int& iterations) {
  const Eigen::Index n = m.rows();
  const Matrix q = interior_block(m);
  const Vector b = m.col(0).segment(1, n - 2);
  int term_cap = options.max_iterations;
  double stop = options.increment_tolerance;
  if (q_norm > 0.0 && q_norm < 1.0) {
    const double terms = std::ceil(std::log(1e-12) / std::log(q_norm));
    // the term count bounds ||Q^k|| only; allow margin for the initial error
    term_cap = static_cast<int>(std::min<double>(options.max_iterations,
                                                 std::max(1.0, 4.0 * terms)));
    // remaining error <= increment * q / (1 - q)
    stop *= (1.0 - q_norm) / q_norm;
  }
  Vector a = start;
  iterations = 0;
  while (iterations < term_cap) {
    Vector next = q * a + b;
    ++iterations;
    const double inc = (next - a).cwiseAbs().maxCoeff();
    a = std::move(next);
    if (inc < stop) break;
  }
  return a;
}

std::vector<int> coupled_indices(const Vector& lambdas) {
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    if (lambdas(i) > 0.0) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

Matrix noise_for(const Vector& lambdas, const Vector& temps) {
  const Eigen::Index n = lambdas.size();
  Matrix s2 = Matrix::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) s2(n + i, n + i) = 2.0 * lambdas(i) * temps(i);
  return s2;
}

Matrix drift_for(const Matrix& phi, const Vector& lambdas) {
  const Eigen::Index n = phi.rows();
  Matrix a = Matrix::Zero(2 * n, 2 * n);
  a.topRightCorner(n, n) = -Matrix::Identity(n, n);
  a.bottomLeftCorner(n, n) = phi;
  a.bottomRightCorner(n, n) = lambdas.asDiagonal();
  return a;
}

}  // namespace

std::string_view method_name(SolveMethod m) {
  switch (m) {
    case SolveMethod::neumann:
      return "neumann";
    case SolveMethod::direct:
      return "direct";
    case SolveMethod::fixed_point:
      return "fixed_point";
  }
  return "?";
}

double g_upper_constant(const ChainParams& params) {
  constexpr int kGrid = 401;
  double g_max = 0.0;
  for (int a = 0; a < kGrid; ++a) {
    const double x = -1.0 + 2.0 * a / (kGrid - 1);
    for (int b = 0; b < kGrid; ++b) {
      const double y = -1.0 + 2.0 * b / (kGrid - 1);
      g_max = std::max(g_max, g_function(x, y, params));
    }
  }
  return 2.0 * g_max * 1.01;
}

KineticMap make_kinetic_map(Matrix m, double c_g) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw validation_error("kinetic map must be square");
  if (max_abs(m - m.transpose()) > 1e-10) {
    throw numerical_error("kinetic map is not symmetric");
  }
  if (m.minCoeff() < -1e-12) {
    throw numerical_error("kinetic map has a negative entry");
  }
  const double row_err = (m.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double col_err = (m.colwise().sum().array() - 1.0).abs().maxCoeff();
  if (std::max(row_err, col_err) > 1e-10) {
    throw numerical_error("kinetic map is not doubly stochastic (error " +
                          std::to_string(std::max(row_err, col_err)) + ")");
  }
  KineticMap map{symmetric_part(m), 0.0, c_g};
  map.q_norm = contraction_norm(map);
  if (!(map.q_norm < 1.0)) {
    throw numerical_error("interior kinetic map is not a contraction");
  }
  return map;
}

KineticMap kinetic_map(const ChainParams& params) {
  if (params.lambda() <= 0.0) throw validation_error("kinetic map needs lambda > 0");
  const int n = params.n();
  const SpectralData sd = spectral_data(params);
  // F_ik F_jk = [cos(pi(i-j)k/(N+1)) - cos(pi(i+j)k/(N+1))] / (N+1), so
  // M_ij = H(d,d) + H(s,s) - H(d,s) - H(s,d) with d = |i-j|, s = i+j and
  // H = C^T f C, C_km = cos(pi m k/(N+1)) / (N+1).
  const int modes = 2 * n + 1;
  const double np1 = n + 1.0;
  Matrix c(n, modes);
  for (int k = 1; k <= n; ++k) {
    for (int m = 0; m < modes; ++m) {
      const long km = (static_cast<long>(k) * m) % (2L * (n + 1));
      c(k - 1, m) = std::cos(std::numbers::pi * static_cast<double>(km) / np1) / np1;
    }
  }
  Matrix f(n, n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) f(k, l) = f_block(Block::v, sd.c(k), sd.c(l), params);
  }
  const Matrix h = c.transpose() * (f * c);
  Matrix m(n, n);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      const int d = std::abs(i - j);
      const int s = i + j;
      m(i - 1, j - 1) = h(d, d) + h(s, s) - h(d, s) - h(s, d);
    }
  }
  return make_kinetic_map(std::move(m), g_upper_constant(params));
}

double contraction_norm(const KineticMap& map) {
  const Matrix q = interior_block(map.m);
  if (q.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(q, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double quadratic_form_margin(const KineticMap& map, const Vector& x) {
  const Eigen::Index n = x.size();
  if (map.m.rows() != n) throw validation_error("vector length does not match map");
  const double form = x.dot(x - map.m * x);
  double dx2 = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) dx2 += (x(i) - x(i + 1)) * (x(i) - x(i + 1));
  return form - dx2 / map.c_g;
}

SelfConsistentSolution solve_profile(const KineticMap& map, double t_left,
                                     double t_right, SolveMethod method,
                                     const SolverOptions& options) {
  if (!std::isfinite(t_left) || !std::isfinite(t_right) || t_left < 0.0 ||
      t_right < 0.0) {
    throw validation_error("boundary temperatures must be >= 0");
  }
  if (method == SolveMethod::fixed_point) {
    throw validation_error("fixed_point applies to the general solver only");
  }
  const Eigen::Index n = map.m.rows();
  if (n < 2) throw validation_error("self-consistency needs N >= 2");

  Vector unit = Vector::Zero(n);
  unit(0) = 1.0;
  int iterations = 0;
  if (n > 2) {
    if (method == SolveMethod::direct) {
      unit.segment(1, n - 2) = unit_profile_direct(map.m);
    } else {
      Vector start = Vector::Zero(n - 2);
      if (options.initial && t_left != t_right) {
        if (options.initial->size() != n) {
          throw validation_error("initial profile length does not match N");
        }
        start = (options.initial->segment(1, n - 2).array() - t_right) /
                (t_left - t_right);
      }
      unit.segment(1, n - 2) =
          unit_profile_neumann(map.m, map.q_norm, start, options, iterations);
    }
  }
  Vector t = Vector::Constant(n, t_right) + (t_left - t_right) * unit;
  t(0) = t_left;
  t(n - 1) = t_right;
  // rounding can push entries a few ulps outside the bracket
  const double lo = std::min(t_left, t_right);
  const double hi = std::max(t_left, t_right);
  t = t.cwiseMax(lo).cwiseMin(hi);

  const double tol = options.residual_tolerance.value_or(
      method == SolveMethod::direct ? kDirectTolerance : kNeumannTolerance);
  const double residual = interior_residual(map.m, t);
  if (residual > tol * std::max(1.0, hi)) {
    throw convergence_error("self-consistent profile did not reach tolerance",
                            iterations, residual);
  }
  SelfConsistentSolution sol{
      TemperatureProfile(std::vector<double>(t.data(), t.data() + n)), method,
      iterations, residual, std::vector<bool>(static_cast<std::size_t>(n), true)};
  return sol;
}

SelfConsistentSolution solve_profile(const ChainParams& params, double t_left,
                                     double t_right, SolveMethod method,
                                     const SolverOptions& options) {
  return solve_profile(kinetic_map(params), t_left, t_right, method, options);
}

LatticeSolution solve_lattice(const LatticeProblem& problem, double t_left,
                              double t_right, SolveMethod method,
                              const FixedPointOptions& options) {
  const Eigen::Index n = problem.phi.rows();
  if (problem.phi.cols() != n || problem.lambdas.size() != n) {
    throw validation_error("lattice problem dimensions disagree");
  }
  if (t_left < 0.0 || t_right < 0.0) {
    throw validation_error("boundary temperatures must be >= 0");
  }
  std::vector<int> role(static_cast<std::size_t>(n), 0);  // 0 free, 1 left, 2 right
  for (int s : problem.left_sites) role.at(static_cast<std::size_t>(s)) = 1;
  for (int s : problem.right_sites) role.at(static_cast<std::size_t>(s)) = 2;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (role[static_cast<std::size_t>(i)] != 0 && !(problem.lambdas(i) > 0.0)) {
      throw validation_error("boundary reservoirs must have positive coupling");
    }
  }
  const std::vector<int> coupled = coupled_indices(problem.lambdas);
  std::vector<int> unknown;
  for (int i : coupled) {
    if (role[static_cast<std::size_t>(i)] == 0) unknown.push_back(i);
  }

  const LyapunovSolver solver(drift_for(problem.phi, problem.lambdas));

  Vector temps = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (role[static_cast<std::size_t>(i)] == 1) temps(i) = t_left;
    if (role[static_cast<std::size_t>(i)] == 2) temps(i) = t_right;
  }

  auto kinetic = [&](const Vector& t) -> Matrix {
    return solver.solve(noise_for(problem.lambdas, t));
  };
  auto residual_of = [&](const Vector& t, const Matrix& s) {
    double r = 0.0;
    for (int i : unknown) r = std::max(r, std::abs(t(i) - s(n + i, n + i)));
    return r;
  };

  LatticeSolution out;
  const auto k = static_cast<Eigen::Index>(unknown.size());
  if (method == SolveMethod::direct) {
    // V_ii = v0_i + sum_r R_ir T_r over the unknown reservoirs r.
    const Matrix base = kinetic(temps);
    Matrix response(k, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      Vector unit = Vector::Zero(n);
      unit(unknown[static_cast<std::size_t>(c)]) = 1.0;
      const Matrix s = kinetic(unit);
      for (Eigen::Index r = 0; r < k; ++r) {
        response(r, c) = s(n + unknown[static_cast<std::size_t>(r)],
                           n + unknown[static_cast<std::size_t>(r)]);
      }
    }
    Vector v0(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      v0(r) = base(n + unknown[static_cast<std::size_t>(r)],
                   n + unknown[static_cast<std::size_t>(r)]);
    }
    const Vector x =
        (Matrix::Identity(k, k) - response).fullPivLu().solve(v0);
    for (Eigen::Index r = 0; r < k; ++r) temps(unknown[static_cast<std::size_t>(r)]) = x(r);
    out.iterations = 1;
  } else if (method == SolveMethod::fixed_point) {
    const double start = 0.5 * (t_left + t_right);
    for (int i : unknown) temps(i) = start;
    double theta = options.initial_damping;
    double prev_signed = 0.0;
    double prev_residual = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < options.max_iterations; ++it) {
      const Matrix s = kinetic(temps);
      double worst = 0.0;
      double worst_signed = 0.0;
      for (int i : unknown) {
        const double d = s(n + i, n + i) - temps(i);
        if (std::abs(d) > worst) {
          worst = std::abs(d);
          worst_signed = d;
        }
      }
      if (worst <= options.tolerance) break;
      if (it > 0 && worst_signed * prev_signed < 0.0 && worst >= prev_residual) {
        theta *= 0.5;
      }
      prev_signed = worst_signed;
      prev_residual = worst;
      for (int i : unknown) temps(i) += theta * (s(n + i, n + i) - temps(i));
    }
    if (it == options.max_iterations) {
      const Matrix s = kinetic(temps);
      throw convergence_error("damped fixed-point iteration did not converge", it,
                              residual_of(temps, s));
    }
    out.iterations = it;
  } else {
    throw validation_error("lattice solver supports direct and fixed_point");
  }

  const Matrix s = kinetic(temps);
  out.residual = residual_of(temps, s);
  if (out.residual > options.tolerance * std::max({1.0, t_left, t_right})) {
    throw convergence_error("lattice self-consistency residual too large",
                            out.iterations, out.residual);
  }
  out.coupled.assign(static_cast<std::size_t>(n), false);
  for (int i : coupled) out.coupled[static_cast<std::size_t>(i)] = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!out.coupled[static_cast<std::size_t>(i)]) temps(i) = s(n + i, n + i);
  }
  out.temps = temps;
  out.covariance = CovarianceBlocks::from_full(s);
  return out;
}

GeneralSolution solve_profile_general(const ChainParams& params,
                                      const CouplingProfile& couplings,
                                      double t_left, double t_right,
                                      SolveMethod method,
                                      const FixedPointOptions& options) {
  const int n = params.n();
  if (n < 2) throw validation_error("self-consistency needs N >= 2");
  if (couplings.size() != n) {
    throw validation_error("coupling profile length does not match N");
  }
  LatticeProblem problem{build_phi(params), couplings.as_vector(), {0}, {n - 1}};
  LatticeSolution lat = solve_lattice(problem, t_left, t_right, method, options);

  // uncoupled sites: linear interpolation between nearest coupled neighbours
  std::vector<double> t(lat.temps.data(), lat.temps.data() + n);
  int prev = 0;
  for (int i = 1; i < n; ++i) {
    if (!lat.coupled[static_cast<std::size_t>(i)]) continue;
    for (int j = prev + 1; j < i; ++j) {
      const double w = static_cast<double>(j - prev) / (i - prev);
      t[static_cast<std::size_t>(j)] = (1.0 - w) * t[static_cast<std::size_t>(prev)] +
                                       w * t[static_cast<std::size_t>(i)];
    }
    prev = i;
  }
  SelfConsistentSolution sol{TemperatureProfile(std::move(t)), method,
                             lat.iterations, lat.residual, lat.coupled};
  return {std::move(sol), std::move(lat.covariance)};
}

double uncoupled_stretch_spread(const SelfConsistentSolution& solution) {
  const auto& t = solution.profile.temps();
  const auto& coupled = solution.coupled;
  double worst = 0.0;
  std::size_t i = 0;
  while (i < t.size()) {
    if (coupled[i]) {
      ++i;
      continue;
    }
    double lo = t[i], hi = t[i];
    while (i < t.size() && !coupled[i]) {
      lo = std::min(lo, t[i]);
      hi = std::max(hi, t[i]);
      ++i;
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

KineticMap kinetic_map_highdim(const ChainParams& params,
                               std::span<const int> n_transverse) {
  const ModeSet modes = transverse_modes(params.nu2(), n_transverse);
  const int n = params.n();
  Matrix avg = Matrix::Zero(n, n);
  double c_g = 0.0;
  for (std::size_t k = 0; k < modes.nus2.size(); ++k) {
    const KineticMap mk = kinetic_map(params.with_nu2(modes.nus2[k]));
    avg += modes.multiplicity[k] * mk.m;
    c_g = std::max(c_g, mk.c_g);
  }
  avg /= static_cast<double>(modes.total());
  return make_kinetic_map(std::move(avg), c_g);
}

SelfConsistentSolution solve_profile_highdim(const ChainParams& params,
                                             std::span<const int> n_transverse,
                                             double t_left, double t_right,
                                             SolveMethod method) {
  return solve_profile(kinetic_map_highdim(params, n_transverse), t_left, t_right,
                       method);
}

}  // namespace crystal_heat

#include "crystal_heat/highdim.hpp"

#include "crystal_heat/covariance.hpp"
#include "crystal_heat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace crystal_heat {

namespace {

double shift(int k, int n) {
  return 2.0 * (1.0 - std::cos(2.0 * std::numbers::pi * k / n));
}

double kappa_nu2(const ChainParams& params, double nu2) {
  return kappa_closed_form(params.with_nu2(nu2)).kappa;
}

// Periodic trapezoid over [0,1)^dims with m points per axis.
double tensor_trapezoid(const ChainParams& params, int dims, int m) {
  std::vector<double> s(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    const double h = std::sin(std::numbers::pi * a / m);
    s[static_cast<std::size_t>(a)] = 4.0 * h * h;
  }
  const double omega2 = params.omega() * params.omega();
  const double scale = omega2 / params.lambda();
  const double nu2 = params.nu2();
  std::vector<int> idx(static_cast<std::size_t>(dims), 0);
  double sum = 0.0;
  long total = 1;
  for (int d = 0; d < dims; ++d) total *= m;
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    double v = nu2;
    for (int d = 0; d < dims; ++d) {
      v += s[static_cast<std::size_t>(rem % m)];
      rem /= m;
    }
    sum += scale / (2.0 + v + std::sqrt(v * (4.0 + v)));
  }
  return sum / static_cast<double>(total);
}

}  // namespace

LatticeSpec::LatticeSpec(ChainParams params, std::vector<int> n_transverse, int oracle_cap)
    : params_(std::move(params)), n_transverse_(std::move(n_transverse)), oracle_cap_(oracle_cap) {
  if (params_.n() < 2) throw validation_error("lattice needs N >= 2");
  for (int m : n_transverse_) {
    if (m < 1) throw validation_error("transverse sizes must be >= 1");
  }
  if (oracle_cap_ < 1) throw validation_error("oracle cap must be positive");
}

int LatticeSpec::transverse_count() const {
  long c = 1;
  for (int m : n_transverse_) {
    c *= m;
    if (c > 100'000'000) throw validation_error("transverse lattice too large");
  }
  return static_cast<int>(c);
}

int ModeSet::total() const {
  int t = 0;
  for (int m : multiplicity) t += m;
  return t;
}

ModeSet transverse_modes(double nu2, std::span<const int> n_transverse) {
  if (!(nu2 > 0.0)) throw validation_error("nu^2 must be positive");
  // per-axis shifts with k and N-k paired
  std::vector<std::vector<std::pair<double, int>>> axes;
  for (int n : n_transverse) {
    if (n < 1) throw validation_error("transverse sizes must be >= 1");
    std::vector<std::pair<double, int>> axis;
    for (int k = 0; 2 * k <= n; ++k) {
      const int mult = (k == 0 || 2 * k == n) ? 1 : 2;
      axis.emplace_back(shift(k, n), mult);
    }
    axes.push_back(std::move(axis));
  }
  ModeSet set{{nu2}, {1}};
  for (const auto& axis : axes) {
    ModeSet next;
    for (std::size_t a = 0; a < set.nus2.size(); ++a) {
      for (const auto& [s, m] : axis) {
        next.nus2.push_back(set.nus2[a] + s);
        next.multiplicity.push_back(set.multiplicity[a] * m);
      }
    }
    set = std::move(next);
  }
  return set;
}

ModeSet mode_set(const LatticeSpec& spec) {
  return transverse_modes(spec.params().nu2(), spec.n_transverse());
}

KappaResult kappa_highdim_sum(const LatticeSpec& spec) {
  const ModeSet modes = mode_set(spec);
  double sum = 0.0;
  for (std::size_t k = 0; k < modes.nus2.size(); ++k) {
    sum += modes.multiplicity[k] * kappa_nu2(spec.params(), modes.nus2[k]);
  }
  return {sum / modes.total(), spec.params().nu2(), KappaRoute::mode_average};
}

double kappa_highdim_tensor(const ChainParams& params, int d) {
  if (d < 1 || d > 4) throw validation_error("tensor quadrature supports 1 <= d <= 4");
  if (params.lambda() <= 0.0) throw validation_error("kappa needs lambda > 0");
  if (d == 1) return kappa_closed_form(params).kappa;
  int m = 8;
  double prev = tensor_trapezoid(params, d - 1, m);
  while (true) {
    m *= 2;
    const double cur = tensor_trapezoid(params, d - 1, m);
    if (std::abs(cur - prev) <= 1e-10 * std::abs(cur)) return cur;
    if (m >= (d == 4 ? 256 : 4096)) {
      throw resolution_error("tensor quadrature did not settle", std::abs(cur - prev));
    }
    prev = cur;
  }
}

KappaResult kappa_highdim_integral(const ChainParams& params, int d) {
  if (d < 1) throw validation_error("dimension must be >= 1");
  const double omega2 = params.omega() * params.omega();
  const double rep = omega2 / params.lambda() * appendix_c_representation(params, d);
  if (d <= 4) {
    const double tensor = kappa_highdim_tensor(params, d);
    if (std::abs(tensor - rep) > 1e-7 * std::max(1.0, std::abs(tensor))) {
      throw numerical_error("tensor and one-dimensional conductivity routes disagree");
    }
    return {tensor, params.nu2(), KappaRoute::integral};
  }
  return {rep, params.nu2(), KappaRoute::integral};
}

InnerIntegrals inner_integrals(double t) {
  if (!(t >= 0.0)) throw validation_error("inner integrals need t >= 0");
  // periodic analytic integrands: the trapezoid rule converges geometrically,
  // Fourier modes beyond ~12 sqrt(t) are below double precision
  const int m = 2 * (static_cast<int>(std::ceil(12.0 * std::sqrt(t))) + 16);
  double i0 = 0.0;
  double i1 = 0.0;
  for (int a = 0; a < m; ++a) {
    const double y = static_cast<double>(a) / m;
    const double s = std::sin(std::numbers::pi * y);
    const double w = std::exp(-4.0 * t * s * s);
    const double s2 = std::sin(2.0 * std::numbers::pi * y);
    i0 += w;
    i1 += s2 * s2 * w;
  }
  return {i0 / m, i1 / m};
}

double appendix_c_representation(const ChainParams& params, int d) {
  if (d < 1) throw validation_error("dimension must be >= 1");
  const double nu2 = params.nu2();
  const InnerIntegrals at0 = inner_integrals(0.0);
  if (std::abs(at0.i0 - 1.0) > 1e-12 || std::abs(at0.i1 - 0.5) > 1e-12) {
    throw numerical_error("inner integrals fail their t = 0 values");
  }
  // integrand <= exp(-t nu^2) / 2; cut where the tail is below 1e-15
  const double t_max = std::log(1.0 / (2.0 * nu2 * 1e-15)) / nu2;
  const auto f = [nu2, d](double t) {
    const InnerIntegrals in = inner_integrals(t);
    return std::exp(-t * nu2) * in.i1 * std::pow(in.i0, d - 1);
  };
  // most of the mass sits near t = 0 for large d
  const double knee = std::min(t_max, 4.0 / (nu2 + 2.0 * (d - 1)));
  const double head = integrate_adaptive(f, 0.0, knee, 1e-11).value;
  const double tail = integrate_adaptive(f, knee, t_max, 1e-11, 1e-16).value;
  return head + tail;
}

std::vector<AsymptoticRow> asymptotic_check(const ChainParams& params,
                                            std::span<const int> d_values) {
  std::vector<AsymptoticRow> rows;
  for (int d : d_values) {
    const double di = d * appendix_c_representation(params, d);
    rows.push_back({d, di, std::abs(di - 0.25)});
  }
  return rows;
}

double inner_bound_ratio(std::span<const double> t_values) {
  double worst = 0.0;
  for (double t : t_values) {
    worst = std::max(worst, inner_integrals(t).i0 * std::sqrt(1.0 + t));
  }
  return worst;
}

FullLatticeResult full_lattice_oracle(const LatticeSpec& spec, double t_left,
                                      double t_right, SolveMethod method) {
  if (spec.n_transverse().size() != 1) {
    throw validation_error("full lattice oracle supports two dimensions only");
  }
  const int n = spec.n_long();
  const int np = spec.n_transverse().front();
  const int sites = n * np;
  if (sites > spec.oracle_cap()) {
    throw validation_error("lattice exceeds the oracle cap (" + std::to_string(sites) + " > " +
                           std::to_string(spec.oracle_cap()) + ")");
  }
  const ChainParams& p = spec.params();
  const double omega2 = p.omega() * p.omega();
  auto site = [np](int i, int j) { return i * np + ((j % np) + np) % np; };

  // Phi = omega^2 (-Delta_Dirichlet x I - I x Delta_periodic + nu^2 I)
  Matrix phi = Matrix::Zero(sites, sites);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < np; ++j) {
      const int a = site(i, j);
      phi(a, a) += omega2 * (2.0 + p.nu2());
      if (i > 0) phi(a, site(i - 1, j)) -= omega2;
      if (i + 1 < n) phi(a, site(i + 1, j)) -= omega2;
      phi(a, a) += 2.0 * omega2;
      phi(a, site(i, j - 1)) -= omega2;
      phi(a, site(i, j + 1)) -= omega2;
    }
  }
  LatticeProblem problem{phi, Vector::Constant(sites, p.lambda()), {}, {}};
  for (int j = 0; j < np; ++j) {
    problem.left_sites.push_back(site(0, j));
    problem.right_sites.push_back(site(n - 1, j));
  }
  const LatticeSolution sol = solve_lattice(problem, t_left, t_right, method);

  FullLatticeResult out;
  out.residual = sol.residual;
  out.temperatures.resize(n, np);
  out.longitudinal.resize(n - 1, np);
  out.transverse.resize(n, np);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < np; ++j) {
      out.temperatures(i, j) = sol.temps(site(i, j));
      out.transverse(i, j) = np > 1 ? omega2 * sol.covariance.z(site(i, j), site(i, j + 1)) : 0.0;
      if (i + 1 < n) out.longitudinal(i, j) = omega2 * sol.covariance.z(site(i, j), site(i + 1, j));
    }
    out.transverse_spread = std::max(
        out.transverse_spread, out.temperatures.row(i).maxCoeff() - out.temperatures.row(i).minCoeff());
  }
  out.transverse_max = out.transverse.cwiseAbs().maxCoeff();

  // mode decomposition at the lattice profile (column 0 carries it)
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = out.temperatures(i, 0);
  const TemperatureProfile profile(t);
  const ModeSet modes = mode_set(spec);
  out.mode_current.assign(static_cast<std::size_t>(n - 1), 0.0);
  for (std::size_t k = 0; k < modes.nus2.size(); ++k) {
    const CovarianceBlocks s = covariance_closed_form(p.with_nu2(modes.nus2[k]), profile);
    for (int i = 0; i + 1 < n; ++i) {
      out.mode_current[static_cast<std::size_t>(i)] +=
          modes.multiplicity[k] * omega2 * s.z(i, i + 1) / modes.total();
    }
  }
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j < np; ++j) {
      out.longitudinal_mismatch =
          std::max(out.longitudinal_mismatch,
                   std::abs(out.longitudinal(i, j) - out.mode_current[static_cast<std::size_t>(i)]));
    }
  }
  return out;
}

}  // namespace crystal_heat

#include "commands.hpp"

#include "crystal_heat/checks.hpp"
#include "crystal_heat/errors.hpp"
#include "crystal_heat/greenkubo.hpp"
#include "crystal_heat/highdim.hpp"
#include "crystal_heat/montecarlo.hpp"
#include "crystal_heat/selfconsistency.hpp"
#include "crystal_heat/transport.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace cli {

using namespace crystal_heat;
using json = nlohmann::ordered_json;

namespace {

json vec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(std::isfinite(x) ? json(x) : json(nullptr));
  return a;
}

ChainParams physics(const Config& c, int n, double lambda) {
  return ChainParams(c.real("omega"), c.real("gamma"), lambda, n);
}

struct Couplings {
  CouplingProfile profile;
  double lambda;  ///< reference coupling for kappa targets
  std::string pattern;
};

Couplings parse_couplings(const std::string& spec, int n, double lambda) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto number = [&](const std::string& s) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
      x = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty()) throw validation_error("bad number '" + s + "' in couplings");
    return x;
  };
  if (kind == "uniform") {
    const double x = arg.empty() ? lambda : number(arg);
    if (!(x > 0.0)) throw validation_error("uniform coupling must be positive");
    return {CouplingProfile::uniform(x, n), x, "uniform"};
  }
  if (kind == "every-m") {
    const auto comma = arg.find(',');
    if (comma == std::string::npos) throw validation_error("every-m expects x,m");
    const double x = number(arg.substr(0, comma));
    const double m = number(arg.substr(comma + 1));
    if (m != std::floor(m) || m < 1) throw validation_error("every-m period must be a positive integer");
    return {CouplingProfile::every_m(x, static_cast<int>(m), n), x, "every-m"};
  }
  if (kind == "list") {
    std::ifstream in(arg);
    if (!in) throw validation_error("cannot read coupling list '" + arg + "'");
    std::vector<double> lam;
    std::string tok;
    while (in >> tok) {
      std::stringstream ss(tok);
      std::string part;
      while (std::getline(ss, part, ',')) {
        if (!part.empty()) lam.push_back(number(part));
      }
    }
    if (static_cast<int>(lam.size()) != n) {
      throw validation_error("coupling list has " + std::to_string(lam.size()) + " entries, N = " +
                             std::to_string(n));
    }
    double mean = 0.0;
    for (double x : lam) mean += x;
    return {CouplingProfile(lam), mean / n, "list"};
  }
  throw validation_error("couplings must be uniform[:x], every-m:x,m or list:FILE");
}

std::vector<std::string> solve_files(const Config& c) {
  std::vector<std::string> f{"profile.csv", "sites.csv", "transport.json"};
  if (c.boolean("covariance")) f.push_back("covariance.csv");
  return f;
}

void write_covariance(OutputDir& out, const CovarianceBlocks& s) {
  CsvWriter csv({"i", "j", "U", "V", "Z"});
  for (int i = 0; i < s.n(); ++i) {
    for (int j = 0; j < s.n(); ++j) {
      csv.cell(i + 1).cell(j + 1).cell(s.u(i, j)).cell(s.v(i, j)).cell(s.z(i, j));
      csv.end_row();
    }
  }
  out.write("covariance.csv", csv.str());
}

json run_solve(const Config& c, OutputDir& out, const Context&) {
  const int n = c.integer("n");
  const double tl = c.real("tl");
  const double tr = c.real("tr");
  const Couplings cp = parse_couplings(c.text("couplings"), n, c.real("lambda"));
  const ChainParams p = physics(c, n, cp.lambda);
  const bool equilibrium = tl == tr;

  json rep;
  std::vector<double> temps, currents, fluxes;
  std::vector<bool> coupled;
  CovarianceBlocks s;
  if (cp.pattern == "uniform") {
    const KineticMap map = kinetic_map(p);
    const SelfConsistentSolution sol = solve_profile(map, tl, tr, SolveMethod::direct);
    s = equilibrium ? equilibrium_covariance(p, tl) : covariance_closed_form(p, sol.profile);
    const TransportReport tr_rep = transport_report(p, sol, s);
    const EpsilonBound eb = epsilon_and_bounds(sol, map, p);
    temps = tr_rep.temperatures;
    currents = tr_rep.currents;
    fluxes = tr_rep.reservoir_fluxes;
    coupled = sol.coupled;
    rep["currents"] = vec(currents);
    rep["reservoir_fluxes"] = vec(fluxes);
    rep["j_n"] = tr_rep.j_n;
    rep["current_spread"] = tr_rep.current_spread;
    rep["epsilon_n"] = tr_rep.epsilon_n;
    rep["epsilon_bound"] = eb.bound;
    rep["kappa_estimate"] = equilibrium ? json(nullptr) : json(tr_rep.kappa_estimate);
    rep["kappa_target"] = kappa_closed_form(p).kappa;
    rep["linearity_residual"] = tr_rep.linearity_residual;
    rep["q_norm"] = map.q_norm;
    rep["residual"] = sol.residual;
  } else {
    json extra;
    std::optional<NonuniformReport> nr_opt;
    if (!equilibrium) nr_opt = nonuniform_transport(p, cp.profile, tl, tr);
    const GeneralSolution g = nr_opt ? nr_opt->state : solve_profile_general(p, cp.profile, tl, tr);
    if (nr_opt) {
      const NonuniformReport& nr = *nr_opt;
      extra["lambda_bar"] = nr.lambda_bar;
      extra["kappa_bar"] = nr.kappa_bar;
      extra["kappa_uniform_target"] = kappa_closed_form(p.with_lambda(nr.lambda_bar)).kappa;
      extra["identity_residual"] = nr.identity_residual;
      extra["staircase"] = vec(nr.staircase);
      extra["predicted_profile"] = vec(nr.predicted);
      extra["profile_deviation"] = nr.profile_deviation;
    }
    s = g.covariance;
    temps = g.solution.profile.temps();
    coupled = g.solution.coupled;
    currents = currents_from_covariance(s, p, cp.profile);
    // uncoupled sites carry an interpolated temperature with no bath attached
    std::vector<double> t_bath = temps;
    fluxes.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      fluxes[k] = cp.profile[k] * (t_bath[k] - s.v(i, i));
    }
    double spread_lo = currents.front(), spread_hi = currents.front();
    for (double x : currents) {
      spread_lo = std::min(spread_lo, x);
      spread_hi = std::max(spread_hi, x);
    }
    rep["currents"] = vec(currents);
    rep["reservoir_fluxes"] = vec(fluxes);
    rep["j_n"] = currents.front();
    rep["current_spread"] = spread_hi - spread_lo;
    rep["epsilon_n"] = g.solution.profile.max_jump();
    rep["kappa_estimate"] = equilibrium ? json(nullptr) : json((n - 1) * currents.front() / (tl - tr));
    rep["uncoupled_stretch_spread"] = uncoupled_stretch_spread(g.solution);
    rep["residual"] = g.solution.residual;
    for (auto& [k, v] : extra.items()) rep[k] = v;
  }
  rep["couplings"] = cp.pattern;
  rep["n"] = n;
  rep["temperatures"] = vec(temps);

  CsvWriter profile({"i", "T_i", "coupled"});
  for (int i = 0; i < n; ++i) {
    profile.cell(i + 1).cell(temps[static_cast<std::size_t>(i)]).cell(coupled[static_cast<std::size_t>(i)] ? "1" : "0");
    profile.end_row();
  }
  CsvWriter sites({"i", "J_i", "R_i", "T_i"});
  for (int i = 0; i < n; ++i) {
    sites.cell(i + 1);
    if (i + 1 < n) {
      sites.cell(currents[static_cast<std::size_t>(i)]);
    } else {
      sites.empty();
    }
    sites.cell(fluxes[static_cast<std::size_t>(i)]).cell(temps[static_cast<std::size_t>(i)]);
    sites.end_row();
  }
  out.write("profile.csv", profile.str());
  out.write("sites.csv", sites.str());
  out.write_json("transport.json", rep);
  if (c.boolean("covariance")) write_covariance(out, s);
  json summary;
  summary["n"] = n;
  summary["j_n"] = rep["j_n"];
  summary["kappa_estimate"] = rep["kappa_estimate"];
  summary["epsilon_n"] = rep["epsilon_n"];
  return summary;
}

json run_kappa_scan(const Config& c, OutputDir& out, const Context&) {
  const std::vector<int> ns = c.int_list("n_values");
  const ChainParams p = physics(c, 2, c.real("lambda"));
  const ConductivityScan scan = finite_n_conductivity(p, c.real("tl"), c.real("tr"), ns);
  CsvWriter csv({"N", "kappa_est", "eps_N", "bound_ratio"});
  std::vector<double> eps;
  json rows = json::array();
  for (const auto& r : scan.rows) {
    const double ratio = r.bound > 0.0 ? r.epsilon_n / r.bound : 0.0;
    csv.cell(r.n).cell(r.kappa_estimate).cell(r.epsilon_n).cell(ratio);
    csv.end_row();
    eps.push_back(r.epsilon_n);
    rows.push_back({{"N", r.n},
                    {"kappa_estimate", r.kappa_estimate},
                    {"kappa_u_route", r.kappa_u_route},
                    {"epsilon_n", r.epsilon_n},
                    {"bound", r.bound},
                    {"linearity_residual", r.linearity_residual}});
  }
  json summary;
  summary["rows"] = rows;
  summary["kappa_extrapolated"] = scan.extrapolated;
  summary["kappa_target"] = scan.target;
  summary["relative_error"] = std::abs(scan.extrapolated - scan.target) / scan.target;
  summary["richardson_order"] = scan.order;
  summary["epsilon_exponent"] = ns.size() >= 2 ? json(epsilon_decay_exponent(ns, eps)) : json(nullptr);
  out.write("kappa_scan.csv", csv.str());
  out.write_json("summary.json", summary);
  return summary;
}

json run_greenkubo(const Config& c, OutputDir& out, const Context&) {
  const ChainParams p = physics(c, c.integer("n"), c.real("lambda"));
  const int pts = c.integer("g_points");
  if (pts < 2) throw validation_error("g_points must be >= 2");
  double tmax = c.real("g_tmax");
  if (tmax < 0.0) throw validation_error("g_tmax must be >= 0");
  if (tmax == 0.0) tmax = 10.0 / p.decay_floor();
  std::vector<double> ts;
  for (int k = 0; k < pts; ++k) ts.push_back(tmax * k / (pts - 1));
  const GreenKuboReport rep = green_kubo_report(p, ts);
  const GkLyapunov ly = kappa_gk_lyapunov(p);
  const std::vector<int> ns = c.int_list("n_values");
  const GkExtrapolation ex = kappa_gk_extrapolate(p, ns);

  CsvWriter csv({"t", "g"});
  for (const auto& [t, g] : rep.g_samples) {
    csv.cell(t).cell(g);
    csv.end_row();
  }
  json j;
  j["n"] = rep.n;
  j["kappa_gk_lyapunov"] = rep.kappa_gk_lyapunov;
  j["kappa_gk_spectral"] = rep.kappa_gk_spectral;
  j["kappa_gk_quadrature"] = rep.kappa_gk_quadrature;
  j["quadrature_error"] = rep.quadrature_error;
  j["max_route_gap"] = rep.max_route_gap;
  j["kappa_target"] = rep.kappa_target;
  j["trace_identity_gap"] = std::abs(ly.trace_full - ly.trace_tilde);
  j["extrapolation_n"] = ns;
  j["extrapolation_values"] = vec(ex.values);
  j["kappa_extrapolated"] = ex.extrapolated.kappa;
  out.write("g.csv", csv.str());
  out.write_json("report.json", j);
  return j;
}

json run_highdim(const Config& c, OutputDir& out, const Context&) {
  const int dmax = c.integer("dmax");
  if (dmax < 2) throw validation_error("dmax must be >= 2");
  const ChainParams p = physics(c, c.integer("n"), c.real("lambda"));
  CsvWriter kd({"d", "kappa"});
  json kappas = json::array();
  for (int d = 1; d <= dmax; ++d) {
    const double k = kappa_highdim_integral(p, d).kappa;
    kd.cell(d).cell(k);
    kd.end_row();
    kappas.push_back(k);
  }
  std::vector<int> ds;
  for (int d = 2; d <= dmax; d *= 2) ds.push_back(d);
  CsvWriter di({"d", "dI", "err"});
  json rows = json::array();
  for (const auto& r : asymptotic_check(p, ds)) {
    di.cell(r.d).cell(r.d_i).cell(r.error);
    di.end_row();
    rows.push_back({{"d", r.d}, {"dI", r.d_i}, {"err", r.error}});
  }
  const LatticeSpec spec(p, c.int_list("n_transverse"));
  json j;
  j["kappa_by_d"] = kappas;
  j["dI"] = rows;
  j["n_transverse"] = spec.n_transverse();
  j["kappa_mode_sum"] = kappa_highdim_sum(spec).kappa;
  if (c.boolean("oracle") && spec.n_transverse().size() == 1) {
    const FullLatticeResult r = full_lattice_oracle(spec, c.real("tl"), c.real("tr"));
    j["oracle"] = {{"longitudinal_mismatch", r.longitudinal_mismatch},
                   {"transverse_max", r.transverse_max},
                   {"transverse_spread", r.transverse_spread},
                   {"mode_current", vec(r.mode_current)},
                   {"residual", r.residual}};
  }
  out.write("kappa_d.csv", kd.str());
  out.write("dI.csv", di.str());
  out.write_json("report.json", j);
  return j;
}

std::vector<std::string> montecarlo_files(const Config& c) {
  std::vector<std::string> f{"moments.json", "comparison.csv"};
  if (c.boolean("dump_trajectory")) f.push_back("trajectory.csv");
  return f;
}

json run_montecarlo(const Config& c, OutputDir& out, const Context& ctx) {
  const int n = c.integer("n");
  const ChainParams p = physics(c, n, c.real("lambda"));
  const double tl = c.real("tl");
  const double tr = c.real("tr");
  const std::string& mode = c.text("profile");
  if (mode != "self-consistent" && mode != "linear") {
    throw validation_error("profile must be self-consistent or linear");
  }
  TemperatureProfile temps = TemperatureProfile::uniform(tl, n);
  if (tl != tr) {
    temps = mode == "linear" || n < 2 ? TemperatureProfile::linear(tl, tr, n)
                                      : solve_profile(p, tl, tr, SolveMethod::direct).profile;
  }
  SimulationConfig cfg;
  if (c.integer("seed") < 0) throw validation_error("seed must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(c.integer("seed"));
  cfg.step = c.real("step");
  cfg.total_time = c.real("total_time");
  cfg.burn_in = c.real("burn_in");
  cfg.trajectories = c.integer("trajectories");
  cfg.threads = ctx.threads;
  const CouplingProfile couplings = CouplingProfile::uniform(p.lambda(), n);
  const EstimatedMoments m = estimate_stationary(cfg, p, couplings, temps);
  const CovarianceBlocks exact = covariance_closed_form(p, temps);
  const Matrix s = exact.full();

  CsvWriter csv({"i", "j", "estimate", "stderr", "exact", "z"});
  for (int i = 0; i < 2 * n; ++i) {
    for (int j = i; j < 2 * n; ++j) {
      const double se = m.stderr_(i, j);
      csv.cell(i + 1).cell(j + 1).cell(m.cov(i, j)).cell(se).cell(s(i, j));
      csv.cell(se > 0.0 ? (m.cov(i, j) - s(i, j)) / se : 0.0);
      csv.end_row();
    }
  }
  std::vector<double> exact_j;
  for (int i = 0; i + 1 < n; ++i) exact_j.push_back(p.omega() * p.omega() * exact.z(i, i + 1));
  json j;
  j["n"] = n;
  j["seed"] = cfg.seed;
  j["samples"] = m.samples;
  j["effective_samples"] = m.effective_samples;
  j["within_4sigma"] = m.within_4sigma;
  j["max_z"] = m.max_z_scores;
  j["currents"] = vec(m.currents);
  j["current_stderr"] = vec(m.current_stderr);
  j["exact_currents"] = vec(exact_j);
  j["flux_sum"] = m.flux_sum;
  j["flux_sum_stderr"] = m.flux_sum_stderr;
  j["temperatures"] = vec(temps.temps());
  out.write("comparison.csv", csv.str());
  out.write_json("moments.json", j);

  if (c.boolean("dump_trajectory")) {
    // replays trajectory 0 with the same stream as the estimator
    const ExactPropagator prop(p, couplings, temps, cfg.step);
    std::mt19937_64 rng = make_stream(cfg.seed, 0);
    const double burn = cfg.burn_in > 0.0 ? cfg.burn_in : 10.0 / p.decay_floor();
    const long burn_steps = static_cast<long>(std::ceil(burn / cfg.step));
    const long steps = static_cast<long>(std::llround(cfg.total_time / cfg.step));
    Vector x = Vector::Zero(2 * n);
    for (long k = 0; k < burn_steps; ++k) x = prop.advance(x, rng);
    CsvWriter traj({"t", "i", "q", "p"});
    for (long k = 1; k <= steps; ++k) {
      x = prop.advance(x, rng);
      for (int i = 0; i < n; ++i) {
        traj.cell(k * cfg.step).cell(i + 1).cell(x(i)).cell(x(n + i));
        traj.end_row();
      }
    }
    out.write("trajectory.csv", traj.str());
  }
  return j;
}

}  // namespace

const std::vector<Command>& commands() {
  static const std::vector<Command> list{
      {"solve", "self-consistent profile, currents and transport report", solve_files, run_solve},
      {"kappa-scan", "finite-N conductivity and extrapolation",
       [](const Config&) { return std::vector<std::string>{"kappa_scan.csv", "summary.json"}; },
       run_kappa_scan},
      {"greenkubo", "Green-Kubo conductivity by three routes",
       [](const Config&) { return std::vector<std::string>{"g.csv", "report.json"}; }, run_greenkubo},
      {"highdim", "conductivity in higher dimensions and d*I asymptotics",
       [](const Config&) { return std::vector<std::string>{"kappa_d.csv", "dI.csv", "report.json"}; },
       run_highdim},
      {"montecarlo", "exact-step simulation against the analytic covariance", montecarlo_files,
       run_montecarlo},
  };
  return list;
}

std::string summarize(const std::string& command, const json& r) {
  std::ostringstream o;
  o.precision(10);
  auto num = [](const json& v) { return v.is_null() ? std::string("n/a") : v.dump(); };
  if (command == "solve") {
    o << "N = " << r["n"] << "  J = " << num(r["j_n"]) << "  kappa_est = " << num(r["kappa_estimate"])
      << "  eps_N = " << num(r["epsilon_n"]) << "\n";
  } else if (command == "kappa-scan") {
    for (const auto& row : r["rows"]) o << "N = " << row["N"] << "  kappa_est = " << num(row["kappa_estimate"]) << "\n";
    o << "extrapolated = " << num(r["kappa_extrapolated"]) << "  target = " << num(r["kappa_target"]) << "\n";
  } else if (command == "greenkubo") {
    o << "lyapunov = " << num(r["kappa_gk_lyapunov"]) << "  spectral = " << num(r["kappa_gk_spectral"])
      << "  quadrature = " << num(r["kappa_gk_quadrature"]) << "\n"
      << "extrapolated = " << num(r["kappa_extrapolated"]) << "  target = " << num(r["kappa_target"]) << "\n";
  } else if (command == "highdim") {
    for (const auto& row : r["dI"]) o << "d = " << row["d"] << "  dI = " << num(row["dI"]) << "\n";
    o << "mode sum kappa = " << num(r["kappa_mode_sum"]) << "\n";
  } else if (command == "montecarlo") {
    o << "samples = " << r["samples"] << "  within 4 sigma = " << num(r["within_4sigma"])
      << "  max z = " << num(r["max_z"]) << "\n";
  }
  return o.str();
}

json run_selftest(bool& all_passed) {
  all_passed = true;
  json rows = json::array();
  std::vector<checks::Check> list = checks::invariant_checks();
  for (auto& c : checks::acceptance_checks()) list.push_back(c);
  for (const auto& c : list) {
    const checks::CheckResult r = checks::run_check(c);
    all_passed = all_passed && r.passed;
    rows.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"seconds", r.seconds}, {"detail", r.detail}});
  }
  return rows;
}

}  // namespace cli

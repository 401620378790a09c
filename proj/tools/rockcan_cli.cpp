#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <boost/version.hpp>
#include <openssl/opensslv.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <rockcan/config.hpp>
#include <rockcan/io.hpp>
#include <rockcan/rockcan.hpp>

#ifndef ROCKCAN_FIXTURE_DIR
#define ROCKCAN_FIXTURE_DIR "fixtures"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rockcan;

namespace {

// Everything needed to reproduce a run; echoed into the manifest.
struct Experiment {
  std::string subcommand;
  CanParameters p;
  std::string can_file;  // empty when rebuilt from a manifest
  State ic;
  RateClock clock = RateClock::Physical;
  double t0 = 0, t1 = 5;  // seconds
  double rtol = 1e-10, atol = 1e-12;
  fs::path out = "out";
  bool degrees = false;
  json options = json::object();
};

struct RunResult {
  json report;
  std::vector<std::string> files;  // relative to out
};

fs::path fixture_dir() {
  if (const char* env = std::getenv("ROCKCAN_FIXTURES")) return env;
  return ROCKCAN_FIXTURE_DIR;
}

fs::path resolve_can(const std::string& name) {
  fs::path direct(name);
  if (fs::exists(direct)) return direct;
  fs::path in_fixtures = fixture_dir() / name;
  if (fs::exists(in_fixtures)) return in_fixtures;
  throw ConfigError("can file not found: " + name + " (also looked in " + fixture_dir().string() + ")");
}

State parse_ic(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--ic: cannot parse '" + item + "'");
    }
  }
  if (v.size() != 6) throw ConfigError("--ic needs six values: psi,Psi,phi,Phi,theta,Theta");
  return state_from_ic(v[0], v[1], v[2], v[3], v[4], v[5]);
}

std::pair<double, double> parse_tspan(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("--tspan must look like a:b");
  try {
    const double a = std::stod(s.substr(0, colon)), b = std::stod(s.substr(colon + 1));
    return {a, b};
  } catch (const std::exception&) {
    throw ConfigError("--tspan: cannot parse '" + s + "'");
  }
}

IntegratorConfig full_cfg(const Experiment& ex) { return full_system_config(ex.rtol, ex.atol); }

double deg(const Experiment& ex) { return ex.degrees ? 180.0 / std::numbers::pi : 1.0; }

State full_state(const Experiment& ex) {
  State s = convert_rates(ex.ic, ex.clock, RateClock::Full, ex.p);
  s.t = ex.t0 / ex.p.time_scale;
  return s;
}

State reduced_state(const Experiment& ex) {
  State s = convert_rates(ex.ic, ex.clock, RateClock::Reduced, ex.p);
  s.t = 0;
  return s;
}

void write_file(const Experiment& ex, RunResult& r, const std::string& name, const std::string& text) {
  write_text(ex.out / name, text);
  r.files.push_back(name);
}

void write_report(const Experiment& ex, RunResult& r, const std::string& name) {
  write_json(ex.out / name, r.report);
  r.files.push_back(name);
}

json coefficients_json(const ReducedCoefficients& rc) {
  return {{"a3", rc.a3}, {"al2", rc.al2}, {"a2", rc.a2}, {"al1", rc.al1}, {"a1", rc.a1},
          {"all", rc.all}, {"al0", rc.al0}, {"a0", rc.a0}, {"epsilon", rc.epsilon}};
}

json constants_json(const FrobeniusConstants& fc) {
  return {{"B0", fc.B0}, {"Bm2", fc.Bm2}, {"epsilon", fc.epsilon},
          {"zeta", std::isfinite(fc.zeta) ? json(fc.zeta) : json(nullptr)}, {"sign_Bm2", fc.sign_Bm2}};
}

FullTrajectory run_full(const Experiment& ex) {
  return simulate(ex.p, full_state(ex), ex.t1 / ex.p.time_scale, full_cfg(ex));
}

std::string trajectory_csv(const FullTrajectory& traj) {
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  return os.str();
}

double energy_drift(const FullTrajectory& traj, const CanParameters& p, double (*energy)(const State&, const CanParameters&)) {
  const double e0 = energy(state_at(traj, 0), p);
  double d = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) d = std::max(d, std::abs(energy(state_at(traj, i), p) - e0));
  return d / std::abs(e0);
}

RunResult cmd_simulate(const Experiment& ex) {
  RunResult r;
  const auto traj = run_full(ex);
  write_file(ex, r, "trajectory.csv", trajectory_csv(traj));
  const auto evs = detect_bounces(traj);
  r.report = {{"clock", "full"},
              {"time_scale_s", ex.p.time_scale},
              {"nodes", traj.size()},
              {"bounces", bounce_events_json(evs, ex.degrees)},
              {"delta_psi_formula", angle_of_turn(ex.p) * deg(ex)},
              {"energy_drift_relative", energy_drift(traj, ex.p, total_energy)}};
  write_report(ex, r, "events.json");
  return r;
}

RunResult cmd_frictionless(const Experiment& ex) {
  RunResult r;
  const State s0 = full_state(ex);
  const auto traj = simulate_frictionless(ex.p, s0, ex.t1 / ex.p.time_scale, full_cfg(ex));
  write_file(ex, r, "trajectory.csv", trajectory_csv(traj));
  const FrictionlessConstants f0 = frictionless_constants(s0, ex.p);
  double dB = 0, dG = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto f = frictionless_constants(state_at(traj, i), ex.p);
    dB = std::max(dB, std::abs(f.Hz_B - f0.Hz_B));
    dG = std::max(dG, std::abs(f.Hz_G - f0.Hz_G));
  }
  const auto model = frictionless_reduced_model(f0.epsilon, f0.zeta, ex.p);
  r.report = {{"clock", "full"},
              {"Hz_B", f0.Hz_B},
              {"Hz_G", f0.Hz_G},
              {"epsilon", f0.epsilon},
              {"zeta", std::isfinite(f0.zeta) ? json(f0.zeta) : json(nullptr)},
              {"Hz_B_drift", dB},
              {"Hz_G_drift", dG},
              {"energy_drift_relative", energy_drift(traj, ex.p, frictionless_energy)},
              {"bounces", bounce_events_json(detect_bounces(traj), ex.degrees)},
              {"reduced_model",
               {{"alpha3", model.alpha3}, {"leading_order_only", model.leading_order_only}, {"omitted", model.omitted}}}};
  write_report(ex, r, "frictionless.json");
  return r;
}

FrobeniusConstants fitted_constants(const Experiment& ex) {
  const FrobeniusFit fit = fit_constants(reduced_state(ex), ex.p);
  return ex.options.value("closed_form", false) ? fit.closed_form : fit.primary;
}

RunResult cmd_reduced(const Experiment& ex) {
  RunResult r;
  const State s = reduced_state(ex);
  const FrobeniusFit fit = fit_constants(s, ex.p);
  const FrobeniusConstants fc = ex.options.value("closed_form", false) ? fit.closed_form : fit.primary;
  const ReducedCoefficients rc = a_coefficients(fc, ex.p);
  const double t1 = (ex.t1 - ex.t0) / ex.p.reduced_time_scale;
  const auto traj = simulate_reduced(rc, s.phi, s.Phi, t1, reduced_config(ex.rtol, ex.atol), &fc, &ex.p);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < traj.size(); ++i) rows.push_back({traj.t[i], traj.y[i][0], traj.y[i][1], traj.y[i][2]});
  std::ostringstream os;
  write_csv(os, {"t", "phi", "Phi", "psi"}, rows);
  write_file(ex, r, "reduced.csv", os.str());
  const double H0 = hamiltonian(s.phi, s.Phi, rc);
  double dH = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) dH = std::max(dH, std::abs(hamiltonian(traj.y[i][0], traj.y[i][1], rc) - H0));
  r.report = {{"clock", "reduced"},
              {"reduced_time_scale_s", ex.p.reduced_time_scale},
              {"constants", constants_json(fc)},
              {"constants_closed_form", constants_json(fit.closed_form)},
              {"outside_validity", fit.outside_validity},
              {"coefficients", coefficients_json(rc)},
              {"H0", H0},
              {"H_drift", dH},
              {"bounces", bounce_events_json(detect_bounces(traj, 0, 1, 2), ex.degrees)}};
  if (auto eq = reduced_equilibrium(rc)) r.report["equilibrium_phi"] = *eq;
  try {
    r.report["period"] = period(H0, rc);
  } catch (const DomainError&) {
    r.report["period"] = nullptr;
  }
  write_report(ex, r, "reduced.json");
  return r;
}

RunResult cmd_matched(const Experiment& ex) {
  RunResult r;
  const FrobeniusConstants fit = fitted_constants(ex);
  const double I = ex.options.value("I", 2.0 * std::numbers::pi / 100.0);
  const double eps = ex.options.contains("epsilon") && !ex.options["epsilon"].is_null()
                         ? ex.options["epsilon"].get<double>()
                         : fit.epsilon;
  const double rootE = std::sqrt(eps);
  const FrobeniusConstants fc = make_constants(fit.zeta * rootE, fit.sign_Bm2 * rootE);
  const ReducedCoefficients rc = a_coefficients(fc, ex.p);
  const MatchedSolution ms = matched_solution(I, eps, ex.p);
  const OuterCoefficients oc = outer_coefficients(rc, I);
  const auto traj = simulate_reduced(rc, I / 2.0, 0.0, ms.sqrtI(), reduced_config(ex.rtol, ex.atol));
  const int n = ex.options.value("samples", 401);
  std::vector<std::vector<double>> rows;
  double sup = 0;
  for (int i = 0; i < n; ++i) {
    const double t = ms.sqrtI() * double(i) / double(n - 1);
    const double num = traj.at(t, 0), uni = uniform_phi(t, ms);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double out = t < ms.sqrtI() ? outer_phi(t, oc, eps) : nan;
    const double in = eps > 0 ? rootE * inner_phi(ms.inner_time(t), ms) : nan;
    sup = std::max(sup, std::abs(uni - num));
    rows.push_back({t, out, in, uni, num});
  }
  std::ostringstream os;
  write_csv(os, {"t", "phi_outer", "phi_inner", "phi_uniform", "phi_numeric"}, rows);
  write_file(ex, r, "matched.csv", os.str());
  r.report = {{"clock", "reduced"},
              {"I", I},
              {"epsilon", eps},
              {"zeta", fit.zeta},
              {"sign_Bm2", fit.sign_Bm2},
              {"sup_uniform_minus_numeric", sup},
              {"phi_min_formula", minimum_phi(ms)},
              {"max_precession_rate", max_precession_rate(ms)},
              {"inner_turn", inner_turn(ms, fit.sign_Bm2) * deg(ex)}};
  write_report(ex, r, "matched.json");
  return r;
}

RunResult cmd_equilibria(const Experiment& ex) {
  RunResult r;
  const double phi0 = ex.options.value("phi0", ex.ic.phi);
  const State s = convert_rates(ex.ic, ex.clock, RateClock::Full, ex.p);
  json rest = nullptr;
  if (auto br = rest_motion(phi0, ex.p)) {
    rest = json::array();
    for (const auto& b : *br) {
      const SteadyMotion m = classify(b.Psi_e, b.Theta_e, phi0, ex.p);
      rest.push_back({{"Psi_e", b.Psi_e}, {"Theta_e", b.Theta_e}, {"class", to_string(m.cls)}, {"rest", m.rest}});
    }
  }
  const SteadyMotion here = classify(s.Psi, s.Theta, s.phi, ex.p);
  const RollingEigenvalues ev = rolling_eigenvalues(s.Theta, ex.p);
  json radius = nullptr;
  try {
    radius = circle_radius(s.Psi, s.Theta, s.phi, ex.p);
  } catch (const StraightLineError&) {
  }
  r.report = {{"clock", "full"},
              {"balancing_angle", balancing_angle(ex.p) * deg(ex)},
              {"critical_rolling_rate", critical_rolling_rate(ex.p)},
              {"balanced_theta_per_unit_Psi", balanced_theta(1.0, ex.p)},
              {"rest_motion_phi0", phi0 * deg(ex)},
              {"rest_motion", rest},
              {"initial_state",
               {{"class", to_string(here.cls)}, {"steady_residual", here.residual}, {"circle_radius", radius}}},
              {"rolling_eigenvalues",
               {{"Theta_e", s.Theta},
                {"plus", {ev.plus.real(), ev.plus.imag()}},
                {"minus", {ev.minus.real(), ev.minus.imag()}},
                {"type", ev.label()}}}};
  write_report(ex, r, "equilibria.json");
  return r;
}

RunResult cmd_turn(const Experiment& ex) {
  RunResult r;
  if (ex.options.value("formula_only", false)) {
    r.report = {{"delta_psi", angle_of_turn(ex.p) * deg(ex)}, {"mu_min", required_friction(ex.p)}};
    write_report(ex, r, "turn.json");
    return r;
  }
  const auto traj = run_full(ex);
  const TurnReport tr = turn_report(traj, ex.p);
  const TurnDirection td = turn_direction(ex.ic, ex.p);
  json measured = json::array();
  for (double d : tr.delta_psi_measured) measured.push_back(d * deg(ex));
  r.report = {{"delta_psi", angle_of_turn(ex.p) * deg(ex)},
              {"mu_min", required_friction(ex.p)},
              {"delta_psi_measured", measured},
              {"direction_simulated", tr.direction},
              {"direction_predicted", td.direction},
              {"indeterminate", td.indeterminate},
              {"boundary_slope", td.boundary_slope},
              {"outside_validity", td.outside_validity},
              {"boundary_slope_positive", ex.p.boundary_slope_positive()}};
  write_report(ex, r, "turn.json");
  return r;
}

RunResult cmd_contact(const Experiment& ex) {
  RunResult r;
  const auto traj = run_full(ex);
  const double frac = ex.options.value("inner_fraction", 0.1);
  const ContactPath path = contact_path(traj, ex.p, frac);
  std::ostringstream os;
  os << "t,x_l,y_l,phase\n";
  for (std::size_t i = 0; i < path.t.size(); ++i)
    os << fmt_double(path.t[i]) << ',' << fmt_double(path.x[i]) << ',' << fmt_double(path.y[i]) << ','
       << to_string(path.phase[i]) << '\n';
  write_file(ex, r, "contact.csv", os.str());
  json arcs = json::array();
  for (const auto& a : inner_arcs(path))
    arcs.push_back({{"t_start", path.t[a.first]},
                    {"t_end", path.t[a.last]},
                    {"radius", a.radius},
                    {"subtended", a.subtended * deg(ex)},
                    {"max_deviation", a.max_deviation}});
  r.report = {{"clock", "full"}, {"length_unit", "R"}, {"reversals", path.reversals}, {"inner_arcs", arcs}};
  write_report(ex, r, "contact.json");
  return r;
}

RunResult cmd_friction(const Experiment& ex) {
  RunResult r;
  const auto traj = run_full(ex);
  const FrictionProfile fp = friction_profile(traj, ex.p, ex.options.value("inner_fraction", 0.1));
  std::ostringstream os;
  os << "t,ratio,phase\n";
  for (std::size_t i = 0; i < fp.t.size(); ++i)
    os << fmt_double(fp.t[i]) << ',' << fmt_double(fp.ratio[i]) << ',' << to_string(fp.phase[i]) << '\n';
  write_file(ex, r, "friction.csv", os.str());
  const double hopt = uniform_cylinder_optimal_h();
  r.report = {{"max_ratio", fp.max_ratio},
              {"t_max", fp.t_max},
              {"phase_at_max", to_string(fp.phase_at_max)},
              {"required_friction", required_friction(ex.p)},
              {"uniform_cylinder", {{"h_opt", hopt}, {"mu_max", uniform_cylinder_friction(hopt)}}}};
  write_report(ex, r, "friction.json");
  return r;
}

RunResult cmd_hamiltonian(const Experiment& ex) {
  RunResult r;
  const State s = reduced_state(ex);
  const FrobeniusConstants fc = fitted_constants(ex);
  const ReducedCoefficients rc = a_coefficients(fc, ex.p);
  const double E = ex.options.contains("energy") && !ex.options["energy"].is_null()
                       ? ex.options["energy"].get<double>()
                       : hamiltonian(s.phi, s.Phi, rc);
  const TurningPoints tp = turning_points(E, rc);
  json report = {{"clock", "reduced"}, {"energy", E}, {"coefficients", coefficients_json(rc)}, {"turning_points", tp.count}};
  double hi = 2.0 * s.phi;
  if (tp.count >= 1) {
    report["phi_lower"] = tp.lower;
    report["phi_upper"] = tp.upper;
    if (!tp.lower_clamped) report["residual_lower"] = std::abs(hamiltonian(tp.lower, 0.0, rc) - E);
    report["residual_upper"] = std::abs(hamiltonian(tp.upper, 0.0, rc) - E);
    hi = 1.25 * tp.upper;
  }
  try {
    double err = 0;
    report["period"] = period(E, rc, &err);
    report["period_error_estimate"] = err;
  } catch (const DomainError&) {
    report["period"] = nullptr;
  }
  double vmin = 0;
  if (auto eq = reduced_equilibrium(rc)) {
    vmin = reduced_potential(*eq, rc);
    report["equilibrium_phi"] = *eq;
    report["potential_minimum"] = vmin;
  }
  // H over a (phi, Phi) grid spanning the orbit.
  const int n = ex.options.value("grid", 41);
  const double lo = rc.epsilon > 0 && tp.count >= 1 && tp.lower > 0 ? 0.5 * tp.lower : hi * 1e-3;
  const double Pmax = 1.25 * std::sqrt(2.0 * std::max(E - vmin, 1e-12));
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double phi = lo + (hi - lo) * double(i) / double(n - 1);
      const double Phi = -Pmax + 2.0 * Pmax * double(j) / double(n - 1);
      rows.push_back({phi, Phi, hamiltonian(phi, Phi, rc)});
    }
  std::ostringstream os;
  write_csv(os, {"phi", "Phi", "H"}, rows);
  write_file(ex, r, "hamiltonian.csv", os.str());
  r.report = report;
  write_report(ex, r, "hamiltonian.json");
  return r;
}

RunResult cmd_sweep(const Experiment& ex) {
  RunResult r;
  SweepGrid g;
  g.lo = ex.options.value("lo", g.lo);
  g.hi = ex.options.value("hi", g.hi);
  g.n = ex.options.value("n", g.n);
  g.phi0 = ex.options.value("phi0", ex.ic.phi);
  g.t1_seconds = ex.options.value("t1", g.t1_seconds);
  const double band = ex.options.value("band", 0.01);
  const unsigned threads = ex.options.value("threads", 0u);
  const auto pts = run_sweep(ex.p, g, threads, full_cfg(ex));
  std::ostringstream os;
  os << "Psi0,Theta0,predicted,simulated,flat_fall,band_distance,agrees\n";
  for (const auto& o : pts)
    os << fmt_double(o.Psi0) << ',' << fmt_double(o.Theta0) << ',' << o.predicted << ',' << o.simulated << ','
       << int(o.flat_fall) << ',' << fmt_double(o.band_distance) << ',' << int(o.agrees()) << '\n';
  write_file(ex, r, "sweep.csv", os.str());
  const SweepSummary s = summarize_sweep(pts, band);
  r.report = {{"rates", "physical"},
              {"grid", {{"lo", g.lo}, {"hi", g.hi}, {"n", g.n}, {"phi0", g.phi0}}},
              {"band", band},
              {"boundary_slope", turn_boundary_slope(ex.p)},
              {"total", s.total},
              {"outside_band", s.outside_band},
              {"agree", s.agree},
              {"agreement", s.agreement()},
              {"flat_fall", s.flat_fall},
              {"failed", s.failed}};
  write_report(ex, r, "sweep.json");
  return r;
}

RunResult dispatch(const Experiment& ex) {
  const std::string& c = ex.subcommand;
  if (c == "simulate") return cmd_simulate(ex);
  if (c == "reduced") return cmd_reduced(ex);
  if (c == "frictionless") return cmd_frictionless(ex);
  if (c == "matched") return cmd_matched(ex);
  if (c == "equilibria") return cmd_equilibria(ex);
  if (c == "turn") return cmd_turn(ex);
  if (c == "contact") return cmd_contact(ex);
  if (c == "friction") return cmd_friction(ex);
  if (c == "hamiltonian") return cmd_hamiltonian(ex);
  if (c == "sweep") return cmd_sweep(ex);
  throw ConfigError("unknown subcommand: " + c);
}

json config_echo(const Experiment& ex) {
  return {{"subcommand", ex.subcommand},
          {"can", {{"a", ex.p.a}, {"c", ex.p.c}, {"h", ex.p.h}, {"R", ex.p.R}, {"g", ex.p.g}}},
          {"ic",
           {{"psi", ex.ic.psi},
            {"Psi", ex.ic.Psi},
            {"phi", ex.ic.phi},
            {"Phi", ex.ic.Phi},
            {"theta", ex.ic.theta},
            {"Theta", ex.ic.Theta}}},
          {"rate_clock", to_string(ex.clock)},
          {"tspan_s", {ex.t0, ex.t1}},
          {"rtol", ex.rtol},
          {"atol", ex.atol},
          {"degrees", ex.degrees},
          {"options", ex.options}};
}

Experiment from_manifest(const fs::path& path) {
  json m;
  try {
    m = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("manifest " + path.string() + ": " + e.what());
  }
  try {
    const json& c = m.at("config");
    Experiment ex;
    ex.subcommand = c.at("subcommand").get<std::string>();
    const json& can = c.at("can");
    ex.p = from_nondimensional(can.at("a"), can.at("c"), can.at("h"), can.at("R"), can.at("g"));
    const json& ic = c.at("ic");
    ex.ic = state_from_ic(ic.at("psi"), ic.at("Psi"), ic.at("phi"), ic.at("Phi"), ic.at("theta"), ic.at("Theta"));
    ex.clock = parse_rate_clock(c.at("rate_clock").get<std::string>());
    ex.t0 = c.at("tspan_s").at(0);
    ex.t1 = c.at("tspan_s").at(1);
    ex.rtol = c.at("rtol");
    ex.atol = c.at("atol");
    ex.degrees = c.at("degrees");
    ex.options = c.at("options");
    return ex;
  } catch (const json::exception& e) {
    throw ConfigError("manifest " + path.string() + " is incomplete: " + e.what());
  }
}

void write_manifest(const Experiment& ex, const RunResult& r) {
  json outputs = json::object();
  for (const auto& f : r.files) outputs[f] = sha256_file(ex.out / f);
  json fixtures = json::object();
  if (!ex.can_file.empty()) fixtures[ex.can_file] = sha256_file(ex.can_file);
  std::ostringstream boost_v;
  boost_v << BOOST_VERSION / 100000 << '.' << BOOST_VERSION / 100 % 1000 << '.' << BOOST_VERSION % 100;
  const json manifest = {
      {"tool", "rockcan"},
      {"version", version_string},
      {"config", config_echo(ex)},
      {"fixtures", fixtures},
      {"outputs", outputs},
      {"libraries",
       {{"boost", boost_v.str()},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                              "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"cli11", std::to_string(CLI11_VERSION_MAJOR) + "." + std::to_string(CLI11_VERSION_MINOR) + "." +
                      std::to_string(CLI11_VERSION_PATCH)},
        {"openssl", OPENSSL_VERSION_TEXT},
        {"compiler", __VERSION__}}}};
  write_json(ex.out / "manifest.json", manifest);
}

// Shared flags, filled in per subcommand.
struct Flags {
  std::string can = "reference_can.toml";
  std::string ic, tspan, rate_clock, out = "out";
  double rtol = 0, atol = 0;
  bool degrees = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--can", f.can, "can TOML file (path, or name inside the fixture directory)");
  sub->add_option("--ic", f.ic, "initial state psi,Psi,phi,Phi,theta,Theta");
  sub->add_option("--tspan", f.tspan, "time span a:b in seconds");
  sub->add_option("--rtol", f.rtol, "relative tolerance");
  sub->add_option("--atol", f.atol, "absolute tolerance");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--rate-clock", f.rate_clock, "clock of the initial rates")
      ->check(CLI::IsMember({"physical", "full", "reduced"}));
  sub->add_flag("--degrees", f.degrees, "angles in report JSON in degrees");
}

Experiment build(const std::string& name, const Flags& f, json options) {
  Experiment ex;
  ex.subcommand = name;
  const fs::path can_path = resolve_can(f.can);
  ex.can_file = can_path.string();
  const Config cfg = Config::load(ex.can_file);
  ex.p = can_from_config(cfg);
  if (!f.ic.empty()) {
    ex.ic = parse_ic(f.ic);
  } else if (auto ic = ic_from_config(cfg)) {
    ex.ic = ic->state;
    ex.clock = ic->clock;
  } else {
    throw ConfigError("no initial state: pass --ic or add an [ic] section");
  }
  if (!f.rate_clock.empty()) ex.clock = parse_rate_clock(f.rate_clock);
  ex.t0 = cfg.number("run.t0").value_or(0.0);
  ex.t1 = cfg.number("run.t1").value_or(5.0);
  if (!f.tspan.empty()) std::tie(ex.t0, ex.t1) = parse_tspan(f.tspan);
  if (!(ex.t1 > ex.t0)) throw ConfigError("time span must be positive");
  ex.rtol = f.rtol > 0 ? f.rtol : cfg.number("run.rtol").value_or(1e-10);
  ex.atol = f.atol > 0 ? f.atol : cfg.number("run.atol").value_or(1e-12);
  ex.out = f.out;
  ex.degrees = f.degrees;
  ex.options = std::move(options);
  return ex;
}

int run_experiment(const Experiment& ex) {
  try {
    const RunResult r = dispatch(ex);
    write_manifest(ex, r);
    std::cout << r.report.dump(2) << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    const json err = error_json(e);
    try {
      write_json(ex.out / "error.json", err);
    } catch (const std::exception&) {
    }
    std::cout << err.dump(2) << '\n';
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rockcan: rolling and bouncing of a tilted can"};
  app.require_subcommand(1);
  Flags flags;

  // Subcommand-specific options.
  bool closed_form = false, formula_only = false;
  double I = 2.0 * std::numbers::pi / 100.0, epsilon = -1, phi0 = -1, energy = std::numeric_limits<double>::quiet_NaN();
  double lo = -0.2, hi = 0.2, band = 0.01, sweep_t1 = 0.5, inner_fraction = 0.1;
  int n = 21, grid = 41, samples = 401;
  unsigned threads = 0;
  std::string manifest;

  auto* sim = app.add_subcommand("simulate", "full rolling system");
  auto* red = app.add_subcommand("reduced", "reduced small-tilt equation");
  auto* fr = app.add_subcommand("frictionless", "slipping can on a smooth plane");
  auto* mat = app.add_subcommand("matched", "matched asymptotic solution vs numerics");
  auto* eq = app.add_subcommand("equilibria", "steady motions and straight-line rolling");
  auto* turn = app.add_subcommand("turn", "angle and direction of turn");
  auto* con = app.add_subcommand("contact", "contact point locus");
  auto* fric = app.add_subcommand("friction", "friction needed to roll");
  auto* ham = app.add_subcommand("hamiltonian", "reduced Hamiltonian, turning points and period");
  auto* sw = app.add_subcommand("sweep", "turn-direction map over initial rates");
  auto* rerun = app.add_subcommand("rerun", "repeat a run from its manifest");
  for (auto* s : {sim, red, fr, mat, eq, turn, con, fric, ham, sw}) add_common(s, flags);

  for (auto* s : {red, mat, ham}) s->add_flag("--closed-form", closed_form, "use the closed-form constants");
  mat->add_option("--I", I, "release parameter (phi1 = I/2)");
  mat->add_option("--epsilon", epsilon, "override epsilon");
  mat->add_option("--samples", samples, "output samples on [0, sqrt(I)]");
  eq->add_option("--phi0", phi0, "tilt for the rest motions (default: initial phi)");
  turn->add_flag("--formula-only", formula_only, "closed-form results only, no simulation");
  for (auto* s : {con, fric}) s->add_option("--inner-fraction", inner_fraction, "inner phase when phi < fraction * phi0");
  ham->add_option("--energy", energy, "orbit energy (default: initial H)");
  ham->add_option("--grid", grid, "grid points per axis");
  sw->add_option("--lo", lo, "lowest initial rate (rad/s)");
  sw->add_option("--hi", hi, "highest initial rate (rad/s)");
  sw->add_option("--n", n, "points per axis");
  sw->add_option("--band", band, "exclusion band around the dividing line");
  sw->add_option("--t1", sweep_t1, "seconds simulated per point");
  sw->add_option("--phi0", phi0, "initial tilt (default: initial phi)");
  sw->add_option("--threads", threads, "worker threads (0: hardware)");
  rerun->add_option("manifest", manifest, "manifest.json of an earlier run")->required();
  rerun->add_option("--out", flags.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (rerun->parsed()) {
      Experiment ex = from_manifest(manifest);
      ex.out = flags.out;
      return run_experiment(ex);
    }
    CLI::App* sub = app.get_subcommands().front();
    json opts = json::object();
    const std::string name = sub->get_name();
    if (name == "reduced" || name == "matched" || name == "hamiltonian") opts["closed_form"] = closed_form;
    if (name == "matched") {
      opts["I"] = I;
      opts["samples"] = samples;
      if (epsilon >= 0) opts["epsilon"] = epsilon;
    }
    if (name == "equilibria" && phi0 > 0) opts["phi0"] = phi0;
    if (name == "turn") opts["formula_only"] = formula_only;
    if (name == "contact" || name == "friction") opts["inner_fraction"] = inner_fraction;
    if (name == "hamiltonian") {
      opts["grid"] = grid;
      if (std::isfinite(energy)) opts["energy"] = energy;
    }
    if (name == "sweep") {
      opts.update({{"lo", lo}, {"hi", hi}, {"n", n}, {"band", band}, {"t1", sweep_t1}, {"threads", threads}});
      if (phi0 > 0) opts["phi0"] = phi0;
    }
    return run_experiment(build(name, flags, opts));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cout << error_json(e).dump(2) << '\n';
    return 3;
  }
}

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "asymptotics.hpp"
#include "dynamics.hpp"
#include "frobenius.hpp"
#include "integrate.hpp"
#include "params.hpp"

namespace rockcan {

// Net precession over one bounce.
inline double angle_of_turn(const CanParameters& p, int sign = 1) {
  return sign * std::numbers::pi * std::sqrt((p.ap + 1.0) / p.ap);
}

inline double turn_boundary_slope(const CanParameters& p) { return 2.0 / (p.cp * p.k) - 1.0; }

struct TurnDirection {
  int direction = 0;  // predicted sign of Bm2 (and of the turn)
  bool indeterminate = false;
  double boundary_slope = 0;  // dTheta/dPsi of the dividing line
  double leading_Bm2 = 0;
  bool outside_validity = false;  // phi0 beyond the small-angle window
};

// Leading-order sign of Bm2 from the initial rates.
inline TurnDirection turn_direction(const State& s0, const CanParameters& p) {
  TurnDirection td;
  const double kcp = p.k * p.cp;
  const double lead = -kcp / 2.0 * s0.Theta + s0.Psi * (1.0 - kcp / 2.0);
  td.leading_Bm2 = lead * s0.phi * s0.phi;
  td.boundary_slope = turn_boundary_slope(p);
  // Exactly on the line up to rounding of the inputs.
  const double scale = std::abs(kcp / 2.0 * s0.Theta) + std::abs(s0.Psi * (1.0 - kcp / 2.0));
  if (std::abs(lead) <= 8.0 * std::numeric_limits<double>::epsilon() * scale) {
    td.indeterminate = true;
    td.direction = 0;
  } else {
    td.direction = lead > 0 ? 1 : -1;
  }
  td.outside_validity = s0.phi >= series_validity_limit;
  return td;
}

struct TurnReport {
  double delta_psi_formula = 0;
  std::vector<double> delta_psi_measured;  // per bounce
  int direction = 0;
  double boundary_slope = 0;
};

inline TurnReport turn_report(const FullTrajectory& traj, const CanParameters& p, double fraction = 0.1) {
  TurnReport r;
  r.boundary_slope = turn_boundary_slope(p);
  for (const auto& ev : detect_bounces(traj, fraction)) r.delta_psi_measured.push_back(ev.delta_psi);
  if (!r.delta_psi_measured.empty()) r.direction = r.delta_psi_measured.front() > 0 ? 1 : -1;
  r.delta_psi_formula = angle_of_turn(p, r.direction == 0 ? 1 : r.direction);
  return r;
}

// Velocity of the contact point over the plane.
inline std::array<double, 2> contact_velocity(const State& s, const CanParameters&) {
  return {-s.Theta * std::sin(s.psi), s.Theta * std::cos(s.psi)};
}

enum class Phase { Inner, Outer };

inline const char* to_string(Phase ph) { return ph == Phase::Inner ? "inner" : "outer"; }

struct ContactPath {
  std::vector<double> t, x, y;
  std::vector<Phase> phase;
  int reversals = 0;  // sign changes of the contact speed
};

// Contact locus of a full trajectory, integrated segment by segment on the dense output.
inline ContactPath contact_path(const FullTrajectory& traj, const CanParameters& p, double inner_fraction = 0.1) {
  ContactPath path;
  if (traj.empty()) return path;
  const double phi_cut = inner_fraction * traj.y.front()[kPhi];
  double x = 0, y = 0;
  int last_sign = 0;
  auto push = [&](std::size_t i) {
    path.t.push_back(traj.t[i]);
    path.x.push_back(x);
    path.y.push_back(y);
    path.phase.push_back(traj.y[i][kPhi] < phi_cut ? Phase::Inner : Phase::Outer);
    const double th = traj.y[i][kThetaRate];
    const int sg = th > 0 ? 1 : (th < 0 ? -1 : 0);
    if (sg != 0) {
      if (last_sign != 0 && sg != last_sign) ++path.reversals;
      last_sign = sg;
    }
  };
  push(0);
  using GL = boost::math::quadrature::gauss<double, 7>;
  for (std::size_t i = 0; i < traj.segments.size(); ++i) {
    const auto& seg = traj.segments[i];
    const double a = traj.t[i], b = traj.t[i + 1];
    auto vx = [&](double tq) { return -seg.eval(tq, kThetaRate) * std::sin(seg.eval(tq, kPsi)); };
    auto vy = [&](double tq) { return seg.eval(tq, kThetaRate) * std::cos(seg.eval(tq, kPsi)); };
    // gauss::integrate needs a <= b; orientation restored by the sign.
    if (a <= b) {
      x += GL::integrate(vx, a, b);
      y += GL::integrate(vy, a, b);
    } else {
      x -= GL::integrate(vx, b, a);
      y -= GL::integrate(vy, b, a);
    }
    push(i + 1);
  }
  (void)p;
  return path;
}

struct ArcFit {
  std::size_t first = 0, last = 0;  // node range of the inner run
  double cx = 0, cy = 0, radius = 0;
  double subtended = 0;      // |angle swept about the centre|
  double max_deviation = 0;  // max | |p - c| - radius |
};

// Algebraic (Kasa) circle fit to a set of points.
inline ArcFit fit_circle(const std::vector<double>& xs, const std::vector<double>& ys, std::size_t first,
                         std::size_t last) {
  const std::size_t n = last - first + 1;
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xs[first + i], y = ys[first + i];
    A(i, 0) = x;
    A(i, 1) = y;
    A(i, 2) = 1.0;
    b(i) = -(x * x + y * y);
  }
  const Eigen::Vector3d s = A.colPivHouseholderQr().solve(b);
  ArcFit f;
  f.first = first;
  f.last = last;
  f.cx = -s(0) / 2.0;
  f.cy = -s(1) / 2.0;
  f.radius = std::sqrt(std::max(0.0, f.cx * f.cx + f.cy * f.cy - s(2)));
  double swept = 0, prev = std::atan2(ys[first] - f.cy, xs[first] - f.cx);
  for (std::size_t i = first; i <= last; ++i) {
    const double dx = xs[i] - f.cx, dy = ys[i] - f.cy;
    f.max_deviation = std::max(f.max_deviation, std::abs(std::hypot(dx, dy) - f.radius));
    const double ang = std::atan2(dy, dx);
    double d = ang - prev;
    while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
    while (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
    swept += d;
    prev = ang;
  }
  f.subtended = std::abs(swept);
  return f;
}

// One circle fit per contiguous run of inner-phase points.
inline std::vector<ArcFit> inner_arcs(const ContactPath& path, std::size_t min_points = 8) {
  std::vector<ArcFit> arcs;
  std::size_t i = 0;
  while (i < path.phase.size()) {
    if (path.phase[i] != Phase::Inner) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < path.phase.size() && path.phase[j + 1] == Phase::Inner) ++j;
    if (j - i + 1 >= min_points) arcs.push_back(fit_circle(path.x, path.y, i, j));
    i = j + 1;
  }
  return arcs;
}

// Constants of the asymptotic contact locus.
struct LocusConstants {
  MatchedSolution ms;
  int sign = 1;
  double C_psi = 0;  // psi offset (inner or outer, as used)
  double C_x = 0, C_y = 0;
};

struct LocusPoint {
  double t = 0, x = 0, y = 0;
};

// Inner bounce: the contact point runs round a unit circle centred on (C_x, C_y).
inline std::vector<LocusPoint> contact_path_inner(double T0, double T1, const LocusConstants& lc, std::size_t n = 200) {
  std::vector<LocusPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double T = T0 + (T1 - T0) * double(i) / double(n > 1 ? n - 1 : 1);
    const double psi = inner_psi(T, lc.ms, lc.sign, lc.C_psi);
    pts.push_back({T, -std::cos(psi) + lc.C_x, -std::sin(psi) + lc.C_y});
  }
  return pts;
}

// Outer fall: same circle, but psi only creeps by O(eps^1/2).
inline std::vector<LocusPoint> contact_path_outer(double t0, double t1, const LocusConstants& lc, std::size_t n = 200) {
  std::vector<LocusPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + (t1 - t0) * double(i) / double(n > 1 ? n - 1 : 1);
    const double psi = outer_psi(t, lc.ms, lc.sign, lc.C_psi);
    pts.push_back({t, -std::cos(psi) + lc.C_x, -std::sin(psi) + lc.C_y});
  }
  return pts;
}

inline double path_length(const std::vector<LocusPoint>& pts) {
  double s = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) s += std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
  return s;
}

// Leading-order lower bound on the friction coefficient needed to keep rolling.
inline double required_friction(const CanParameters& p) { return p.h / p.ap; }

// Same bound for a uniform solid cylinder as a function of aspect ratio.
inline double uniform_cylinder_friction(double h) { return 12.0 * h / (3.0 + 13.0 * h * h); }
inline double uniform_cylinder_optimal_h() { return std::sqrt(39.0) / 13.0; }

struct FrictionProfile {
  std::vector<double> t, ratio;
  std::vector<Phase> phase;
  double max_ratio = 0, t_max = 0;
  Phase phase_at_max = Phase::Outer;
};

inline FrictionProfile friction_profile(const FullTrajectory& traj, const CanParameters& p, double inner_fraction = 0.1) {
  FrictionProfile fp;
  if (traj.empty()) return fp;
  const double phi_cut = inner_fraction * traj.y.front()[kPhi];
  std::size_t imax = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const State s = state_at(traj, i);
    const ContactForces f = contact_forces(s, p);
    fp.t.push_back(s.t);
    fp.ratio.push_back(f.ratio);
    fp.phase.push_back(s.phi < phi_cut ? Phase::Inner : Phase::Outer);
    if (f.ratio > fp.ratio[imax]) imax = i;
  }
  fp.max_ratio = fp.ratio[imax];
  fp.t_max = fp.t[imax];
  fp.phase_at_max = fp.phase[imax];
  // Refine the peak on the dense output of the neighbouring segments.
  const std::size_t lo = imax > 0 ? imax - 1 : 0, hi = std::min(imax + 1, traj.size() - 1);
  for (std::size_t i = lo; i < hi; ++i) {
    for (int q = 1; q < 16; ++q) {
      const double tq = traj.t[i] + (traj.t[i + 1] - traj.t[i]) * q / 16.0;
      const State s = state_at_time(traj, tq);
      const double r = contact_forces(s, p).ratio;
      if (r > fp.max_ratio) {
        fp.max_ratio = r;
        fp.t_max = tq;
        fp.phase_at_max = s.phi < phi_cut ? Phase::Inner : Phase::Outer;
      }
    }
  }
  return fp;
}

// One point of the turn-direction map: prediction from the initial rates versus
// the sign of the first simulated bounce.
struct SweepOutcome {
  double Psi0 = 0, Theta0 = 0;  // physical rad/s
  int predicted = 0, simulated = 0;
  bool flat_fall = false;  // no repulsion (eps = 0) or the can reached the phi guard
  double band_distance = 0;  // perpendicular distance to the dividing line
  std::string failure;
  bool agrees() const { return !flat_fall && predicted != 0 && predicted == simulated; }
};

inline double band_distance(double Psi0, double Theta0, const CanParameters& p) {
  const double m = turn_boundary_slope(p);
  return std::abs(Theta0 - m * Psi0) / std::sqrt(1.0 + m * m);
}

inline SweepOutcome sweep_point(const CanParameters& p, double Psi0, double Theta0, double phi0, double t1_seconds,
                                const IntegratorConfig& cfg = full_system_config()) {
  SweepOutcome o;
  o.Psi0 = Psi0;
  o.Theta0 = Theta0;
  o.band_distance = band_distance(Psi0, Theta0, p);
  const State phys = state_from_ic(0.0, Psi0, phi0, 0.0, 0.0, Theta0);
  const TurnDirection td = turn_direction(phys, p);
  o.predicted = td.direction;
  if (Psi0 == 0 && Theta0 == 0) {
    o.flat_fall = true;
    return o;
  }
  const State s0 = convert_rates(phys, RateClock::Physical, RateClock::Full, p);
  try {
    const auto traj = simulate(p, s0, t1_seconds / p.time_scale, cfg);
    const auto evs = detect_bounces(traj);
    if (evs.empty()) {
      o.failure = "no bounce";
    } else {
      o.simulated = evs.front().direction;
    }
  } catch (const IntegrationError& e) {
    if (e.reason == IntegrationFailure::PhiGuard || e.reason == IntegrationFailure::Singularity) {
      o.flat_fall = true;
    } else {
      o.failure = e.what();
    }
  }
  return o;
}

struct SweepGrid {
  double lo = -0.2, hi = 0.2;
  int n = 21;
  double phi0 = std::numbers::pi / 100.0;
  double t1_seconds = 0.5;
};

// Grid runs are independent, so they are spread over worker threads.
inline std::vector<SweepOutcome> run_sweep(const CanParameters& p, const SweepGrid& g, unsigned threads = 0,
                                           const IntegratorConfig& cfg = full_system_config()) {
  if (g.n < 1) throw DomainError("sweep grid needs n >= 1");
  const std::size_t total = std::size_t(g.n) * std::size_t(g.n);
  std::vector<SweepOutcome> out(total);
  auto value = [&](int i) { return g.n == 1 ? g.lo : g.lo + (g.hi - g.lo) * double(i) / double(g.n - 1); };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, unsigned(total));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t idx = w; idx < total; idx += threads) {
        const int i = int(idx / g.n), j = int(idx % g.n);
        out[idx] = sweep_point(p, value(i), value(j), g.phi0, g.t1_seconds, cfg);
      }
    });
  for (auto& th : pool) th.join();
  return out;
}

struct SweepSummary {
  std::size_t total = 0, outside_band = 0, agree = 0, flat_fall = 0, failed = 0;
  double agreement() const { return outside_band ? double(agree) / double(outside_band) : 0.0; }
};

inline SweepSummary summarize_sweep(const std::vector<SweepOutcome>& pts, double band = 0.01) {
  SweepSummary s;
  s.total = pts.size();
  for (const auto& o : pts) {
    if (o.flat_fall) ++s.flat_fall;
    if (!o.failure.empty()) ++s.failed;
    if (o.band_distance <= band) continue;
    ++s.outside_band;
    if (o.agrees()) ++s.agree;
  }
  return s;
}

}  // namespace rockcan

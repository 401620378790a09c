#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "dynamics.hpp"
#include "error.hpp"

namespace rockcan {

template <std::size_t N>
using Vec = std::array<double, N>;

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 5'000'000;
  // Component checked against min_phi_guard after each accepted step.
  std::size_t guard_index = std::numeric_limits<std::size_t>::max();
  double min_phi_guard = 0.0;
  double initial_step = 0.0;  // 0: automatic

  void validate() const {
    if (!(rel_tol > 0 && rel_tol < 1) || !(abs_tol > 0 && abs_tol < 1))
      throw DomainError("integrator tolerances must lie in (0, 1)");
    if (max_steps == 0) throw DomainError("max_steps must be positive");
    if (!(max_step > 0)) throw DomainError("max_step must be positive");
  }
};

// Fifth-order continuous extension of one Dormand-Prince step.
template <std::size_t N>
struct DenseSegment {
  double t0 = 0, h = 0;
  std::array<Vec<N>, 5> r{};

  Vec<N> eval(double t) const {
    const double s = (t - t0) / h, s1 = 1.0 - s;
    Vec<N> y;
    for (std::size_t i = 0; i < N; ++i)
      y[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
    return y;
  }

  double eval(double t, std::size_t i) const {
    const double s = (t - t0) / h, s1 = 1.0 - s;
    return r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
  }
};

template <std::size_t N>
class Trajectory {
 public:
  std::vector<double> t;
  std::vector<Vec<N>> y;
  std::vector<DenseSegment<N>> segments;  // segments[i] spans t[i]..t[i+1]

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  double direction() const { return t.size() > 1 && t.back() < t.front() ? -1.0 : 1.0; }
  double t_begin() const { return t.front(); }
  double t_end() const { return t.back(); }

  // Index of the segment containing tq (clamped to the ends).
  std::size_t segment_index(double tq) const {
    if (segments.empty()) return 0;
    const double d = direction();
    auto it = std::upper_bound(t.begin(), t.end(), tq,
                               [d](double a, double b) { return d * a < d * b; });
    std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    return std::min(i, segments.size() - 1);
  }

  Vec<N> at(double tq) const {
    if (segments.empty()) return y.front();
    const std::size_t i = segment_index(tq);
    if (tq == t[i]) return y[i];
    if (tq == t[i + 1]) return y[i + 1];
    return segments[i].eval(tq);
  }

  double at(double tq, std::size_t comp) const {
    if (segments.empty()) return y.front()[comp];
    const std::size_t i = segment_index(tq);
    if (tq == t[i]) return y[i][comp];
    if (tq == t[i + 1]) return y[i + 1][comp];
    return segments[i].eval(tq, comp);
  }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DP5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

template <std::size_t N>
bool all_finite(const Vec<N>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

template <std::size_t N>
double scaled_norm(const Vec<N>& e, const Vec<N>& y0, const Vec<N>& y1, const IntegratorConfig& cfg) {
  double s = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sk = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = e[i] / sk;
    s += q * q;
  }
  return std::sqrt(s / N);
}

template <std::size_t N>
std::vector<double> to_vector(const Vec<N>& v) {
  return std::vector<double>(v.begin(), v.end());
}

}  // namespace detail

// Adaptive Dormand-Prince 5(4) with PI step control and dense output.
// Integrates from t0 towards t1 (either direction).
template <std::size_t N, class Rhs>
Trajectory<N> integrate(Rhs&& f, double t0, const Vec<N>& y0, double t1, const IntegratorConfig& cfg = {}) {
  using detail::DP5;
  cfg.validate();
  if (!std::isfinite(t0) || !std::isfinite(t1)) throw DomainError("time span must be finite");

  Trajectory<N> traj;
  traj.t.push_back(t0);
  traj.y.push_back(y0);
  if (t1 == t0) return traj;

  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double safe = 0.9, beta = 0.04, expo1 = 0.2 - 0.75 * beta;

  auto fail = [&](IntegrationFailure why, double t, const Vec<N>& y, const std::string& msg) {
    std::ostringstream os;
    os << msg << " at t = " << t;
    throw IntegrationError(why, t, detail::to_vector(y), os.str());
  };

  Vec<N> y = y0, k1;
  double t = t0;
  try {
    k1 = f(t, y);
  } catch (const Error& e) {
    fail(IntegrationFailure::Singularity, t, y, e.what());
  }
  if (!detail::all_finite(k1)) fail(IntegrationFailure::NonFinite, t, y, "non-finite derivative");

  double h = cfg.initial_step;
  if (h <= 0) {
    // Starting step heuristic from Hairer, Norsett & Wanner.
    Vec<N> zero{};
    double d0 = detail::scaled_norm(y, zero, y, cfg), d1 = detail::scaled_norm(k1, zero, y, cfg);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, std::abs(t1 - t0));
    Vec<N> y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + dir * h0 * k1[i];
    double d2 = 0;
    try {
      Vec<N> f1 = f(t + dir * h0, y1);
      Vec<N> df;
      for (std::size_t i = 0; i < N; ++i) df[i] = f1[i] - k1[i];
      d2 = detail::scaled_norm(df, zero, y, cfg) / h0;
    } catch (const Error&) {
      d2 = 0;
    }
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min(100.0 * h0, h1);
  }
  h = std::min({h, cfg.max_step, std::abs(t1 - t0)});

  double err_old = 1e-4;
  bool last_rejected = false;
  std::size_t steps = 0;
  Vec<N> k2, k3, k4, k5, k6, k7, ys, ynew, errv;

  while (dir * (t1 - t) > 0) {
    if (++steps > cfg.max_steps) fail(IntegrationFailure::MaxSteps, t, y, "maximum number of steps exceeded");
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      fail(IntegrationFailure::StepUnderflow, t, y, "step size underflow");

    bool final_step = false;
    if (h >= std::abs(t1 - t)) {
      h = std::abs(t1 - t);
      final_step = true;
    }
    const double hs = dir * h;

    bool ok = true;
    try {
      for (std::size_t i = 0; i < N; ++i) ys[i] = y[i] + hs * DP5::a21 * k1[i];
      k2 = f(t + DP5::c2 * hs, ys);
      for (std::size_t i = 0; i < N; ++i) ys[i] = y[i] + hs * (DP5::a31 * k1[i] + DP5::a32 * k2[i]);
      k3 = f(t + DP5::c3 * hs, ys);
      for (std::size_t i = 0; i < N; ++i)
        ys[i] = y[i] + hs * (DP5::a41 * k1[i] + DP5::a42 * k2[i] + DP5::a43 * k3[i]);
      k4 = f(t + DP5::c4 * hs, ys);
      for (std::size_t i = 0; i < N; ++i)
        ys[i] = y[i] + hs * (DP5::a51 * k1[i] + DP5::a52 * k2[i] + DP5::a53 * k3[i] + DP5::a54 * k4[i]);
      k5 = f(t + DP5::c5 * hs, ys);
      for (std::size_t i = 0; i < N; ++i)
        ys[i] = y[i] + hs * (DP5::a61 * k1[i] + DP5::a62 * k2[i] + DP5::a63 * k3[i] + DP5::a64 * k4[i] +
                             DP5::a65 * k5[i]);
      k6 = f(t + hs, ys);
      for (std::size_t i = 0; i < N; ++i)
        ynew[i] = y[i] + hs * (DP5::a71 * k1[i] + DP5::a73 * k3[i] + DP5::a74 * k4[i] + DP5::a75 * k5[i] +
                               DP5::a76 * k6[i]);
      k7 = f(t + hs, ynew);
      ok = detail::all_finite(ynew) && detail::all_finite(k7);
    } catch (const Error&) {
      // A trial stage left the domain of the right-hand side: retry smaller.
      ok = false;
    }
    if (!ok) {
      h *= 0.25;
      last_rejected = true;
      continue;
    }

    for (std::size_t i = 0; i < N; ++i)
      errv[i] = hs * (DP5::e1 * k1[i] + DP5::e3 * k3[i] + DP5::e4 * k4[i] + DP5::e5 * k5[i] + DP5::e6 * k6[i] +
                      DP5::e7 * k7[i]);
    const double err = detail::scaled_norm(errv, y, ynew, cfg);
    const double fac11 = std::pow(std::max(err, 1e-300), expo1);

    if (err <= 1.0) {
      DenseSegment<N> seg;
      seg.t0 = t;
      seg.h = hs;
      for (std::size_t i = 0; i < N; ++i) {
        const double ydiff = ynew[i] - y[i];
        const double bspl = hs * k1[i] - ydiff;
        seg.r[0][i] = y[i];
        seg.r[1][i] = ydiff;
        seg.r[2][i] = bspl;
        seg.r[3][i] = ydiff - hs * k7[i] - bspl;
        seg.r[4][i] = hs * (DP5::d1 * k1[i] + DP5::d3 * k3[i] + DP5::d4 * k4[i] + DP5::d5 * k5[i] +
                            DP5::d6 * k6[i] + DP5::d7 * k7[i]);
      }

      const double tnew = final_step ? t1 : t + hs;
      if (cfg.guard_index < N && ynew[cfg.guard_index] < cfg.min_phi_guard) {
        std::ostringstream os;
        os << "guarded component fell below " << cfg.min_phi_guard;
        fail(IntegrationFailure::PhiGuard, t, y, os.str());
      }
      traj.segments.push_back(seg);
      traj.t.push_back(tnew);
      traj.y.push_back(ynew);

      double ratio = std::clamp(safe * std::pow(err_old, beta) / fac11, 0.2, 5.0);
      if (last_rejected) ratio = std::min(ratio, 1.0);
      err_old = std::max(err, 1e-4);
      last_rejected = false;

      t = tnew;
      y = ynew;
      k1 = k7;
      h = std::min(h * ratio, cfg.max_step);
    } else {
      h *= std::clamp(safe / fac11, 0.2, 1.0);
      last_rejected = true;
    }
  }
  return traj;
}

enum class ExtremumKind { Minimum, Maximum };

struct Extremum {
  double t = 0;
  double value = 0;
  ExtremumKind kind = ExtremumKind::Minimum;
};

// Interior extrema of component `xi`, located as sign changes of its rate
// component `vi` on the dense output (toms748 on the interpolant).
template <std::size_t N>
std::vector<Extremum> find_extrema(const Trajectory<N>& traj, std::size_t xi, std::size_t vi) {
  std::vector<Extremum> out;
  const double dir = traj.direction();
  for (std::size_t i = 0; i < traj.segments.size(); ++i) {
    const double va = dir * traj.y[i][vi], vb = dir * traj.y[i + 1][vi];
    // Count a zero at a node once, on the segment that ends there.
    if (i == 0 && va == 0) continue;
    if (va == 0 || !(va * vb <= 0) || vb == va) continue;
    if (vb == 0 && i + 1 == traj.segments.size()) continue;
    const auto& seg = traj.segments[i];
    double ta = traj.t[i], tb = traj.t[i + 1];
    double troot = tb;
    if (vb != 0) {
      auto g = [&](double tq) { return seg.eval(tq, vi); };
      double lo = std::min(ta, tb), hi = std::max(ta, tb);
      std::uintmax_t it = 100;
      auto tolf = boost::math::tools::eps_tolerance<double>(52);
      auto r = boost::math::tools::toms748_solve(g, lo, hi, g(lo), g(hi), tolf, it);
      troot = 0.5 * (r.first + r.second);
    }
    Extremum e;
    e.t = troot;
    e.value = seg.eval(troot, xi);
    e.kind = va < 0 ? ExtremumKind::Minimum : ExtremumKind::Maximum;
    out.push_back(e);
  }
  return out;
}

}  // namespace rockcan

namespace rockcan {

using FullTrajectory = Trajectory<6>;

inline constexpr std::size_t kPsi = 0, kTheta = 1, kPhi = 2, kPsiRate = 3, kThetaRate = 4, kPhiRate = 5;

// Defaults for the full system: phi guarded well below any physical bounce minimum.
inline IntegratorConfig full_system_config(double rel_tol = 1e-10, double abs_tol = 1e-12) {
  IntegratorConfig cfg;
  cfg.rel_tol = rel_tol;
  cfg.abs_tol = abs_tol;
  cfg.guard_index = kPhi;
  cfg.min_phi_guard = 1e-10;
  return cfg;
}

inline FullTrajectory simulate(const CanParameters& p, const State& s0, double t1,
                               const IntegratorConfig& cfg = full_system_config()) {
  auto rhs = [&p](double, const Vec<6>& y) { return eom_rhs(y, p); };
  return integrate<6>(rhs, s0.t, s0.vec(), t1, cfg);
}

inline State state_at(const FullTrajectory& traj, std::size_t i) { return State::from_vec(traj.y[i], traj.t[i]); }
inline State state_at_time(const FullTrajectory& traj, double t) { return State::from_vec(traj.at(t), t); }

struct BounceEvent {
  double t_min = 0;
  double phi_min = 0;
  double delta_psi = 0;  // psi change between the neighbouring phi maxima
  int direction = 0;
};

// One event per local minimum of the phi component below fraction * phi(t0).
// psi_i may be out of range when the trajectory carries no precession angle.
template <std::size_t N>
std::vector<BounceEvent> detect_bounces(const Trajectory<N>& traj, std::size_t phi_i, std::size_t Phi_i,
                                        std::size_t psi_i, double fraction = 0.1) {
  std::vector<BounceEvent> out;
  if (traj.segments.empty()) return out;
  const auto ext = find_extrema(traj, phi_i, Phi_i);
  const double threshold = fraction * traj.y.front()[phi_i];
  for (std::size_t j = 0; j < ext.size(); ++j) {
    if (ext[j].kind != ExtremumKind::Minimum || !(ext[j].value < threshold)) continue;
    double tb = traj.t_begin(), ta = traj.t_end();
    for (std::size_t q = j; q-- > 0;)
      if (ext[q].kind == ExtremumKind::Maximum) {
        tb = ext[q].t;
        break;
      }
    for (std::size_t q = j + 1; q < ext.size(); ++q)
      if (ext[q].kind == ExtremumKind::Maximum) {
        ta = ext[q].t;
        break;
      }
    BounceEvent ev;
    ev.t_min = ext[j].t;
    ev.phi_min = ext[j].value;
    if (psi_i < N) {
      ev.delta_psi = traj.at(ta, psi_i) - traj.at(tb, psi_i);
      ev.direction = ev.delta_psi > 0 ? 1 : (ev.delta_psi < 0 ? -1 : 0);
    }
    out.push_back(ev);
  }
  return out;
}

inline std::vector<BounceEvent> detect_bounces(const FullTrajectory& traj, double fraction = 0.1) {
  return detect_bounces(traj, kPhi, kPhiRate, kPsi, fraction);
}

}  // namespace rockcan

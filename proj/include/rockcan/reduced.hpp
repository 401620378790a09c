#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "error.hpp"
#include "frobenius.hpp"
#include "integrate.hpp"
#include "params.hpp"

namespace rockcan {

// Coefficients of
//   phi'' = eps (a3/phi^3 + al2 L/phi^2 + a2/phi^2 + al1 L/phi + a1/phi + all L^2 + al0 L + a0) - 1,
// L = log(phi), with the common factor eps = Bm2^2 taken out.
struct ReducedCoefficients {
  double a3 = 0, a2 = 0, a1 = 0, a0 = 0;
  double al2 = 0, al1 = 0, al0 = 0, all = 0;
  double epsilon = 0;
  double phi_scan_max = 1.0;  // upper end of the bracketing scan (balancing angle)
};

// Coefficients for raw constants (B0, Bm2), before the factor eps is removed.
inline ReducedCoefficients raw_coefficients(double B0, double B, const CanParameters& p) {
  const double h = p.h, k = p.k, ap = p.ap, cp = p.cp;
  const double q = h * h * k - 1.0;
  const double k2 = k * k, h2 = h * h;
  ReducedCoefficients rc;
  rc.a3 = B * B * ap;
  rc.al2 = B * B * h * q / cp;
  rc.a2 = -2.0 * h * B / (k * cp) * (B0 + B * (ap * cp * k2 - cp * k / 2.0 - 3.0 * h2 * k2 / 4.0 + k / 4.0 - 1.0 / 3.0));
  rc.al1 = -B * B * (ap * k - 1.0) * q;
  rc.a1 = 2.0 * B / (k * cp) *
          (cp * (B0 * (ap * k - 1.0) +
                 B * (0.5 * ap * h2 * k2 * k - ap * k / 3.0 - 0.25 * h2 * k2 - 0.25 * k + 1.0 / 3.0)) -
           B * h2 * k2 * q);
  rc.all = -B * B * h * k * q * q / (2.0 * cp);
  rc.al0 = 2.0 * B * h * q / cp * (B0 + B * (ap * cp * k2 / 3.0 - cp * k / 2.0 - 3.0 * h2 * k2 / 4.0 + k / 4.0 - 5.0 / 12.0));
  // Re-derived symbolically (tests/oracles/derive_series.py).
  const double h4k4 = h2 * h2 * k2 * k2;
  rc.a0 = h / (72.0 * cp * k) *
          (-144.0 * B0 * B0 +
           B0 * B * (-96.0 * ap * cp * k2 + 144.0 * cp * k + 216.0 * h2 * k2 - 72.0 * k + 120.0) +
           B * B *
               (32.0 * ap * cp * h2 * k2 * k2 - 80.0 * ap * cp * k2 * k + 32.0 * ap * cp * k2 -
                72.0 * cp * h2 * k2 * k + 144.0 * cp * k2 - 24.0 * cp * k + 9.0 * h4k4 - 54.0 * h2 * k2 * k -
                84.0 * h2 * k2 + 9.0 * k2 + 24.0 * k - 24.0));
  rc.epsilon = 1.0;
  rc.phi_scan_max = balancing_angle(p);
  return rc;
}

// All coefficients are quadratic in (B0, Bm2), so with |Bm2| = sqrt(eps) and B0 = zeta sqrt(eps)
// the factor eps comes out by evaluating at (zeta, sign). eps = 0 leaves free fall.
inline ReducedCoefficients a_coefficients(const FrobeniusConstants& fc, const CanParameters& p) {
  if (fc.epsilon > 0) {
    ReducedCoefficients rc = raw_coefficients(fc.zeta, fc.sign_Bm2, p);
    rc.epsilon = fc.epsilon;
    return rc;
  }
  ReducedCoefficients rc = raw_coefficients(0.0, 1.0, p);
  rc.epsilon = 0.0;
  return rc;
}

namespace detail {

inline double bracket_sum(double phi, const ReducedCoefficients& rc) {
  const double L = std::log(phi);
  const double ip = 1.0 / phi;
  return rc.a3 * ip * ip * ip + (rc.al2 * L + rc.a2) * ip * ip + (rc.al1 * L + rc.a1) * ip + rc.all * L * L +
         rc.al0 * L + rc.a0;
}

inline double bracket_derivative(double phi, const ReducedCoefficients& rc) {
  const double L = std::log(phi);
  const double ip = 1.0 / phi;
  return -3.0 * rc.a3 * ip * ip * ip * ip + (rc.al2 * (1.0 - 2.0 * L) - 2.0 * rc.a2) * ip * ip * ip +
         (rc.al1 * (1.0 - L) - rc.a1) * ip * ip + (2.0 * rc.all * L + rc.al0) * ip;
}

// Antiderivative of bracket_sum.
inline double bracket_primitive(double phi, const ReducedCoefficients& rc) {
  const double L = std::log(phi);
  return L * L * (rc.al1 / 2.0 + rc.all * phi) + L * (rc.a1 + (rc.al0 - 2.0 * rc.all) * phi - rc.al2 / phi) +
         phi * (rc.a0 + 2.0 * rc.all - rc.al0) - (rc.a2 + rc.al2) / phi - rc.a3 / (2.0 * phi * phi);
}

inline void require_positive(double phi) {
  if (!(phi > 0)) throw DomainError("reduced model needs phi > 0");
}

}  // namespace detail

inline double reduced_rhs(double phi, double /*Phi*/, const ReducedCoefficients& rc) {
  detail::require_positive(phi);
  if (rc.epsilon == 0) return -1.0;
  return rc.epsilon * detail::bracket_sum(phi, rc) - 1.0;
}

// Potential V with H = Phi^2/2 + V(phi).
inline double reduced_potential(double phi, const ReducedCoefficients& rc) {
  if (rc.epsilon == 0) {
    if (phi < 0) throw DomainError("reduced model needs phi >= 0");
    return phi;
  }
  detail::require_positive(phi);
  return phi - rc.epsilon * detail::bracket_primitive(phi, rc);
}

inline double reduced_potential_slope(double phi, const ReducedCoefficients& rc) {
  if (rc.epsilon == 0) return 1.0;
  return -reduced_rhs(phi, 0.0, rc);
}

inline double reduced_potential_curvature(double phi, const ReducedCoefficients& rc) {
  if (rc.epsilon == 0) return 0.0;
  return -rc.epsilon * detail::bracket_derivative(phi, rc);
}

inline double hamiltonian(double phi, double Phi, const ReducedCoefficients& rc) {
  detail::require_positive(phi);
  return 0.5 * Phi * Phi + reduced_potential(phi, rc);
}

// Minimum of the potential (root of the right-hand side), if any.
inline std::optional<double> reduced_equilibrium(const ReducedCoefficients& rc) {
  if (rc.epsilon == 0) return std::nullopt;
  const int n = 400;
  const double lo = 1e-8, hi = std::max(rc.phi_scan_max, 1e-6);
  double pa = lo, fa = reduced_rhs(pa, 0, rc);
  for (int i = 1; i <= n; ++i) {
    const double pb = lo * std::pow(hi / lo, double(i) / n);
    const double fb = reduced_rhs(pb, 0, rc);
    if (fa > 0 && fb <= 0) {
      auto g = [&rc](double x) { return reduced_rhs(x, 0, rc); };
      std::uintmax_t it = 200;
      auto r = boost::math::tools::toms748_solve(g, pa, pb, fa, fb, boost::math::tools::eps_tolerance<double>(52), it);
      return 0.5 * (r.first + r.second);
    }
    pa = pb;
    fa = fb;
  }
  return std::nullopt;
}

struct TurningPoints {
  int count = 0;  // 0, 1 or 2 positive roots
  double lower = 0, upper = 0;
  bool lower_clamped = false;  // eps = 0: the can reaches phi = 0
  bool degenerate = false;     // E equals the potential minimum
};

inline TurningPoints turning_points(double E, const ReducedCoefficients& rc) {
  TurningPoints tp;
  auto tol = boost::math::tools::eps_tolerance<double>(53);
  auto f = [&](double x) { return reduced_potential(x, rc) - E; };
  auto solve = [&](double a, double b) {
    std::uintmax_t it = 300;
    auto r = boost::math::tools::toms748_solve(f, a, b, f(a), f(b), tol, it);
    const double x = 0.5 * (r.first + r.second);
    // Pick whichever end has the smaller residual.
    double best = x;
    for (double c : {r.first, r.second})
      if (std::abs(f(c)) < std::abs(f(best))) best = c;
    return best;
  };
  // Grow the upper bracket until V exceeds E (V ~ phi for large phi).
  auto upper_from = [&](double start) {
    double b = std::max(start * 2.0, 1e-6);
    for (int i = 0; i < 200 && f(b) <= 0; ++i) b *= 2.0;
    return f(b) > 0 ? std::optional<double>(b) : std::nullopt;
  };

  if (rc.epsilon == 0) {
    if (!(E > 0)) return tp;
    tp.count = 2;
    tp.lower = 0;
    tp.upper = E;
    tp.lower_clamped = true;
    return tp;
  }

  const auto eq = reduced_equilibrium(rc);
  if (!eq) {
    // Monotone potential: at most the single repulsive-wall root.
    double a = 1e-8;
    while (f(a) <= 0 && a > 1e-300) a *= 0.5;
    double b = rc.phi_scan_max;
    if (f(a) > 0 && f(b) < 0) {
      tp.count = 1;
      tp.lower = tp.upper = solve(a, b);
    }
    return tp;
  }
  const double pe = *eq;
  const double fmin = f(pe);
  if (fmin > 0) return tp;
  if (fmin == 0 || std::abs(fmin) <= 1e-15 * std::max(1.0, std::abs(E))) {
    tp.count = 2;
    tp.lower = tp.upper = pe;
    tp.degenerate = true;
    return tp;
  }
  double a = pe;
  while (f(a) <= 0 && a > 1e-300) a *= 0.5;
  if (f(a) > 0) {
    tp.lower = solve(a, pe);
    ++tp.count;
  }
  if (auto b = upper_from(pe)) {
    tp.upper = solve(pe, *b);
    ++tp.count;
  }
  if (tp.count == 1 && tp.upper == 0) tp.upper = tp.lower;
  return tp;
}

// Period of the closed orbit at energy E: T = 2 * integral dphi / sqrt(2 (E - V)),
// with phi = m + w sin(theta) removing the endpoint singularities.
inline double period(double E, const ReducedCoefficients& rc, double* error_estimate = nullptr) {
  const TurningPoints tp = turning_points(E, rc);
  if (tp.count < 2 || tp.degenerate || !(tp.upper > tp.lower)) throw DomainError("no closed orbit at this energy");
  const double p0 = tp.lower, p1 = tp.upper;
  const double m = 0.5 * (p0 + p1), w = 0.5 * (p1 - p0);
  const double s0 = tp.lower_clamped ? 1.0 : reduced_potential_slope(p0, rc);
  const double s1 = reduced_potential_slope(p1, rc);
  const double c0 = tp.lower_clamped ? 0.0 : reduced_potential_curvature(p0, rc);
  const double c1 = reduced_potential_curvature(p1, rc);
  const double cut = 1e-6 * w;

  auto integrand = [&](double th) {
    const double sn = std::sin(th);
    // Distances to the two turning points, free of cancellation.
    const double hp = 0.5 * (0.5 * std::numbers::pi - th), hm = 0.5 * (0.5 * std::numbers::pi + th);
    const double d1 = 2.0 * w * std::sin(hp) * std::sin(hp);  // p1 - phi
    const double d0 = 2.0 * w * std::sin(hm) * std::sin(hm);  // phi - p0
    // Next to a turning point E - V is expanded about the root itself.
    double diff;
    if (d1 < cut)
      diff = s1 * d1 - 0.5 * c1 * d1 * d1;
    else if (d0 < cut && !tp.lower_clamped)
      diff = -s0 * d0 - 0.5 * c0 * d0 * d0;
    else
      diff = E - reduced_potential(m + w * sn, rc);
    if (!(diff > 0)) return 0.0;
    return w * std::cos(th) / std::sqrt(2.0 * diff);
  };
  double err = 0;
  const double half = 0.5 * std::numbers::pi;
  const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -half, half, 20, 1e-13, &err);
  if (error_estimate) *error_estimate = 2.0 * err;
  return 2.0 * I;
}

// Falling time scale for release from rest at phi1 with eps = 0, in seconds.
inline double flat_fall_period_seconds(double phi1, const CanParameters& p) {
  return 2.0 * std::sqrt(2.0 * phi1) * p.reduced_time_scale;
}

using ReducedTrajectory = Trajectory<3>;  // (phi, Phi, psi)

inline IntegratorConfig reduced_config(double rel_tol = 1e-10, double abs_tol = 1e-12) {
  IntegratorConfig cfg;
  cfg.rel_tol = rel_tol;
  cfg.abs_tol = abs_tol;
  return cfg;
}

// Reduced flow on the reduced clock. psi is carried along with rate psi_series(phi),
// in whatever clock the constants were fitted (null fc: psi stays constant).
inline ReducedTrajectory simulate_reduced(const ReducedCoefficients& rc, double phi1, double Phi1, double t1,
                                          const IntegratorConfig& cfg = reduced_config(),
                                          const FrobeniusConstants* fc = nullptr, const CanParameters* p = nullptr) {
  auto rhs = [&](double, const Vec<3>& y) -> Vec<3> {
    const double dpsi = (fc && p) ? psi_series(y[0], *fc, *p) : 0.0;
    return {y[1], reduced_rhs(y[0], y[1], rc), dpsi};
  };
  return integrate<3>(rhs, 0.0, Vec<3>{phi1, Phi1, 0.0}, t1, cfg);
}

}  // namespace rockcan

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "dynamics.hpp"
#include "error.hpp"
#include "integrate.hpp"
#include "params.hpp"

namespace rockcan {

// Constants of the small-phi series Psi = B0 Psi_0 + Bm2 Psi_-2.
struct FrobeniusConstants {
  double B0 = 0, Bm2 = 0;
  double epsilon = 0;  // Bm2^2
  double zeta = 0;     // B0 / |Bm2|, NaN when epsilon = 0
  int sign_Bm2 = 0;
};

inline FrobeniusConstants make_constants(double B0, double Bm2) {
  FrobeniusConstants fc;
  fc.B0 = B0;
  fc.Bm2 = Bm2;
  fc.epsilon = Bm2 * Bm2;
  fc.sign_Bm2 = Bm2 > 0 ? 1 : (Bm2 < 0 ? -1 : 0);
  fc.zeta = Bm2 != 0 ? B0 / std::abs(Bm2) : std::numeric_limits<double>::quiet_NaN();
  return fc;
}

// Coefficients of the leading-order forms
//   Theta = -Bm2/phi^2 + Bm2 k h/phi + Theta00 + (Theta_l0 + Theta_l1 phi) log phi
//   Psi   =  Bm2/phi^2 - Bm2 k h/phi + Psi00   + (Psi_l0   + Psi_l1 phi)   log phi
struct SeriesCoefficients {
  double Theta00 = 0, Theta_l0 = 0, Theta_l1 = 0;
  double Psi00 = 0, Psi_l0 = 0, Psi_l1 = 0;
};

inline SeriesCoefficients series_coefficients(const FrobeniusConstants& fc, const CanParameters& p) {
  const double k = p.k, h = p.h, cp = p.cp;
  const double B0 = fc.B0, B = fc.Bm2;
  const double q = h * h * k - 1.0;
  SeriesCoefficients sc;
  sc.Psi00 = B0;
  sc.Psi_l0 = -B * k * q / 2.0;
  sc.Psi_l1 = -B * h * k * k * q / 6.0;
  sc.Theta00 = (2.0 - k * cp) / (k * cp) * B0 + (3.0 * k * (cp + 1.0) - 4.0 - 9.0 * h * h * k * k) / (6.0 * k * cp) * B;
  sc.Theta_l0 = B * q / (2.0 * cp) * (cp * k - 2.0);
  sc.Theta_l1 = B * q / (2.0 * cp) * k * h * (cp * k - 6.0) / 3.0;
  return sc;
}

inline constexpr double series_validity_limit = 0.3;

namespace detail {

inline void require_positive_phi(double phi) {
  if (!(phi > 0)) throw DomainError("series evaluated at non-positive phi");
}

// Truncated regular basis and its derivative.
inline double psi0_basis(double phi, const CanParameters& p) { return 1.0 + p.k * p.h * phi / 3.0; }
inline double dpsi0_basis(double, const CanParameters& p) { return p.k * p.h / 3.0; }

// Truncated singular basis (log part multiplies the regular series to second order).
inline double psim2_basis(double phi, const CanParameters& p) {
  const double k = p.k, kh = p.k * p.h;
  const double C = -(kh * kh - k) / 2.0;
  const double reg = 1.0 + kh * phi / 3.0 + (kh * kh + 6.0 + 3.0 * k) / 24.0 * phi * phi;
  const double q3 = -kh * (-2.0 * kh * kh + 4.0 + 5.0 * k) / 9.0;
  return C * reg * std::log(phi) + 1.0 / (phi * phi) - kh / phi + q3 * phi;
}

inline double dpsim2_basis(double phi, const CanParameters& p) {
  const double k = p.k, kh = p.k * p.h;
  const double C = -(kh * kh - k) / 2.0;
  const double c2 = (kh * kh + 6.0 + 3.0 * k) / 24.0;
  const double reg = 1.0 + kh * phi / 3.0 + c2 * phi * phi;
  const double dreg = kh / 3.0 + 2.0 * c2 * phi;
  const double q3 = -kh * (-2.0 * kh * kh + 4.0 + 5.0 * k) / 9.0;
  return C * (dreg * std::log(phi) + reg / phi) - 2.0 / (phi * phi * phi) + kh / (phi * phi) + q3;
}

}  // namespace detail

inline double psi_series(double phi, const FrobeniusConstants& fc, const CanParameters& p) {
  detail::require_positive_phi(phi);
  return fc.B0 * detail::psi0_basis(phi, p) + fc.Bm2 * detail::psim2_basis(phi, p);
}

inline double dpsi_series(double phi, const FrobeniusConstants& fc, const CanParameters& p) {
  detail::require_positive_phi(phi);
  return fc.B0 * detail::dpsi0_basis(phi, p) + fc.Bm2 * detail::dpsim2_basis(phi, p);
}

inline double theta_series(double phi, const FrobeniusConstants& fc, const CanParameters& p) {
  detail::require_positive_phi(phi);
  const SeriesCoefficients sc = series_coefficients(fc, p);
  const double B = fc.Bm2, kh = p.k * p.h;
  return -B / (phi * phi) + B * kh / phi + sc.Theta00 + (sc.Theta_l0 + sc.Theta_l1 * phi) * std::log(phi);
}

// Leading-order form of Psi (the form used to build the reduced equation).
inline double psi_leading(double phi, const FrobeniusConstants& fc, const CanParameters& p) {
  detail::require_positive_phi(phi);
  const SeriesCoefficients sc = series_coefficients(fc, p);
  const double B = fc.Bm2, kh = p.k * p.h;
  return B / (phi * phi) - B * kh / phi + sc.Psi00 + (sc.Psi_l0 + sc.Psi_l1 * phi) * std::log(phi);
}

// Small-phi expansion of dPsi/dphi = Psi_dot / Phi at the initial state.
inline double dpsi_dphi_initial(const State& s0, const CanParameters& p) {
  if (!(s0.phi > 0)) throw DomainError("dpsi_dphi_initial needs phi0 > 0");
  const double kcp = p.k * p.cp, phi = s0.phi;
  const double Psi = s0.Psi, Theta = s0.Theta;
  return (kcp * (Psi + Theta) - 2.0 * Psi) / phi - p.h * p.k * Psi + (kcp * (Theta - 2.0 * Psi) + 4.0 * Psi) * phi / 6.0;
}

// Closed-form truncation of the 2x2 solve, leading order in Bm2.
inline FrobeniusConstants fit_constants_closed_form(const State& s0, const CanParameters& p) {
  const double k = p.k, h = p.h, cp = p.cp, kcp = k * cp;
  const double phi = s0.phi, Psi = s0.Psi, Theta = s0.Theta, S = Theta + Psi;
  const double phi2 = phi * phi;
  const double B0 = kcp / 2.0 * S - h * k * kcp / 2.0 * S * phi -
                    (h * h * k * k - k) / 4.0 * (kcp * S - 2.0 * Psi) * phi2 * std::log(phi) +
                    (-kcp * (5.0 * Psi + 2.0 * Theta) + (4.0 - 3.0 * k + 9.0 * h * h * k * k) * Psi) * phi2 / 12.0;
  const double Bm2 = (-kcp / 2.0 * S + Psi) * phi2;
  return make_constants(B0, Bm2);
}

struct FrobeniusFit {
  FrobeniusConstants primary;      // 2x2 solve on the truncated bases
  FrobeniusConstants closed_form;  // leading-order closed form
  double dpsi_dphi = 0;
  bool outside_validity = false;
};

inline FrobeniusFit fit_constants(const State& s0, const CanParameters& p) {
  if (!(s0.phi > 0)) throw DomainError("fit_constants needs phi0 > 0");
  const double phi = s0.phi;
  const double dpsi = dpsi_dphi_initial(s0, p);
  const double m00 = detail::psi0_basis(phi, p), m01 = detail::psim2_basis(phi, p);
  const double m10 = detail::dpsi0_basis(phi, p), m11 = detail::dpsim2_basis(phi, p);
  const double det = m00 * m11 - m01 * m10;
  const double scale = std::abs(m00 * m11) + std::abs(m01 * m10);
  if (!(std::abs(det) > 1e-14 * scale)) throw DomainError("singular Frobenius fitting system");
  const double B0 = (s0.Psi * m11 - m01 * dpsi) / det;
  const double Bm2 = (m00 * dpsi - m10 * s0.Psi) / det;
  FrobeniusFit fit;
  fit.primary = make_constants(B0, Bm2);
  fit.closed_form = fit_constants_closed_form(s0, p);
  fit.dpsi_dphi = dpsi;
  fit.outside_validity = phi >= series_validity_limit;
  return fit;
}

struct DriftStats {
  double initial = 0;
  double mean = 0;
  double max_relative_drift = 0;  // max |B(t) - B(0)| / |B(0)|
  double amplitude = 0;           // (max - min) / 2
};

struct ConstancyReport {
  DriftStats B0, Bm2;
  std::size_t samples = 0;
};

// Evaluates the closed-form constants at every node of a full-system trajectory.
inline ConstancyReport constancy_report(const FullTrajectory& traj, const CanParameters& p) {
  ConstancyReport rep;
  if (traj.empty()) return rep;
  double lo0 = INFINITY, hi0 = -INFINITY, lo2 = INFINITY, hi2 = -INFINITY, s0 = 0, s2 = 0;
  const FrobeniusConstants first = fit_constants_closed_form(state_at(traj, 0), p);
  rep.B0.initial = first.B0;
  rep.Bm2.initial = first.Bm2;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const FrobeniusConstants fc = fit_constants_closed_form(state_at(traj, i), p);
    lo0 = std::min(lo0, fc.B0);
    hi0 = std::max(hi0, fc.B0);
    lo2 = std::min(lo2, fc.Bm2);
    hi2 = std::max(hi2, fc.Bm2);
    s0 += fc.B0;
    s2 += fc.Bm2;
    if (first.B0 != 0)
      rep.B0.max_relative_drift = std::max(rep.B0.max_relative_drift, std::abs(fc.B0 - first.B0) / std::abs(first.B0));
    if (first.Bm2 != 0)
      rep.Bm2.max_relative_drift =
          std::max(rep.Bm2.max_relative_drift, std::abs(fc.Bm2 - first.Bm2) / std::abs(first.Bm2));
  }
  rep.samples = traj.size();
  rep.B0.mean = s0 / rep.samples;
  rep.Bm2.mean = s2 / rep.samples;
  rep.B0.amplitude = (hi0 - lo0) / 2.0;
  rep.Bm2.amplitude = (hi2 - lo2) / 2.0;
  return rep;
}

}  // namespace rockcan

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "dynamics.hpp"
#include "error.hpp"
#include "params.hpp"

namespace rockcan {

enum class MotionClass { None, Static, Balanced, Steady };

inline const char* to_string(MotionClass c) {
  switch (c) {
    case MotionClass::None: return "none";
    case MotionClass::Static: return "static";
    case MotionClass::Balanced: return "balanced";
    case MotionClass::Steady: return "steady";
  }
  return "none";
}

struct SteadyMotion {
  double Psi_e = 0, Theta_e = 0, phi0 = 0;
  MotionClass cls = MotionClass::None;
  bool rest = false;  // centre of mass at rest (zero friction)
  double residual = 0;
};

// Phi-equation defect for constant rates at fixed tilt.
inline double steady_residual(double Psi_e, double Theta_e, double phi0, const CanParameters& p) {
  const double s = std::sin(phi0), c = std::cos(phi0);
  return ((p.ap - p.cp) * s * c - p.h * std::cos(2.0 * phi0)) * Psi_e * Psi_e -
         (p.cp * s + p.h * c) * Theta_e * Psi_e + (p.h * s - c);
}

// Horizontal speed defect; zero when the centre of mass stays put.
inline double rest_residual(double Psi_e, double Theta_e, double phi0, const CanParameters& p) {
  return Psi_e * (std::cos(phi0) - p.h * std::sin(phi0)) + Theta_e;
}

// Spin rate that keeps a can balanced at phi* while precessing at Psi_e.
inline double balanced_theta(double Psi_e, const CanParameters& p) {
  const double phis = balancing_angle(p);
  return (p.a - p.c) * std::cos(phis) * Psi_e / (p.cp + p.h * p.h);
}

inline constexpr double default_classify_tol = 1e-9;

inline SteadyMotion classify(double Psi_e, double Theta_e, double phi0, const CanParameters& p,
                             double tol = default_classify_tol) {
  if (!(tol > 0)) throw DomainError("classification tolerance must be positive");
  SteadyMotion m{Psi_e, Theta_e, phi0, MotionClass::None, false, steady_residual(Psi_e, Theta_e, phi0, p)};
  if (std::abs(m.residual) > tol) return m;
  const bool at_balance = std::abs(phi0 - balancing_angle(p)) <= tol;
  if (at_balance && std::abs(Psi_e) <= tol && std::abs(Theta_e) <= tol)
    m.cls = MotionClass::Static;
  else if (at_balance)
    m.cls = MotionClass::Balanced;
  else
    m.cls = MotionClass::Steady;
  m.rest = std::abs(rest_residual(Psi_e, Theta_e, phi0, p)) <= tol;
  return m;
}

struct RollingEigenvalues {
  std::complex<double> plus, minus;
  bool centre_like = false;  // purely imaginary pair
  const char* label() const { return centre_like ? "centre-like" : "saddle-like"; }
};

// Non-zero eigenvalues of straight-line rolling at the balancing angle.
// Gyroscopic term is k cp (cp + h^2), from linearising the equations of motion.
inline RollingEigenvalues rolling_eigenvalues(double Theta_e, const CanParameters& p) {
  const double rad =
      (std::sqrt(p.h * p.h + 1.0) - Theta_e * Theta_e * p.k * p.cp * (p.cp + p.h * p.h)) / (p.ap + 1.0);
  RollingEigenvalues ev;
  if (rad >= 0) {
    ev.plus = {std::sqrt(rad), 0.0};
    ev.minus = {-std::sqrt(rad), 0.0};
  } else {
    ev.plus = {0.0, std::sqrt(-rad)};
    ev.minus = {0.0, -std::sqrt(-rad)};
    ev.centre_like = true;
  }
  return ev;
}

// Rolling rate above which straight-line rolling is centre-like; +inf if no such rate.
inline double critical_rolling_rate(const CanParameters& p) {
  const double den = p.k * p.cp * (p.cp + p.h * p.h);
  if (den <= 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(std::sqrt(p.h * p.h + 1.0) / den);
}

inline double circle_radius(double Psi_e, double Theta_e, double phi0, const CanParameters& p) {
  if (Psi_e == 0) throw StraightLineError("Psi_e = 0: the can rolls in a straight line");
  return std::abs(rest_residual(Psi_e, Theta_e, phi0, p) / Psi_e);
}

// Steady motions with the centre of mass at rest; both sign branches.
struct RateBranch {
  double Psi_e = 0, Theta_e = 0;
};

inline std::optional<std::array<RateBranch, 2>> rest_motion(double phi0, const CanParameters& p) {
  if (!(phi0 > 0 && phi0 < std::numbers::pi / 2)) throw DomainError("rest motion needs 0 < phi0 < pi/2");
  const double s = std::sin(phi0), c = std::cos(phi0);
  const double num = c - p.h * s;
  // Rounding at phi0 = phi* leaves num ~ 1e-17.
  if (num <= 8 * std::numeric_limits<double>::epsilon()) return std::nullopt;
  const double den = p.a * s * c - p.c * p.h * s * s;
  if (!(num > 0) || !(den > 0)) return std::nullopt;
  const double Psi = std::sqrt(num / den);
  const double Theta = -Psi * num;
  return std::array<RateBranch, 2>{RateBranch{Psi, Theta}, RateBranch{-Psi, -Theta}};
}

}  // namespace rockcan

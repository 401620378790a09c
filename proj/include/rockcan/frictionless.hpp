#pragma once

#include <cmath>
#include <sstream>

#include "dynamics.hpp"
#include "error.hpp"
#include "integrate.hpp"
#include "params.hpp"

namespace rockcan {

// Slipping can on a smooth plane. The centre of mass only moves vertically,
// so its height sin(phi) + h cos(phi) carries all the translation energy.

struct FrictionlessConstants {
  double Hz_B = 0, Hz_G = 0;
  double epsilon = 0;  // Hz_B^2
  double zeta = 0;     // Hz_G / Hz_B, NaN when Hz_B = 0
};

inline FrictionlessConstants frictionless_constants(double Hz_B, double Hz_G) {
  FrictionlessConstants f{Hz_B, Hz_G, Hz_B * Hz_B, 0.0};
  f.zeta = Hz_B != 0 ? Hz_G / Hz_B : std::numeric_limits<double>::quiet_NaN();
  return f;
}

inline FrictionlessConstants frictionless_constants(const State& s, const CanParameters& p) {
  const AngularMomenta m = angular_momenta(s, p);
  return frictionless_constants(m.Hz_B, m.Hz_G);
}

struct FreeRates {
  double Psi = 0, Theta = 0;
};

// Invert the two momentum relations at the current tilt.
inline FreeRates rates_from_momenta(double phi, const FrictionlessConstants& f, const CanParameters& p,
                                    double sin_guard = default_sin_guard) {
  const double s = std::sin(phi), c = std::cos(phi);
  if (std::abs(s) < sin_guard || p.a == 0 || p.c == 0) {
    std::ostringstream os;
    os << "momentum elimination singular at phi = " << phi;
    throw SingularityError(phi, os.str());
  }
  FreeRates r;
  r.Psi = (f.Hz_G - c * f.Hz_B) / (p.a * s * s);
  r.Theta = f.Hz_B / p.c - r.Psi * c;
  return r;
}

namespace detail {

inline double slip_phi_accel(double phi, double Phi, double Psi, double Theta, const CanParameters& p) {
  const double s = std::sin(phi), c = std::cos(phi);
  const double Cc = c - p.h * s, S = s + p.h * c;
  return (Cc * S * Phi * Phi + (p.a - p.c) * Psi * Psi * s * c - p.c * Theta * Psi * s - Cc) / (p.a + Cc * Cc);
}

}  // namespace detail

// phi'' with Psi and Theta eliminated through the conserved momenta.
inline double frictionless_phi_rhs(double phi, double Phi, const FrictionlessConstants& f, const CanParameters& p) {
  if (!(phi > 0 && phi < std::numbers::pi / 2)) throw DomainError("frictionless phi equation needs 0 < phi < pi/2");
  const FreeRates r = rates_from_momenta(phi, f, p);
  return detail::slip_phi_accel(phi, Phi, r.Psi, r.Theta, p);
}

// Full flow in the rolling layout (psi, theta, phi, Psi, Theta, Phi).
inline std::array<double, 6> frictionless_rhs(const std::array<double, 6>& y, const CanParameters& p,
                                              double sin_guard = default_sin_guard) {
  const State st = State::from_vec(y);
  const double s = std::sin(st.phi), c = std::cos(st.phi);
  if (std::abs(s) < sin_guard) {
    std::ostringstream os;
    os << "sin(phi) below guard at phi = " << st.phi;
    throw SingularityError(st.phi, os.str());
  }
  const double dPsi = (p.c * st.Phi * (st.Psi * c + st.Theta) - 2.0 * p.a * st.Psi * st.Phi * c) / (p.a * s);
  const double dTheta = st.Psi * st.Phi * s - dPsi * c;
  return {st.Psi, st.Theta, st.Phi, dPsi, dTheta, detail::slip_phi_accel(st.phi, st.Phi, st.Psi, st.Theta, p)};
}

// Lagrangian T + V for the slipping can.
inline double frictionless_energy(const State& st, const CanParameters& p) {
  const double s = std::sin(st.phi), c = std::cos(st.phi);
  const double Cc = c - p.h * s;
  const double spin = st.Psi * c + st.Theta;
  return 0.5 * p.a * (st.Psi * st.Psi * s * s + st.Phi * st.Phi) + 0.5 * p.c * spin * spin +
         0.5 * st.Phi * st.Phi * Cc * Cc + (s + p.h * c);
}

inline FullTrajectory simulate_frictionless(const CanParameters& p, const State& s0, double t1,
                                            const IntegratorConfig& cfg = full_system_config()) {
  auto rhs = [&p](double, const Vec<6>& y) { return frictionless_rhs(y, p); };
  return integrate<6>(rhs, s0.t, s0.vec(), t1, cfg);
}

// Leading-order small-phi slipping model. Only the 1/phi^3 coefficient is known;
// the lower-order terms are left out and the model says so.
struct FrictionlessReducedModel {
  double epsilon = 0, zeta = 0;
  double alpha3 = 0;
  bool leading_order_only = true;
  const char* omitted = "alpha2, alpha1, alpha0";
};

inline FrictionlessReducedModel frictionless_reduced_model(double epsilon, double zeta, const CanParameters& p) {
  if (!(epsilon >= 0)) throw DomainError("epsilon must be non-negative");
  FrictionlessReducedModel m;
  m.epsilon = epsilon;
  m.zeta = zeta;
  m.alpha3 = (zeta - 1.0) * (zeta - 1.0) / (p.a * (p.a + 1.0));
  return m;
}

inline double frictionless_reduced_rhs(double phi, double Phi, const FrictionlessReducedModel& m,
                                       const CanParameters& p) {
  if (!(phi > 0)) throw DomainError("reduced slipping model needs phi > 0");
  const double rep = m.epsilon == 0 ? 0.0 : m.epsilon * m.alpha3 / (phi * phi * phi);
  return rep + (p.h * Phi * Phi - 1.0) / (p.a + 1.0);
}

inline double frictionless_reduced_rhs(double phi, double Phi, double epsilon, double zeta, const CanParameters& p) {
  return frictionless_reduced_rhs(phi, Phi, frictionless_reduced_model(epsilon, zeta, p), p);
}

using SlipTrajectory = Trajectory<2>;  // (phi, Phi), full clock

inline SlipTrajectory simulate_frictionless_reduced(const FrictionlessReducedModel& m, const CanParameters& p,
                                                    double phi1, double Phi1, double t1,
                                                    const IntegratorConfig& cfg = IntegratorConfig{}) {
  auto rhs = [&](double, const Vec<2>& y) -> Vec<2> { return {y[1], frictionless_reduced_rhs(y[0], y[1], m, p)}; };
  return integrate<2>(rhs, 0.0, Vec<2>{phi1, Phi1}, t1, cfg);
}

}  // namespace rockcan

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "error.hpp"
#include "params.hpp"

namespace rockcan {

// Euler angles and their scaled rates. psi and theta are unwrapped.
struct State {
  double psi = 0, theta = 0, phi = 0;
  double Psi = 0, Theta = 0, Phi = 0;
  double t = 0;

  bool valid_contact() const { return phi > 0 && phi < std::numbers::pi / 2; }

  // Integrator layout: (psi, theta, phi, Psi, Theta, Phi).
  std::array<double, 6> vec() const { return {psi, theta, phi, Psi, Theta, Phi}; }
  static State from_vec(const std::array<double, 6>& y, double t = 0) {
    return State{y[0], y[1], y[2], y[3], y[4], y[5], t};
  }
};

// Input order used on the command line and in fixtures: psi, Psi, phi, Phi, theta, Theta.
inline State state_from_ic(double psi, double Psi, double phi, double Phi, double theta, double Theta) {
  return State{psi, theta, phi, Psi, Theta, Phi, 0.0};
}

struct ContactForces {
  double Fx = 0, Fy = 0;  // friction, units of mg
  double N = 0;           // normal reaction, units of mg
  double ratio = 0;       // |F| / N
};

struct Accelerations {
  double dPsi = 0, dTheta = 0, dPhi = 0;
};

inline constexpr double default_sin_guard = 1e-14;

inline Accelerations accelerations(const State& s, const CanParameters& p, double sin_guard = default_sin_guard) {
  const double sp = std::sin(s.phi), cph = std::cos(s.phi);
  if (std::abs(sp) < sin_guard) {
    std::ostringstream os;
    os << "sin(phi) below guard at phi = " << s.phi;
    throw SingularityError(s.phi, os.str());
  }
  const double k = p.k, h = p.h, cp = p.cp, ap = p.ap;
  const double kcp = k * cp;
  const double Psi = s.Psi, Theta = s.Theta, Phi = s.Phi;
  Accelerations d;
  d.dPsi = (kcp * Phi * Theta + ((kcp - 2.0) * cph - h * k * sp) * Phi * Psi) / sp;
  d.dTheta = ((-kcp * cph + h * k * sp) * Phi * Theta +
              (-kcp * cph * cph - k * ap * sp * sp + h * k * std::sin(2.0 * s.phi) + 2.0) * Phi * Psi) /
             sp;
  d.dPhi = (((ap - cp) * sp * cph - h * std::cos(2.0 * s.phi)) * Psi * Psi -
            (cp * sp + h * cph) * Theta * Psi + (h * sp - cph)) /
           (ap + 1.0);
  return d;
}

inline std::array<double, 6> eom_rhs(const std::array<double, 6>& y, const CanParameters& p,
                                     double sin_guard = default_sin_guard) {
  const State s = State::from_vec(y);
  const Accelerations d = accelerations(s, p, sin_guard);
  return {s.Psi, s.Theta, s.Phi, d.dPsi, d.dTheta, d.dPhi};
}

inline State eom_rhs(const State& s, const CanParameters& p, double sin_guard = default_sin_guard) {
  const Accelerations d = accelerations(s, p, sin_guard);
  return State{s.Psi, s.Theta, s.Phi, d.dPsi, d.dTheta, d.dPhi, 1.0};
}

// Rolling pendulum: Psi = Theta = 0 leaves a planar fall in phi.
inline double pendulum_rhs(double phi, const CanParameters& p) {
  return (p.h * std::sin(phi) - std::cos(phi)) / (p.ap + 1.0);
}

// Scaled centre-of-mass velocity (x, y horizontal, z vertical).
inline std::array<double, 3> com_velocity(const State& s, const CanParameters& p) {
  const double sp = std::sin(s.phi), cph = std::cos(s.phi);
  const double S = sp + p.h * cph;
  const double Cc = cph - p.h * sp;
  const double W = s.Psi * Cc + s.Theta;
  const double cs = std::cos(s.psi), ss = std::sin(s.psi);
  return {-s.Phi * S * cs - W * ss, -s.Phi * S * ss + W * cs, s.Phi * Cc};
}

inline ContactForces contact_forces_unchecked(const State& s, const CanParameters& p,
                                              double sin_guard = default_sin_guard) {
  const Accelerations d = accelerations(s, p, sin_guard);
  const double sp = std::sin(s.phi), cph = std::cos(s.phi);
  const double S = sp + p.h * cph;
  const double Cc = cph - p.h * sp;
  const double W = s.Psi * Cc + s.Theta;
  // Friction in the frame turning with psi: L along the contact radius, M tangential.
  const double L = -S * d.dPhi - Cc * s.Phi * s.Phi - s.Psi * W;
  const double M = Cc * d.dPsi + d.dTheta - 2.0 * S * s.Phi * s.Psi;
  const double cs = std::cos(s.psi), ss = std::sin(s.psi);
  ContactForces f;
  f.Fx = L * cs - M * ss;
  f.Fy = L * ss + M * cs;
  f.N = 1.0 + d.dPhi * Cc - s.Phi * s.Phi * S;
  f.ratio = f.N != 0.0 ? std::hypot(L, M) / f.N : INFINITY;
  return f;
}

inline ContactForces contact_forces(const State& s, const CanParameters& p, double sin_guard = default_sin_guard) {
  ContactForces f = contact_forces_unchecked(s, p, sin_guard);
  if (!(f.N > 0)) {
    std::ostringstream os;
    os << "can leaves surface: N = " << f.N << " at phi = " << s.phi;
    throw SurfaceLossError(f.N, os.str());
  }
  return f;
}

struct AngularMomenta {
  double Hz_B = 0;  // about the symmetry axis
  double Hz_G = 0;  // about the vertical
};

inline AngularMomenta angular_momenta(const State& s, const CanParameters& p) {
  const double sp = std::sin(s.phi), cph = std::cos(s.phi);
  const double spin = s.Theta + s.Psi * cph;
  return {p.c * spin, p.a * s.Psi * sp * sp + p.c * cph * spin};
}

inline double tangential_friction(const State& s, const CanParameters& p) {
  const double sp = std::sin(s.phi), cph = std::cos(s.phi);
  return p.k * s.Phi * (p.a * s.Psi * sp + p.c * p.h * (s.Psi * cph + s.Theta));
}

inline double potential_energy(double phi, const CanParameters& p) { return std::sin(phi) + p.h * std::cos(phi); }

// Kinetic (body-frame inertia diag(a, a, c) plus translation) plus potential.
inline double total_energy(const State& s, const CanParameters& p) {
  const double sp = std::sin(s.phi), cph = std::cos(s.phi);
  const double w1 = s.Psi * sp, w2 = -s.Phi, w3 = s.Psi * cph + s.Theta;
  const auto v = com_velocity(s, p);
  const double rot = 0.5 * (p.a * (w1 * w1 + w2 * w2) + p.c * w3 * w3);
  const double tr = 0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return rot + tr + potential_energy(s.phi, p);
}

}  // namespace rockcan

namespace rockcan {

// Clock in which the initial rates are expressed.
enum class RateClock { Physical, Full, Reduced };

inline double rate_factor(RateClock from, RateClock to, const CanParameters& p) {
  auto seconds = [&p](RateClock c) {
    switch (c) {
      case RateClock::Physical: return 1.0;
      case RateClock::Full: return p.time_scale;
      case RateClock::Reduced: return p.reduced_time_scale;
    }
    return 1.0;
  };
  return seconds(to) / seconds(from);
}

inline State convert_rates(const State& s, RateClock from, RateClock to, const CanParameters& p) {
  const double f = rate_factor(from, to, p);
  State r = s;
  r.Psi *= f;
  r.Theta *= f;
  r.Phi *= f;
  r.t /= f;
  return r;
}

}  // namespace rockcan

#pragma once

#include <cmath>
#include <string>

#include "error.hpp"

namespace rockcan {

struct DimensionalCan {
  double m = 0;   // kg
  double H = 0;   // half-height, m
  double R = 0;   // radius, m
  double A = 0;   // transverse moment about the centre of mass, kg m^2
  double C = 0;   // axial moment, kg m^2
  double g = 9.81;
};

// Non-dimensional can. Lengths in units of R, moments in m R^2, time in sqrt(R/g).
struct CanParameters {
  double h = 0, a = 0, c = 0;
  double ap = 0, cp = 0;  // moments about the contact point
  double k = 0;
  double gamma = 0, beta = 0;
  double R = 1, g = 9.81;
  double time_scale = 0;          // s
  double reduced_time_scale = 0;  // s

  // k cp < 2 keeps the turn-direction boundary slope positive.
  bool boundary_slope_positive() const { return k * cp < 2.0; }
};

inline CanParameters from_nondimensional(double a, double c, double h, double R = 0.037, double g = 9.81) {
  if (!(a > 0) || !(c > 0) || !(h >= 0) || !(R > 0) || !(g > 0))
    throw DomainError("can parameters must be positive (h may be zero)");
  CanParameters p;
  p.a = a;
  p.c = c;
  p.h = h;
  p.R = R;
  p.g = g;
  p.ap = a + h * h;
  p.cp = c + 1.0;
  p.k = c / (a + c * p.ap);
  p.gamma = 2.0 + p.k;
  p.beta = p.k * h;
  p.time_scale = std::sqrt(R / g);
  p.reduced_time_scale = std::sqrt(R * (p.ap + 1.0) / g);
  return p;
}

inline CanParameters derive(const DimensionalCan& d) {
  if (!(d.m > 0) || !(d.H > 0) || !(d.R > 0) || !(d.A > 0) || !(d.C > 0) || !(d.g > 0))
    throw DomainError("dimensional can inputs must be strictly positive");
  const double mr2 = d.m * d.R * d.R;
  return from_nondimensional(d.A / mr2, d.C / mr2, d.H / d.R, d.R, d.g);
}

// Canonical regression can (a, c, h given directly).
inline CanParameters reference_can() { return from_nondimensional(0.727, 0.615, 1.473, 0.037, 9.81); }

// Tilt at which the centre of mass sits over the contact point.
inline double balancing_angle(const CanParameters& p) { return std::atan2(1.0, p.h); }

}  // namespace rockcan

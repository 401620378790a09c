#pragma once

#include <cmath>
#include <numbers>

#include "error.hpp"
#include "params.hpp"
#include "reduced.hpp"
#include "special.hpp"

namespace rockcan {

// Double primitives of the outer order-eps forcing terms, normalised so J(0) = J'(0) = 0.
struct JIntegrals {
  double J1 = 0, J2 = 0, J3 = 0;
  double Jl0 = 0, Jl1 = 0, Jl2 = 0, Jll = 0;
};

namespace detail {

// Closed forms as obtained from symbolic integration; the log ones carry constants.
inline JIntegrals j_closed_forms(double T) {
  const double Lm = std::log(1.0 - T), Lp = std::log(1.0 + T);
  const double ln2 = std::numbers::ln2, ln4 = 2.0 * ln2, ln8 = 3.0 * ln2, ln16 = 4.0 * ln2;
  const double at = artanh(T);
  const double Li_m = dilogarithm((1.0 - T) / 2.0), Li_p = dilogarithm((1.0 + T) / 2.0);
  const double L1mT2 = std::log1p(-T * T);
  JIntegrals j;
  j.J3 = T * T / (8.0 * (1.0 - T * T)) + 3.0 / 8.0 * T * at;
  j.J2 = T / 2.0 * at;
  j.J1 = T * at + 0.5 * L1mT2;
  j.Jl0 = 0.5 * (-3.0 * T * T + (T * T + 1.0) * L1mT2 + 4.0 * T * at);
  j.Jl2 = (2.0 * (T + 1.0) * Li_m - 2.0 * (T - 1.0) * Li_p - T * Lm * Lm + T * Lp * Lp -
           4.0 * (ln8 * Lm + Lp + std::log(8.0 - 8.0 * T) - 3.0 + 2.0 * ln2 * ln2) + 4.0 * ln4 * Lm +
           2.0 * Lp * Lm + (T * (ln16 - 4.0) - 2.0 * ln4) * at) /
          8.0;
  j.Jl1 = (2.0 * (T - 1.0) * Li_m - 2.0 * (T + 1.0) * Li_p - 2.0 * (T - 1.0) * Lm * Lm + Lm * Lm +
           (T + 1.0) * Lp * Lp + (2.0 * (T - 1.0) * Lm + ln4) * Lm - T * Lm * std::log(4.0 * (1.0 - T)) +
           (T + 1.0) * ln4 * Lp + 8.0 - 2.0 * ln4) /
          4.0;
  j.Jll = (4.0 * (T - 1.0) * Li_m - 4.0 * (T + 1.0) * Li_p + 14.0 * T * T +
           Lm * (-6.0 * T * T + 2.0 * (T * T - 1.0) * Lp + 4.0 * (T - 1.0) * Lm - 2.0 + ln16) +
           (T - 3.0) * (T - 1.0) * Lm * Lm - 2.0 * (T - 1.0) * Lm * Lm + (T + 1.0) * (T + 1.0) * Lp * Lp -
           4.0 * T * (ln2 - 2.0) * Lm - 2.0 * (T + 1.0) * (3.0 * T + 1.0 - ln4) * Lp + 16.0 - 8.0 * ln2) /
          2.0;
  return j;
}

}  // namespace detail

inline JIntegrals J_integrals(double T) {
  if (!(std::abs(T) < 1.0)) throw DomainError("J integrals need |T| < 1");
  static const JIntegrals at0 = detail::j_closed_forms(0.0);
  JIntegrals j = detail::j_closed_forms(T);
  // Slopes at T = 0 vanish for every closed form; only the constants need removing.
  j.J1 -= at0.J1;
  j.J2 -= at0.J2;
  j.J3 -= at0.J3;
  j.Jl0 -= at0.Jl0;
  j.Jl1 -= at0.Jl1;
  j.Jl2 -= at0.Jl2;
  j.Jll -= at0.Jll;
  return j;
}

// Coefficients of the order-eps outer problem in T = t / sqrt(I).
struct OuterCoefficients {
  double b3 = 0, b2 = 0, b1 = 0, b0 = 0;
  double bl2 = 0, bl1 = 0, bl0 = 0, bll = 0;
  double I = 0;
};

inline OuterCoefficients outer_coefficients(const ReducedCoefficients& rc, double I) {
  if (!(I > 0)) throw DomainError("release parameter I must be positive");
  const double lg = std::log(I / 2.0);
  OuterCoefficients oc;
  oc.I = I;
  oc.b3 = 8.0 * rc.a3 / (I * I);
  oc.bl2 = 4.0 * rc.al2 / I;
  oc.b2 = 4.0 * rc.a2 / I + 4.0 * rc.al2 * lg / I;
  oc.bl1 = 2.0 * rc.al1;
  oc.b1 = 2.0 * rc.a1 + 2.0 * rc.al1 * lg;
  oc.bll = rc.all * I;
  oc.bl0 = rc.al0 * I + 2.0 * rc.all * I * lg;
  oc.b0 = rc.a0 * I + rc.al0 * I * lg + rc.all * I * lg * lg;
  return oc;
}

inline double outer_phi(double t, const OuterCoefficients& oc, double epsilon) {
  const double sI = std::sqrt(oc.I);
  if (!(t >= 0)) throw DomainError("outer solution starts at t = 0");
  if (!(t < sI)) throw DomainError("outer solution not valid once the can falls flat (t >= sqrt(I))");
  const double lead = 0.5 * (oc.I - t * t);
  if (epsilon == 0) return lead;
  const double T = t / sI;
  const JIntegrals j = J_integrals(T);
  const double corr = oc.b3 * j.J3 + oc.b2 * j.J2 + oc.b1 * j.J1 + oc.b0 * 0.5 * T * T + oc.bl2 * j.Jl2 +
                      oc.bl1 * j.Jl1 + oc.bl0 * j.Jl0 + oc.bll * j.Jll;
  return lead + epsilon * corr;
}

struct MatchedSolution {
  double I = 0;
  double epsilon = 0;
  double ap = 0;
  double handoff_scale = 1.0;  // t_h = sqrt(I) - handoff_scale * eps^(1/4) * sqrt(I)

  double P() const { return std::sqrt(ap / I); }
  double Q() const { return 0.0; }
  double sqrtI() const { return std::sqrt(I); }
  double handoff_time() const { return sqrtI() - handoff_scale * std::pow(epsilon, 0.25) * sqrtI(); }
  // Inner variable T = (t - sqrt(I)) / sqrt(eps).
  double inner_time(double t) const { return (t - sqrtI()) / std::sqrt(epsilon); }
};

inline MatchedSolution matched_solution(double I, double epsilon, const CanParameters& p) {
  if (!(I > 0) || !(epsilon >= 0)) throw DomainError("matched solution needs I > 0, eps >= 0");
  return MatchedSolution{I, epsilon, p.ap, 1.0};
}

// Inner-scaled phi around the bounce (phi = sqrt(eps) * inner_phi).
inline double inner_phi(double T, const MatchedSolution& ms) { return std::sqrt(ms.ap / ms.I + ms.I * T * T); }

// Composite solution; symmetric about t = sqrt(I), so the back half is covered too.
inline double uniform_phi(double t, const MatchedSolution& ms) {
  const double d = t - ms.sqrtI();
  return -0.5 * d * d + std::sqrt(ms.epsilon * ms.ap / ms.I + ms.I * d * d);
}

inline double minimum_phi(const MatchedSolution& ms) { return std::sqrt(ms.epsilon * ms.ap / ms.I); }

// Largest precession rate (reduced clock), reached at the bounce centre.
inline double max_precession_rate(const MatchedSolution& ms) {
  return ms.I * std::sqrt(ms.ap + 1.0) / (std::sqrt(ms.epsilon) * ms.ap);
}

// Precession angle in the outer region, integrated from psi' = 4 sqrt(eps) s sqrt(ap+1) / (I - t^2)^2.
inline double outer_psi(double t, const MatchedSolution& ms, int sign, double C = 0.0) {
  const double I = ms.I, sI = ms.sqrtI();
  if (!(std::abs(t) < sI)) throw DomainError("outer psi needs |t| < sqrt(I)");
  return 2.0 * std::sqrt(ms.epsilon) * sign * std::sqrt(ms.ap + 1.0) *
             (t / (I * (I - t * t)) + artanh(t / sI) / (I * sI)) +
         C;
}

inline double inner_psi_unshifted(double T, const MatchedSolution& ms, int sign) {
  return sign * std::sqrt((ms.ap + 1.0) / ms.ap) * std::atan(ms.I * T / std::sqrt(ms.ap));
}

// Inner constant making the inner psi continuous with outer_psi(., C_outer) at the handoff time.
inline double inner_psi_constant(const MatchedSolution& ms, int sign, double C_outer = 0.0) {
  const double th = ms.handoff_time();
  return outer_psi(th, ms, sign, C_outer) - inner_psi_unshifted(ms.inner_time(th), ms, sign);
}

inline double inner_psi(double T, const MatchedSolution& ms, int sign, double C_psi) {
  return inner_psi_unshifted(T, ms, sign) + C_psi;
}

// theta moves opposite to psi through the bounce.
inline double inner_theta(double T, const MatchedSolution& ms, int sign, double C_theta) {
  return -inner_psi_unshifted(T, ms, sign) + C_theta;
}

// Angle swept by psi across one complete bounce.
inline double inner_turn(const MatchedSolution& ms, int sign) {
  return sign * std::numbers::pi * std::sqrt((ms.ap + 1.0) / ms.ap);
}

}  // namespace rockcan

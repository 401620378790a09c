#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include <rockcan/dynamics.hpp>
#include <rockcan/equilibria.hpp>
#include <rockcan/integrate.hpp>

using namespace rockcan;

namespace {

const CanParameters P = reference_can();

// Roots in Psi of the steady condition at fixed (Theta, phi0).
std::vector<double> steady_psi_roots(double Theta, double phi0, const CanParameters& p) {
  const double s = std::sin(phi0), c = std::cos(phi0);
  const double A = (p.ap - p.cp) * s * c - p.h * std::cos(2 * phi0);
  const double B = -(p.cp * s + p.h * c) * Theta;
  const double C = p.h * s - c;
  const double disc = B * B - 4 * A * C;
  if (disc < 0 || A == 0) return {};
  const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
  return {q / A, C / q};
}

// Jacobian of (phi, Phi, Psi, Theta) flow at a state, by central differences.
Eigen::Matrix4d flow_jacobian(const State& s0, const CanParameters& p) {
  auto f = [&](const Eigen::Vector4d& x) {
    State s = s0;
    s.phi = x[0];
    s.Phi = x[1];
    s.Psi = x[2];
    s.Theta = x[3];
    const Accelerations d = accelerations(s, p);
    return Eigen::Vector4d(s.Phi, d.dPhi, d.dPsi, d.dTheta);
  };
  const Eigen::Vector4d x0(s0.phi, s0.Phi, s0.Psi, s0.Theta);
  Eigen::Matrix4d J;
  for (int j = 0; j < 4; ++j) {
    const double d = 1e-6;
    Eigen::Vector4d xp = x0, xm = x0;
    xp[j] += d;
    xm[j] -= d;
    J.col(j) = (f(xp) - f(xm)) / (2 * d);
  }
  return J;
}

}  // namespace

TEST(Equilibria, ResidualExamples) {
  const double phis = balancing_angle(P);
  EXPECT_NEAR(steady_residual(0, 0, phis, P), 0.0, 1e-15);
  const CanParameters tall = from_nondimensional(0.5, 2.0, 0.8);
  ASSERT_GT(tall.cp, tall.h);
  const double r = std::sqrt(tall.h / (tall.cp - tall.h));
  for (double sgn : {-1.0, 1.0})
    EXPECT_NEAR(steady_residual(sgn * r, sgn * r, std::numbers::pi / 2, tall), 0.0, 1e-14);
}

TEST(Equilibria, SteadyPointsAreFixedPointsOfTheFlow) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> th(-3, 3), ph(0.05, 1.5);
  int found = 0;
  for (int n = 0; n < 200; ++n) {
    const double Theta = th(rng), phi0 = ph(rng);
    for (double Psi : steady_psi_roots(Theta, phi0, P)) {
      if (std::abs(Psi) > 50) continue;
      EXPECT_LT(std::abs(steady_residual(Psi, Theta, phi0, P)), 1e-12 * std::max(1.0, Psi * Psi));
      const SteadyMotion m = classify(Psi, Theta, phi0, P, 1e-9 * std::max(1.0, Psi * Psi));
      ASSERT_EQ(m.cls, MotionClass::Steady);
      const Accelerations d = accelerations(state_from_ic(0, Psi, phi0, 0, 0, Theta), P);
      EXPECT_LT(std::abs(d.dPhi), 1e-10 * std::max(1.0, Psi * Psi));
      EXPECT_EQ(d.dPsi, 0.0);
      EXPECT_EQ(d.dTheta, 0.0);
      ++found;
    }
  }
  EXPECT_GT(found, 100);
}

TEST(Equilibria, Classification) {
  const double phis = balancing_angle(P);
  const SteadyMotion st = classify(0, 0, phis, P);
  EXPECT_EQ(st.cls, MotionClass::Static);
  EXPECT_FALSE(st.rest && st.cls != MotionClass::Static);

  const SteadyMotion roll = classify(0, 0.7, phis, P);
  EXPECT_EQ(roll.cls, MotionClass::Balanced);
  EXPECT_FALSE(roll.rest);
  EXPECT_THROW(circle_radius(0, 0.7, phis, P), StraightLineError);

  const double Psi = 0.4;
  const SteadyMotion bal = classify(Psi, balanced_theta(Psi, P), phis, P);
  EXPECT_EQ(bal.cls, MotionClass::Balanced);

  const auto rm = rest_motion(phis / 2, P);
  ASSERT_TRUE(rm);
  for (const auto& b : *rm) {
    const SteadyMotion m = classify(b.Psi_e, b.Theta_e, phis / 2, P);
    EXPECT_EQ(m.cls, MotionClass::Steady);
    EXPECT_TRUE(m.rest);
    EXPECT_LE(std::abs(m.residual), default_classify_tol);
  }

  const SteadyMotion none = classify(1.0, 0.0, 0.3, P);
  EXPECT_EQ(none.cls, MotionClass::None);
  EXPECT_GT(std::abs(none.residual), 1e-3);
  EXPECT_THROW(classify(0, 0, phis, P, 0.0), DomainError);
  EXPECT_STREQ(to_string(MotionClass::Balanced), "balanced");
}

TEST(Equilibria, BalancedRollingEigenvalues) {
  const double crit = critical_rolling_rate(P);
  EXPECT_NEAR(crit, 1.089984597584, 1e-11);
  const RollingEigenvalues zero = rolling_eigenvalues(0.0, P);
  EXPECT_FALSE(zero.centre_like);
  EXPECT_NEAR(zero.plus.real(), std::sqrt(std::sqrt(P.h * P.h + 1) / (P.ap + 1)), 1e-15);
  EXPECT_EQ(zero.minus, -zero.plus);
  EXPECT_NEAR(std::abs(rolling_eigenvalues(crit, P).plus), 0.0, 1e-7);
  EXPECT_FALSE(rolling_eigenvalues(1.05, P).centre_like);
  const RollingEigenvalues fast = rolling_eigenvalues(1.2, P);
  EXPECT_TRUE(fast.centre_like);
  EXPECT_EQ(fast.plus.real(), 0.0);
  EXPECT_GT(fast.plus.imag(), 0.0);
  EXPECT_STREQ(fast.label(), "centre-like");
  EXPECT_STREQ(zero.label(), "saddle-like");
}

// Linearise the full flow about straight-line rolling and compare the non-zero pair.
TEST(Equilibria, EigenvaluesMatchLinearisedFlow) {
  for (double Theta : {0.0, 0.5, 0.9, 1.2, 2.0}) {
    const State s = state_from_ic(0, 0, balancing_angle(P), 0, 0, Theta);
    const Eigen::Vector4cd ev = Eigen::EigenSolver<Eigen::Matrix4d>(flow_jacobian(s, P)).eigenvalues();
    std::complex<double> top = 0;
    for (int i = 0; i < 4; ++i)
      if (std::abs(ev[i]) > std::abs(top) && (ev[i].real() > 1e-9 || ev[i].imag() > 1e-9)) top = ev[i];
    const RollingEigenvalues re = rolling_eigenvalues(Theta, P);
    EXPECT_NEAR(std::abs(top - re.plus), 0.0, 1e-6) << Theta;
  }
}

// A small tilt perturbation grows just below the critical rate and stays small above it.
TEST(Equilibria, CriticalRateSeparatesGrowthFromOscillation) {
  const double crit = critical_rolling_rate(P), phis = balancing_angle(P);
  auto max_dev = [&](double Theta) {
    const auto tr = simulate(P, state_from_ic(0, 0, phis + 1e-7, 0, 0, Theta), 60.0);
    double m = 0;
    for (const auto& y : tr.y) m = std::max(m, std::abs(y[kPhi] - phis));
    return m;
  };
  EXPECT_GT(max_dev(0.96 * crit), 1e-4);
  EXPECT_LT(max_dev(1.06 * crit), 1e-5);
}

TEST(Equilibria, TransitionAtCriticalRateForRandomCans) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.2, 2.0), hh(0.1, 2.0);
  for (int n = 0; n < 100; ++n) {
    const CanParameters q = from_nondimensional(u(rng), u(rng), hh(rng));
    const double crit = critical_rolling_rate(q);
    ASSERT_TRUE(std::isfinite(crit));
    for (double f : {0.5, 0.9, 1.1, 2.0}) {
      const double Theta = f * crit;
      EXPECT_EQ(rolling_eigenvalues(Theta, q).centre_like, Theta * Theta > crit * crit);
    }
  }
}

TEST(Equilibria, CriticalRateLimits) {
  // Thin disk keeps a finite critical rate, 1 / (cp sqrt(k)).
  const CanParameters disk = from_nondimensional(0.727, 0.615, 0.0);
  EXPECT_NEAR(critical_rolling_rate(disk), 1 / (disk.cp * std::sqrt(disk.k)), 1e-14);
  const CanParameters g2 = from_nondimensional(0.727, 0.615, 1.473, 0.037, 2 * 9.81);
  EXPECT_EQ(critical_rolling_rate(g2), critical_rolling_rate(P));
}

TEST(Equilibria, CircleRadius) {
  const double phis = balancing_angle(P);
  EXPECT_NEAR(circle_radius(0.4, 1.3, phis, P), 1.3 / 0.4, 1e-14);
  EXPECT_EQ(circle_radius(1.0, 0.0, 0.0, P), 1.0);
  const auto rm = rest_motion(0.3, P);
  ASSERT_TRUE(rm);
  EXPECT_NEAR(circle_radius((*rm)[0].Psi_e, (*rm)[0].Theta_e, 0.3, P), 0.0, 1e-14);
}

TEST(Equilibria, RestMotion) {
  const double phis = balancing_angle(P);
  EXPECT_FALSE(rest_motion(phis, P));
  EXPECT_FALSE(rest_motion(phis + 0.1, P));
  EXPECT_THROW(rest_motion(0.0, P), DomainError);
  EXPECT_THROW(rest_motion(std::numbers::pi / 2, P), DomainError);

  const auto rm = rest_motion(phis / 2, P);
  ASSERT_TRUE(rm);
  EXPECT_EQ((*rm)[0].Psi_e, -(*rm)[1].Psi_e);
  for (const auto& b : *rm) {
    EXPECT_LT(std::abs(steady_residual(b.Psi_e, b.Theta_e, phis / 2, P)), 1e-12);
    const State s = state_from_ic(0, b.Psi_e, phis / 2, 0, 0, b.Theta_e);
    const auto v = com_velocity(s, P);
    EXPECT_LT(std::abs(v[0]), 1e-12);
    EXPECT_LT(std::abs(v[1]), 1e-12);
  }

  const auto r02 = rest_motion(0.2, P);
  ASSERT_TRUE(r02);
  EXPECT_NEAR((*r02)[0].Psi_e, 2.5490229908581066, 1e-12);
  EXPECT_NEAR((*r02)[0].Theta_e, -1.752266344504368, 1e-12);

  // Psi_e^2 grows like 1/(a phi0) as the tilt vanishes.
  double prev = 0;
  for (double phi0 : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const double P2 = std::pow((*rest_motion(phi0, P))[0].Psi_e, 2);
    EXPECT_GT(P2, prev);
    prev = P2;
    EXPECT_NEAR(P2 * P.a * phi0, 1.0, 5 * phi0);
  }
}

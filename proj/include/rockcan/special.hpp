#pragma once

#include <cmath>
#include <numbers>

#include "error.hpp"

namespace rockcan {

inline double artanh(double x) { return 0.5 * std::log((1.0 + x) / (1.0 - x)); }

namespace detail {

inline double dilog_series(double x) {
  // |x| <= 1/2: terms fall at least like 2^-n / n^2.
  double sum = 0, term = x;
  for (int n = 1; n < 200; ++n) {
    const double add = term / (double(n) * n);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    term *= x;
  }
  return sum;
}

}  // namespace detail

// Real dilogarithm Li2(x) = -int_0^x log(1-u)/u du for x <= 1.
inline double dilogarithm(double x) {
  constexpr double pi2_6 = std::numbers::pi * std::numbers::pi / 6.0;
  if (std::isnan(x)) return x;
  if (x > 1.0) throw DomainError("dilogarithm: real branch needs x <= 1");
  if (x == 1.0) return pi2_6;
  if (x == 0.0) return 0.0;
  if (x < -1.0) {
    const double l = std::log(-x);
    return -pi2_6 - 0.5 * l * l - dilogarithm(1.0 / x);
  }
  if (x < -0.5) {
    const double l = std::log1p(-x);
    return -detail::dilog_series(x / (x - 1.0)) - 0.5 * l * l;
  }
  if (x <= 0.5) return detail::dilog_series(x);
  return pi2_6 - std::log(x) * std::log1p(-x) - detail::dilog_series(1.0 - x);
}

}  // namespace rockcan

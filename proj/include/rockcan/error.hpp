#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace rockcan {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

struct DomainError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

// sin(phi) too close to zero for the 1/sin(phi) terms of the rates.
struct SingularityError : Error {
  double phi;
  SingularityError(double phi_, const std::string& what)
      : Error(what), phi(phi_) {}
  const char* kind() const noexcept override { return "singularity"; }
};

// Normal reaction became non-positive: rolling model no longer valid.
struct SurfaceLossError : Error {
  double normal;
  SurfaceLossError(double n, const std::string& what) : Error(what), normal(n) {}
  const char* kind() const noexcept override { return "surface_loss"; }
};

// Straight-line steady motion has no circle radius.
struct StraightLineError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "straight_line"; }
};

// Malformed or incomplete configuration input.
struct ConfigError : Error {
  int line = 0;
  ConfigError(const std::string& what, int line_ = 0) : Error(what), line(line_) {}
  const char* kind() const noexcept override { return "config"; }
};

enum class IntegrationFailure { StepUnderflow, MaxSteps, PhiGuard, Singularity, NonFinite };

inline const char* to_string(IntegrationFailure f) {
  switch (f) {
    case IntegrationFailure::StepUnderflow: return "step_underflow";
    case IntegrationFailure::MaxSteps: return "max_steps";
    case IntegrationFailure::PhiGuard: return "phi_guard";
    case IntegrationFailure::Singularity: return "singularity";
    case IntegrationFailure::NonFinite: return "non_finite";
  }
  return "unknown";
}

// Carries the last accepted point so callers can report or resume.
struct IntegrationError : Error {
  IntegrationFailure reason;
  double t_last;
  std::vector<double> y_last;
  IntegrationError(IntegrationFailure r, double t, std::vector<double> y, const std::string& what)
      : Error(what), reason(r), t_last(t), y_last(std::move(y)) {}
  const char* kind() const noexcept override { return to_string(reason); }
};

}  // namespace rockcan

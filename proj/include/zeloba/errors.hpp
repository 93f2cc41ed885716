#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zeloba {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was not met by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// The certified safety margin F̂ᶜ_ν is no longer negative.
class MarginExhausted : public Error {
 public:
  explicit MarginExhausted(double fhat_c_nu)
      : Error("safety margin exhausted: upper confidence bound on smoothed max-constraint is " +
              std::to_string(fhat_c_nu)),
        fhat_c_nu_(fhat_c_nu) {}
  double fhat_c_nu() const noexcept { return fhat_c_nu_; }

 private:
  double fhat_c_nu_;
};

/// The unicycle simulation produced a non-finite state.
class DivergedTrajectory : public Error {
 public:
  explicit DivergedTrajectory(std::size_t step)
      : Error("trajectory diverged at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

/// Reference smoothed max-constraint is not certifiably negative.
class OutsideDomain : public Error {
 public:
  using Error::Error;
};

class NoValidOutput : public Error {
 public:
  using Error::Error;
};

/// Noisy upper bounds at the start point do not certify strict feasibility.
class InfeasibleStart : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace zeloba

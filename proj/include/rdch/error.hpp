#pragma once

#include <stdexcept>
#include <string>

namespace rdch {

/// Evaluation outside the domain of a closed-form expression (n >= 1 for the
/// singular potential, n outside [0,1] for the degenerate mobility, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Grid mismatch, negative mobility samples and similar contract violations.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Picard iteration hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double last_ratio)
      : std::runtime_error(what), iterations_(iterations), last_ratio_(last_ratio) {}

  int iterations() const noexcept { return iterations_; }
  double last_ratio() const noexcept { return last_ratio_; }

 private:
  int iterations_;
  double last_ratio_;
};

/// The step controller had to go below dt_min to keep the energy from growing.
class EnergyBlowUp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected run configuration (one message per violated constraint).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checkpoint file unreadable, corrupt, or written for a different config.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A run aborted; the message echoes the configuration and the original
/// exception is attached with std::throw_with_nested.
class RunFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rdch

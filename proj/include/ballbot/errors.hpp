#pragma once

#include <stdexcept>
#include <string>

namespace ballbot {

// Bad user-supplied parameters (terrain/physics/rig/config validation).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when the integrator produces NaN/Inf or the ball sinks below the
// surface; carries a human-readable description of the last valid state.
class SimulationDiverged : public std::runtime_error {
 public:
  explicit SimulationDiverged(const std::string& what, double last_valid_time)
      : std::runtime_error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const { return last_valid_time_; }

 private:
  double last_valid_time_ = 0.0;
};

// Checkpoint / serialization problems (corrupt file, version or shape mismatch).
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config file problems (unknown keys, bad sections, bad values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ballbot

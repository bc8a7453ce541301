#pragma once

#include <stdexcept>
#include <string>

namespace windplan {

// Malformed input or configuration. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No selection satisfies the requested constraints. Maps to exit code 2.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be read or written. Maps to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Relative tolerance used for every capacity / cap feasibility comparison.
inline constexpr double kFeasibilityTolerance = 1e-9;

inline double feasibility_slack(double reference) {
  return kFeasibilityTolerance * (reference < 1.0 ? 1.0 : reference);
}

}  // namespace windplan

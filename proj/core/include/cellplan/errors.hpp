#pragma once

#include <stdexcept>
#include <string>

namespace cellplan {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or schema-violating input files.
struct ParseError : Error {
  using Error::Error;
};

// A scenario that violates its own structural assumptions (cycles,
// unreachable targets, colliding escape configurations, ...).
struct ScenarioError : Error {
  using Error::Error;
};

// Kinematic queries outside their domain (unreachable IK target,
// joint-limit violation, dimension mismatch).
struct KinematicsError : Error {
  using Error::Error;
};

// No solution exists within the configured budget.
struct InfeasibleError : Error {
  using Error::Error;
};

// Two simultaneously executing operations claim the same object.
struct ModeConflictError : Error {
  using Error::Error;
};

}  // namespace cellplan

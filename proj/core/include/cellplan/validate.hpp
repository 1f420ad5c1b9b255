#pragma once

#include <string>

#include "cellplan/procedure.hpp"
#include "cellplan/task.hpp"

namespace cellplan {

struct Violation {
  std::string kind;  // joint_limit | velocity | acceleration | collision |
                     // precedence | endpoint | mode | structure
  double t = 0.0;
  int robot_id = -1;
  std::string detail;
};

struct Verdict {
  bool ok = false;
  std::vector<Violation> violations;
};

// Independent check of a complete procedure against scene primitives
// only: pairwise collisions (mode-aware), joint limits, finite-difference
// velocity everywhere and acceleration inside core windows, precedence
// between core windows, and escape configurations at both ends. Shares
// no code with the planners.
Verdict validate(const Procedure& proc, const Scenario& scenario);

}  // namespace cellplan

#pragma once

#include "cellplan/procedure.hpp"
#include "cellplan/schedule.hpp"

namespace cellplan {

struct BaselineResult {
  Procedure procedure;
  Schedule schedule;  // realized core start steps
  double duration = 0.0;
};

// Decentralized reference: core operations are committed in a fixed
// global order (precedence-compatible, robot id ascending on ties); each
// segment is delayed on the grid until it clears every previously
// committed trajectory. Motions themselves are the decentralized
// initial paths; only their start times move.
BaselineResult baseline_decentralized(const TaskPlan& plan, const Scenario& scenario);

}  // namespace cellplan

#pragma once

#include <optional>
#include <vector>

#include "cellplan/task.hpp"

namespace cellplan {

// Start time steps on the scheduling grid, indexed by core-operation id.
struct Schedule {
  std::vector<int> start_steps;
  double dt = 0.2;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

struct Bounds {
  double min_duration = 0.0;  // precedence-respecting lower bound on d
  double max_duration = 0.0;  // enforced horizon
  int max_step = 0;           // max_duration expressed in grid steps
};

struct ScheduleEval {
  double duration = 0.0;
  int core_collisions = 0;
  bool precedence_ok = false;
  bool relaxed_motion_ok = false;
  int guide_progress = 0;    // traverses completed before a guide-path timeout
  int roadmap_progress = 0;  // traverses completed before a roadmap sampling failure
};

// Schedule-independent scheduling facts derived from a prepared task:
// durations, traverse estimates, successor structure and remaining-path
// lower bounds.
struct SchedulingModel {
  const TaskPlan* plan = nullptr;
  const Scenario* scenario = nullptr;
  double dt = 0.2;
  int num_cores = 0;
  std::vector<double> duration;      // per core, seconds
  std::vector<double> arrive_est;    // estimate of the traverse arriving at each core
  std::vector<int> prev_core;        // same-robot predecessor, -1 for chain head
  std::vector<int> next_core;        // same-robot successor, -1 for chain tail
  std::vector<double> escape_est;    // per robot index
  std::vector<std::vector<int>> successors;  // DAG successors per core
  std::vector<double> tail;  // duration + longest remaining lower-bound path incl. escape
  std::vector<int> topo_order;  // deterministic scheduling order

  double end_time(const Schedule& s, int core) const {
    return s.start_steps[core] * dt + duration[core];
  }
};

SchedulingModel build_scheduling_model(const TaskPlan& plan, const Scenario& scenario);

// d(theta): assembly duration including each robot's trailing escape
// traverse estimate.
double eval_duration(const Schedule& s, const SchedulingModel& model);

// Number of (grid step, robot pair) events at which two simultaneously
// executing core operations collide. Throws ModeConflictError if two
// active cores claim the same object.
int eval_core_collisions(const Schedule& s, const SchedulingModel& model);

// True iff two specific cores collide anywhere in their temporal overlap.
bool cores_collide(const SchedulingModel& model, int core_a, int start_a, int core_b,
                   int start_b);

bool eval_precedence(const Schedule& s, const SchedulingModel& model);

// Relaxed motion constraint: every scheduling gap (including the initial
// traverse from t=0) is at least the connecting traverse's estimate.
bool eval_relaxed_motion(const Schedule& s, const SchedulingModel& model);

ScheduleEval evaluate(const Schedule& s, const SchedulingModel& model, const Bounds& bounds);

// d_min from earliest grid packing; d_max explicit or multiplier-based,
// rounded up to the grid.
Bounds compute_bounds(const SchedulingModel& model,
                      std::optional<double> explicit_d_max = std::nullopt,
                      double k_max = 2.0);

struct StepInterval {
  int earliest = 0;
  int latest = -1;

  bool empty() const { return latest < earliest; }
  int size() const { return empty() ? 0 : latest - earliest + 1; }
};

inline constexpr int kUnscheduled = -1;

// Feasible start steps for `core` given committed predecessor starts
// (kUnscheduled entries are uncommitted; all predecessors of `core` must
// be committed). The upper end guarantees the remaining chain still fits
// under d_max when packed at its lower-bound estimates.
StepInterval scheduling_interval(int core, const std::vector<int>& partial_starts,
                                 const SchedulingModel& model, const Bounds& bounds);

}  // namespace cellplan

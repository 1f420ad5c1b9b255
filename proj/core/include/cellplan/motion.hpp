#pragma once

#include <cstdint>
#include <optional>

#include "cellplan/timeline.hpp"

namespace cellplan {

enum class StPlanner { st_prm, st_rrt_connect };

struct MotionConfig {
  double sampling_cap_base = 10.0;  // L0; per-border cap L = L0^{n_r}
  // Deterministic iteration budgets; the wall-clock limits (paper-scale
  // defaults) act as secondary guards when positive.
  int planner_iteration_cap = 2500;     // per edge problem
  double planner_time_limit = 0.0;      // seconds; 0 derives 30 * n_r
  int progress_attempt_cap = 30;        // guide-path attempts without more solved sections
  double progress_window = 900.0;       // seconds, wall guard for the same rule
  int initial_layer_samples = 10;
  int extension_batch = 8;              // new-sample retry batch size per border
  int extension_rounds_cap = 60;
  int postprocess_rounds = 30;
  StPlanner planner = StPlanner::st_prm;
  std::uint64_t seed = 1;

  double derived_planner_time_limit(int n_robots) const {
    return planner_time_limit > 0.0 ? planner_time_limit : 30.0 * n_robots;
  }
};

struct ProblemArea {
  int id = 0;
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<int> traverse_ids;   // all traverses inside [t0, t1]
  std::vector<int> robot_ids;      // robots owning those traverses
  std::vector<double> borders;     // section borders including t0 and t1
  int sampling_cap = 0;            // L = L0^{n_r}

  int sections() const { return static_cast<int>(borders.size()) - 1; }
};

struct SpaceTimeWaypoint {
  double t = 0.0;
  std::vector<double> q;  // concatenated configs of the path's robots
};

// Time-monotone piecewise-linear path for the robots traversing within
// one section of a problem area.
struct SpaceTimePath {
  std::vector<int> robot_ids;
  std::vector<SpaceTimeWaypoint> waypoints;

  double arc_length() const;
};

struct MotionFailure {
  enum class Kind { roadmap_sampling, guide_path_timeout };
  Kind kind = Kind::roadmap_sampling;
  int area_id = 0;
  double time_point = 0.0;
  // Traverse operations ending before time_point: the failure magnitude
  // fed back into the schedulers.
  int traverses_done = 0;
};

struct AreaDiag {
  int sections = 0;
  int robots = 0;
  int sampling_cap = 0;
  std::uint64_t samples_drawn = 0;
  std::uint64_t nodes = 0;
  std::uint64_t edges = 0;
  int removed_edges = 0;
  int extension_rounds = 0;
  int guide_path_attempts = 0;
  int solved_sections = 0;
};

struct MotionDiag {
  std::uint64_t state_checks = 0;  // collision-checked states, the work unit
  std::vector<AreaDiag> areas;
};

struct AreaSolution {
  int area_id = 0;
  std::vector<SpaceTimePath> section_paths;  // one per section, in order
};

struct MotionOutcome {
  bool success = false;
  bool core_conflict = false;  // fine-resolution core collision: schedule unusable
  std::vector<ProblemArea> areas;
  std::vector<AreaSolution> solutions;
  std::optional<MotionFailure> failure;
  MotionDiag diag;
};

// Section borders and problem areas for a scheduled timeline; grouped
// transitively so that every traverse overlapping an area's span belongs
// to it (and areas have single fixed start/end configurations).
std::vector<ProblemArea> identify_problem_areas(const Timeline& timeline, double l0,
                                                bool* core_conflict = nullptr,
                                                MotionDiag* diag = nullptr);

// Full traverse-motion verification: identify areas, build roadmaps,
// solve guide paths per section, post-process. Traverses outside any
// area keep their tentative motions.
MotionOutcome plan_motions(const Timeline& timeline, const MotionConfig& config);

// Counts traverse operations whose motion ends strictly before t.
int traverses_ending_before(const Timeline& timeline, double t);

}  // namespace cellplan

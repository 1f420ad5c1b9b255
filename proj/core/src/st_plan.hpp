#pragma once

// Internal: per-section space-time planning and post-processing.

#include "cellplan/motion.hpp"
#include "cellplan/rng.hpp"

namespace cellplan::detail {

// Planning context for one section of a problem area: the robots
// traversing in it (the combined configuration space) and the world
// animation around them.
struct SectionContext {
  const Timeline* timeline = nullptr;
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<int> robot_ids;         // traversing robots, combined-space order
  std::vector<const Robot*> robots;   // aligned with robot_ids
  std::vector<int> dof_offset;        // slice offsets into combined q
  int total_dof = 0;
  MotionDiag* diag = nullptr;

  static SectionContext make(const Timeline& timeline, double t0, double t1,
                             const std::vector<int>& robot_ids, MotionDiag* diag);

  bool state_valid(const std::vector<double>& q, double t) const;
  // Per-joint rest-to-rest displacement bound for the time gap.
  bool displacement_ok(const std::vector<double>& qa, const std::vector<double>& qb,
                       double dt) const;
  // Time-monotone, displacement-feasible, collision-free under linear
  // interpolation at dt_traj.
  bool edge_valid(const SpaceTimeWaypoint& a, const SpaceTimeWaypoint& b) const;
};

std::optional<SpaceTimePath> solve_section(const SectionContext& ctx,
                                           const std::vector<double>& q_start,
                                           const std::vector<double>& q_goal,
                                           StPlanner planner, int iteration_cap,
                                           double time_limit, Rng& rng);

// Short-cutting, corner-cutting, partial short-cutting and
// moving-average smoothing, in that order; endpoints and validity are
// preserved and the arc length never grows.
void postprocess_path(SpaceTimePath& path, const SectionContext& ctx, int rounds, Rng& rng);

}  // namespace cellplan::detail

#include "cellplan/procedure.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "cellplan/errors.hpp"

namespace cellplan {

Procedure assemble_procedure(const Timeline& timeline, const MotionOutcome& motion) {
  const Scenario& scenario = *timeline.model().scenario;
  const TaskPlan& plan = *timeline.model().plan;
  const double dt = timeline.dt_traj();
  const auto n_steps = static_cast<std::size_t>(std::llround(timeline.makespan() / dt));

  // Traverse -> solved area lookup.
  std::map<int, const AreaSolution*> area_of_traverse;
  for (const AreaSolution& sol : motion.solutions) {
    const ProblemArea& area = motion.areas[static_cast<std::size_t>(sol.area_id)];
    for (int tid : area.traverse_ids) area_of_traverse[tid] = &sol;
  }

  auto solved_config = [&](const AreaSolution& sol, int robot_id, double t,
                           std::vector<double>* out) {
    const ProblemArea& area = motion.areas[static_cast<std::size_t>(sol.area_id)];
    // Section containing t.
    int section = 0;
    for (std::size_t b = 0; b + 1 < area.borders.size(); ++b) {
      if (t >= area.borders[b] - 1e-9) section = static_cast<int>(b);
    }
    const SpaceTimePath& path = sol.section_paths[static_cast<std::size_t>(section)];
    int offset = -1;
    int dof = 0;
    int cursor = 0;
    for (std::size_t i = 0; i < path.robot_ids.size(); ++i) {
      const int d = scenario.robot(path.robot_ids[i]).dof();
      if (path.robot_ids[i] == robot_id) {
        offset = cursor;
        dof = d;
      }
      cursor += d;
    }
    if (offset < 0) return false;
    // Bracketing waypoints.
    const auto& wps = path.waypoints;
    std::size_t hi = 1;
    while (hi + 1 < wps.size() && wps[hi].t < t - 1e-12) ++hi;
    const auto& a = wps[hi - 1];
    const auto& b = wps[hi];
    const double u = b.t - a.t < 1e-12 ? 0.0 : std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
    out->resize(static_cast<std::size_t>(dof));
    for (int j = 0; j < dof; ++j) {
      const auto dim = static_cast<std::size_t>(offset + j);
      (*out)[static_cast<std::size_t>(j)] = a.q[dim] + u * (b.q[dim] - a.q[dim]);
    }
    return true;
  };

  auto config_at = [&](std::size_t robot_index, double t) {
    const OpWindow& w = timeline.window_at(static_cast<int>(robot_index), t);
    if (w.kind == OpWindow::Kind::traverse) {
      auto it = area_of_traverse.find(w.op_id);
      if (it != area_of_traverse.end()) {
        std::vector<double> q;
        if (solved_config(*it->second, scenario.robots[robot_index].id, t, &q)) return q;
        // Traverse is inside an area but this robot idles in the current
        // section: impossible by construction.
        throw Error(fmt::format("robot {} missing from solved section at t={:.3f}",
                                scenario.robots[robot_index].id, t));
      }
    }
    return timeline.tentative_config(static_cast<int>(robot_index), t);
  };

  Procedure proc;
  proc.dt = dt;
  proc.duration = static_cast<double>(n_steps) * dt;
  proc.samples.resize(scenario.robots.size());
  for (std::size_t r = 0; r < scenario.robots.size(); ++r) {
    proc.robot_ids.push_back(scenario.robots[r].id);
    proc.samples[r].reserve(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i) {
      const double t = std::min(static_cast<double>(i) * dt, timeline.makespan());
      proc.samples[r].push_back(config_at(r, t));
    }
    // Stitch continuity at window boundaries.
    for (const OpWindow& w : timeline.windows(static_cast<int>(r))) {
      if (w.t0 <= 1e-12) continue;
      const auto left = config_at(r, w.t0 - 1e-12);
      const auto right = config_at(r, w.t0 + 1e-12);
      for (std::size_t j = 0; j < left.size(); ++j) {
        if (std::abs(left[j] - right[j]) > 1e-9)
          throw Error(fmt::format("robot {}: stitch discontinuity {:.2e} rad at t={:.3f}",
                                  scenario.robots[r].id, std::abs(left[j] - right[j]), w.t0));
      }
    }
  }

  for (const CoreOperation& core : plan.cores) {
    const double start =
        timeline.schedule().start_steps[static_cast<std::size_t>(core.id)] *
        timeline.schedule().dt;
    proc.core_windows.push_back({core.id, core.robot_id, core.step_id, start,
                                 start + core.duration});
  }
  proc.mode_events = timeline.mode_events();
  return proc;
}

}  // namespace cellplan

#include "cellplan/validate.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <set>

namespace cellplan {

namespace {

struct ObjectTrack {
  bool attached = false;
  int carrier = -1;
  Vec2 grasp_offset;
  Vec2 pose;
};

}  // namespace

Verdict validate(const Procedure& proc, const Scenario& scenario) {
  Verdict verdict;
  auto flag = [&](std::string kind, double t, int robot, std::string detail) {
    verdict.violations.push_back({std::move(kind), t, robot, std::move(detail)});
  };

  // Structure.
  if (proc.samples.size() != scenario.robots.size() ||
      proc.robot_ids.size() != scenario.robots.size()) {
    flag("structure", 0.0, -1, "robot count mismatch");
    verdict.ok = false;
    return verdict;
  }
  const std::size_t n = proc.sample_count();
  for (std::size_t r = 0; r < proc.samples.size(); ++r) {
    if (proc.samples[r].size() != n) {
      flag("structure", 0.0, proc.robot_ids[r], "sample count mismatch");
      verdict.ok = false;
      return verdict;
    }
  }
  if (n < 2) {
    flag("structure", 0.0, -1, "procedure too short");
    verdict.ok = false;
    return verdict;
  }
  const double dt = proc.dt;

  // Core windows per robot, sorted, for the acceleration domain and
  // precedence checks.
  std::map<int, std::vector<CoreWindowInfo>> windows_by_robot;
  for (const CoreWindowInfo& w : proc.core_windows) windows_by_robot[w.robot_id].push_back(w);
  for (auto& [rid, ws] : windows_by_robot)
    std::sort(ws.begin(), ws.end(),
              [](const CoreWindowInfo& a, const CoreWindowInfo& b) { return a.t0 < b.t0; });

  auto inside_core = [&](int robot_id, double t) {
    auto it = windows_by_robot.find(robot_id);
    if (it == windows_by_robot.end()) return false;
    for (const CoreWindowInfo& w : it->second)
      if (t >= w.t0 - 1e-9 && t <= w.t1 + 1e-9) return true;
    return false;
  };

  // Kinematic checks.
  for (std::size_t r = 0; r < proc.samples.size(); ++r) {
    const Robot& robot = scenario.robot(proc.robot_ids[r]);
    const auto& traj = proc.samples[r];
    for (std::size_t i = 0; i < n; ++i) {
      if (!robot.within_limits(traj[i]))
        flag("joint_limit", static_cast<double>(i) * dt, robot.id, "outside joint limits");
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (int j = 0; j < robot.dof(); ++j) {
        const double v = std::abs(traj[i + 1][static_cast<std::size_t>(j)] -
                                  traj[i][static_cast<std::size_t>(j)]) /
                         dt;
        if (v > robot.v_max[static_cast<std::size_t>(j)] + 1e-6)
          flag("velocity", static_cast<double>(i) * dt, robot.id,
               fmt::format("joint {} at {:.4f} rad/s", j, v));
      }
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double t = static_cast<double>(i) * dt;
      // Timed geometric paths are not dynamically smooth outside cores;
      // acceleration is enforced where trajectories are preplanned.
      if (!(inside_core(robot.id, t - dt) && inside_core(robot.id, t + dt))) continue;
      for (int j = 0; j < robot.dof(); ++j) {
        const double a = std::abs(traj[i + 1][static_cast<std::size_t>(j)] -
                                  2.0 * traj[i][static_cast<std::size_t>(j)] +
                                  traj[i - 1][static_cast<std::size_t>(j)]) /
                         (dt * dt);
        if (a > robot.a_max[static_cast<std::size_t>(j)] + 1e-6)
          flag("acceleration", t, robot.id, fmt::format("joint {} at {:.4f} rad/s^2", j, a));
      }
    }
    // Escape configuration at both ends.
    for (const std::size_t idx : {std::size_t{0}, n - 1}) {
      for (int j = 0; j < robot.dof(); ++j) {
        if (std::abs(traj[idx][static_cast<std::size_t>(j)] -
                     robot.escape_config[static_cast<std::size_t>(j)]) > 1e-9) {
          flag("endpoint", static_cast<double>(idx) * dt, robot.id,
               idx == 0 ? "does not start at escape" : "does not end at escape");
          break;
        }
      }
    }
  }

  // Mode-aware collision sweep with independently tracked object poses.
  std::map<int, ObjectTrack> objects;
  for (const WorldObject& o : scenario.objects) objects[o.id] = {false, -1, {}, o.initial_pose};
  std::vector<AbsModeEvent> events = proc.mode_events;
  std::sort(events.begin(), events.end(),
            [](const AbsModeEvent& a, const AbsModeEvent& b) { return a.t < b.t; });
  std::size_t cursor = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    while (cursor < events.size() && events[cursor].t <= t + 1e-9) {
      const AbsModeEvent& ev = events[cursor];
      auto& track = objects[ev.object_id];
      const Robot& robot = scenario.robot(ev.robot_id);
      const std::size_t ridx = static_cast<std::size_t>(scenario.robot_index(ev.robot_id));
      const FkResult fk = forward_kinematics(robot, proc.samples[ridx][i]);
      if (ev.attach) {
        if (track.attached)
          flag("mode", ev.t, ev.robot_id,
               fmt::format("object {} attached twice", ev.object_id));
        const Vec2 grasp_pose = attached_object_pose(fk.ee, {ev.object_id, ev.grasp_offset});
        if ((grasp_pose - track.pose).norm() > 1e-6)
          flag("mode", ev.t, ev.robot_id,
               fmt::format("attach of object {} away from its pose ({:.4f} m off)",
                           ev.object_id, (grasp_pose - track.pose).norm()));
        track.attached = true;
        track.carrier = ev.robot_id;
        track.grasp_offset = ev.grasp_offset;
      } else {
        track.pose = attached_object_pose(fk.ee, {ev.object_id, track.grasp_offset});
        track.attached = false;
        track.carrier = -1;
      }
      ++cursor;
    }

    WorldState state;
    for (std::size_t r = 0; r < proc.samples.size(); ++r)
      state.configs[proc.robot_ids[r]] = proc.samples[r][i];
    for (const auto& [oid, track] : objects) {
      if (track.attached)
        state.mode.attachments[track.carrier] = Attachment{oid, track.grasp_offset};
      else
        state.detached_object_poses[oid] = track.pose;
    }
    const CollisionReport report = collision_check(state, scenario.robots, scenario.objects);
    for (const CollisionPair& pair : report.pairs) {
      flag("collision", t, pair.a.kind == EntityRef::Kind::robot ? pair.a.id : -1,
           fmt::format("{} {} vs {} {}",
                       pair.a.kind == EntityRef::Kind::robot ? "robot" : "object", pair.a.id,
                       pair.b.kind == EntityRef::Kind::robot ? "robot" : "object", pair.b.id));
    }
  }

  // Precedence: every step's cores end before any successor step's cores
  // begin; same-robot windows must not overlap.
  std::map<int, std::pair<double, double>> step_span;  // step -> [min t0, max t1]
  for (const CoreWindowInfo& w : proc.core_windows) {
    auto it = step_span.find(w.step_id);
    if (it == step_span.end())
      step_span[w.step_id] = {w.t0, w.t1};
    else {
      it->second.first = std::min(it->second.first, w.t0);
      it->second.second = std::max(it->second.second, w.t1);
    }
  }
  for (const AssemblyStep& step : scenario.steps) {
    if (!step_span.count(step.id)) {
      flag("precedence", 0.0, -1, fmt::format("step {} has no core windows", step.id));
      continue;
    }
    for (int pred : step.predecessors) {
      if (!step_span.count(pred)) continue;
      if (step_span[step.id].first < step_span[pred].second - 1e-9)
        flag("precedence", step_span[step.id].first, -1,
             fmt::format("step {} starts before predecessor {} ends", step.id, pred));
    }
  }
  for (const auto& [rid, ws] : windows_by_robot) {
    for (std::size_t k = 0; k + 1 < ws.size(); ++k) {
      if (ws[k + 1].t0 < ws[k].t1 - 1e-9)
        flag("precedence", ws[k + 1].t0, rid, "overlapping core windows on one robot");
    }
  }

  verdict.ok = verdict.violations.empty();
  return verdict;
}

}  // namespace cellplan

#include "cellplan/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <queue>

#include "cellplan/errors.hpp"

namespace cellplan {

namespace {

struct RobotTrack {
  std::vector<std::vector<double>> samples{};  // from t = 0 at dt_traj

  const std::vector<double>& config_at(double t, double dt) const {
    const auto idx = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::llround(t / dt)), 0,
                                   std::ssize(samples) - 1));
    return samples[idx];
  }
  double end_time(double dt) const {
    return samples.empty() ? 0.0 : dt * static_cast<double>(samples.size() - 1);
  }
};

struct PoseChange {
  double t = 0.0;
  int object_id = -1;
  Vec2 pose;
};

struct World {
  const Scenario* scenario = nullptr;
  double dt = 0.02;
  std::map<int, RobotTrack> tracks;
  std::vector<AbsModeEvent> events;       // committed, sorted by time
  std::vector<PoseChange> pose_changes;   // committed, sorted by time

  std::optional<Attachment> attachment_at(int robot_id, double t,
                                          const std::vector<AbsModeEvent>& overlay) const {
    std::optional<Attachment> carried;
    auto scan = [&](const std::vector<AbsModeEvent>& evs) {
      for (const AbsModeEvent& ev : evs) {
        if (ev.t > t + 1e-9 || ev.robot_id != robot_id) continue;
        if (ev.attach)
          carried = Attachment{ev.object_id, ev.grasp_offset};
        else
          carried.reset();
      }
    };
    scan(events);
    scan(overlay);
    return carried;
  }

  // Detached pose at t, nullopt while attached.
  std::optional<Vec2> object_pose_at(int object_id, double t,
                                     const std::vector<AbsModeEvent>& overlay,
                                     const std::vector<PoseChange>& pose_overlay) const {
    bool attached = false;
    double latest = -1.0;
    for (const auto* evs : {&events, &overlay}) {
      for (const AbsModeEvent& ev : *evs) {
        if (ev.t > t + 1e-9 || ev.object_id != object_id) continue;
        if (ev.t >= latest) {
          latest = ev.t;
          attached = ev.attach;
        }
      }
    }
    if (attached) return std::nullopt;
    Vec2 pose = scenario->object(object_id).initial_pose;
    double pose_t = -1.0;
    for (const auto* pcs : {&pose_changes, &pose_overlay}) {
      for (const PoseChange& pc : *pcs) {
        if (pc.t > t + 1e-9 || pc.object_id != object_id) continue;
        if (pc.t >= pose_t) {
          pose_t = pc.t;
          pose = pc.pose;
        }
      }
    }
    return pose;
  }

  // Collision of `robot` at config q at time t against all committed
  // trajectories, detached objects, and idle robots at escape.
  bool config_collides(const Robot& robot, const std::vector<double>& q, double t,
                       const std::vector<AbsModeEvent>& overlay,
                       const std::vector<PoseChange>& pose_overlay) const {
    WorldState state;
    state.configs[robot.id] = q;
    const auto own = attachment_at(robot.id, t, overlay);
    if (own) state.mode.attachments[robot.id] = *own;
    for (const Robot& other : scenario->robots) {
      if (other.id == robot.id) continue;
      auto it = tracks.find(other.id);
      state.configs[other.id] =
          it != tracks.end() && !it->second.samples.empty()
              ? it->second.config_at(t, dt)
              : other.escape_config;
      const auto att = attachment_at(other.id, t, overlay);
      if (att) state.mode.attachments[other.id] = *att;
    }
    for (const WorldObject& o : scenario->objects) {
      const auto pose = object_pose_at(o.id, t, overlay, pose_overlay);
      if (pose) state.detached_object_poses[o.id] = *pose;
    }
    return !collision_check(state, scenario->robots, scenario->objects).empty();
  }
};

}  // namespace

BaselineResult baseline_decentralized(const TaskPlan& plan, const Scenario& scenario) {
  const double dt = scenario.defaults.dt_traj;
  const double grid = scenario.defaults.dt;
  World world;
  world.scenario = &scenario;
  world.dt = dt;
  for (const Robot& r : scenario.robots) world.tracks[r.id] = {{r.escape_config}};

  // Global precedence-compatible order, robot id then core id on ties.
  std::vector<int> order;
  {
    std::vector<int> indeg(plan.cores.size(), 0);
    std::vector<std::vector<int>> succ(plan.cores.size());
    for (const CoreOperation& c : plan.cores) {
      indeg[static_cast<std::size_t>(c.id)] = static_cast<int>(c.predecessors.size());
      for (int p : c.predecessors) succ[static_cast<std::size_t>(p)].push_back(c.id);
    }
    auto cmp = [&](int a, int b) {
      const int ra = plan.cores[static_cast<std::size_t>(a)].robot_id;
      const int rb = plan.cores[static_cast<std::size_t>(b)].robot_id;
      if (ra != rb) return ra > rb;
      return a > b;
    };
    std::priority_queue<int, std::vector<int>, decltype(cmp)> ready(cmp);
    for (const CoreOperation& c : plan.cores)
      if (indeg[static_cast<std::size_t>(c.id)] == 0) ready.push(c.id);
    while (!ready.empty()) {
      const int c = ready.top();
      ready.pop();
      order.push_back(c);
      for (int s : succ[static_cast<std::size_t>(c)])
        if (--indeg[static_cast<std::size_t>(s)] == 0) ready.push(s);
    }
  }

  double total_hint = 5.0;
  for (const CoreOperation& c : plan.cores) total_hint += c.duration;
  for (const TraverseOperation& t : plan.traverses) total_hint += t.min_duration_estimate;
  const double horizon_cap = 4.0 * total_hint;

  // Baseline motions are planned per robot in a frozen world: everyone
  // else parked at escape. Delays handle the rest.
  std::map<int, Trajectory> planned_moves;  // traverse id -> min-time motion
  auto baseline_move = [&](const TraverseOperation& t) -> const Trajectory& {
    auto it = planned_moves.find(t.id);
    if (it != planned_moves.end()) return it->second;
    const Robot& robot = scenario.robot(t.robot_id);
    std::vector<const Robot*> parked;
    for (const Robot& r : scenario.robots)
      if (r.id != robot.id) parked.push_back(&r);
    const JointPath path = plan_static_path(robot, t.from_config, t.to_config, t.carried,
                                            t.detached_pose_snapshot, scenario, parked);
    Trajectory traj = parametrize(path, robot, dt);
    if (path.waypoints.size() < 2) traj.samples.assign(1, t.from_config);
    return planned_moves.emplace(t.id, std::move(traj)).first->second;
  };

  std::vector<double> core_end(plan.cores.size(), 0.0);
  Schedule schedule;
  schedule.dt = grid;
  schedule.start_steps.assign(plan.cores.size(), 0);

  auto commit_segment = [&](const Robot& robot, const std::vector<std::vector<double>>& seg,
                            double seg_t0) {
    RobotTrack& track = world.tracks[robot.id];
    const auto first = static_cast<std::size_t>(std::llround(seg_t0 / dt));
    while (track.samples.size() < first + 1) track.samples.push_back(track.samples.back());
    for (std::size_t i = 1; i < seg.size(); ++i) track.samples.push_back(seg[i]);
  };

  auto try_place = [&](const CoreOperation& core, const TraverseOperation& arrive,
                       double cursor, double start) -> bool {
    const Robot& robot = scenario.robot(core.robot_id);
    const Trajectory& move = baseline_move(arrive);
    const double t_min = move.duration();
    const double move_t0 = start - t_min;
    if (move_t0 < cursor - 1e-9) return false;

    // Candidate overlay events: the core's own attach/detach moves.
    std::vector<AbsModeEvent> overlay;
    std::vector<PoseChange> pose_overlay;
    for (const ModeEvent& ev : core.mode_events) {
      AbsModeEvent abs{start + ev.t_rel, ev.attach, core.robot_id, ev.object_id,
                       ev.grasp_offset};
      overlay.push_back(abs);
      if (!ev.attach) {
        const FkResult fk = forward_kinematics(robot, core.trajectory.at_time(ev.t_rel));
        pose_overlay.push_back(
            {abs.t, ev.object_id,
             attached_object_pose(fk.ee, {ev.object_id, ev.grasp_offset})});
      }
    }

    const auto steps = static_cast<std::size_t>(std::llround((start + core.duration - cursor) / dt));
    for (std::size_t i = 0; i <= steps; ++i) {
      const double t = cursor + static_cast<double>(i) * dt;
      const std::vector<double>* q;
      if (t < move_t0 - 1e-9)
        q = &world.tracks[robot.id].config_at(cursor, dt);
      else if (t < start - 1e-9)
        q = &move.at_time(t - move_t0);
      else
        q = &core.trajectory.at_time(t - start);
      if (world.config_collides(robot, *q, t, overlay, pose_overlay)) return false;
    }

    // Commit: hold, traverse motion, core.
    RobotTrack& track = world.tracks[robot.id];
    const auto move_first = static_cast<std::size_t>(std::llround(move_t0 / dt));
    while (track.samples.size() < move_first + 1) track.samples.push_back(track.samples.back());
    commit_segment(robot, move.samples, move_t0);
    commit_segment(robot, core.trajectory.samples, start);
    world.events.insert(world.events.end(), overlay.begin(), overlay.end());
    world.pose_changes.insert(world.pose_changes.end(), pose_overlay.begin(),
                              pose_overlay.end());
    return true;
  };

  for (int core_id : order) {
    const CoreOperation& core = plan.cores[static_cast<std::size_t>(core_id)];
    const Robot& robot = scenario.robot(core.robot_id);
    const TraverseOperation& arrive =
        plan.traverses[static_cast<std::size_t>(plan.traverse_before(core_id))];
    const double cursor = world.tracks[robot.id].end_time(dt);

    double earliest = cursor + baseline_move(arrive).duration();
    for (int p : core.predecessors)
      earliest = std::max(earliest, core_end[static_cast<std::size_t>(p)]);
    int step = std::max(0, static_cast<int>(std::ceil(earliest / grid - 1e-9)));

    bool placed = false;
    for (; step * grid < horizon_cap; ++step) {
      if (try_place(core, arrive, cursor, step * grid)) {
        placed = true;
        break;
      }
    }
    if (!placed)
      throw InfeasibleError(
          fmt::format("baseline: core {} not placeable within the horizon", core_id));
    schedule.start_steps[static_cast<std::size_t>(core_id)] = step;
    core_end[static_cast<std::size_t>(core_id)] = step * grid + core.duration;
  }

  // Escape traverses, robot id ascending; delays on the fine grid.
  double makespan = 0.0;
  for (const Robot& robot : scenario.robots) {
    const int esc_id = plan.robot_traverses[static_cast<std::size_t>(
        scenario.robot_index(robot.id))].back();
    const TraverseOperation& esc = plan.traverses[static_cast<std::size_t>(esc_id)];
    const double cursor = world.tracks[robot.id].end_time(dt);
    const Trajectory& move = baseline_move(esc);

    bool placed = false;
    for (double t0 = cursor; t0 < horizon_cap; t0 += dt) {
      bool clean = true;
      for (std::size_t i = 0; i < move.samples.size() && clean; ++i) {
        const double t = t0 + static_cast<double>(i) * dt;
        if (world.config_collides(robot, move.samples[i], t, {}, {})) clean = false;
      }
      // The parked tail must also be clear of already committed motion.
      const double arrive_t = t0 + move.duration();
      double committed_horizon = 0.0;
      for (const auto& [rid, tr] : world.tracks)
        committed_horizon = std::max(committed_horizon, tr.end_time(dt));
      for (double t = arrive_t; t < committed_horizon + dt && clean; t += 5.0 * dt) {
        if (world.config_collides(robot, robot.escape_config, t, {}, {})) clean = false;
      }
      if (clean) {
        RobotTrack& track = world.tracks[robot.id];
        const auto first = static_cast<std::size_t>(std::llround(t0 / dt));
        while (track.samples.size() < first + 1) track.samples.push_back(track.samples.back());
        commit_segment(robot, move.samples, t0);
        makespan = std::max(makespan, arrive_t);
        placed = true;
        break;
      }
    }
    if (!placed)
      throw InfeasibleError(fmt::format("baseline: robot {} cannot reach escape", robot.id));
  }

  // Assemble the procedure on a common horizon.
  const auto n_steps = static_cast<std::size_t>(std::llround(makespan / dt));
  Procedure proc;
  proc.dt = dt;
  proc.duration = static_cast<double>(n_steps) * dt;
  for (const Robot& robot : scenario.robots) {
    proc.robot_ids.push_back(robot.id);
    RobotTrack& track = world.tracks[robot.id];
    while (track.samples.size() < n_steps + 1) track.samples.push_back(track.samples.back());
    proc.samples.push_back(track.samples);
  }
  for (const CoreOperation& core : plan.cores) {
    const double start = schedule.start_steps[static_cast<std::size_t>(core.id)] * grid;
    proc.core_windows.push_back(
        {core.id, core.robot_id, core.step_id, start, start + core.duration});
  }
  proc.mode_events = world.events;
  std::sort(proc.mode_events.begin(), proc.mode_events.end(),
            [](const AbsModeEvent& a, const AbsModeEvent& b) { return a.t < b.t; });
  proc.provenance.method = "baseline";

  BaselineResult result;
  result.procedure = std::move(proc);
  result.schedule = std::move(schedule);
  result.duration = makespan;
  return result;
}

}  // namespace cellplan

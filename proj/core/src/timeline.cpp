#include "cellplan/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "cellplan/errors.hpp"

namespace cellplan {

Timeline::Timeline(const Schedule& schedule, const SchedulingModel& model)
    : model_(&model), schedule_(schedule) {
  const Scenario& scenario = *model.scenario;
  const TaskPlan& plan = *model.plan;
  dt_traj_ = scenario.defaults.dt_traj;
  makespan_ = eval_duration(schedule, model);

  windows_.resize(scenario.robots.size());
  tentative_.resize(plan.traverses.size());

  for (std::size_t r = 0; r < scenario.robots.size(); ++r) {
    const Robot& robot = scenario.robots[r];
    const auto& cores = plan.robot_cores[r];
    const auto& travs = plan.robot_traverses[r];
    double cursor = 0.0;
    for (std::size_t k = 0; k < cores.size(); ++k) {
      const int core = cores[k];
      const double start = schedule.start_steps[static_cast<std::size_t>(core)] * model.dt;
      const double end = start + model.duration[static_cast<std::size_t>(core)];
      windows_[r].push_back({OpWindow::Kind::traverse, travs[k], cursor, start});
      windows_[r].push_back({OpWindow::Kind::core, core, start, end});
      cursor = end;
    }
    // Escape traverse runs at its minimum duration, then the robot
    // parks; the parked tail is a plain static obstacle.
    const int esc = travs.back();
    const double esc_arrival =
        cursor + plan.traverses[static_cast<std::size_t>(esc)].min_duration_estimate;
    windows_[r].push_back({OpWindow::Kind::traverse, esc, cursor, esc_arrival});
    if (esc_arrival < makespan_ - 1e-9)
      windows_[r].push_back({OpWindow::Kind::parked, esc, esc_arrival, makespan_});

    for (const OpWindow& w : windows_[r]) {
      if (w.kind != OpWindow::Kind::traverse) continue;
      const TraverseOperation& t = plan.traverses[static_cast<std::size_t>(w.op_id)];
      const double window = w.t1 - w.t0;
      if (window < t.min_duration_estimate - 1e-9)
        throw Error(fmt::format("traverse {} window {:.3f}s below estimate {:.3f}s", t.id,
                                window, t.min_duration_estimate));
      tentative_[static_cast<std::size_t>(w.op_id)] =
          parametrize_into_window(t.initial_path, robot, window, dt_traj_);
    }
  }

  // Absolute mode events and the detached-pose change list.
  for (const CoreOperation& core : plan.cores) {
    const double start = schedule.start_steps[static_cast<std::size_t>(core.id)] * model.dt;
    for (const ModeEvent& ev : core.mode_events) {
      AbsModeEvent abs;
      abs.t = start + ev.t_rel;
      abs.attach = ev.attach;
      abs.robot_id = core.robot_id;
      abs.object_id = ev.object_id;
      abs.grasp_offset = ev.grasp_offset;
      events_.push_back(abs);
      if (!ev.attach) {
        const Robot& robot = scenario.robot(core.robot_id);
        const FkResult fk = forward_kinematics(robot, core.trajectory.at_time(ev.t_rel));
        pose_changes_.push_back(
            {abs.t, ev.object_id,
             attached_object_pose(fk.ee, Attachment{ev.object_id, ev.grasp_offset})});
      }
    }
  }
  std::sort(events_.begin(), events_.end(),
            [](const AbsModeEvent& a, const AbsModeEvent& b) { return a.t < b.t; });
  std::sort(pose_changes_.begin(), pose_changes_.end(),
            [](const PoseChange& a, const PoseChange& b) { return a.t < b.t; });
  for (const WorldObject& o : scenario.objects) initial_poses_[o.id] = o.initial_pose;
}

const OpWindow& Timeline::window_at(int robot_index, double t) const {
  const auto& ws = windows_[static_cast<std::size_t>(robot_index)];
  for (const OpWindow& w : ws) {
    if (t < w.t1 + 1e-12 && t >= w.t0 - 1e-12) return w;
  }
  return ws.back();
}

const OpWindow& Timeline::traverse_window(int traverse_id) const {
  const TraverseOperation& t = model_->plan->traverses[static_cast<std::size_t>(traverse_id)];
  const int r = model_->scenario->robot_index(t.robot_id);
  for (const OpWindow& w : windows_[static_cast<std::size_t>(r)]) {
    if (w.kind == OpWindow::Kind::traverse && w.op_id == traverse_id) return w;
  }
  throw Error(fmt::format("traverse {} has no window", traverse_id));
}

std::vector<double> Timeline::tentative_config(int robot_index, double t) const {
  const OpWindow& w = window_at(robot_index, t);
  if (w.kind == OpWindow::Kind::core) {
    return model_->plan->cores[static_cast<std::size_t>(w.op_id)].trajectory.at_time(t - w.t0);
  }
  if (w.kind == OpWindow::Kind::parked)
    return model_->scenario->robots[static_cast<std::size_t>(robot_index)].escape_config;
  return tentative_[static_cast<std::size_t>(w.op_id)].at_time(t - w.t0);
}

std::vector<double> Timeline::core_config(int robot_index, double t) const {
  const OpWindow& w = window_at(robot_index, t);
  if (w.kind != OpWindow::Kind::core)
    throw Error(fmt::format("robot index {} not in a core at t={:.3f}", robot_index, t));
  return model_->plan->cores[static_cast<std::size_t>(w.op_id)].trajectory.at_time(t - w.t0);
}

std::optional<Attachment> Timeline::attachment_at(int robot_id, double t) const {
  std::optional<Attachment> carried;
  for (const AbsModeEvent& ev : events_) {
    if (ev.t > t + 1e-12) break;
    if (ev.robot_id != robot_id) continue;
    if (ev.attach)
      carried = Attachment{ev.object_id, ev.grasp_offset};
    else
      carried.reset();
  }
  return carried;
}

std::optional<Vec2> Timeline::detached_pose_at(int object_id, double t) const {
  bool attached = false;
  Vec2 pose = initial_poses_.at(object_id);
  for (const AbsModeEvent& ev : events_) {
    if (ev.t > t + 1e-12) break;
    if (ev.object_id != object_id) continue;
    attached = ev.attach;
  }
  if (attached) return std::nullopt;
  for (const PoseChange& pc : pose_changes_) {
    if (pc.t > t + 1e-12) break;
    if (pc.object_id == object_id) pose = pc.pose;
  }
  return pose;
}

WorldState Timeline::world_at(double t,
                              const std::map<int, std::vector<double>>& traverse_configs) const {
  WorldState state;
  const Scenario& scenario = *model_->scenario;
  for (std::size_t r = 0; r < scenario.robots.size(); ++r) {
    const Robot& robot = scenario.robots[r];
    auto it = traverse_configs.find(robot.id);
    if (it != traverse_configs.end()) {
      state.configs[robot.id] = it->second;
    } else {
      const OpWindow& w = window_at(static_cast<int>(r), t);
      if (w.kind == OpWindow::Kind::core) {
        state.configs[robot.id] =
            model_->plan->cores[static_cast<std::size_t>(w.op_id)].trajectory.at_time(t - w.t0);
      } else if (w.kind == OpWindow::Kind::parked) {
        state.configs[robot.id] = robot.escape_config;
      }
      // Traversing robots without a supplied config stay out of the state.
    }
    const auto att = attachment_at(robot.id, t);
    if (att && state.configs.count(robot.id)) state.mode.attachments[robot.id] = *att;
  }
  for (const WorldObject& o : scenario.objects) {
    const auto pose = detached_pose_at(o.id, t);
    if (pose) state.detached_object_poses[o.id] = *pose;
  }
  return state;
}

}  // namespace cellplan

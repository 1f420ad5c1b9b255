#pragma once

#include "cellplan/schedule.hpp"

namespace cellplan {

// One robot's occupation of a time slot: executing a core operation,
// traversing (every gap between cores is a traverse window), or parked
// at the escape configuration after the escape traverse arrives.
struct OpWindow {
  enum class Kind { core, traverse, parked };
  Kind kind = Kind::traverse;
  int op_id = -1;  // core or traverse id
  double t0 = 0.0;
  double t1 = 0.0;
};

struct AbsModeEvent {
  double t = 0.0;
  bool attach = true;
  int robot_id = -1;
  int object_id = -1;
  Vec2 grasp_offset;
};

// Scheduled view of a task: per-robot windows covering [0, d], the
// absolute mode-event list, and tentative traverse motions (the
// decentralized paths slowed to fill their windows).
class Timeline {
 public:
  Timeline(const Schedule& schedule, const SchedulingModel& model);

  double makespan() const { return makespan_; }
  double dt_traj() const { return dt_traj_; }
  const SchedulingModel& model() const { return *model_; }
  const Schedule& schedule() const { return schedule_; }

  const std::vector<OpWindow>& windows(int robot_index) const {
    return windows_[static_cast<std::size_t>(robot_index)];
  }
  const OpWindow& window_at(int robot_index, double t) const;
  const std::vector<AbsModeEvent>& mode_events() const { return events_; }

  // Tentative motion of a traverse, slowed to fill its window.
  const Trajectory& tentative_traverse(int traverse_id) const {
    return tentative_[static_cast<std::size_t>(traverse_id)];
  }
  const OpWindow& traverse_window(int traverse_id) const;

  // Configuration of a robot at time t with its traverses taken from the
  // tentative motions.
  std::vector<double> tentative_config(int robot_index, double t) const;

  // Configuration at t when the robot is executing a core (throws
  // otherwise); independent of traverse motions.
  std::vector<double> core_config(int robot_index, double t) const;

  // Attachment carried by a robot at time t (from the event list).
  std::optional<Attachment> attachment_at(int robot_id, double t) const;

  // Pose of a detached object at time t; nullopt while it is attached.
  std::optional<Vec2> detached_pose_at(int object_id, double t) const;

  // World state at time t for the given robot configurations; all other
  // robots' core configs and all object poses filled from the timeline.
  WorldState world_at(double t, const std::map<int, std::vector<double>>& traverse_configs) const;

 private:
  const SchedulingModel* model_;
  Schedule schedule_;
  double makespan_ = 0.0;
  double dt_traj_ = 0.02;
  std::vector<std::vector<OpWindow>> windows_;
  std::vector<Trajectory> tentative_;
  std::vector<AbsModeEvent> events_;
  // Detached object pose changes: (time, object, pose), sorted by time.
  struct PoseChange {
    double t;
    int object_id;
    Vec2 pose;
  };
  std::vector<PoseChange> pose_changes_;
  std::map<int, Vec2> initial_poses_;
};

}  // namespace cellplan

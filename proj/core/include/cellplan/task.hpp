#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cellplan/scene.hpp"
#include "cellplan/trajectory.hpp"

namespace cellplan {

enum class ActionType { move, open_gripper, approach, close_gripper, depart };

struct Action {
  ActionType type = ActionType::move;
  std::optional<Vec2> waypoint;  // end-effector target for motion actions
};

struct AssemblyStep {
  int id = 0;
  int object_id = -1;  // object manipulated by this step, -1 if none
  std::vector<Action> actions;
  std::set<int> predecessors;
};

struct ScenarioDefaults {
  double dt = 0.2;        // scheduling grid
  double dt_traj = 0.02;  // trajectory / validation resolution
  double d_max = 40.0;    // explicit horizon; <= 0 means use multiplier
  double d_max_multiplier = 2.0;
  double gripper_dwell = 0.5;
};

struct Workspace {
  double x_min = -5.0, x_max = 5.0, y_min = -5.0, y_max = 5.0;

  bool contains(const Vec2& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

struct Scenario {
  std::string name;
  std::vector<Robot> robots;
  std::vector<WorldObject> objects;
  std::vector<AssemblyStep> steps;
  std::map<int, int> assignment;  // step id -> robot id
  Workspace workspace;
  ScenarioDefaults defaults;
  std::vector<std::string> load_warnings;

  const Robot& robot(int id) const;
  const WorldObject& object(int id) const;
  const AssemblyStep& step(int id) const;
  int robot_index(int id) const;
};

struct ModeEvent {
  double t_rel = 0.0;  // seconds from core start
  bool attach = true;
  int object_id = -1;
  Vec2 grasp_offset;  // EE frame, meaningful for attach
};

// Building block of a core trajectory: a rest-to-rest motion leg or a
// fixed-configuration dwell, optionally firing a mode event at its end.
struct CoreSegment {
  enum class Kind { motion, dwell };
  Kind kind = Kind::dwell;
  std::vector<double> target;  // motion target configuration
  std::size_t dwell_samples = 0;
  std::optional<ModeEvent> event;  // t_rel filled during preplanning
};

// Fixed-duration, pre-planned unit of work; the schedulable entity.
struct CoreOperation {
  int id = -1;
  int robot_id = -1;
  int step_id = -1;
  std::vector<CoreSegment> segments;
  Trajectory trajectory;
  double duration = 0.0;
  std::vector<ModeEvent> mode_events;
  std::vector<double> start_config;
  std::vector<double> end_config;
  std::optional<Attachment> carried_at_start;
  std::optional<Attachment> carried_at_end;
  std::map<int, Vec2> detached_pose_snapshot;  // world as of preplanning
  std::set<int> predecessors;                  // core-operation ids
};

struct TraverseOperation {
  int id = -1;
  int robot_id = -1;
  int from_core = -1;  // -1: from escape config at t=0
  int to_core = -1;    // -1: back to escape config
  std::vector<double> from_config;
  std::vector<double> to_config;
  std::optional<Attachment> carried;
  std::map<int, Vec2> detached_pose_snapshot;
  double min_duration_estimate = 0.0;
  JointPath initial_path;  // cached decentralized motion
};

// Decomposition of a scenario into alternating traverse and core
// operations per robot. Core/traverse ids are indices into the vectors.
struct TaskPlan {
  std::vector<CoreOperation> cores;
  std::vector<TraverseOperation> traverses;
  std::vector<std::vector<int>> robot_cores;      // per robot index, ordered
  std::vector<std::vector<int>> robot_traverses;  // per robot index; size = cores + 1

  int num_cores() const { return static_cast<int>(cores.size()); }
  // Traverse arriving at / departing from a core operation.
  int traverse_before(int core_id) const;
  int traverse_after(int core_id) const;
  int escape_traverse(int robot_index) const { return robot_traverses[robot_index].back(); }
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

// Builds the operation structure and all start/end configurations via
// IK chaining; trajectories and estimates are not yet filled.
TaskPlan decompose_steps(const Scenario& scenario);

// Fills the core's trajectory from its waypoint skeleton and dwells;
// checks it against static objects with all other robots at escape.
void preplan_core(CoreOperation& core, const Scenario& scenario);

// Plans a decentralized static-world path (other robots absent), applies
// shortcutting, parametrizes it and returns the duration. Caches the
// path on the traverse as the initially planned motion.
double estimate_min_traverse(TraverseOperation& traverse, const Scenario& scenario);

// Single-robot path in a frozen world: detached objects at the given
// poses, listed robots parked at their escape configurations. EE-line
// seeding plus PRM fallback, shortcut before returning.
JointPath plan_static_path(const Robot& robot, const std::vector<double>& from,
                           const std::vector<double>& to,
                           const std::optional<Attachment>& carried,
                           const std::map<int, Vec2>& detached_poses, const Scenario& scenario,
                           const std::vector<const Robot*>& parked = {});

// decompose + preplan every core + estimate every traverse.
TaskPlan prepare_task(const Scenario& scenario);

}  // namespace cellplan

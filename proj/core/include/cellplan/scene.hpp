#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cellplan/geometry.hpp"

namespace cellplan {

// Planar serial arm with capsule links.
struct Robot {
  int id = 0;
  Vec2 base;
  std::vector<double> link_lengths;
  double link_radius = 0.05;
  std::vector<std::pair<double, double>> joint_limits;
  std::vector<double> v_max;
  std::vector<double> a_max;
  std::vector<double> escape_config;

  int dof() const { return static_cast<int>(link_lengths.size()); }
  double reach() const;

  // Throws ScenarioError on violated invariants.
  void validate() const;
  bool within_limits(std::span<const double> q, double tol = 1e-9) const;
};

struct WorldObject {
  int id = 0;
  double radius = 0.05;
  Vec2 initial_pose;
  Vec2 goal_pose;
  bool attachable = true;
};

// Object rigidly attached to a robot; offset expressed in the
// end-effector frame.
struct Attachment {
  int object_id = -1;
  Vec2 grasp_offset;
};

// Discrete attachment state. An object may be attached to at most one
// robot; attached objects leave the static-object set.
struct KinematicMode {
  std::map<int, Attachment> attachments;  // robot id -> attachment

  std::optional<int> carrier_of(int object_id) const;
  bool is_attached(int object_id) const { return carrier_of(object_id).has_value(); }
};

struct EePose {
  Vec2 position;
  double heading = 0.0;  // sum of joint angles
};

struct FkResult {
  std::vector<Segment> links;
  EePose ee;
};

// Robots absent from `configs` are excluded from collision queries
// (as are objects attached to them). Poses of attached objects are
// always derived from FK, never stored.
struct WorldState {
  std::map<int, std::vector<double>> configs;  // robot id -> joint vector
  KinematicMode mode;
  std::map<int, Vec2> detached_object_poses;  // overrides initial_pose
};

struct EntityRef {
  enum class Kind { robot, object };
  Kind kind = Kind::robot;
  int id = 0;

  friend auto operator<=>(const EntityRef&, const EntityRef&) = default;
};

struct CollisionPair {
  EntityRef a;  // normalized: a <= b
  EntityRef b;

  friend auto operator<=>(const CollisionPair&, const CollisionPair&) = default;
};

struct CollisionReport {
  std::vector<CollisionPair> pairs;  // sorted, unique

  bool empty() const { return pairs.empty(); }
  bool contains(EntityRef x, EntityRef y) const;
};

FkResult forward_kinematics(const Robot& robot, std::span<const double> q);

// Closed-form solution for 1- and 2-link arms, damped least squares for
// longer chains. Returns the within-limits branch closest to q_ref
// (ties broken elbow-up). Throws KinematicsError when the target is out
// of reach or every branch violates the joint limits.
std::vector<double> inverse_kinematics(const Robot& robot, Vec2 target,
                                       std::span<const double> q_ref);

// Pose of an object attached with `att` to a robot whose EE pose is `ee`.
Vec2 attached_object_pose(const EePose& ee, const Attachment& att);

// All overlapping pairs, rolled up to top-level entities: an attached
// object contributes to its carrier robot's geometry. Adjacent links of
// one arm are exempt, as is an attached object against its carrying
// (last) link. Detached objects are tested against robots but not
// against each other.
CollisionReport collision_check(const WorldState& state,
                                std::span<const Robot> robots,
                                std::span<const WorldObject> objects);

}  // namespace cellplan

#include "cellplan/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "cellplan/errors.hpp"

namespace cellplan {

double Robot::reach() const {
  double r = 0.0;
  for (double l : link_lengths) r += l;
  return r;
}

void Robot::validate() const {
  const std::size_t n = link_lengths.size();
  if (n < 1) throw ScenarioError(fmt::format("robot {}: needs at least one link", id));
  if (joint_limits.size() != n || v_max.size() != n || a_max.size() != n ||
      escape_config.size() != n) {
    throw ScenarioError(fmt::format("robot {}: per-joint field size mismatch", id));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (link_lengths[j] <= 0.0)
      throw ScenarioError(fmt::format("robot {}: link {} length must be positive", id, j));
    if (v_max[j] <= 0.0 || a_max[j] <= 0.0)
      throw ScenarioError(fmt::format("robot {}: joint {} limits must be positive", id, j));
    if (joint_limits[j].first > joint_limits[j].second)
      throw ScenarioError(fmt::format("robot {}: joint {} interval inverted", id, j));
  }
  if (link_radius <= 0.0)
    throw ScenarioError(fmt::format("robot {}: link radius must be positive", id));
  if (!within_limits(escape_config))
    throw ScenarioError(fmt::format("robot {}: escape configuration outside joint limits", id));
}

bool Robot::within_limits(std::span<const double> q, double tol) const {
  if (q.size() != joint_limits.size()) return false;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q[j] < joint_limits[j].first - tol || q[j] > joint_limits[j].second + tol)
      return false;
  }
  return true;
}

std::optional<int> KinematicMode::carrier_of(int object_id) const {
  for (const auto& [robot_id, att] : attachments) {
    if (att.object_id == object_id) return robot_id;
  }
  return std::nullopt;
}

bool CollisionReport::contains(EntityRef x, EntityRef y) const {
  if (y < x) std::swap(x, y);
  return std::binary_search(pairs.begin(), pairs.end(), CollisionPair{x, y});
}

FkResult forward_kinematics(const Robot& robot, std::span<const double> q) {
  if (static_cast<int>(q.size()) != robot.dof())
    throw KinematicsError(fmt::format("robot {}: FK dimension mismatch ({} vs {})", robot.id,
                                      q.size(), robot.dof()));
  if (!robot.within_limits(q))
    throw KinematicsError(fmt::format("robot {}: FK joint-limit violation", robot.id));

  FkResult out;
  out.links.reserve(q.size());
  Vec2 p = robot.base;
  double heading = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    heading += q[j];
    const Vec2 tip = p + Vec2{std::cos(heading), std::sin(heading)} * robot.link_lengths[j];
    out.links.push_back({p, tip});
    p = tip;
  }
  out.ee = {p, heading};
  return out;
}

namespace {

// Wraps an angle into (-pi, pi].
double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

// Candidate joint values for one angle, folded into the joint interval.
void push_wrapped(double angle, const std::pair<double, double>& lim, std::vector<double>& out) {
  for (int k = -1; k <= 1; ++k) {
    const double a = angle + 2.0 * kPi * k;
    if (a >= lim.first - 1e-12 && a <= lim.second + 1e-12)
      out.push_back(std::clamp(a, lim.first, lim.second));
  }
}

double joint_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<double> ik_numeric(const Robot& robot, Vec2 target, std::span<const double> q_ref) {
  std::vector<double> q(q_ref.begin(), q_ref.end());
  for (int it = 0; it < 400; ++it) {
    const FkResult fk = forward_kinematics(robot, q);
    const Vec2 err = target - fk.ee.position;
    if (err.norm() < 1e-12) return q;
    // Damped least squares on the 2xN position Jacobian.
    const int n = robot.dof();
    std::vector<Vec2> jac(n);
    Vec2 joint_pos = robot.base;
    double heading = 0.0;
    std::vector<Vec2> joints(n);
    for (int j = 0; j < n; ++j) {
      joints[j] = joint_pos;
      heading += q[j];
      joint_pos = joint_pos + Vec2{std::cos(heading), std::sin(heading)} * robot.link_lengths[j];
    }
    for (int j = 0; j < n; ++j) {
      const Vec2 r = fk.ee.position - joints[j];
      jac[j] = {-r.y, r.x};
    }
    // Solve (J J^T + lambda I) y = err, dq = J^T y (2x2 system).
    const double lambda = 1e-6;
    double a11 = lambda, a12 = 0.0, a22 = lambda;
    for (int j = 0; j < n; ++j) {
      a11 += jac[j].x * jac[j].x;
      a12 += jac[j].x * jac[j].y;
      a22 += jac[j].y * jac[j].y;
    }
    const double det = a11 * a22 - a12 * a12;
    const Vec2 y = {(a22 * err.x - a12 * err.y) / det, (a11 * err.y - a12 * err.x) / det};
    for (int j = 0; j < n; ++j) {
      q[j] += jac[j].x * y.x + jac[j].y * y.y;
      q[j] = std::clamp(q[j], robot.joint_limits[j].first, robot.joint_limits[j].second);
    }
  }
  const FkResult fk = forward_kinematics(robot, q);
  if ((fk.ee.position - target).norm() > 1e-9)
    throw KinematicsError(fmt::format("robot {}: numeric IK did not converge", robot.id));
  return q;
}

}  // namespace

std::vector<double> inverse_kinematics(const Robot& robot, Vec2 target,
                                       std::span<const double> q_ref) {
  const Vec2 rel = target - robot.base;
  const double r = rel.norm();
  const int n = robot.dof();

  if (n > 2) return ik_numeric(robot, target, q_ref);

  std::vector<std::vector<double>> branches;
  if (n == 1) {
    const double l = robot.link_lengths[0];
    if (std::abs(r - l) > 1e-9)
      throw KinematicsError(fmt::format("robot {}: target off the reachable circle", robot.id));
    std::vector<double> cands;
    push_wrapped(std::atan2(rel.y, rel.x), robot.joint_limits[0], cands);
    for (double a : cands) branches.push_back({a});
  } else {
    const double l1 = robot.link_lengths[0];
    const double l2 = robot.link_lengths[1];
    if (r > l1 + l2 + 1e-9 || r < std::abs(l1 - l2) - 1e-9)
      throw KinematicsError(
          fmt::format("robot {}: target outside reachable annulus (r={:.4f})", robot.id, r));
    double c2 = (r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    c2 = std::clamp(c2, -1.0, 1.0);
    const double base_angle = std::atan2(rel.y, rel.x);
    for (double elbow : {std::acos(c2), -std::acos(c2)}) {
      const double q1 = base_angle - std::atan2(l2 * std::sin(elbow), l1 + l2 * std::cos(elbow));
      std::vector<double> c1s, c2s;
      push_wrapped(wrap_angle(q1), robot.joint_limits[0], c1s);
      push_wrapped(wrap_angle(elbow), robot.joint_limits[1], c2s);
      for (double a : c1s)
        for (double b : c2s) branches.push_back({a, b});
    }
  }

  // Keep branches whose FK actually hits the target (wrapping can push a
  // candidate to a limit boundary and off target).
  std::vector<std::vector<double>> valid;
  for (auto& q : branches) {
    if (!robot.within_limits(q)) continue;
    const FkResult fk = forward_kinematics(robot, q);
    if ((fk.ee.position - target).norm() <= 1e-9) valid.push_back(q);
  }
  if (valid.empty())
    throw KinematicsError(
        fmt::format("robot {}: all IK branches violate joint limits", robot.id));

  // Nearest to reference; ties broken elbow-up (larger trailing joint).
  std::sort(valid.begin(), valid.end(), [&](const auto& a, const auto& b) {
    const double da = joint_distance(a, q_ref);
    const double db = joint_distance(b, q_ref);
    if (std::abs(da - db) > 1e-12) return da < db;
    return a.back() > b.back();
  });
  return valid.front();
}

Vec2 attached_object_pose(const EePose& ee, const Attachment& att) {
  return ee.position + rotate(att.grasp_offset, ee.heading);
}

namespace {

struct Body {
  EntityRef entity;          // roll-up target
  bool is_disc = false;
  Segment seg;               // capsule axis (disc: degenerate)
  double radius = 0.0;
  int robot_id = -1;         // owner arm, -1 for detached objects
  int link_index = -1;       // -1 for discs
  bool carried = false;      // attached object disc
};

}  // namespace

CollisionReport collision_check(const WorldState& state, std::span<const Robot> robots,
                                std::span<const WorldObject> objects) {
  std::vector<Body> bodies;

  for (const Robot& robot : robots) {
    auto it = state.configs.find(robot.id);
    if (it == state.configs.end()) continue;
    const FkResult fk = forward_kinematics(robot, it->second);
    for (int j = 0; j < static_cast<int>(fk.links.size()); ++j) {
      bodies.push_back({EntityRef{EntityRef::Kind::robot, robot.id}, false, fk.links[j],
                        robot.link_radius, robot.id, j, false});
    }
    auto att = state.mode.attachments.find(robot.id);
    if (att != state.mode.attachments.end()) {
      const Vec2 pose = attached_object_pose(fk.ee, att->second);
      double obj_radius = 0.0;
      for (const WorldObject& o : objects) {
        if (o.id == att->second.object_id) obj_radius = o.radius;
      }
      bodies.push_back({EntityRef{EntityRef::Kind::robot, robot.id}, true, {pose, pose},
                        obj_radius, robot.id, -1, true});
    }
  }

  for (const WorldObject& obj : objects) {
    const auto carrier = state.mode.carrier_of(obj.id);
    if (carrier) {
      // Pose derives from the carrier; excluded entirely if the carrier
      // is not part of this state.
      continue;
    }
    Vec2 pose = obj.initial_pose;
    auto it = state.detached_object_poses.find(obj.id);
    if (it != state.detached_object_poses.end()) pose = it->second;
    bodies.push_back({EntityRef{EntityRef::Kind::object, obj.id}, true, {pose, pose}, obj.radius,
                      -1, -1, false});
  }

  CollisionReport report;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    for (std::size_t k = i + 1; k < bodies.size(); ++k) {
      const Body& p = bodies[i];
      const Body& q = bodies[k];
      if (p.entity == q.entity && !p.carried && !q.carried) {
        // Same arm: only non-adjacent link pairs collide.
        if (std::abs(p.link_index - q.link_index) <= 1) continue;
      }
      if (p.robot_id >= 0 && p.robot_id == q.robot_id && (p.carried || q.carried)) {
        // Carried object vs its carrying (last) link is exempt.
        const Body& link = p.carried ? q : p;
        const Robot* arm = nullptr;
        for (const Robot& r : robots)
          if (r.id == p.robot_id) arm = &r;
        if (link.link_index == arm->dof() - 1) continue;
      }
      if (p.entity.kind == EntityRef::Kind::object && q.entity.kind == EntityRef::Kind::object)
        continue;  // detached objects are static relative to each other
      const double dist = segment_distance(p.seg, q.seg);
      if (dist < p.radius + q.radius) {
        EntityRef a = p.entity, b = q.entity;
        if (b < a) std::swap(a, b);
        report.pairs.push_back({a, b});
      }
    }
  }
  std::sort(report.pairs.begin(), report.pairs.end());
  report.pairs.erase(std::unique(report.pairs.begin(), report.pairs.end()), report.pairs.end());
  return report;
}

}  // namespace cellplan

#include "cellplan/task.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <queue>

#include "cellplan/errors.hpp"
#include "cellplan/rng.hpp"

namespace cellplan {

const Robot& Scenario::robot(int id) const {
  for (const Robot& r : robots)
    if (r.id == id) return r;
  throw ScenarioError(fmt::format("unknown robot id {}", id));
}

const WorldObject& Scenario::object(int id) const {
  for (const WorldObject& o : objects)
    if (o.id == id) return o;
  throw ScenarioError(fmt::format("unknown object id {}", id));
}

const AssemblyStep& Scenario::step(int id) const {
  for (const AssemblyStep& s : steps)
    if (s.id == id) return s;
  throw ScenarioError(fmt::format("unknown step id {}", id));
}

int Scenario::robot_index(int id) const {
  for (std::size_t i = 0; i < robots.size(); ++i)
    if (robots[i].id == id) return static_cast<int>(i);
  throw ScenarioError(fmt::format("unknown robot id {}", id));
}

int TaskPlan::traverse_before(int core_id) const {
  for (const TraverseOperation& t : traverses)
    if (t.to_core == core_id) return t.id;
  throw Error(fmt::format("no traverse arriving at core {}", core_id));
}

int TaskPlan::traverse_after(int core_id) const {
  for (const TraverseOperation& t : traverses)
    if (t.from_core == core_id) return t.id;
  throw Error(fmt::format("no traverse departing core {}", core_id));
}

namespace {

// Kahn topological order over steps, smallest id first.
std::vector<int> topo_step_order(const Scenario& scenario) {
  std::map<int, int> indegree;
  std::map<int, std::vector<int>> successors;
  for (const AssemblyStep& s : scenario.steps) indegree[s.id] = 0;
  for (const AssemblyStep& s : scenario.steps) {
    for (int p : s.predecessors) {
      if (!indegree.count(p))
        throw ScenarioError(fmt::format("step {}: unknown predecessor {}", s.id, p));
      successors[p].push_back(s.id);
      ++indegree[s.id];
    }
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.push(id);
  std::vector<int> order;
  while (!ready.empty()) {
    const int id = ready.top();
    ready.pop();
    order.push_back(id);
    for (int succ : successors[id])
      if (--indegree[succ] == 0) ready.push(succ);
  }
  if (order.size() != scenario.steps.size())
    throw ScenarioError("assembly precedence graph contains a cycle");
  return order;
}

struct RobotChainState {
  std::vector<double> config;
  std::optional<Attachment> carried;
  int last_core = -1;
};

}  // namespace

TaskPlan decompose_steps(const Scenario& scenario) {
  TaskPlan plan;
  plan.robot_cores.resize(scenario.robots.size());
  plan.robot_traverses.resize(scenario.robots.size());

  std::map<int, RobotChainState> chain;
  for (const Robot& r : scenario.robots) chain[r.id] = {r.escape_config, std::nullopt, -1};

  std::map<int, Vec2> object_pose;  // current pose of every detached object
  for (const WorldObject& o : scenario.objects) object_pose[o.id] = o.initial_pose;

  std::map<int, int> step_last_core;

  auto snapshot = [&](const std::optional<Attachment>& carried) {
    std::map<int, Vec2> snap = object_pose;
    if (carried) snap.erase(carried->object_id);
    return snap;
  };

  for (int step_id : topo_step_order(scenario)) {
    const AssemblyStep& step = scenario.step(step_id);
    auto assigned = scenario.assignment.find(step_id);
    if (assigned == scenario.assignment.end())
      throw ScenarioError(fmt::format("step {} has no robot assignment", step_id));
    const Robot& robot = scenario.robot(assigned->second);
    RobotChainState& st = chain[robot.id];
    const auto dwell_samples = static_cast<std::size_t>(
        std::llround(scenario.defaults.gripper_dwell / scenario.defaults.dt_traj));

    bool first_core_of_step = true;
    std::size_t a = 0;
    while (a < step.actions.size()) {
      // Optional run of moves: one traverse targeting the last waypoint.
      std::vector<double> core_start = st.config;
      while (a < step.actions.size() && step.actions[a].type == ActionType::move) {
        if (!step.actions[a].waypoint)
          throw ScenarioError(fmt::format("step {}: move action without waypoint", step_id));
        core_start = inverse_kinematics(robot, *step.actions[a].waypoint, core_start);
        ++a;
      }
      if (a >= step.actions.size()) {
        if (first_core_of_step)
          throw ScenarioError(fmt::format("step {} contains no core action", step_id));
        throw ScenarioError(fmt::format("step {}: trailing move without a core action", step_id));
      }

      CoreOperation core;
      core.id = plan.num_cores();
      core.robot_id = robot.id;
      core.step_id = step_id;
      core.start_config = core_start;
      core.carried_at_start = st.carried;

      std::vector<double> cfg = core_start;
      std::optional<Attachment> carried = st.carried;
      while (a < step.actions.size() && step.actions[a].type != ActionType::move) {
        const Action& act = step.actions[a];
        CoreSegment seg;
        switch (act.type) {
          case ActionType::open_gripper:
            seg.kind = CoreSegment::Kind::dwell;
            seg.dwell_samples = dwell_samples;
            if (carried) {
              const FkResult fk = forward_kinematics(robot, cfg);
              seg.event = ModeEvent{0.0, false, carried->object_id, carried->grasp_offset};
              object_pose[carried->object_id] = attached_object_pose(fk.ee, *carried);
              carried.reset();
            }
            break;
          case ActionType::close_gripper:
            seg.kind = CoreSegment::Kind::dwell;
            seg.dwell_samples = dwell_samples;
            if (step.object_id >= 0) {
              if (carried)
                throw ScenarioError(
                    fmt::format("step {}: close_gripper while already carrying", step_id));
              if (!scenario.object(step.object_id).attachable)
                throw ScenarioError(
                    fmt::format("step {}: object {} is not attachable", step_id, step.object_id));
              const FkResult fk = forward_kinematics(robot, cfg);
              const Vec2 obj = object_pose.at(step.object_id);
              const Attachment att{step.object_id, rotate(obj - fk.ee.position, -fk.ee.heading)};
              seg.event = ModeEvent{0.0, true, att.object_id, att.grasp_offset};
              object_pose.erase(step.object_id);
              carried = att;
            }
            break;
          case ActionType::approach:
          case ActionType::depart:
            if (!act.waypoint)
              throw ScenarioError(fmt::format("step {}: motion action without waypoint", step_id));
            seg.kind = CoreSegment::Kind::motion;
            seg.target = inverse_kinematics(robot, *act.waypoint, cfg);
            cfg = seg.target;
            break;
          case ActionType::move:
            break;  // unreachable
        }
        core.segments.push_back(std::move(seg));
        ++a;
      }
      core.end_config = cfg;
      core.carried_at_end = carried;

      if (st.last_core >= 0) core.predecessors.insert(st.last_core);
      if (first_core_of_step) {
        for (int pred_step : step.predecessors)
          core.predecessors.insert(step_last_core.at(pred_step));
      }

      TraverseOperation t;
      t.id = static_cast<int>(plan.traverses.size());
      t.robot_id = robot.id;
      t.from_core = st.last_core;
      t.to_core = core.id;
      t.from_config = st.config;
      t.to_config = core.start_config;
      t.carried = st.carried;
      t.detached_pose_snapshot = snapshot(st.carried);
      plan.traverses.push_back(t);
      plan.robot_traverses[scenario.robot_index(robot.id)].push_back(t.id);

      core.detached_pose_snapshot = snapshot(core.carried_at_start);
      plan.robot_cores[scenario.robot_index(robot.id)].push_back(core.id);
      st.last_core = core.id;
      st.config = core.end_config;
      st.carried = carried;
      step_last_core[step_id] = core.id;
      first_core_of_step = false;
      plan.cores.push_back(std::move(core));
    }
  }

  // Trailing traverse back to each escape configuration.
  for (const Robot& robot : scenario.robots) {
    RobotChainState& st = chain.at(robot.id);
    if (st.carried)
      throw ScenarioError(fmt::format("robot {} still carries object {} after its last step",
                                      robot.id, st.carried->object_id));
    TraverseOperation t;
    t.id = static_cast<int>(plan.traverses.size());
    t.robot_id = robot.id;
    t.from_core = st.last_core;
    t.to_core = -1;
    t.from_config = st.config;
    t.to_config = robot.escape_config;
    t.carried = std::nullopt;
    t.detached_pose_snapshot = snapshot(std::nullopt);
    plan.traverses.push_back(t);
    plan.robot_traverses[scenario.robot_index(robot.id)].push_back(t.id);
  }
  return plan;
}

namespace {

bool config_in_static_collision(const Robot& robot, std::span<const double> q,
                                const std::optional<Attachment>& carried,
                                const std::map<int, Vec2>& detached_poses,
                                const Scenario& scenario,
                                const std::vector<const Robot*>& parked = {}) {
  WorldState state;
  state.configs[robot.id] = {q.begin(), q.end()};
  if (carried) state.mode.attachments[robot.id] = *carried;
  state.detached_object_poses = detached_poses;
  for (const Robot* other : parked) state.configs[other->id] = other->escape_config;

  // Only objects present in the pose map (plus the carried one) exist in
  // this static world; others are elsewhere in the cell's timeline.
  std::vector<WorldObject> visible;
  for (const WorldObject& o : scenario.objects) {
    if ((carried && carried->object_id == o.id) || detached_poses.count(o.id))
      visible.push_back(o);
  }
  return !collision_check(state, scenario.robots, visible).empty();
}

bool edge_in_static_collision(const Robot& robot, std::span<const double> a,
                              std::span<const double> b,
                              const std::optional<Attachment>& carried,
                              const std::map<int, Vec2>& poses, const Scenario& scenario) {
  double longest = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) longest = std::max(longest, std::abs(b[j] - a[j]));
  const int steps = std::max(1, static_cast<int>(std::ceil(longest / 0.01)));
  std::vector<double> q(a.size());
  for (int s = 0; s <= steps; ++s) {
    const double u = static_cast<double>(s) / steps;
    for (std::size_t j = 0; j < a.size(); ++j) q[j] = a[j] + u * (b[j] - a[j]);
    if (config_in_static_collision(robot, q, carried, poses, scenario)) return true;
  }
  return false;
}

}  // namespace

void preplan_core(CoreOperation& core, const Scenario& scenario) {
  const Robot& robot = scenario.robot(core.robot_id);
  const double dt = scenario.defaults.dt_traj;

  Trajectory traj;
  traj.dt = dt;
  traj.samples.push_back(core.start_config);
  core.mode_events.clear();

  std::vector<double> cfg = core.start_config;
  for (CoreSegment& seg : core.segments) {
    if (seg.kind == CoreSegment::Kind::dwell) {
      for (std::size_t k = 0; k < seg.dwell_samples; ++k) traj.samples.push_back(cfg);
      if (seg.event) {
        seg.event->t_rel = dt * static_cast<double>(traj.samples.size() - 1);
        core.mode_events.push_back(*seg.event);
      }
    } else {
      const Trajectory part = parametrize({robot.id, {cfg, seg.target}}, robot, dt);
      for (std::size_t k = 1; k < part.samples.size(); ++k)
        traj.samples.push_back(part.samples[k]);
      cfg = seg.target;
    }
  }
  core.trajectory = std::move(traj);
  core.duration = core.trajectory.duration();
  if (core.duration <= 0.0)
    throw ScenarioError(fmt::format("core {}: zero duration", core.id));

  // Screen against the static world with every other robot parked at its
  // escape configuration. Objects released mid-core become obstacles at
  // their placement pose for the remainder of the trajectory.
  std::vector<const Robot*> parked;
  for (const Robot& r : scenario.robots)
    if (r.id != robot.id) parked.push_back(&r);

  std::optional<Attachment> carried = core.carried_at_start;
  std::map<int, Vec2> poses = core.detached_pose_snapshot;
  std::size_t event_cursor = 0;
  for (std::size_t i = 0; i < core.trajectory.samples.size(); ++i) {
    const double t = dt * static_cast<double>(i);
    while (event_cursor < core.mode_events.size() &&
           core.mode_events[event_cursor].t_rel <= t + 1e-12) {
      const ModeEvent& ev = core.mode_events[event_cursor];
      if (ev.attach) {
        carried = Attachment{ev.object_id, ev.grasp_offset};
        poses.erase(ev.object_id);
      } else {
        const FkResult fk = forward_kinematics(robot, core.trajectory.samples[i]);
        poses[ev.object_id] = attached_object_pose(fk.ee, Attachment{ev.object_id,
                                                                     ev.grasp_offset});
        carried.reset();
      }
      ++event_cursor;
    }
    if (config_in_static_collision(robot, core.trajectory.samples[i], carried, poses, scenario,
                                   parked)) {
      throw ScenarioError(fmt::format(
          "core {} (robot {}, step {}): collision along preplanned trajectory at t={:.2f}",
          core.id, core.robot_id, core.step_id, t));
    }
  }
}

JointPath plan_static_path(const Robot& robot, const std::vector<double>& from,
                           const std::vector<double>& to,
                           const std::optional<Attachment>& carried,
                           const std::map<int, Vec2>& poses, const Scenario& scenario,
                           const std::vector<const Robot*>& parked) {
  double displacement = 0.0;
  for (std::size_t j = 0; j < from.size(); ++j)
    displacement = std::max(displacement, std::abs(to[j] - from[j]));
  if (displacement < 1e-12) return {robot.id, {from}};

  auto blocked = [&](std::span<const double> q) {
    return config_in_static_collision(robot, q, carried, poses, scenario, parked);
  };
  auto edge_blocked = [&](std::span<const double> a, std::span<const double> b) {
    double longest = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
      longest = std::max(longest, std::abs(b[j] - a[j]));
    const int steps = std::max(1, static_cast<int>(std::ceil(longest / 0.01)));
    std::vector<double> q(a.size());
    for (int s = 0; s <= steps; ++s) {
      const double u = static_cast<double>(s) / steps;
      for (std::size_t j = 0; j < a.size(); ++j) q[j] = a[j] + u * (b[j] - a[j]);
      if (blocked(q)) return true;
    }
    return false;
  };

  if (blocked(from) || blocked(to))
    throw InfeasibleError(fmt::format(
        "robot {}: static-path endpoint in collision with the static world", robot.id));

  Rng rng(0x5eedULL ^ (static_cast<std::uint64_t>(robot.id) << 17) ^
          std::hash<double>{}(from[0] + 3.0 * to[0]));
  std::vector<std::vector<double>> waypoints;

  if (!edge_blocked(from, to)) {
    waypoints = {from, to};
  }

  // Workspace-line seeding: chain IK along the straight end-effector
  // segment between the two tips; passage-style worlds are built around
  // exactly this homotopy.
  std::vector<std::vector<double>> seeds;
  if (waypoints.empty()) {
    const Vec2 tip_a = forward_kinematics(robot, from).ee.position;
    const Vec2 tip_b = forward_kinematics(robot, to).ee.position;
    std::vector<std::vector<double>> chainq{from};
    bool ok = true;
    const int segs = 24;
    for (int k = 1; k < segs && ok; ++k) {
      const double u = static_cast<double>(k) / segs;
      const Vec2 target = tip_a + u * (tip_b - tip_a);
      try {
        auto q = inverse_kinematics(robot, target, chainq.back());
        if (blocked(q)) {
          ok = false;
        } else {
          chainq.push_back(std::move(q));
        }
      } catch (const KinematicsError&) {
        ok = false;
      }
    }
    if (ok) {
      chainq.push_back(to);
      bool edges_ok = true;
      for (std::size_t i = 0; i + 1 < chainq.size() && edges_ok; ++i)
        if (edge_blocked(chainq[i], chainq[i + 1])) edges_ok = false;
      if (edges_ok) waypoints = chainq;
    }
    if (waypoints.empty() && chainq.size() > 1)
      seeds.assign(chainq.begin() + 1, chainq.end());
  }

  if (waypoints.empty()) {
    const int budget = 2400;
    std::vector<std::vector<double>> nodes{from, to};
    nodes.insert(nodes.end(), seeds.begin(), seeds.end());
    int drawn = 0;
    while (waypoints.empty() && drawn < budget) {
      ++drawn;
      // Half the draws concentrate around the straight-line homotopy.
      std::vector<double> q(from.size());
      if (rng.uniform() < 0.5) {
        const double u = rng.uniform();
        for (std::size_t j = 0; j < q.size(); ++j) {
          const double mid = from[j] + u * (to[j] - from[j]);
          q[j] = std::clamp(mid + rng.normal(0.0, 0.5), robot.joint_limits[j].first,
                            robot.joint_limits[j].second);
        }
      } else {
        for (std::size_t j = 0; j < q.size(); ++j)
          q[j] = rng.uniform(robot.joint_limits[j].first, robot.joint_limits[j].second);
      }
      if (!blocked(q)) nodes.push_back(std::move(q));
      if (nodes.size() % 60 != 0 && drawn < budget) continue;

      const std::size_t n = nodes.size();
      const std::size_t k_nn = 10;
      std::vector<std::vector<std::pair<int, double>>> adj(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> by_dist;
        for (std::size_t m = 0; m < n; ++m) {
          if (m == i) continue;
          double d2 = 0.0;
          for (std::size_t j = 0; j < from.size(); ++j) {
            const double d = nodes[i][j] - nodes[m][j];
            d2 += d * d;
          }
          by_dist.push_back({d2, static_cast<int>(m)});
        }
        const std::size_t k = std::min(k_nn, by_dist.size());
        std::partial_sort(by_dist.begin(), by_dist.begin() + static_cast<std::ptrdiff_t>(k),
                          by_dist.end());
        for (std::size_t t = 0; t < k; ++t) {
          if (!edge_blocked(nodes[i], nodes[by_dist[t].second]))
            adj[i].push_back({by_dist[t].second, std::sqrt(by_dist[t].first)});
        }
      }
      std::vector<double> dist(n, 1e18);
      std::vector<int> prev(n, -1);
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      dist[0] = 0.0;
      pq.push({0.0, 0});
      while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[static_cast<std::size_t>(u)] + 1e-12) continue;
        for (auto [v, w] : adj[static_cast<std::size_t>(u)]) {
          if (dist[static_cast<std::size_t>(u)] + w <
              dist[static_cast<std::size_t>(v)] - 1e-12) {
            dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + w;
            prev[static_cast<std::size_t>(v)] = u;
            pq.push({dist[static_cast<std::size_t>(v)], v});
          }
        }
      }
      if (dist[1] < 1e17) {
        for (int v = 1; v != -1; v = prev[static_cast<std::size_t>(v)])
          waypoints.push_back(nodes[static_cast<std::size_t>(v)]);
        std::reverse(waypoints.begin(), waypoints.end());
      }
    }
    if (waypoints.empty())
      throw InfeasibleError(fmt::format(
          "robot {}: no static-world path within the sample budget", robot.id));

    for (int round = 0; round < 150 && waypoints.size() > 2; ++round) {
      const std::size_t i = rng.uniform_index(waypoints.size() - 1);
      const std::size_t k = i + 1 + rng.uniform_index(waypoints.size() - i - 1);
      if (k <= i + 1) continue;
      if (!edge_blocked(waypoints[i], waypoints[k]))
        waypoints.erase(waypoints.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                        waypoints.begin() + static_cast<std::ptrdiff_t>(k));
    }
  }
  return {robot.id, waypoints};
}

double estimate_min_traverse(TraverseOperation& traverse, const Scenario& scenario) {
  const Robot& robot = scenario.robot(traverse.robot_id);
  try {
    traverse.initial_path =
        plan_static_path(robot, traverse.from_config, traverse.to_config, traverse.carried,
                         traverse.detached_pose_snapshot, scenario);
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(fmt::format("traverse {}: {}", traverse.id, e.what()));
  }
  if (traverse.initial_path.waypoints.size() < 2) {
    traverse.min_duration_estimate = 0.0;
    return 0.0;
  }
  const Trajectory traj = parametrize(traverse.initial_path, robot, scenario.defaults.dt_traj);
  traverse.min_duration_estimate = traj.duration();
  return traverse.min_duration_estimate;
}

TaskPlan prepare_task(const Scenario& scenario) {
  TaskPlan plan = decompose_steps(scenario);
  for (CoreOperation& core : plan.cores) preplan_core(core, scenario);
  for (TraverseOperation& t : plan.traverses) estimate_min_traverse(t, scenario);
  return plan;
}

}  // namespace cellplan

#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "cellplan/errors.hpp"
#include "cellplan/task.hpp"

#include <json.hpp>

namespace cellplan {

namespace {

using nlohmann::json;

Vec2 parse_vec2(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2)
    throw ParseError(fmt::format("{}: expected [x, y]", what));
  return {j[0].get<double>(), j[1].get<double>()};
}

ActionType parse_action_type(const std::string& s) {
  if (s == "move") return ActionType::move;
  if (s == "open_gripper") return ActionType::open_gripper;
  if (s == "approach") return ActionType::approach;
  if (s == "close_gripper") return ActionType::close_gripper;
  if (s == "depart") return ActionType::depart;
  throw ParseError(fmt::format("unknown action type '{}'", s));
}

// Structural validation of the assembled scenario: the load-time checks
// for the world-model assumptions.
void validate_scenario(Scenario& sc) {
  for (const Robot& r : sc.robots) r.validate();
  for (const WorldObject& o : sc.objects) {
    if (o.radius <= 0.0)
      throw ScenarioError(fmt::format("object {}: radius must be positive", o.id));
    if (!sc.workspace.contains(o.initial_pose) || !sc.workspace.contains(o.goal_pose))
      throw ScenarioError(fmt::format("object {}: pose outside workspace bounds", o.id));
  }

  // Assignment covers every step exactly once.
  for (const AssemblyStep& s : sc.steps) {
    if (!sc.assignment.count(s.id))
      throw ScenarioError(fmt::format("step {}: missing robot assignment", s.id));
    sc.robot(sc.assignment.at(s.id));  // must exist
  }
  for (const auto& [step_id, robot_id] : sc.assignment) sc.step(step_id);

  // Reachability: every motion waypoint inside the assigned arm's annulus
  // and the workspace.
  for (const AssemblyStep& s : sc.steps) {
    const Robot& robot = sc.robot(sc.assignment.at(s.id));
    double inner = 0.0;
    if (robot.dof() == 2)
      inner = std::abs(robot.link_lengths[0] - robot.link_lengths[1]);
    else if (robot.dof() == 1)
      inner = robot.link_lengths[0];
    for (const Action& a : s.actions) {
      if (!a.waypoint) continue;
      if (!sc.workspace.contains(*a.waypoint))
        throw ScenarioError(
            fmt::format("step {}: waypoint outside workspace bounds", s.id));
      const double r = (*a.waypoint - robot.base).norm();
      if (r > robot.reach() + 1e-9 || r < inner - 1e-9)
        throw ScenarioError(fmt::format(
            "step {}: waypoint ({:.3f}, {:.3f}) unreachable by robot {}", s.id, a.waypoint->x,
            a.waypoint->y, robot.id));
    }
  }

  // Escape configurations must be mutually collision-free and clear of
  // objects at their initial poses; goal-pose conflicts are only warned
  // about, since goal placements may postdate a robot's departure.
  {
    WorldState all_escape;
    for (const Robot& r : sc.robots) all_escape.configs[r.id] = r.escape_config;
    const CollisionReport rep = collision_check(all_escape, sc.robots, sc.objects);
    if (!rep.empty())
      throw ScenarioError("escape configurations collide with each other or with objects");

    WorldState at_goals = all_escape;
    for (const WorldObject& o : sc.objects) at_goals.detached_object_poses[o.id] = o.goal_pose;
    if (!collision_check(at_goals, sc.robots, sc.objects).empty())
      sc.load_warnings.push_back(
          "escape configurations overlap object goal poses; robots must depart before final "
          "placements");
  }

  // The precedence graph must be a DAG; decomposition re-checks this but
  // loading should fail fast.
  std::map<int, std::set<int>> preds;
  for (const AssemblyStep& s : sc.steps) preds[s.id] = s.predecessors;
  std::set<int> done;
  bool progress = true;
  while (progress) {
    progress = false;
    for (auto& [id, p] : preds) {
      if (done.count(id)) continue;
      bool ready = true;
      for (int q : p)
        if (!done.count(q)) ready = false;
      if (ready) {
        done.insert(id);
        progress = true;
      }
    }
  }
  if (done.size() != preds.size())
    throw ScenarioError("assembly precedence graph contains a cycle");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("scenario JSON: {}", e.what()));
  }

  try {
    if (j.value("format", 0) != 1)
      throw ParseError("scenario: unsupported or missing \"format\" (expected 1)");

    Scenario sc;
    sc.name = j.value("name", std::string("unnamed"));

    if (j.contains("workspace")) {
      const json& w = j["workspace"];
      sc.workspace = {w.at("x_min").get<double>(), w.at("x_max").get<double>(),
                      w.at("y_min").get<double>(), w.at("y_max").get<double>()};
    }
    if (j.contains("defaults")) {
      const json& d = j["defaults"];
      sc.defaults.dt = d.value("dt", sc.defaults.dt);
      sc.defaults.dt_traj = d.value("dt_traj", sc.defaults.dt_traj);
      sc.defaults.d_max = d.value("d_max", sc.defaults.d_max);
      sc.defaults.d_max_multiplier = d.value("d_max_multiplier", sc.defaults.d_max_multiplier);
      sc.defaults.gripper_dwell = d.value("gripper_dwell", sc.defaults.gripper_dwell);
    }

    for (const json& rj : j.at("robots")) {
      Robot r;
      r.id = rj.at("id").get<int>();
      r.base = parse_vec2(rj.at("base"), "robot base");
      r.link_lengths = rj.at("link_lengths").get<std::vector<double>>();
      r.link_radius = rj.at("link_radius").get<double>();
      for (const json& lim : rj.at("joint_limits"))
        r.joint_limits.push_back({lim.at(0).get<double>(), lim.at(1).get<double>()});
      r.v_max = rj.at("v_max").get<std::vector<double>>();
      r.a_max = rj.at("a_max").get<std::vector<double>>();
      r.escape_config = rj.at("escape_config").get<std::vector<double>>();
      sc.robots.push_back(std::move(r));
    }

    for (const json& oj : j.value("objects", json::array())) {
      WorldObject o;
      o.id = oj.at("id").get<int>();
      o.radius = oj.at("radius").get<double>();
      o.initial_pose = parse_vec2(oj.at("initial_pose"), "object initial_pose");
      o.goal_pose = parse_vec2(oj.at("goal_pose"), "object goal_pose");
      o.attachable = oj.value("attachable", true);
      sc.objects.push_back(o);
    }

    for (const json& sj : j.at("steps")) {
      AssemblyStep s;
      s.id = sj.at("id").get<int>();
      s.object_id = sj.value("object", -1);
      for (int p : sj.value("predecessors", std::vector<int>{})) s.predecessors.insert(p);
      for (const json& aj : sj.at("actions")) {
        Action a;
        a.type = parse_action_type(aj.at("type").get<std::string>());
        if (aj.contains("waypoint")) a.waypoint = parse_vec2(aj["waypoint"], "action waypoint");
        s.actions.push_back(a);
      }
      sc.steps.push_back(std::move(s));
    }

    for (const auto& [key, value] : j.at("assignment").items())
      sc.assignment[std::stoi(key)] = value.get<int>();

    validate_scenario(sc);
    return sc;
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("scenario JSON: {}", e.what()));
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open scenario file '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace cellplan

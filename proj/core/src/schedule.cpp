#include "cellplan/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <queue>

#include "cellplan/errors.hpp"

namespace cellplan {

namespace {

int ceil_to_step(double t, double dt) {
  return std::max(0, static_cast<int>(std::ceil(t / dt - 1e-9)));
}

int floor_to_step(double t, double dt) {
  return static_cast<int>(std::floor(t / dt + 1e-9));
}

}  // namespace

SchedulingModel build_scheduling_model(const TaskPlan& plan, const Scenario& scenario) {
  SchedulingModel m;
  m.plan = &plan;
  m.scenario = &scenario;
  m.dt = scenario.defaults.dt;
  m.num_cores = plan.num_cores();
  m.duration.resize(m.num_cores);
  m.arrive_est.resize(m.num_cores);
  m.prev_core.assign(m.num_cores, -1);
  m.next_core.assign(m.num_cores, -1);
  m.successors.resize(m.num_cores);

  for (const CoreOperation& c : plan.cores) {
    m.duration[c.id] = c.duration;
    for (int p : c.predecessors) m.successors[p].push_back(c.id);
  }
  for (const TraverseOperation& t : plan.traverses) {
    if (t.to_core >= 0) m.arrive_est[t.to_core] = t.min_duration_estimate;
    if (t.from_core >= 0 && t.to_core >= 0) {
      m.prev_core[t.to_core] = t.from_core;
      m.next_core[t.from_core] = t.to_core;
    }
  }
  m.escape_est.resize(scenario.robots.size(), 0.0);
  for (std::size_t r = 0; r < scenario.robots.size(); ++r) {
    const int esc = plan.robot_traverses[r].back();
    m.escape_est[r] = plan.traverses[esc].min_duration_estimate;
  }

  // Deterministic topological order: Kahn, smallest core id first.
  {
    std::vector<int> indeg(m.num_cores, 0);
    for (const CoreOperation& c : plan.cores) indeg[c.id] = static_cast<int>(c.predecessors.size());
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (int c = 0; c < m.num_cores; ++c)
      if (indeg[c] == 0) ready.push(c);
    while (!ready.empty()) {
      const int c = ready.top();
      ready.pop();
      m.topo_order.push_back(c);
      for (int s : m.successors[c])
        if (--indeg[s] == 0) ready.push(s);
    }
    if (static_cast<int>(m.topo_order.size()) != m.num_cores)
      throw ScenarioError("induced core-operation graph contains a cycle");
  }

  // Remaining-path lower bounds, reverse topological sweep.
  m.tail.assign(m.num_cores, 0.0);
  for (auto it = m.topo_order.rbegin(); it != m.topo_order.rend(); ++it) {
    const int c = *it;
    const int robot = scenario.robot_index(plan.cores[c].robot_id);
    double rest = m.next_core[c] < 0 ? m.escape_est[robot] : 0.0;
    for (int s : m.successors[c]) {
      const double edge = (s == m.next_core[c]) ? m.arrive_est[s] : 0.0;
      rest = std::max(rest, edge + m.tail[s]);
    }
    m.tail[c] = m.duration[c] + rest;
  }
  return m;
}

double eval_duration(const Schedule& s, const SchedulingModel& model) {
  double d = 0.0;
  for (std::size_t r = 0; r < model.scenario->robots.size(); ++r) {
    const auto& cores = model.plan->robot_cores[r];
    if (cores.empty()) continue;
    d = std::max(d, model.end_time(s, cores.back()) + model.escape_est[r]);
  }
  return d;
}

namespace {

std::optional<Attachment> core_attachment_at(const CoreOperation& core, double t_rel) {
  std::optional<Attachment> carried = core.carried_at_start;
  for (const ModeEvent& ev : core.mode_events) {
    if (ev.t_rel > t_rel + 1e-12) break;
    if (ev.attach)
      carried = Attachment{ev.object_id, ev.grasp_offset};
    else
      carried.reset();
  }
  return carried;
}

// Robot-pair collision between two active cores at one grid step.
bool pair_collides_at(const SchedulingModel& model, const CoreOperation& a, int start_a,
                      const CoreOperation& b, int start_b, int step) {
  const double dt = model.dt;
  const double ta = step * dt - start_a * dt;
  const double tb = step * dt - start_b * dt;

  WorldState state;
  state.configs[a.robot_id] = a.trajectory.at_time(ta);
  state.configs[b.robot_id] = b.trajectory.at_time(tb);
  const auto att_a = core_attachment_at(a, ta);
  const auto att_b = core_attachment_at(b, tb);
  if (att_a && att_b && att_a->object_id == att_b->object_id)
    throw ModeConflictError(
        fmt::format("object {} attached to robots {} and {} simultaneously", att_a->object_id,
                    a.robot_id, b.robot_id));
  if (att_a) state.mode.attachments[a.robot_id] = *att_a;
  if (att_b) state.mode.attachments[b.robot_id] = *att_b;

  std::vector<WorldObject> attached_objects;
  for (const WorldObject& o : model.scenario->objects) {
    if ((att_a && att_a->object_id == o.id) || (att_b && att_b->object_id == o.id))
      attached_objects.push_back(o);
  }
  const CollisionReport rep = collision_check(state, model.scenario->robots, attached_objects);
  return rep.contains({EntityRef::Kind::robot, a.robot_id},
                      {EntityRef::Kind::robot, b.robot_id});
}

// Grid steps during which a core is executing: [start, start + ceil(dur)).
std::pair<int, int> active_steps(const SchedulingModel& model, int core, int start) {
  const double dur = model.duration[core];
  const int n = std::max(1, static_cast<int>(std::ceil(dur / model.dt - 1e-9)));
  return {start, start + n};
}

}  // namespace

bool cores_collide(const SchedulingModel& model, int core_a, int start_a, int core_b,
                   int start_b) {
  const CoreOperation& a = model.plan->cores[core_a];
  const CoreOperation& b = model.plan->cores[core_b];
  if (a.robot_id == b.robot_id) return false;
  const auto [a0, a1] = active_steps(model, core_a, start_a);
  const auto [b0, b1] = active_steps(model, core_b, start_b);
  const int lo = std::max(a0, b0);
  const int hi = std::min(a1, b1);
  for (int g = lo; g < hi; ++g)
    if (pair_collides_at(model, a, start_a, b, start_b, g)) return true;
  return false;
}

int eval_core_collisions(const Schedule& s, const SchedulingModel& model) {
  int count = 0;
  for (int i = 0; i < model.num_cores; ++i) {
    for (int k = i + 1; k < model.num_cores; ++k) {
      const CoreOperation& a = model.plan->cores[i];
      const CoreOperation& b = model.plan->cores[k];
      if (a.robot_id == b.robot_id) continue;
      const auto [a0, a1] = active_steps(model, i, s.start_steps[i]);
      const auto [b0, b1] = active_steps(model, k, s.start_steps[k]);
      const int lo = std::max(a0, b0);
      const int hi = std::min(a1, b1);
      for (int g = lo; g < hi; ++g)
        if (pair_collides_at(model, a, s.start_steps[i], b, s.start_steps[k], g)) ++count;
    }
  }
  return count;
}

bool eval_precedence(const Schedule& s, const SchedulingModel& model) {
  for (const CoreOperation& c : model.plan->cores) {
    for (int p : c.predecessors) {
      if (s.start_steps[c.id] * model.dt < model.end_time(s, p) - 1e-9) return false;
    }
  }
  return true;
}

bool eval_relaxed_motion(const Schedule& s, const SchedulingModel& model) {
  for (const CoreOperation& c : model.plan->cores) {
    const double start = s.start_steps[c.id] * model.dt;
    const double gap_start = model.prev_core[c.id] < 0
                                 ? 0.0
                                 : model.end_time(s, model.prev_core[c.id]);
    if (start - gap_start < model.arrive_est[c.id] - 1e-9) return false;
  }
  return true;
}

ScheduleEval evaluate(const Schedule& s, const SchedulingModel& model, const Bounds& bounds) {
  ScheduleEval e;
  e.duration = eval_duration(s, model);
  e.precedence_ok = eval_precedence(s, model);
  e.relaxed_motion_ok = eval_relaxed_motion(s, model);
  e.core_collisions = e.precedence_ok ? eval_core_collisions(s, model) : 0;
  (void)bounds;
  return e;
}

Bounds compute_bounds(const SchedulingModel& model, std::optional<double> explicit_d_max,
                      double k_max) {
  const double dt = model.dt;
  // Earliest grid packing: every core as early as its predecessors and
  // the connecting traverse estimates allow, start times on the grid.
  std::vector<int> start(model.num_cores, 0);
  for (int c : model.topo_order) {
    double earliest = model.prev_core[c] < 0 ? model.arrive_est[c] : 0.0;
    for (int p : model.plan->cores[c].predecessors) {
      const double end = start[p] * dt + model.duration[p];
      const double edge = (p == model.prev_core[c]) ? model.arrive_est[c] : 0.0;
      earliest = std::max(earliest, end + edge);
    }
    start[c] = ceil_to_step(earliest, dt);
  }
  Schedule packed{start, dt};
  Bounds b;
  b.min_duration = eval_duration(packed, model);

  double d_max;
  if (explicit_d_max)
    d_max = *explicit_d_max;
  else if (model.scenario->defaults.d_max > 0.0)
    d_max = model.scenario->defaults.d_max;
  else
    d_max = k_max * b.min_duration;
  b.max_step = ceil_to_step(d_max, dt);
  b.max_duration = b.max_step * dt;
  return b;
}

StepInterval scheduling_interval(int core, const std::vector<int>& partial_starts,
                                 const SchedulingModel& model, const Bounds& bounds) {
  const double dt = model.dt;
  double earliest = model.prev_core[core] < 0 ? model.arrive_est[core] : 0.0;
  for (int p : model.plan->cores[core].predecessors) {
    if (partial_starts[p] == kUnscheduled)
      throw Error(fmt::format("scheduling_interval: predecessor {} of core {} unscheduled", p,
                              core));
    const double end = partial_starts[p] * dt + model.duration[p];
    const double edge = (p == model.prev_core[core]) ? model.arrive_est[core] : 0.0;
    earliest = std::max(earliest, end + edge);
  }
  StepInterval iv;
  iv.earliest = ceil_to_step(earliest, dt);
  iv.latest = floor_to_step(bounds.max_duration - model.tail[core], dt);
  return iv;
}

}  // namespace cellplan

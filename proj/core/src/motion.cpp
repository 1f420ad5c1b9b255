#include "cellplan/motion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <variant>

#include "cellplan/errors.hpp"
#include "st_plan.hpp"

namespace cellplan {

double SpaceTimePath::arc_length() const {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < waypoints[i].q.size(); ++j) {
      const double d = waypoints[i + 1].q[j] - waypoints[i].q[j];
      s += d * d;
    }
    len += std::sqrt(s);
  }
  return len;
}

int traverses_ending_before(const Timeline& timeline, double t) {
  int count = 0;
  const TaskPlan& plan = *timeline.model().plan;
  for (const TraverseOperation& trav : plan.traverses) {
    if (timeline.traverse_window(trav.id).t1 < t - 1e-9) ++count;
  }
  return count;
}

namespace {

double overlap(double a0, double a1, double b0, double b1) {
  return std::min(a1, b1) - std::max(a0, b0);
}

}  // namespace

std::vector<ProblemArea> identify_problem_areas(const Timeline& timeline, double l0,
                                                bool* core_conflict, MotionDiag* diag) {
  const Scenario& scenario = *timeline.model().scenario;
  const TaskPlan& plan = *timeline.model().plan;
  const double dt = timeline.dt_traj();
  const auto n_steps = static_cast<std::size_t>(std::ceil(timeline.makespan() / dt - 1e-9));

  if (core_conflict) *core_conflict = false;
  std::set<int> involved;
  std::vector<std::set<int>> collision_groups;

  for (std::size_t i = 0; i <= n_steps; ++i) {
    const double t = std::min(static_cast<double>(i) * dt, timeline.makespan());
    std::map<int, std::vector<double>> traversing;
    for (std::size_t r = 0; r < scenario.robots.size(); ++r) {
      const OpWindow& w = timeline.window_at(static_cast<int>(r), t);
      if (w.kind == OpWindow::Kind::traverse)
        traversing[scenario.robots[r].id] = timeline.tentative_config(static_cast<int>(r), t);
    }
    const WorldState state = timeline.world_at(t, traversing);
    if (diag) ++diag->state_checks;
    const CollisionReport report = collision_check(state, scenario.robots, scenario.objects);

    for (const CollisionPair& pair : report.pairs) {
      std::set<int> pair_traverses;
      bool any_robot = false;
      for (const EntityRef& e : {pair.a, pair.b}) {
        if (e.kind != EntityRef::Kind::robot) continue;
        any_robot = true;
        const OpWindow& w = timeline.window_at(scenario.robot_index(e.id), t);
        if (w.kind == OpWindow::Kind::traverse) pair_traverses.insert(w.op_id);
      }
      if (pair_traverses.empty()) {
        // No traverse can resolve this contact: the schedule itself is
        // invalid at fine resolution.
        if (any_robot && core_conflict) *core_conflict = true;
        continue;
      }
      involved.insert(pair_traverses.begin(), pair_traverses.end());
      collision_groups.push_back(pair_traverses);
    }
  }

  if (involved.empty()) return {};

  // Union-find over traverses that collided together.
  std::map<int, int> parent;
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int t : involved) parent[t] = t;
  for (const auto& grp : collision_groups) {
    const int root = find(*grp.begin());
    for (int t : grp) parent[find(t)] = root;
  }

  std::map<int, std::set<int>> groups;
  for (int t : involved) groups[find(t)].insert(t);

  // Closure: every traverse whose window overlaps a group's span joins
  // it (so area boundary configurations are fixed by core operations),
  // and groups with overlapping spans merge.
  std::vector<std::set<int>> areas;
  for (auto& [root, members] : groups) areas.push_back(members);

  auto span_of = [&](const std::set<int>& members) {
    double lo = 1e18, hi = -1e18;
    for (int tid : members) {
      const OpWindow& w = timeline.traverse_window(tid);
      lo = std::min(lo, w.t0);
      hi = std::max(hi, w.t1);
    }
    return std::pair<double, double>{lo, hi};
  };

  bool changed = true;
  while (changed) {
    changed = false;
    // Absorb overlapping traverses.
    for (auto& members : areas) {
      const auto [lo, hi] = span_of(members);
      for (const TraverseOperation& trav : plan.traverses) {
        if (members.count(trav.id)) continue;
        const OpWindow& w = timeline.traverse_window(trav.id);
        if (w.t1 - w.t0 < 1e-9) continue;  // zero-length traverses are fixed
        if (overlap(w.t0, w.t1, lo, hi) > 1e-9) {
          members.insert(trav.id);
          changed = true;
        }
      }
    }
    // Merge overlapping areas.
    for (std::size_t a = 0; a < areas.size() && !changed; ++a) {
      for (std::size_t b = a + 1; b < areas.size(); ++b) {
        const auto [a0, a1] = span_of(areas[a]);
        const auto [b0, b1] = span_of(areas[b]);
        if (overlap(a0, a1, b0, b1) > 1e-9) {
          areas[a].insert(areas[b].begin(), areas[b].end());
          areas.erase(areas.begin() + static_cast<std::ptrdiff_t>(b));
          changed = true;
          break;
        }
      }
    }
  }

  std::sort(areas.begin(), areas.end(), [&](const auto& a, const auto& b) {
    return span_of(a).first < span_of(b).first;
  });

  std::vector<ProblemArea> result;
  for (const auto& members : areas) {
    ProblemArea area;
    area.id = static_cast<int>(result.size());
    std::tie(area.t0, area.t1) = span_of(members);
    area.traverse_ids.assign(members.begin(), members.end());
    std::set<int> robots;
    for (int tid : members) robots.insert(plan.traverses[static_cast<std::size_t>(tid)].robot_id);
    area.robot_ids.assign(robots.begin(), robots.end());
    area.sampling_cap = static_cast<int>(
        std::llround(std::pow(l0, static_cast<double>(robots.size()))));

    // Section borders: core start/end events plus escape arrivals of
    // member traverses, inside the span.
    std::set<double> borders{area.t0, area.t1};
    const Schedule& s = timeline.schedule();
    for (const CoreOperation& core : plan.cores) {
      const double start = s.start_steps[static_cast<std::size_t>(core.id)] * s.dt;
      for (double ev : {start, start + core.duration})
        if (ev > area.t0 + 1e-9 && ev < area.t1 - 1e-9) borders.insert(ev);
    }
    for (int tid : members) {
      const OpWindow& w = timeline.traverse_window(tid);
      if (plan.traverses[static_cast<std::size_t>(tid)].to_core < 0 && w.t1 > area.t0 + 1e-9 &&
          w.t1 < area.t1 - 1e-9)
        borders.insert(w.t1);  // parked-transition of an escape traverse
    }
    area.borders.assign(borders.begin(), borders.end());
    result.push_back(std::move(area));
  }
  return result;
}

namespace {

using detail::SectionContext;

struct RoadmapEdge {
  int from = 0;
  int to = 0;
  double weight = 0.0;
  bool removed = false;
};

// Layered directed graph over sampled combined configurations at the
// area's section borders.
struct Roadmap {
  const Timeline* timeline = nullptr;
  const ProblemArea* area = nullptr;
  std::vector<int> robot_ids;
  std::vector<const Robot*> robots;
  std::vector<int> dof_offset;
  int total_dof = 0;

  std::vector<std::vector<double>> nodes;  // combined config over all area robots
  std::vector<int> node_layer;
  std::vector<std::vector<int>> layers;          // border index -> node ids
  std::vector<std::vector<bool>> robot_sampled;  // border index -> per-robot flag
  std::vector<RoadmapEdge> edges;
  std::vector<std::vector<int>> out_edges;  // node -> edge ids
  AreaDiag* adiag = nullptr;
  MotionDiag* diag = nullptr;

  int border_count() const { return static_cast<int>(area->borders.size()); }

  std::vector<double> fixed_combined_config(double t) const {
    std::vector<double> q;
    for (std::size_t i = 0; i < robot_ids.size(); ++i) {
      const int idx = timeline->model().scenario->robot_index(robot_ids[i]);
      const auto cfg = timeline->tentative_config(idx, t);
      q.insert(q.end(), cfg.begin(), cfg.end());
    }
    return q;
  }

  bool robot_traversing_at_instant(std::size_t robot_pos, double t) const {
    const int idx = timeline->model().scenario->robot_index(robot_ids[robot_pos]);
    const OpWindow& w = timeline->window_at(idx, t);
    return w.kind == OpWindow::Kind::traverse && t > w.t0 + 1e-9 && t < w.t1 - 1e-9;
  }

  bool robot_traversing_in_section(std::size_t robot_pos, int section) const {
    const double mid = 0.5 * (area->borders[static_cast<std::size_t>(section)] +
                              area->borders[static_cast<std::size_t>(section) + 1]);
    const int idx = timeline->model().scenario->robot_index(robot_ids[robot_pos]);
    return timeline->window_at(idx, mid).kind == OpWindow::Kind::traverse;
  }

  bool state_valid(const std::vector<double>& q, double t) const {
    std::map<int, std::vector<double>> cfg;
    for (std::size_t i = 0; i < robot_ids.size(); ++i) {
      cfg[robot_ids[i]] =
          std::vector<double>(q.begin() + dof_offset[i],
                              q.begin() + dof_offset[i] + robots[i]->dof());
    }
    const WorldState state = timeline->world_at(t, cfg);
    if (diag) ++diag->state_checks;
    return collision_check(state, timeline->model().scenario->robots,
                           timeline->model().scenario->objects)
        .empty();
  }

  // Samples one combined configuration at a border; nullopt on collision.
  std::optional<std::vector<double>> sample_at_border(int border, Rng& rng) const {
    const double t = area->borders[static_cast<std::size_t>(border)];
    std::vector<double> q = fixed_combined_config(t);
    for (std::size_t i = 0; i < robot_ids.size(); ++i) {
      if (!robot_sampled[static_cast<std::size_t>(border)][i]) continue;
      const Robot& robot = *robots[i];
      const int idx = timeline->model().scenario->robot_index(robot_ids[i]);
      const OpWindow& w = timeline->window_at(idx, t);
      // Reachable box around the last fixed configuration.
      const auto anchor = timeline->tentative_config(idx, w.t0);
      const auto radius = max_displacement(t - w.t0, robot);
      for (int j = 0; j < robot.dof(); ++j) {
        const double lo = std::max(robot.joint_limits[static_cast<std::size_t>(j)].first,
                                   anchor[static_cast<std::size_t>(j)] -
                                       radius[static_cast<std::size_t>(j)]);
        const double hi = std::min(robot.joint_limits[static_cast<std::size_t>(j)].second,
                                   anchor[static_cast<std::size_t>(j)] +
                                       radius[static_cast<std::size_t>(j)]);
        q[static_cast<std::size_t>(dof_offset[i] + j)] = rng.uniform(lo, std::max(lo, hi));
      }
    }
    if (adiag) ++adiag->samples_drawn;
    if (!state_valid(q, t)) return std::nullopt;
    return q;
  }

  bool connectable(const std::vector<double>& qa, const std::vector<double>& qb,
                   int section) const {
    const double gap = area->borders[static_cast<std::size_t>(section) + 1] -
                       area->borders[static_cast<std::size_t>(section)];
    for (std::size_t i = 0; i < robot_ids.size(); ++i) {
      if (!robot_traversing_in_section(i, section)) continue;
      const auto radius = max_displacement(gap, *robots[i]);
      for (int j = 0; j < robots[i]->dof(); ++j) {
        const double d = std::abs(qb[static_cast<std::size_t>(dof_offset[i] + j)] -
                                  qa[static_cast<std::size_t>(dof_offset[i] + j)]);
        if (d > radius[static_cast<std::size_t>(j)] + 1e-9) return false;
      }
    }
    return true;
  }

  double edge_weight(const std::vector<double>& qa, const std::vector<double>& qb,
                     int section) const {
    double s = 0.0;
    for (std::size_t i = 0; i < robot_ids.size(); ++i) {
      if (!robot_traversing_in_section(i, section)) continue;
      for (int j = 0; j < robots[i]->dof(); ++j) {
        const double d = qb[static_cast<std::size_t>(dof_offset[i] + j)] -
                         qa[static_cast<std::size_t>(dof_offset[i] + j)];
        s += d * d;
      }
    }
    return std::sqrt(s);
  }

  int add_node(int border, std::vector<double> q) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(std::move(q));
    node_layer.push_back(border);
    out_edges.emplace_back();
    layers[static_cast<std::size_t>(border)].push_back(id);
    if (adiag) adiag->nodes = nodes.size();
    // Connect to both adjacent layers.
    if (border > 0) {
      for (int prev : layers[static_cast<std::size_t>(border) - 1]) link(prev, id, border - 1);
    }
    if (border + 1 < border_count()) {
      for (int next : layers[static_cast<std::size_t>(border) + 1]) link(id, next, border);
    }
    return id;
  }

  void link(int from, int to, int section) {
    if (!connectable(nodes[static_cast<std::size_t>(from)], nodes[static_cast<std::size_t>(to)],
                     section))
      return;
    const int eid = static_cast<int>(edges.size());
    edges.push_back({from, to,
                     edge_weight(nodes[static_cast<std::size_t>(from)],
                                 nodes[static_cast<std::size_t>(to)], section),
                     false});
    out_edges[static_cast<std::size_t>(from)].push_back(eid);
    if (adiag) adiag->edges = edges.size();
  }

  // Dijkstra start -> end over non-removed edges; node id sequence.
  std::optional<std::vector<int>> guide_path() const {
    const std::size_t n = nodes.size();
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
      for (int eid : out_edges[static_cast<std::size_t>(u)]) {
        const RoadmapEdge& e = edges[static_cast<std::size_t>(eid)];
        if (e.removed) continue;
        if (dist[static_cast<std::size_t>(u)] + e.weight <
            dist[static_cast<std::size_t>(e.to)] - 1e-12) {
          dist[static_cast<std::size_t>(e.to)] = dist[static_cast<std::size_t>(u)] + e.weight;
          prev[static_cast<std::size_t>(e.to)] = u;
          pq.push({dist[static_cast<std::size_t>(e.to)], e.to});
        }
      }
    }
    if (dist[1] > 1e17) return std::nullopt;
    std::vector<int> path;
    for (int v = 1; v != -1; v = prev[static_cast<std::size_t>(v)]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
  }

  void remove_edge(int from, int to) {
    for (int eid : out_edges[static_cast<std::size_t>(from)]) {
      RoadmapEdge& e = edges[static_cast<std::size_t>(eid)];
      if (e.to == to && !e.removed) {
        e.removed = true;
        if (adiag) ++adiag->removed_edges;
        return;
      }
    }
  }

  // Earliest border whose layer is unreachable from the start node.
  double earliest_blocked_border() const {
    std::vector<bool> reach(nodes.size(), false);
    reach[0] = true;
    // Layer-ordered relaxation suffices in a layered DAG.
    for (int b = 0; b + 1 < border_count(); ++b) {
      for (int u : layers[static_cast<std::size_t>(b)]) {
        if (!reach[static_cast<std::size_t>(u)]) continue;
        for (int eid : out_edges[static_cast<std::size_t>(u)]) {
          const RoadmapEdge& e = edges[static_cast<std::size_t>(eid)];
          if (!e.removed) reach[static_cast<std::size_t>(e.to)] = true;
        }
      }
      bool any = false;
      for (int v : layers[static_cast<std::size_t>(b) + 1])
        if (reach[static_cast<std::size_t>(v)]) any = true;
      if (!any) return area->borders[static_cast<std::size_t>(b) + 1];
    }
    return area->t1;
  }
};

std::variant<Roadmap, MotionFailure> build_roadmap(const Timeline& timeline,
                                                   const ProblemArea& area,
                                                   const MotionConfig& config, Rng& rng,
                                                   AreaDiag* adiag, MotionDiag* diag) {
  Roadmap rm;
  rm.timeline = &timeline;
  rm.area = &area;
  rm.robot_ids = area.robot_ids;
  rm.adiag = adiag;
  rm.diag = diag;
  const Scenario& scenario = *timeline.model().scenario;
  for (int rid : rm.robot_ids) {
    rm.robots.push_back(&scenario.robot(rid));
    rm.dof_offset.push_back(rm.total_dof);
    rm.total_dof += rm.robots.back()->dof();
  }
  const int borders = rm.border_count();
  rm.layers.resize(static_cast<std::size_t>(borders));
  rm.robot_sampled.resize(static_cast<std::size_t>(borders));
  for (int b = 0; b < borders; ++b) {
    rm.robot_sampled[static_cast<std::size_t>(b)].resize(rm.robot_ids.size());
    for (std::size_t i = 0; i < rm.robot_ids.size(); ++i) {
      rm.robot_sampled[static_cast<std::size_t>(b)][i] =
          rm.robot_traversing_at_instant(i, area.borders[static_cast<std::size_t>(b)]);
    }
  }

  // Fixed start and end nodes (ids 0 and 1).
  rm.nodes.push_back(rm.fixed_combined_config(area.t0));
  rm.node_layer.push_back(0);
  rm.out_edges.emplace_back();
  rm.layers[0].push_back(0);
  rm.nodes.push_back(rm.fixed_combined_config(area.t1));
  rm.node_layer.push_back(borders - 1);
  rm.out_edges.emplace_back();
  rm.layers[static_cast<std::size_t>(borders) - 1].push_back(1);
  if (borders == 2) rm.link(0, 1, 0);

  auto sample_border = [&](int b, int count) -> std::optional<MotionFailure> {
    int consecutive_failures = 0;
    int added = 0;
    while (added < count) {
      const auto q = rm.sample_at_border(b, rng);
      if (q) {
        rm.add_node(b, *q);
        ++added;
        consecutive_failures = 0;
      } else if (++consecutive_failures >= area.sampling_cap) {
        MotionFailure f;
        f.kind = MotionFailure::Kind::roadmap_sampling;
        f.area_id = area.id;
        f.time_point = area.borders[static_cast<std::size_t>(b)];
        f.traverses_done = traverses_ending_before(timeline, f.time_point);
        return f;
      }
    }
    return std::nullopt;
  };

  for (int b = 1; b + 1 < borders; ++b) {
    if (auto fail = sample_border(b, config.initial_layer_samples)) return *fail;
  }

  // Initial construction continues until a first guide path exists.
  int rounds = 0;
  while (!rm.guide_path()) {
    if (++rounds > config.extension_rounds_cap) {
      MotionFailure f;
      f.kind = MotionFailure::Kind::roadmap_sampling;
      f.area_id = area.id;
      f.time_point = rm.earliest_blocked_border();
      f.traverses_done = traverses_ending_before(timeline, f.time_point);
      return f;
    }
    if (adiag) ++adiag->extension_rounds;
    for (int b = 1; b + 1 < borders; ++b) {
      if (auto fail = sample_border(b, config.extension_batch)) return *fail;
    }
    if (borders == 2) break;  // single-section area: only the fixed edge exists
  }
  if (borders == 2 && !rm.guide_path()) {
    MotionFailure f;
    f.kind = MotionFailure::Kind::roadmap_sampling;
    f.area_id = area.id;
    f.time_point = area.t1;
    f.traverses_done = traverses_ending_before(timeline, f.time_point);
    return f;
  }
  return rm;
}

std::variant<AreaSolution, MotionFailure> solve_problem_area(const Timeline& timeline,
                                                             const ProblemArea& area,
                                                             const MotionConfig& config,
                                                             Rng& rng, AreaDiag* adiag,
                                                             MotionDiag* diag) {
  adiag->sections = area.sections();
  adiag->robots = static_cast<int>(area.robot_ids.size());
  adiag->sampling_cap = area.sampling_cap;

  auto built = build_roadmap(timeline, area, config, rng, adiag, diag);
  if (std::holds_alternative<MotionFailure>(built)) return std::get<MotionFailure>(built);
  Roadmap rm = std::move(std::get<Roadmap>(built));

  // Per-section planning contexts.
  std::vector<SectionContext> contexts;
  for (int s = 0; s < area.sections(); ++s) {
    std::vector<int> traversing;
    for (std::size_t i = 0; i < rm.robot_ids.size(); ++i)
      if (rm.robot_traversing_in_section(i, s)) traversing.push_back(rm.robot_ids[i]);
    contexts.push_back(SectionContext::make(timeline, area.borders[static_cast<std::size_t>(s)],
                                            area.borders[static_cast<std::size_t>(s) + 1],
                                            traversing, diag));
  }

  auto section_config = [&](const std::vector<double>& node_q, int section) {
    const SectionContext& ctx = contexts[static_cast<std::size_t>(section)];
    std::vector<double> q;
    for (std::size_t i = 0; i < ctx.robot_ids.size(); ++i) {
      for (std::size_t p = 0; p < rm.robot_ids.size(); ++p) {
        if (rm.robot_ids[p] != ctx.robot_ids[i]) continue;
        q.insert(q.end(), node_q.begin() + rm.dof_offset[p],
                 node_q.begin() + rm.dof_offset[p] + rm.robots[p]->dof());
      }
    }
    return q;
  };

  std::map<std::pair<int, int>, SpaceTimePath> cache;
  const auto wall_start = std::chrono::steady_clock::now();
  auto wall_since_progress = wall_start;
  int best_solved = 0;
  int attempts_since_improve = 0;
  double latest_solved_goal = area.t0;

  const double planner_wall =
      config.derived_planner_time_limit(static_cast<int>(area.robot_ids.size()));

  int extension_rounds = 0;
  while (true) {
    const auto guide = rm.guide_path();
    if (adiag) ++adiag->guide_path_attempts;
    if (!guide) {
      if (++extension_rounds > config.extension_rounds_cap ||
          ++attempts_since_improve > config.progress_attempt_cap) {
        MotionFailure f;
        f.kind = MotionFailure::Kind::guide_path_timeout;
        f.area_id = area.id;
        f.time_point = latest_solved_goal;
        f.traverses_done = traverses_ending_before(timeline, f.time_point);
        return f;
      }
      if (adiag) ++adiag->extension_rounds;
      for (int b = 1; b + 1 < rm.border_count(); ++b) {
        int consecutive = 0;
        int added = 0;
        while (added < config.extension_batch && consecutive < area.sampling_cap) {
          const auto q = rm.sample_at_border(b, rng);
          if (q) {
            rm.add_node(b, *q);
            ++added;
            consecutive = 0;
          } else {
            ++consecutive;
          }
        }
      }
      continue;
    }

    int solved = 0;
    bool removed = false;
    for (std::size_t k = 0; k + 1 < guide->size(); ++k) {
      const int u = (*guide)[k];
      const int v = (*guide)[k + 1];
      const int section = rm.node_layer[static_cast<std::size_t>(u)];
      const SectionContext& ctx = contexts[static_cast<std::size_t>(section)];
      if (cache.count({u, v})) {
        ++solved;
        continue;
      }
      std::optional<SpaceTimePath> path;
      if (ctx.robot_ids.empty()) {
        // Nothing traverses here; the section is carried by fixed motions.
        path = SpaceTimePath{{}, {{ctx.t0, {}}, {ctx.t1, {}}}};
      } else {
        path = detail::solve_section(ctx, section_config(rm.nodes[static_cast<std::size_t>(u)],
                                                         section),
                                     section_config(rm.nodes[static_cast<std::size_t>(v)],
                                                    section),
                                     config.planner, config.planner_iteration_cap, planner_wall,
                                     rng);
        if (path) detail::postprocess_path(*path, ctx, config.postprocess_rounds, rng);
      }
      if (!path) {
        rm.remove_edge(u, v);
        removed = true;
        break;
      }
      cache[{u, v}] = std::move(*path);
      latest_solved_goal = std::max(latest_solved_goal, ctx.t1);
      ++solved;
    }

    adiag->solved_sections = std::max(adiag->solved_sections, solved);
    if (!removed) {
      AreaSolution sol;
      sol.area_id = area.id;
      for (std::size_t k = 0; k + 1 < guide->size(); ++k)
        sol.section_paths.push_back(cache.at({(*guide)[k], (*guide)[k + 1]}));
      return sol;
    }

    if (solved > best_solved) {
      best_solved = solved;
      attempts_since_improve = 0;
      wall_since_progress = std::chrono::steady_clock::now();
    } else {
      ++attempts_since_improve;
    }
    const double waited =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_since_progress)
            .count();
    if (attempts_since_improve > config.progress_attempt_cap ||
        (config.progress_window > 0.0 && waited > config.progress_window)) {
      MotionFailure f;
      f.kind = MotionFailure::Kind::guide_path_timeout;
      f.area_id = area.id;
      f.time_point = latest_solved_goal;
      f.traverses_done = traverses_ending_before(timeline, f.time_point);
      return f;
    }
  }
}

}  // namespace

MotionOutcome plan_motions(const Timeline& timeline, const MotionConfig& config) {
  MotionOutcome out;
  out.areas = identify_problem_areas(timeline, config.sampling_cap_base, &out.core_conflict,
                                     &out.diag);
  if (out.core_conflict) {
    out.success = false;
    return out;
  }

  Rng rng(config.seed);
  for (const ProblemArea& area : out.areas) {
    out.diag.areas.emplace_back();
    AreaDiag& adiag = out.diag.areas.back();
    auto solved = solve_problem_area(timeline, area, config, rng, &adiag, &out.diag);
    if (std::holds_alternative<MotionFailure>(solved)) {
      out.failure = std::get<MotionFailure>(solved);
      out.success = false;
      return out;
    }
    out.solutions.push_back(std::get<AreaSolution>(solved));
  }
  out.success = true;
  return out;
}

}  // namespace cellplan

#include "st_plan.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "cellplan/errors.hpp"

namespace cellplan::detail {

SectionContext SectionContext::make(const Timeline& timeline, double t0, double t1,
                                    const std::vector<int>& robot_ids, MotionDiag* diag) {
  SectionContext ctx;
  ctx.timeline = &timeline;
  ctx.t0 = t0;
  ctx.t1 = t1;
  ctx.robot_ids = robot_ids;
  ctx.diag = diag;
  for (int rid : robot_ids) {
    ctx.robots.push_back(&timeline.model().scenario->robot(rid));
    ctx.dof_offset.push_back(ctx.total_dof);
    ctx.total_dof += ctx.robots.back()->dof();
  }
  return ctx;
}

bool SectionContext::state_valid(const std::vector<double>& q, double t) const {
  std::map<int, std::vector<double>> cfg;
  for (std::size_t i = 0; i < robot_ids.size(); ++i) {
    const auto begin = q.begin() + dof_offset[i];
    cfg[robot_ids[i]] = std::vector<double>(begin, begin + robots[i]->dof());
    if (!robots[i]->within_limits(cfg[robot_ids[i]])) return false;
  }
  const WorldState state = timeline->world_at(t, cfg);
  if (diag) ++diag->state_checks;
  return collision_check(state, timeline->model().scenario->robots,
                         timeline->model().scenario->objects)
      .empty();
}

bool SectionContext::displacement_ok(const std::vector<double>& qa,
                                     const std::vector<double>& qb, double dt) const {
  if (dt < -1e-12) return false;
  for (std::size_t i = 0; i < robot_ids.size(); ++i) {
    const auto radius = max_displacement(std::max(dt, 0.0), *robots[i]);
    for (int j = 0; j < robots[i]->dof(); ++j) {
      const double d = std::abs(qb[static_cast<std::size_t>(dof_offset[i] + j)] -
                                qa[static_cast<std::size_t>(dof_offset[i] + j)]);
      if (d > radius[static_cast<std::size_t>(j)] + 1e-9) return false;
    }
  }
  return true;
}

bool SectionContext::edge_valid(const SpaceTimeWaypoint& a, const SpaceTimeWaypoint& b) const {
  if (b.t < a.t - 1e-12) return false;  // backwards in time
  if (!displacement_ok(a.q, b.q, b.t - a.t)) return false;
  const double dt = timeline->dt_traj();
  const int steps = std::max(1, static_cast<int>(std::ceil((b.t - a.t) / dt - 1e-9)));
  std::vector<double> q(a.q.size());
  for (int s = 0; s <= steps; ++s) {
    const double u = static_cast<double>(s) / steps;
    const double t = a.t + u * (b.t - a.t);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] = a.q[j] + u * (b.q[j] - a.q[j]);
    if (!state_valid(q, t)) return false;
  }
  return true;
}

namespace {

double config_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

// Per-joint interval reachable both forwards from the start and
// backwards from the goal at time t; empty when the diamond closes.
bool diamond_interval(const SectionContext& ctx, const std::vector<double>& qs,
                      const std::vector<double>& qg, double t, std::size_t dim, double* lo,
                      double* hi) {
  // Map dim to robot and joint.
  std::size_t robot_pos = 0;
  while (robot_pos + 1 < ctx.dof_offset.size() &&
         static_cast<std::size_t>(ctx.dof_offset[robot_pos + 1]) <= dim)
    ++robot_pos;
  const Robot& robot = *ctx.robots[robot_pos];
  const int j = static_cast<int>(dim) - ctx.dof_offset[robot_pos];
  const double fwd =
      max_displacement_1d(t - ctx.t0, robot.v_max[static_cast<std::size_t>(j)],
                          robot.a_max[static_cast<std::size_t>(j)]);
  const double bwd =
      max_displacement_1d(ctx.t1 - t, robot.v_max[static_cast<std::size_t>(j)],
                          robot.a_max[static_cast<std::size_t>(j)]);
  *lo = std::max({qs[dim] - fwd, qg[dim] - bwd,
                  robot.joint_limits[static_cast<std::size_t>(j)].first});
  *hi = std::min({qs[dim] + fwd, qg[dim] + bwd,
                  robot.joint_limits[static_cast<std::size_t>(j)].second});
  return *lo <= *hi + 1e-12;
}

struct StNode {
  SpaceTimeWaypoint wp;
  int parent = -1;
};

std::optional<SpaceTimePath> plan_prm(const SectionContext& ctx,
                                      const std::vector<double>& q_start,
                                      const std::vector<double>& q_goal, int iteration_cap,
                                      double time_limit, Rng& rng) {
  const SpaceTimeWaypoint start{ctx.t0, q_start};
  const SpaceTimeWaypoint goal{ctx.t1, q_goal};
  if (ctx.edge_valid(start, goal)) return SpaceTimePath{ctx.robot_ids, {start, goal}};

  const auto wall0 = std::chrono::steady_clock::now();
  std::vector<SpaceTimeWaypoint> nodes{start, goal};

  // Hold candidates: wait at the start or arrive early and wait at the
  // goal; these express the pass-by maneuvers the decomposition needs.
  const double span = ctx.t1 - ctx.t0;
  for (int k = 1; k <= 7; ++k) {
    const double t = ctx.t0 + span * k / 8.0;
    for (const auto& q : {q_start, q_goal}) {
      if (ctx.state_valid(q, t)) nodes.push_back({t, q});
    }
  }

  int drawn = 0;
  const int batch = 48;
  while (drawn < iteration_cap) {
    if (time_limit > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count() >
            time_limit)
      return std::nullopt;
    for (int b = 0; b < batch && drawn < iteration_cap; ++b, ++drawn) {
      const double t = rng.uniform(ctx.t0, ctx.t1);
      std::vector<double> q(static_cast<std::size_t>(ctx.total_dof));
      bool ok = true;
      for (std::size_t dim = 0; dim < q.size(); ++dim) {
        double lo, hi;
        if (!diamond_interval(ctx, q_start, q_goal, t, dim, &lo, &hi)) {
          ok = false;
          break;
        }
        q[dim] = rng.uniform(lo, hi);
      }
      if (ok && ctx.state_valid(q, t)) nodes.push_back({t, std::move(q)});
    }

    // k-nearest forward connections, then Dijkstra by C-space length.
    const std::size_t n = nodes.size();
    const std::size_t k_nn = 12;
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::pair<double, int>> fwd;
      for (std::size_t m = 0; m < n; ++m) {
        if (m == i || nodes[m].t <= nodes[i].t + 1e-12) continue;
        if (!ctx.displacement_ok(nodes[i].q, nodes[m].q, nodes[m].t - nodes[i].t)) continue;
        fwd.push_back({config_distance(nodes[i].q, nodes[m].q) +
                           0.01 * (nodes[m].t - nodes[i].t),
                       static_cast<int>(m)});
      }
      const std::size_t k = std::min(k_nn, fwd.size());
      std::partial_sort(fwd.begin(), fwd.begin() + static_cast<std::ptrdiff_t>(k), fwd.end());
      for (std::size_t m = 0; m < k; ++m) adj[i].push_back({fwd[m].second, fwd[m].first});
    }

    // Lazy edge validation inside Dijkstra keeps collision checks on the
    // promising edges only.
    std::vector<double> dist(n, 1e18);
    std::vector<int> prev(n, -1);
    std::vector<std::map<int, bool>> checked(n);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[0] = 0.0;
    pq.push({0.0, 0});
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[static_cast<std::size_t>(u)] + 1e-12) continue;
      if (u == 1) break;
      for (auto [v, w] : adj[static_cast<std::size_t>(u)]) {
        if (dist[static_cast<std::size_t>(u)] + w >= dist[static_cast<std::size_t>(v)] - 1e-12)
          continue;
        auto& cache = checked[static_cast<std::size_t>(u)];
        auto it = cache.find(v);
        if (it == cache.end())
          it = cache.insert({v, ctx.edge_valid(nodes[static_cast<std::size_t>(u)],
                                               nodes[static_cast<std::size_t>(v)])})
                   .first;
        if (!it->second) continue;
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + w;
        prev[static_cast<std::size_t>(v)] = u;
        pq.push({dist[static_cast<std::size_t>(v)], v});
      }
    }
    if (dist[1] < 1e17) {
      std::vector<SpaceTimeWaypoint> wps;
      for (int v = 1; v != -1; v = prev[static_cast<std::size_t>(v)])
        wps.push_back(nodes[static_cast<std::size_t>(v)]);
      std::reverse(wps.begin(), wps.end());
      return SpaceTimePath{ctx.robot_ids, std::move(wps)};
    }
  }
  return std::nullopt;
}

std::optional<SpaceTimePath> plan_rrt_connect(const SectionContext& ctx,
                                              const std::vector<double>& q_start,
                                              const std::vector<double>& q_goal,
                                              int iteration_cap, double time_limit, Rng& rng) {
  const SpaceTimeWaypoint start{ctx.t0, q_start};
  const SpaceTimeWaypoint goal{ctx.t1, q_goal};
  if (ctx.edge_valid(start, goal)) return SpaceTimePath{ctx.robot_ids, {start, goal}};

  const auto wall0 = std::chrono::steady_clock::now();
  std::vector<StNode> fwd{{start, -1}};  // time grows
  std::vector<StNode> bwd{{goal, -1}};   // time shrinks

  const double max_step_dt = std::max((ctx.t1 - ctx.t0) / 10.0, 2.0 * ctx.timeline->dt_traj());

  auto steer = [&](const SpaceTimeWaypoint& from, const SpaceTimeWaypoint& to, bool forward) {
    SpaceTimeWaypoint out;
    const double dir = forward ? 1.0 : -1.0;
    const double dt = std::min(std::abs(to.t - from.t), max_step_dt);
    out.t = from.t + dir * dt;
    out.q.resize(from.q.size());
    for (std::size_t i = 0; i < ctx.robot_ids.size(); ++i) {
      const auto radius = max_displacement(dt, *ctx.robots[i]);
      for (int j = 0; j < ctx.robots[i]->dof(); ++j) {
        const std::size_t dim = static_cast<std::size_t>(ctx.dof_offset[i] + j);
        const double want = to.q[dim] - from.q[dim];
        const double cap = 0.95 * radius[static_cast<std::size_t>(j)];
        out.q[dim] = from.q[dim] + std::clamp(want, -cap, cap);
      }
    }
    return out;
  };

  auto nearest = [&](const std::vector<StNode>& tree, const SpaceTimeWaypoint& target,
                     bool forward) {
    int best = -1;
    double best_d = 1e18;
    for (std::size_t i = 0; i < tree.size(); ++i) {
      const double dt = forward ? target.t - tree[i].wp.t : tree[i].wp.t - target.t;
      if (dt <= 1e-12) continue;
      const double d = config_distance(tree[i].wp.q, target.q) + 0.05 * dt;
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  };

  auto trace = [&](const std::vector<StNode>& tree, int idx) {
    std::vector<SpaceTimeWaypoint> wps;
    for (int v = idx; v != -1; v = tree[static_cast<std::size_t>(v)].parent)
      wps.push_back(tree[static_cast<std::size_t>(v)].wp);
    return wps;
  };

  for (int it = 0; it < iteration_cap; ++it) {
    if (time_limit > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count() >
            time_limit)
      return std::nullopt;

    const double t = rng.uniform(ctx.t0, ctx.t1);
    SpaceTimeWaypoint sample;
    sample.t = t;
    sample.q.resize(static_cast<std::size_t>(ctx.total_dof));
    bool ok = true;
    for (std::size_t dim = 0; dim < sample.q.size(); ++dim) {
      double lo, hi;
      if (!diamond_interval(ctx, q_start, q_goal, t, dim, &lo, &hi)) {
        ok = false;
        break;
      }
      sample.q[dim] = rng.uniform(lo, hi);
    }
    if (!ok) continue;

    const bool forward_turn = (it % 2) == 0;
    auto& tree = forward_turn ? fwd : bwd;
    auto& other = forward_turn ? bwd : fwd;

    const int near = nearest(tree, sample, forward_turn);
    if (near < 0) continue;
    SpaceTimeWaypoint fresh = steer(tree[static_cast<std::size_t>(near)].wp, sample,
                                    forward_turn);
    const SpaceTimeWaypoint& a =
        forward_turn ? tree[static_cast<std::size_t>(near)].wp : fresh;
    const SpaceTimeWaypoint& b =
        forward_turn ? fresh : tree[static_cast<std::size_t>(near)].wp;
    if (!ctx.edge_valid(a, b)) continue;
    tree.push_back({fresh, near});

    // Connect attempt toward the other tree.
    const int link = nearest(other, fresh, !forward_turn);
    if (link < 0) continue;
    const SpaceTimeWaypoint& ow = other[static_cast<std::size_t>(link)].wp;
    const SpaceTimeWaypoint& lo_wp = forward_turn ? fresh : ow;
    const SpaceTimeWaypoint& hi_wp = forward_turn ? ow : fresh;
    if (lo_wp.t >= hi_wp.t - 1e-12) continue;
    if (!ctx.edge_valid(lo_wp, hi_wp)) continue;

    auto fwd_part = trace(forward_turn ? tree : other,
                          forward_turn ? static_cast<int>(tree.size()) - 1 : link);
    std::reverse(fwd_part.begin(), fwd_part.end());
    auto bwd_part = trace(forward_turn ? other : tree,
                          forward_turn ? link : static_cast<int>(tree.size()) - 1);
    fwd_part.insert(fwd_part.end(), bwd_part.begin(), bwd_part.end());
    return SpaceTimePath{ctx.robot_ids, std::move(fwd_part)};
  }
  return std::nullopt;
}

}  // namespace

std::optional<SpaceTimePath> solve_section(const SectionContext& ctx,
                                           const std::vector<double>& q_start,
                                           const std::vector<double>& q_goal, StPlanner planner,
                                           int iteration_cap, double time_limit, Rng& rng) {
  if (!ctx.displacement_ok(q_start, q_goal, ctx.t1 - ctx.t0)) return std::nullopt;
  if (planner == StPlanner::st_prm)
    return plan_prm(ctx, q_start, q_goal, iteration_cap, time_limit, rng);
  return plan_rrt_connect(ctx, q_start, q_goal, iteration_cap, time_limit, rng);
}

}  // namespace cellplan::detail

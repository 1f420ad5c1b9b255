#include <algorithm>
#include <cmath>

#include "cellplan/errors.hpp"
#include "st_plan.hpp"

namespace cellplan::detail {

namespace {

bool edges_valid(const SectionContext& ctx, const std::vector<SpaceTimeWaypoint>& wps) {
  for (std::size_t i = 0; i + 1 < wps.size(); ++i)
    if (!ctx.edge_valid(wps[i], wps[i + 1])) return false;
  return true;
}

double arc_length_of(const std::vector<SpaceTimeWaypoint>& wps) {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < wps.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < wps[i].q.size(); ++j) {
      const double d = wps[i + 1].q[j] - wps[i].q[j];
      s += d * d;
    }
    len += std::sqrt(s);
  }
  return len;
}

// Replaces the sub-path between two random waypoints by a straight
// space-time segment when feasible.
void shortcut(std::vector<SpaceTimeWaypoint>& wps, const SectionContext& ctx, int rounds,
              Rng& rng) {
  for (int r = 0; r < rounds && wps.size() > 2; ++r) {
    const std::size_t i = rng.uniform_index(wps.size() - 2);
    const std::size_t k = i + 2 + rng.uniform_index(wps.size() - i - 2);
    if (k >= wps.size()) continue;
    if (ctx.edge_valid(wps[i], wps[k]))
      wps.erase(wps.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                wps.begin() + static_cast<std::ptrdiff_t>(k));
  }
}

// Chamfers an interior corner: the waypoint is replaced by points half
// way along its adjacent segments.
void corner_cut(std::vector<SpaceTimeWaypoint>& wps, const SectionContext& ctx, int rounds,
                Rng& rng) {
  for (int r = 0; r < rounds; ++r) {
    if (wps.size() < 3) return;
    const std::size_t i = 1 + rng.uniform_index(wps.size() - 2);
    SpaceTimeWaypoint p1, p2;
    p1.t = 0.5 * (wps[i - 1].t + wps[i].t);
    p2.t = 0.5 * (wps[i].t + wps[i + 1].t);
    p1.q.resize(wps[i].q.size());
    p2.q.resize(wps[i].q.size());
    for (std::size_t j = 0; j < wps[i].q.size(); ++j) {
      p1.q[j] = 0.5 * (wps[i - 1].q[j] + wps[i].q[j]);
      p2.q[j] = 0.5 * (wps[i].q[j] + wps[i + 1].q[j]);
    }
    // Halving a rest-to-rest segment can break the displacement bound,
    // so the adjacent sub-segments are re-validated too.
    if (ctx.edge_valid(wps[i - 1], p1) && ctx.edge_valid(p1, p2) &&
        ctx.edge_valid(p2, wps[i + 1])) {
      wps[i] = p1;
      wps.insert(wps.begin() + static_cast<std::ptrdiff_t>(i) + 1, p2);
    }
  }
}

// Shortcut restricted to one robot's joints; the other robots keep their
// interpolated motion.
void partial_shortcut(std::vector<SpaceTimeWaypoint>& wps, const SectionContext& ctx,
                      int rounds, Rng& rng) {
  if (ctx.robot_ids.size() < 1) return;
  for (int r = 0; r < rounds && wps.size() > 2; ++r) {
    const std::size_t robot = rng.uniform_index(ctx.robot_ids.size());
    const std::size_t lo = static_cast<std::size_t>(ctx.dof_offset[robot]);
    const std::size_t hi = lo + static_cast<std::size_t>(ctx.robots[robot]->dof());
    const std::size_t i = rng.uniform_index(wps.size() - 2);
    const std::size_t k = i + 2 + rng.uniform_index(wps.size() - i - 2);
    if (k >= wps.size()) continue;

    std::vector<SpaceTimeWaypoint> cand(wps.begin() + static_cast<std::ptrdiff_t>(i),
                                        wps.begin() + static_cast<std::ptrdiff_t>(k) + 1);
    const double t_span = wps[k].t - wps[i].t;
    if (t_span <= 1e-12) continue;
    for (std::size_t m = 1; m + 1 < cand.size(); ++m) {
      const double u = (cand[m].t - wps[i].t) / t_span;
      for (std::size_t j = lo; j < hi; ++j)
        cand[m].q[j] = wps[i].q[j] + u * (wps[k].q[j] - wps[i].q[j]);
    }
    if (arc_length_of(cand) < arc_length_of({wps.begin() + static_cast<std::ptrdiff_t>(i),
                                             wps.begin() + static_cast<std::ptrdiff_t>(k) + 1}) -
                                  1e-12 &&
        edges_valid(ctx, cand)) {
      std::copy(cand.begin(), cand.end(), wps.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
}

// Moving average over the waypoint list (window 5, endpoints pinned);
// the candidate is discarded unless it validates and does not grow.
void smooth(std::vector<SpaceTimeWaypoint>& wps, const SectionContext& ctx) {
  if (wps.size() < 5) return;
  std::vector<SpaceTimeWaypoint> cand = wps;
  for (std::size_t i = 2; i + 2 < wps.size(); ++i) {
    for (std::size_t j = 0; j < wps[i].q.size(); ++j) {
      double acc = 0.0;
      for (std::size_t w = i - 2; w <= i + 2; ++w) acc += wps[w].q[j];
      cand[i].q[j] = acc / 5.0;
    }
  }
  if (arc_length_of(cand) <= arc_length_of(wps) + 1e-12 && edges_valid(ctx, cand)) wps = cand;
}

}  // namespace

void postprocess_path(SpaceTimePath& path, const SectionContext& ctx, int rounds, Rng& rng) {
  if (path.waypoints.size() < 3 || path.robot_ids.empty()) return;
  const double before = path.arc_length();
  shortcut(path.waypoints, ctx, rounds, rng);
  corner_cut(path.waypoints, ctx, rounds / 2, rng);
  partial_shortcut(path.waypoints, ctx, rounds, rng);
  smooth(path.waypoints, ctx);
  // Post-processing must never lengthen the path.
  if (path.arc_length() > before + 1e-9)
    throw Error("postprocess: arc length increased");
}

}  // namespace cellplan::detail

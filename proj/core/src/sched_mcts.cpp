#include "cellplan/sched_mcts.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "cellplan/errors.hpp"

namespace cellplan {

double result_value(double duration, bool has_collision, int n_free, int n_total,
                    const Bounds& bounds, const ResultWeights& w, bool extended,
                    int guide_progress, int roadmap_progress) {
  const double l1n = w.free_ops * n_total;
  double denom = bounds.max_duration - bounds.min_duration + l1n;
  if (extended) denom += w.guide_feedback * n_total + w.roadmap_feedback * n_total;
  if (has_collision) return w.free_ops * n_free / denom;
  if (duration > bounds.max_duration) return 0.0;
  double num = bounds.max_duration - duration + l1n;
  if (extended) num += w.guide_feedback * guide_progress + w.roadmap_feedback * roadmap_progress;
  return num / denom;
}

double uct_score(double child_value, int parent_visits, int child_visits, double exploration) {
  return child_value +
         exploration * std::sqrt(std::log(static_cast<double>(parent_visits)) /
                                 static_cast<double>(child_visits));
}

namespace {

struct Node {
  int depth = 0;       // number of operations scheduled on the path to here
  int action = -1;     // start step chosen at the parent
  int visits = 0;
  double value = 0.0;  // mean (MCTS) or max (MCTS-G) of backpropagated values
  bool terminal = false;
  double terminal_value = 0.0;
  bool untried_init = false;
  std::vector<int> untried;
  std::vector<int> children;  // arena indices
};

struct Search {
  const SchedulingModel& model;
  const Bounds& bounds;
  const ResultWeights& weights;
  const MctsConfig& config;
  const FeedbackMap* feedback;
  Rng rng;
  std::deque<Node> arena;
  MctsStats stats;

  Schedule best{{}, 0.2};
  bool has_best = false;
  double best_duration = std::numeric_limits<double>::infinity();

  Search(const SchedulingModel& m, const Bounds& b, const ResultWeights& w,
         const MctsConfig& c, const FeedbackMap* f)
      : model(m), bounds(b), weights(w), config(c), feedback(f), rng(c.seed) {
    arena.push_back(Node{});
    best.dt = m.dt;
  }

  int op_at(int depth) const { return model.topo_order[static_cast<std::size_t>(depth)]; }

  bool collides_with_scheduled(const std::vector<int>& starts, int depth, int core,
                               int step) const {
    for (int k = 0; k < depth; ++k) {
      const int other = op_at(k);
      if (cores_collide(model, core, step, other, starts[static_cast<std::size_t>(other)]))
        return true;
    }
    return false;
  }

  void ensure_untried(Node& node, const std::vector<int>& starts) {
    if (node.untried_init) return;
    node.untried_init = true;
    if (node.depth >= model.num_cores) return;
    const StepInterval iv =
        scheduling_interval(op_at(node.depth), starts, model, bounds);
    for (int s = iv.earliest; s <= iv.latest; ++s) node.untried.push_back(s);
    if (node.untried.empty()) {
      node.terminal = true;
      node.terminal_value =
          result_value(0.0, true, node.depth, model.num_cores, bounds, weights,
                       feedback != nullptr, 0, 0);
    }
  }

  double complete_value(const std::vector<int>& starts) {
    Schedule s{starts, model.dt};
    const double d = eval_duration(s, model);
    ++stats.complete_playouts;
    int guide = 0, roadmap = 0;
    if (feedback) {
      auto it = feedback->entries.find(starts);
      if (it != feedback->entries.end()) {
        guide = it->second.first;
        roadmap = it->second.second;
      }
    }
    if (d <= bounds.max_duration + 1e-9) {
      ++stats.feasible_count;
      // Schedules already known to fail motion planning are not
      // proposed again.
      const bool known_failure = feedback && feedback->entries.count(starts) > 0;
      if (!known_failure && d < best_duration) {
        best_duration = d;
        best = s;
        has_best = true;
      }
    }
    return result_value(d, false, model.num_cores, model.num_cores, bounds, weights,
                        feedback != nullptr, guide, roadmap);
  }

  // Completes the schedule from `depth` using the light or heavy policy.
  // Returns the playout value and appends chosen actions to `actions`.
  double playout(std::vector<int>& starts, int depth, std::vector<int>& actions,
                 std::optional<int> forced_first) {
    const bool light = rng.uniform() < config.light_fraction;
    for (int k = depth; k < model.num_cores; ++k) {
      const int core = op_at(k);
      const StepInterval iv = scheduling_interval(core, starts, model, bounds);
      if (iv.empty())
        return result_value(0.0, true, k, model.num_cores, bounds, weights,
                            feedback != nullptr, 0, 0);
      std::vector<int> interval(static_cast<std::size_t>(iv.size()));
      for (int i = 0; i < iv.size(); ++i)
        interval[static_cast<std::size_t>(i)] = iv.earliest + i;

      int chosen;
      if (k == depth && forced_first) {
        chosen = *forced_first;
      } else if (light) {
        chosen = interval[rng.uniform_index(interval.size())];
        if (collides_with_scheduled(starts, k, core, chosen))
          return result_value(0.0, true, k, model.num_cores, bounds, weights,
                              feedback != nullptr, 0, 0);
      } else {
        // Heavy playout: the sampling heuristic's draw with collision
        // re-draws over the shrinking interval.
        auto redraw = [&]() {
          std::vector<double> w(interval.size());
          for (std::size_t i = 0; i < interval.size(); ++i)
            w[i] = start_step_weight(interval[i] - interval.front(),
                                     config.heavy_distribution);
          return interval[rng.weighted_index(w)];
        };
        chosen = redraw();
        while (collides_with_scheduled(starts, k, core, chosen)) {
          interval.erase(std::find(interval.begin(), interval.end(), chosen));
          if (interval.empty())
            return result_value(0.0, true, k, model.num_cores, bounds, weights,
                                feedback != nullptr, 0, 0);
          chosen = redraw();
        }
      }
      starts[static_cast<std::size_t>(core)] = chosen;
      actions.push_back(chosen);
    }
    return complete_value(starts);
  }

  int add_child(int parent_idx, int action, const std::vector<int>& starts) {
    Node child;
    child.depth = arena[static_cast<std::size_t>(parent_idx)].depth + 1;
    child.action = action;
    const int core = op_at(child.depth - 1);
    if (collides_with_scheduled(starts, child.depth - 1, core, action)) {
      child.terminal = true;
      child.terminal_value = result_value(0.0, true, child.depth - 1, model.num_cores, bounds,
                                          weights, feedback != nullptr, 0, 0);
    }
    arena.push_back(std::move(child));
    const int idx = static_cast<int>(arena.size()) - 1;
    arena[static_cast<std::size_t>(parent_idx)].children.push_back(idx);
    return idx;
  }

  int select_uct(const Node& node) const {
    int best_child = node.children.front();
    double best_score = -1.0;
    for (int c : node.children) {
      const Node& ch = arena[static_cast<std::size_t>(c)];
      const double score = uct_score(ch.value, node.visits, ch.visits, config.exploration);
      if (score > best_score) {
        best_score = score;
        best_child = c;
      }
    }
    return best_child;
  }

  void backprop(std::vector<int>& path, double value) {
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      Node& node = arena[static_cast<std::size_t>(*it)];
      node.visits += 1;
      if (config.greedy)
        node.value = node.visits == 1 ? value : std::max(node.value, value);
      else
        node.value += (value - node.value) / node.visits;
    }
  }

  void iterate() {
    std::vector<int> starts(static_cast<std::size_t>(model.num_cores), kUnscheduled);
    std::vector<int> path{0};
    int cur = 0;

    // Selection.
    while (true) {
      Node& node = arena[static_cast<std::size_t>(cur)];
      if (node.terminal || node.depth >= model.num_cores) break;
      ensure_untried(node, starts);
      if (node.terminal) break;
      if (node.children.empty()) break;
      if (!node.untried.empty()) {
        if (!config.greedy) break;  // classic MCTS expands here
        if (rng.uniform() < config.greedy_stop_prob) break;
      }
      cur = select_uct(node);
      const Node& chosen = arena[static_cast<std::size_t>(cur)];
      starts[static_cast<std::size_t>(op_at(chosen.depth - 1))] = chosen.action;
      path.push_back(cur);
    }

    Node* node = &arena[static_cast<std::size_t>(cur)];
    double value;
    if (node->terminal) {
      value = node->terminal_value;
    } else if (node->depth >= model.num_cores) {
      value = complete_value(starts);
    } else {
      // Diversion step: take an unexplored edge when one exists.
      std::optional<int> forced;
      if (!node->untried.empty()) {
        const std::size_t pick = rng.uniform_index(node->untried.size());
        forced = node->untried[pick];
      }

      if (!config.greedy) {
        // Expand a single child, then play out below it.
        if (forced && arena.size() < config.node_cap) {
          node->untried.erase(
              std::find(node->untried.begin(), node->untried.end(), *forced));
          const int child_idx = add_child(cur, *forced, starts);
          Node& child = arena[static_cast<std::size_t>(child_idx)];
          path.push_back(child_idx);
          starts[static_cast<std::size_t>(op_at(child.depth - 1))] = *forced;
          if (child.terminal) {
            value = child.terminal_value;
          } else if (child.depth >= model.num_cores) {
            value = complete_value(starts);
          } else {
            std::vector<int> actions;
            value = playout(starts, child.depth, actions, std::nullopt);
          }
        } else {
          std::vector<int> actions;
          value = playout(starts, node->depth, actions, forced);
        }
      } else {
        // MCTS-G: play out, then graft the whole playout path.
        if (forced)
          node->untried.erase(
              std::find(node->untried.begin(), node->untried.end(), *forced));
        std::vector<int> actions;
        const int depth0 = node->depth;
        value = playout(starts, depth0, actions, forced);
        int parent = cur;
        for (int action : actions) {
          if (arena.size() >= config.node_cap) break;
          // Re-grafting an already expanded edge would duplicate it.
          int existing = -1;
          for (int c : arena[static_cast<std::size_t>(parent)].children)
            if (arena[static_cast<std::size_t>(c)].action == action) existing = c;
          const int idx = existing >= 0 ? existing : add_child(parent, action, starts);
          auto& untried = arena[static_cast<std::size_t>(parent)].untried;
          if (auto it = std::find(untried.begin(), untried.end(), action);
              it != untried.end())
            untried.erase(it);
          path.push_back(idx);
          parent = idx;
        }
      }
    }
    backprop(path, value);
  }
};

}  // namespace

MctsResult run_mcts(const SchedulingModel& model, const Bounds& bounds,
                    const ResultWeights& weights, const MctsConfig& config,
                    const FeedbackMap* feedback) {
  Search search(model, bounds, weights, config, feedback);
  for (int it = 0; it < config.iterations; ++it) search.iterate();

  MctsResult result;
  result.stats = search.stats;
  result.stats.iterations = config.iterations;
  result.stats.nodes = search.arena.size();
  result.stats.root_visits = search.arena.front().visits;
  result.feasible = search.has_best;
  if (search.has_best) {
    result.best = search.best;
    result.best_duration = search.best_duration;
  } else {
    result.best = Schedule{std::vector<int>(static_cast<std::size_t>(model.num_cores), 0),
                           model.dt};
    result.best_duration = std::numeric_limits<double>::infinity();
  }
  return result;
}

}  // namespace cellplan

#pragma once

#include <cstdint>

#include "cellplan/sched_gradfree.hpp"
#include "cellplan/schedule.hpp"

namespace cellplan {

struct ResultWeights {
  double free_ops = 0.01;          // lambda1
  double guide_feedback = 1.0;     // lambda2
  double roadmap_feedback = 0.1;   // lambda3
};

// Normalized result value in [0, 1]: the collision case rewards the
// number of collision-free scheduled operations, the overrun case is 0,
// the default case decreases with the assembly duration. When `extended`
// the feedback terms enter numerator and denominator.
double result_value(double duration, bool has_collision, int n_free, int n_total,
                    const Bounds& bounds, const ResultWeights& w, bool extended = false,
                    int guide_progress = 0, int roadmap_progress = 0);

double uct_score(double child_value, int parent_visits, int child_visits,
                 double exploration);

struct MctsConfig {
  double exploration = 1.4142135623730951;  // UCT constant, sqrt(2)
  double light_fraction = 0.1;              // probability of a random light playout
  bool greedy = false;                      // MCTS-G behaviour
  double greedy_stop_prob = 0.1;            // selection stop probability at expandable nodes
  std::uint64_t seed = 1;
  int iterations = 2000;
  std::size_t node_cap = 1000000;
  StartDistribution heavy_distribution = StartDistribution::quadratic;
};

struct MctsStats {
  int iterations = 0;
  std::size_t nodes = 0;
  int root_visits = 0;
  int complete_playouts = 0;
  int feasible_count = 0;
};

struct MctsResult {
  Schedule best;
  bool feasible = false;
  double best_duration = 0.0;
  MctsStats stats;
};

MctsResult run_mcts(const SchedulingModel& model, const Bounds& bounds,
                    const ResultWeights& weights, const MctsConfig& config,
                    const FeedbackMap* feedback = nullptr);

inline MctsResult run_mcts_g(const SchedulingModel& model, const Bounds& bounds,
                             const ResultWeights& weights, MctsConfig config,
                             const FeedbackMap* feedback = nullptr) {
  config.greedy = true;
  return run_mcts(model, bounds, weights, config, feedback);
}

}  // namespace cellplan

#pragma once

#include <cstdint>
#include <map>

#include "cellplan/sched_sampling.hpp"
#include "cellplan/schedule.hpp"

namespace cellplan {

struct PenaltyWeights {
  double collision = 30.0;          // mu1, squares the collision count
  double overrun = 900.0;           // mu2, squares the horizon overrun
  double guide_feedback = 10.0;     // mu3, rewards late guide-path failures
  double roadmap_feedback = 1.0;    // mu4, rewards late roadmap failures
};

// Motion-planning failure magnitudes, keyed by the exact schedule that
// failed (no generalization to neighbours).
struct FeedbackMap {
  std::map<std::vector<int>, std::pair<int, int>> entries;  // starts -> (guide, roadmap)

  void record(const Schedule& s, int guide_progress, int roadmap_progress) {
    entries[s.start_steps] = {guide_progress, roadmap_progress};
  }
  bool contains(const Schedule& s) const { return entries.count(s.start_steps) > 0; }
};

// d + mu1 c^2 + mu2 max(0, d - d_max)^2, minus the feedback terms when
// this exact schedule is known to have failed motion planning.
double penalty_objective(const Schedule& s, const SchedulingModel& model, const Bounds& bounds,
                         const PenaltyWeights& w, const FeedbackMap* feedback = nullptr);

// Topological sweep clamping every start into its scheduling interval
// against the already-clamped predecessors; when the interval is empty
// the upper clamp is dropped and the start lands on the earliest step.
// Output always satisfies the precedence and relaxed-motion constraints.
Schedule project_to_feasible(Schedule s, const SchedulingModel& model, const Bounds& bounds);

enum class InitMode { random, heuristic };

struct SaParams {
  double initial_acceptance = 0.95;  // x0
  double cooling_delta = 0.2;        // delta
  int probe_transitions = 20;        // m0
  int batch_size = 20;               // L, transitions per temperature step
  int max_shift = 5;                 // neighbour offset drawn from {+-1..+-max_shift}
};

struct PsoParams {
  double inertia = 0.9;      // w
  double social = 2.0;       // c_soc
  double cognitive = 1.0;    // c_cog
  int particles = 15;        // N_p
  double v_init_min = -20.0;
  double v_init_max = 20.0;
};

struct EaParams {
  int population = 15;
  int crossover_points = 5;
  int parents = 7;
  int descendants = 14;
  double mutation_fraction = 0.2;
  double mutation_sigma = 3.0;
  int elites = 1;
};

struct OptimizerConfig {
  InitMode init = InitMode::heuristic;
  std::uint64_t seed = 1;
  int iterations = 2000;  // SA transitions / PSO generations / EA generations
  SaParams sa;
  PsoParams pso;
  EaParams ea;
  StartDistribution heuristic_distribution = StartDistribution::quadratic;
};

struct OptResult {
  Schedule best;
  double best_objective = 0.0;
  bool feasible = false;  // c = 0 and d <= d_max was reached
  std::vector<double> trace;  // best-ever objective per iteration
};

OptResult optimize_sa(const SchedulingModel& model, const Bounds& bounds,
                      const PenaltyWeights& w, const OptimizerConfig& config,
                      const FeedbackMap* feedback = nullptr);
OptResult optimize_pso(const SchedulingModel& model, const Bounds& bounds,
                       const PenaltyWeights& w, const OptimizerConfig& config,
                       const FeedbackMap* feedback = nullptr);
OptResult optimize_ea(const SchedulingModel& model, const Bounds& bounds,
                      const PenaltyWeights& w, const OptimizerConfig& config,
                      const FeedbackMap* feedback = nullptr);

}  // namespace cellplan

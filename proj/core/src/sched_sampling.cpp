#include "cellplan/sched_sampling.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "cellplan/errors.hpp"

namespace cellplan {

double start_step_weight(int offset, StartDistribution dist) {
  if (dist == StartDistribution::uniform) return 1.0;
  const double x = static_cast<double>(offset);
  return 1.0 / ((x + 2.0) * (x + 2.0));
}

std::vector<double> selection_probabilities(int size, StartDistribution dist) {
  if (size <= 0) throw Error("selection_probabilities: empty interval");
  std::vector<double> p(static_cast<std::size_t>(size));
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    p[static_cast<std::size_t>(i)] = start_step_weight(i, dist);
    total += p[static_cast<std::size_t>(i)];
  }
  for (double& v : p) v /= total;
  return p;
}

namespace {

// Weighted draw over the surviving steps of a shrinking interval.
// Offsets are re-anchored to the current front, mirroring a fresh
// probability computation after each removal.
int draw_start_step(const std::vector<int>& steps, StartDistribution dist, Rng& rng) {
  std::vector<double> weights(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i)
    weights[i] = start_step_weight(steps[i] - steps.front(), dist);
  return steps[rng.weighted_index(weights)];
}

}  // namespace

Schedule sample_schedule(const SchedulingModel& model, const Bounds& bounds,
                         const SamplingConfig& config, Rng& rng) {
  const int n = model.num_cores;

  for (int attempt = 0; attempt <= config.max_restarts; ++attempt) {
    std::vector<int> starts(static_cast<std::size_t>(n), kUnscheduled);
    std::vector<int> closed;
    bool restart = false;

    while (static_cast<int>(closed.size()) < n && !restart) {
      // Primed: unscheduled with all predecessors scheduled.
      std::vector<int> primed;
      for (int c = 0; c < n; ++c) {
        if (starts[c] != kUnscheduled) continue;
        bool ready = true;
        for (int p : model.plan->cores[c].predecessors)
          if (starts[p] == kUnscheduled) ready = false;
        if (ready) primed.push_back(c);
      }
      const int core = primed[rng.uniform_index(primed.size())];

      const StepInterval iv = scheduling_interval(core, starts, model, bounds);
      if (iv.empty()) {
        restart = true;
        break;
      }
      std::vector<int> interval(static_cast<std::size_t>(iv.size()));
      for (int i = 0; i < iv.size(); ++i) interval[static_cast<std::size_t>(i)] = iv.earliest + i;

      int s = draw_start_step(interval, config.distribution, rng);
      auto collides = [&](int candidate) {
        for (int other : closed)
          if (cores_collide(model, core, candidate, other, starts[other])) return true;
        return false;
      };
      while (collides(s)) {
        interval.erase(std::find(interval.begin(), interval.end(), s));
        if (interval.empty()) {
          restart = true;
          break;
        }
        s = draw_start_step(interval, config.distribution, rng);
      }
      if (restart) break;
      starts[core] = s;
      closed.push_back(core);
    }

    if (!restart) return Schedule{starts, model.dt};
  }
  throw InfeasibleError(
      fmt::format("sampling heuristic: no feasible schedule within {} restarts",
                  config.max_restarts));
}

Schedule sample_schedule(const SchedulingModel& model, const Bounds& bounds,
                         const SamplingConfig& config) {
  Rng rng(config.seed);
  return sample_schedule(model, bounds, config, rng);
}

}  // namespace cellplan

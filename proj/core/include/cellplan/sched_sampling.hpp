#pragma once

#include <cstdint>

#include "cellplan/rng.hpp"
#include "cellplan/schedule.hpp"

namespace cellplan {

enum class StartDistribution { quadratic, uniform };

struct SamplingConfig {
  StartDistribution distribution = StartDistribution::quadratic;
  std::uint64_t seed = 1;
  int max_restarts = 10000;
};

// Unnormalized weight for a start-step offset from the interval front:
// quadratically declining 1/(x+2)^2, or flat.
double start_step_weight(int offset, StartDistribution dist);

// Normalized selection probabilities over an interval of `size` steps.
std::vector<double> selection_probabilities(int size, StartDistribution dist);

// Restart-based sampling heuristic. The returned schedule satisfies the
// precedence and relaxed-motion constraints, has no core-core collisions
// and completes within the horizon. Throws InfeasibleError once
// max_restarts is exhausted.
Schedule sample_schedule(const SchedulingModel& model, const Bounds& bounds,
                         const SamplingConfig& config);

// Same loop driven by an externally owned RNG (used by playout policies).
Schedule sample_schedule(const SchedulingModel& model, const Bounds& bounds,
                         const SamplingConfig& config, Rng& rng);

}  // namespace cellplan

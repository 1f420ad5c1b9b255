#pragma once

#include <string>

#include "cellplan/motion.hpp"

namespace cellplan {

struct CoreWindowInfo {
  int op_id = -1;
  int robot_id = -1;
  int step_id = -1;
  double t0 = 0.0;
  double t1 = 0.0;
};

// Complete executable outcome: one sampled joint trajectory per robot
// over [0, d], plus the metadata the validator needs.
struct Procedure {
  double dt = 0.02;
  double duration = 0.0;
  std::vector<int> robot_ids;
  std::vector<std::vector<std::vector<double>>> samples;  // [robot][sample][joint]
  std::vector<CoreWindowInfo> core_windows;
  std::vector<AbsModeEvent> mode_events;

  struct Provenance {
    std::string scenario;
    std::string method;
    std::uint64_t seed = 0;
    std::string config_hash;
  } provenance;

  std::size_t sample_count() const { return samples.empty() ? 0 : samples.front().size(); }
};

// Stitches core trajectories, committed tentative traverses and solved
// problem-area paths into one timeline per robot. Throws on stitch
// discontinuities beyond 1e-9 rad.
Procedure assemble_procedure(const Timeline& timeline, const MotionOutcome& motion);

}  // namespace cellplan

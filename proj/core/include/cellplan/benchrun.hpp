#pragma once

#include <string>

#include "cellplan/pipeline.hpp"

namespace cellplan {

struct BenchRow {
  std::string scenario;
  std::string method;
  std::uint64_t seed = 0;
  bool success = false;
  double duration = 0.0;
  double d_min = 0.0;
  double baseline_duration = 0.0;
  double improvement = 0.0;  // (baseline - d) / baseline
  int outer_rounds = 0;
  int motion_failures = 0;
  std::uint64_t work_state_checks = 0;
  double wall_motion_s = 0.0;  // informational, not serialized
};

struct BenchSummary {
  std::vector<BenchRow> rows;
  std::string csv;      // deterministic aggregate table
  std::string summary;  // human-readable digest incl. wall-clock quantiles
};

// Runs the (scenario x method x seed) grid described by a manifest:
//   {"scenarios": [...], "methods": [...], "seeds": [...],
//    "budget_s": 120, "iterations": 0, "outer_rounds": 20}
// Scenario paths are resolved relative to the manifest file.
BenchSummary run_bench(const std::string& manifest_path);

}  // namespace cellplan

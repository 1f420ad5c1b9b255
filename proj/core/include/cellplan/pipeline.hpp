#pragma once

#include <optional>
#include <string>

#include "cellplan/baseline.hpp"
#include "cellplan/gantt.hpp"
#include "cellplan/procedure.hpp"
#include "cellplan/sched_gradfree.hpp"
#include "cellplan/sched_mcts.hpp"
#include "cellplan/validate.hpp"

namespace cellplan {

enum class Method { sampling, random_search, sa, pso, ea, mcts, mcts_g };

Method parse_method(const std::string& name);  // throws ParseError on unknown names
std::string method_name(Method m);

struct RunConfig {
  Method method = Method::sampling;
  StartDistribution distribution = StartDistribution::quadratic;
  InitMode init = InitMode::heuristic;
  std::uint64_t seed = 1;
  int scheduler_iterations = 0;  // 0: per-method default
  int sample_batch = 40;         // candidates per round, sampling/random methods
  int outer_rounds = 20;         // motion-feedback loop length
  double budget_s = 0.0;         // wall-clock guard; 0 disables
  std::optional<double> d_max_override;
  double light_fraction = 0.1;   // MCTS playout mix
  PenaltyWeights penalty;
  ResultWeights result_weights;
  MotionConfig motion;

  int resolved_iterations() const;
};

struct RunReport {
  bool success = false;
  std::string scenario;
  std::string method;
  std::uint64_t seed = 0;
  double duration = 0.0;  // achieved d
  double d_min = 0.0;
  double d_max = 0.0;
  int outer_rounds_used = 0;
  int motion_failures = 0;
  bool validator_ok = false;
  std::uint64_t work_state_checks = 0;  // deterministic work unit
  // Wall-clock phase timings; informational only, never serialized into
  // artifacts (artifacts are byte-deterministic).
  double wall_schedule_s = 0.0;
  double wall_motion_s = 0.0;
  double wall_validate_s = 0.0;
};

struct RunOutcome {
  RunReport report;
  Bounds bounds;
  std::optional<Schedule> schedule;
  std::optional<Procedure> procedure;
  std::vector<ProblemArea> last_areas;
  MotionDiag diag;
  FeedbackMap feedback;
  std::vector<std::string> notes;
};

// Full pipeline: bounds -> scheduler (with motion-planning feedback on
// failures) -> motion planning -> assembly -> validation.
RunOutcome run_pipeline(const Scenario& scenario, const TaskPlan& plan,
                        const RunConfig& config);

// Serialized run report (deterministic fields only).
std::string report_to_json(const RunReport& report);

// Writes schedule/procedure/trajectory/gantt/diagnostics/report files
// into `out_dir` (created if needed). Returns the written file names.
std::vector<std::string> write_run_artifacts(const RunOutcome& outcome,
                                             const SchedulingModel& model,
                                             const std::string& out_dir);

}  // namespace cellplan

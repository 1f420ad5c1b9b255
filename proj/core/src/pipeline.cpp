#include "cellplan/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fmt/format.h>

#include "cellplan/artifacts.hpp"
#include "cellplan/errors.hpp"

#include <json.hpp>

namespace cellplan {

Method parse_method(const std::string& name) {
  if (name == "sampling") return Method::sampling;
  if (name == "random") return Method::random_search;
  if (name == "sa") return Method::sa;
  if (name == "pso") return Method::pso;
  if (name == "ea") return Method::ea;
  if (name == "mcts") return Method::mcts;
  if (name == "mcts-g") return Method::mcts_g;
  throw ParseError(fmt::format("unknown method '{}'", name));
}

std::string method_name(Method m) {
  switch (m) {
    case Method::sampling: return "sampling";
    case Method::random_search: return "random";
    case Method::sa: return "sa";
    case Method::pso: return "pso";
    case Method::ea: return "ea";
    case Method::mcts: return "mcts";
    case Method::mcts_g: return "mcts-g";
  }
  return "?";
}

int RunConfig::resolved_iterations() const {
  if (scheduler_iterations > 0) return scheduler_iterations;
  switch (method) {
    case Method::sampling:
    case Method::random_search: return sample_batch;
    case Method::sa: return 600;
    case Method::pso: return 60;
    case Method::ea: return 60;
    case Method::mcts:
    case Method::mcts_g: return 800;
  }
  return 100;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// One scheduling round: the method's best candidate given the feedback
// collected so far, or nullopt when it finds nothing new.
std::optional<Schedule> propose(const SchedulingModel& model, const Bounds& bounds,
                                const RunConfig& config, const FeedbackMap& feedback,
                                int round) {
  const std::uint64_t seed = config.seed + 0x9e37ULL * static_cast<std::uint64_t>(round);
  const int iters = config.resolved_iterations();

  switch (config.method) {
    case Method::sampling: {
      std::optional<Schedule> best;
      double best_d = 0.0;
      for (int i = 0; i < iters; ++i) {
        SamplingConfig sc;
        sc.distribution = config.distribution;
        sc.seed = seed + static_cast<std::uint64_t>(i);
        Schedule s = sample_schedule(model, bounds, sc);
        if (feedback.contains(s)) continue;
        const double d = eval_duration(s, model);
        if (!best || d < best_d) {
          best = std::move(s);
          best_d = d;
        }
      }
      return best;
    }
    case Method::random_search: {
      Rng rng(seed);
      std::optional<Schedule> best;
      double best_d = 0.0;
      for (int i = 0; i < iters; ++i) {
        Schedule s;
        s.dt = model.dt;
        s.start_steps.resize(static_cast<std::size_t>(model.num_cores));
        for (int& v : s.start_steps) v = rng.uniform_int(0, bounds.max_step);
        if (!eval_precedence(s, model) || !eval_relaxed_motion(s, model)) continue;
        if (eval_duration(s, model) > bounds.max_duration + 1e-9) continue;
        if (eval_core_collisions(s, model) != 0) continue;
        if (feedback.contains(s)) continue;
        const double d = eval_duration(s, model);
        if (!best || d < best_d) {
          best = std::move(s);
          best_d = d;
        }
      }
      return best;
    }
    case Method::sa:
    case Method::pso:
    case Method::ea: {
      OptimizerConfig oc;
      oc.init = config.init;
      oc.seed = seed;
      oc.iterations = iters;
      oc.heuristic_distribution = config.distribution;
      OptResult res;
      if (config.method == Method::sa)
        res = optimize_sa(model, bounds, config.penalty, oc, &feedback);
      else if (config.method == Method::pso)
        res = optimize_pso(model, bounds, config.penalty, oc, &feedback);
      else
        res = optimize_ea(model, bounds, config.penalty, oc, &feedback);
      if (!res.feasible) return std::nullopt;
      return res.best;
    }
    case Method::mcts:
    case Method::mcts_g: {
      MctsConfig mc;
      mc.seed = seed;
      mc.iterations = iters;
      mc.light_fraction = config.light_fraction;
      mc.greedy = config.method == Method::mcts_g;
      const MctsResult res = run_mcts(model, bounds, config.result_weights, mc, &feedback);
      if (!res.feasible) return std::nullopt;
      return res.best;
    }
  }
  return std::nullopt;
}

}  // namespace

RunOutcome run_pipeline(const Scenario& scenario, const TaskPlan& plan,
                        const RunConfig& config) {
  const auto wall0 = std::chrono::steady_clock::now();
  RunOutcome out;
  out.report.scenario = scenario.name;
  out.report.method = method_name(config.method);
  out.report.seed = config.seed;

  const SchedulingModel model = build_scheduling_model(plan, scenario);
  out.bounds = compute_bounds(model, config.d_max_override);
  out.report.d_min = out.bounds.min_duration;
  out.report.d_max = out.bounds.max_duration;

  for (int round = 0; round < config.outer_rounds; ++round) {
    if (config.budget_s > 0.0 && seconds_since(wall0) > config.budget_s) {
      out.notes.push_back(fmt::format("budget exhausted after {} rounds", round));
      break;
    }
    out.report.outer_rounds_used = round + 1;

    const auto t_sched = std::chrono::steady_clock::now();
    auto candidate = propose(model, out.bounds, config, out.feedback, round);
    out.report.wall_schedule_s += seconds_since(t_sched);
    if (!candidate) {
      out.notes.push_back(fmt::format("round {}: scheduler found no new candidate", round));
      continue;
    }
    out.schedule = candidate;

    const auto t_motion = std::chrono::steady_clock::now();
    const Timeline timeline(*candidate, model);
    MotionConfig mc = config.motion;
    mc.seed = config.motion.seed + 0x51edULL * static_cast<std::uint64_t>(round);
    MotionOutcome motion = plan_motions(timeline, mc);
    out.report.wall_motion_s += seconds_since(t_motion);
    out.report.work_state_checks += motion.diag.state_checks;
    out.last_areas = motion.areas;
    out.diag = motion.diag;

    if (motion.core_conflict) {
      out.feedback.record(*candidate, 0, 0);
      ++out.report.motion_failures;
      out.notes.push_back(
          fmt::format("round {}: fine-resolution core collision, schedule rejected", round));
      continue;
    }
    if (!motion.success) {
      int guide = 0, roadmap = 0;
      if (motion.failure) {
        if (motion.failure->kind == MotionFailure::Kind::guide_path_timeout)
          guide = motion.failure->traverses_done;
        else
          roadmap = motion.failure->traverses_done;
      }
      out.feedback.record(*candidate, guide, roadmap);
      ++out.report.motion_failures;
      out.notes.push_back(fmt::format(
          "round {}: motion planning failed ({}), progress {}", round,
          motion.failure && motion.failure->kind == MotionFailure::Kind::roadmap_sampling
              ? "roadmap sampling"
              : "guide path timeout",
          guide + roadmap));
      continue;
    }

    const auto t_val = std::chrono::steady_clock::now();
    Procedure proc = assemble_procedure(timeline, motion);
    proc.provenance.scenario = scenario.name;
    proc.provenance.method = out.report.method;
    proc.provenance.seed = config.seed;
    proc.provenance.config_hash = config_hash(fmt::format(
        "{}:{}:{}:{}:{}", out.report.method, config.seed, config.resolved_iterations(),
        static_cast<int>(config.distribution), out.bounds.max_step));
    const Verdict verdict = validate(proc, scenario);
    out.report.wall_validate_s += seconds_since(t_val);
    if (!verdict.ok) {
      out.feedback.record(*candidate, 0, 0);
      ++out.report.motion_failures;
      out.notes.push_back(fmt::format("round {}: validator rejected assembled procedure ({})",
                                      round, verdict.violations.front().kind));
      continue;
    }
    out.procedure = std::move(proc);
    out.report.success = true;
    out.report.validator_ok = true;
    out.report.duration = eval_duration(*candidate, model);
    return out;
  }

  out.report.success = false;
  return out;
}

std::string report_to_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["format"] = 1;
  j["kind"] = "run_report";
  j["scenario"] = report.scenario;
  j["method"] = report.method;
  j["seed"] = report.seed;
  j["success"] = report.success;
  j["duration"] = report.duration;
  j["d_min"] = report.d_min;
  j["d_max"] = report.d_max;
  j["outer_rounds_used"] = report.outer_rounds_used;
  j["motion_failures"] = report.motion_failures;
  j["validator_ok"] = report.validator_ok;
  j["work_state_checks"] = report.work_state_checks;
  return j.dump(2) + "\n";
}

std::vector<std::string> write_run_artifacts(const RunOutcome& outcome,
                                             const SchedulingModel& model,
                                             const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    const std::string path = (fs::path(out_dir) / name).string();
    write_file(path, content);
    written.push_back(path);
  };

  if (outcome.schedule) {
    emit("schedule.json", schedule_to_json(*outcome.schedule, outcome.report.scenario,
                                           outcome.report.method, outcome.report.seed));
    emit("gantt.svg", export_gantt(*outcome.schedule, model,
                                   outcome.last_areas.empty() ? nullptr : &outcome.last_areas));
  }
  if (outcome.procedure) {
    emit("procedure.json", procedure_to_json(*outcome.procedure));
    emit("trajectory.csv", trajectory_csv(*outcome.procedure));
  }

  nlohmann::ordered_json diag;
  diag["format"] = 1;
  diag["kind"] = "diagnostics";
  diag["work_state_checks"] = outcome.diag.state_checks;
  nlohmann::ordered_json areas = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < outcome.last_areas.size(); ++i) {
    const ProblemArea& area = outcome.last_areas[i];
    nlohmann::ordered_json aj;
    aj["id"] = area.id;
    aj["t0"] = area.t0;
    aj["t1"] = area.t1;
    aj["sections"] = area.sections();
    aj["robots"] = area.robot_ids;
    aj["traverses"] = area.traverse_ids;
    aj["sampling_cap"] = area.sampling_cap;
    if (i < outcome.diag.areas.size()) {
      const AreaDiag& ad = outcome.diag.areas[i];
      aj["samples_drawn"] = ad.samples_drawn;
      aj["nodes"] = ad.nodes;
      aj["edges"] = ad.edges;
      aj["removed_edges"] = ad.removed_edges;
      aj["extension_rounds"] = ad.extension_rounds;
      aj["guide_path_attempts"] = ad.guide_path_attempts;
      aj["solved_sections"] = ad.solved_sections;
    }
    areas.push_back(std::move(aj));
  }
  diag["areas"] = std::move(areas);
  nlohmann::ordered_json notes = nlohmann::ordered_json::array();
  for (const std::string& n : outcome.notes) notes.push_back(n);
  diag["notes"] = std::move(notes);
  emit("diagnostics.json", diag.dump(2) + "\n");

  emit("report.json", report_to_json(outcome.report));
  return written;
}

}  // namespace cellplan

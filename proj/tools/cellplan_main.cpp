#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cellplan/artifacts.hpp"
#include "cellplan/benchrun.hpp"
#include "cellplan/errors.hpp"
#include "cellplan/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitInvalid = 3;
constexpr int kExitUsage = 64;

struct PlanOptions {
  std::string scenario_path;
  std::string out_dir = "out";
  std::string method = "sampling";
  std::string dist = "quadratic";
  std::string init = "heuristic";
  std::string planner = "st_prm";
  std::uint64_t seed = 1;
  int iters = 0;
  int rounds = 20;
  double budget = 0.0;
  double light_fraction = 0.1;
  double d_max = 0.0;
  double l0 = 10.0;
  double tmax = 0.0;
  double progress_window = 900.0;
  int progress_attempts = 30;
  double mu1 = 30.0, mu2 = 900.0, mu3 = 10.0, mu4 = 1.0;
};

cellplan::RunConfig to_run_config(const PlanOptions& opt) {
  cellplan::RunConfig cfg;
  cfg.method = cellplan::parse_method(opt.method);
  if (opt.dist == "quadratic")
    cfg.distribution = cellplan::StartDistribution::quadratic;
  else if (opt.dist == "uniform")
    cfg.distribution = cellplan::StartDistribution::uniform;
  else
    throw cellplan::ParseError(fmt::format("unknown distribution '{}'", opt.dist));
  if (opt.init == "heuristic")
    cfg.init = cellplan::InitMode::heuristic;
  else if (opt.init == "random")
    cfg.init = cellplan::InitMode::random;
  else
    throw cellplan::ParseError(fmt::format("unknown init mode '{}'", opt.init));
  if (opt.planner == "st_prm")
    cfg.motion.planner = cellplan::StPlanner::st_prm;
  else if (opt.planner == "st_rrt_connect")
    cfg.motion.planner = cellplan::StPlanner::st_rrt_connect;
  else
    throw cellplan::ParseError(fmt::format("unknown planner '{}'", opt.planner));
  cfg.seed = opt.seed;
  cfg.motion.seed = opt.seed;
  cfg.scheduler_iterations = opt.iters;
  cfg.outer_rounds = opt.rounds;
  cfg.budget_s = opt.budget;
  cfg.light_fraction = opt.light_fraction;
  if (opt.d_max > 0.0) cfg.d_max_override = opt.d_max;
  cfg.motion.sampling_cap_base = opt.l0;
  cfg.motion.planner_time_limit = opt.tmax;
  cfg.motion.progress_window = opt.progress_window;
  cfg.motion.progress_attempt_cap = opt.progress_attempts;
  cfg.penalty = {opt.mu1, opt.mu2, opt.mu3, opt.mu4};
  return cfg;
}

void add_plan_options(CLI::App* cmd, PlanOptions& opt) {
  cmd->add_option("scenario", opt.scenario_path, "Scenario JSON file")->required();
  cmd->add_option("--out", opt.out_dir, "Artifact output directory");
  cmd->add_option("--method", opt.method,
                  "sampling|random|sa|pso|ea|mcts|mcts-g");
  cmd->add_option("--dist", opt.dist, "Sampling distribution: quadratic|uniform");
  cmd->add_option("--init", opt.init, "Optimizer initialization: heuristic|random");
  cmd->add_option("--planner", opt.planner, "Section planner: st_prm|st_rrt_connect");
  cmd->add_option("--seed", opt.seed, "RNG seed");
  cmd->add_option("--iters", opt.iters, "Scheduler iterations per round (0: default)");
  cmd->add_option("--rounds", opt.rounds, "Motion-feedback rounds");
  cmd->add_option("--budget", opt.budget, "Wall-clock budget seconds (0: off)");
  cmd->add_option("--light-fraction", opt.light_fraction, "MCTS light playout fraction");
  cmd->add_option("--d-max", opt.d_max, "Horizon override in seconds");
  cmd->add_option("--l0", opt.l0, "Roadmap sampling cap base L0");
  cmd->add_option("--tmax", opt.tmax, "Per-edge planning wall limit (0: 30*n_r)");
  cmd->add_option("--progress-window", opt.progress_window,
                  "Guide-path progress wall window in seconds");
  cmd->add_option("--progress-attempts", opt.progress_attempts,
                  "Guide-path attempts without progress before failure");
  cmd->add_option("--mu1", opt.mu1, "Collision penalty weight");
  cmd->add_option("--mu2", opt.mu2, "Horizon overrun penalty weight");
  cmd->add_option("--mu3", opt.mu3, "Guide-path feedback weight");
  cmd->add_option("--mu4", opt.mu4, "Roadmap feedback weight");
}

int cmd_plan(const PlanOptions& opt) {
  const cellplan::Scenario scenario = cellplan::load_scenario(opt.scenario_path);
  for (const std::string& w : scenario.load_warnings)
    fmt::print(stderr, "warning: {}\n", w);
  const cellplan::TaskPlan plan = cellplan::prepare_task(scenario);
  const cellplan::RunConfig cfg = to_run_config(opt);
  const cellplan::RunOutcome outcome = cellplan::run_pipeline(scenario, plan, cfg);

  const auto model = cellplan::build_scheduling_model(plan, scenario);
  const auto files = cellplan::write_run_artifacts(outcome, model, opt.out_dir);
  for (const std::string& f : files) fmt::print("wrote {}\n", f);
  fmt::print(stderr, "wall: schedule {:.2f}s motion {:.2f}s validate {:.2f}s\n",
             outcome.report.wall_schedule_s, outcome.report.wall_motion_s,
             outcome.report.wall_validate_s);

  if (!outcome.report.success) {
    fmt::print("no valid procedure (d_min={:.2f}, rounds={} failures={})\n",
               outcome.report.d_min, outcome.report.outer_rounds_used,
               outcome.report.motion_failures);
    return kExitInfeasible;
  }
  fmt::print("d = {:.2f} s (d_min {:.2f}, d_max {:.2f}, rounds {})\n", outcome.report.duration,
             outcome.report.d_min, outcome.report.d_max, outcome.report.outer_rounds_used);
  return kExitOk;
}

int cmd_validate(const std::string& scenario_path, const std::string& procedure_path) {
  const cellplan::Scenario scenario = cellplan::load_scenario(scenario_path);
  const cellplan::Procedure proc =
      cellplan::procedure_from_json(cellplan::read_file(procedure_path));
  const cellplan::Verdict verdict = cellplan::validate(proc, scenario);
  if (verdict.ok) {
    fmt::print("valid\n");
    return kExitOk;
  }
  fmt::print("invalid: {} violation(s)\n", verdict.violations.size());
  for (std::size_t i = 0; i < std::min<std::size_t>(verdict.violations.size(), 20); ++i) {
    const auto& v = verdict.violations[i];
    fmt::print("  [{}] t={:.3f} robot={} {}\n", v.kind, v.t, v.robot_id, v.detail);
  }
  return kExitInvalid;
}

int cmd_baseline(const std::string& scenario_path, const std::string& out_dir) {
  const cellplan::Scenario scenario = cellplan::load_scenario(scenario_path);
  const cellplan::TaskPlan plan = cellplan::prepare_task(scenario);
  cellplan::BaselineResult base = cellplan::baseline_decentralized(plan, scenario);
  base.procedure.provenance.scenario = scenario.name;
  const cellplan::Verdict verdict = cellplan::validate(base.procedure, scenario);
  if (!verdict.ok) {
    fmt::print("baseline procedure failed validation ({} violations)\n",
               verdict.violations.size());
    return kExitInvalid;
  }
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  cellplan::write_file((fs::path(out_dir) / "baseline_procedure.json").string(),
                       cellplan::procedure_to_json(base.procedure));
  cellplan::write_file((fs::path(out_dir) / "baseline_trajectory.csv").string(),
                       cellplan::trajectory_csv(base.procedure));
  const auto model = cellplan::build_scheduling_model(plan, scenario);
  cellplan::write_file((fs::path(out_dir) / "baseline_gantt.svg").string(),
                       cellplan::export_gantt(base.schedule, model));
  fmt::print("baseline d = {:.2f} s\n", base.duration);
  return kExitOk;
}

int cmd_export_gantt(const std::string& scenario_path, const std::string& schedule_path,
                     const std::string& out_file) {
  const cellplan::Scenario scenario = cellplan::load_scenario(scenario_path);
  const cellplan::TaskPlan plan = cellplan::prepare_task(scenario);
  const auto model = cellplan::build_scheduling_model(plan, scenario);
  const cellplan::Schedule schedule =
      cellplan::schedule_from_json(cellplan::read_file(schedule_path));
  cellplan::write_file(out_file, cellplan::export_gantt(schedule, model));
  fmt::print("wrote {}\n", out_file);
  return kExitOk;
}

int cmd_bench(const std::string& manifest_path, const std::string& out_dir) {
  const cellplan::BenchSummary summary = cellplan::run_bench(manifest_path);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  cellplan::write_file((fs::path(out_dir) / "bench.csv").string(), summary.csv);
  fmt::print("{}", summary.summary);
  fmt::print("wrote {}\n", (fs::path(out_dir) / "bench.csv").string());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot assembly cell planner"};
  app.require_subcommand(1);

  PlanOptions plan_opt;
  CLI::App* plan = app.add_subcommand("plan", "Schedule and plan a scenario end to end");
  add_plan_options(plan, plan_opt);

  std::string val_scenario, val_procedure;
  CLI::App* val = app.add_subcommand("validate", "Validate a procedure JSON");
  val->add_option("scenario", val_scenario, "Scenario JSON file")->required();
  val->add_option("procedure", val_procedure, "Procedure JSON file")->required();

  std::string base_scenario, base_out = "out";
  CLI::App* base = app.add_subcommand("baseline", "Decentralized reference planner");
  base->add_option("scenario", base_scenario, "Scenario JSON file")->required();
  base->add_option("--out", base_out, "Artifact output directory");

  std::string g_scenario, g_schedule, g_out = "gantt.svg";
  CLI::App* gantt = app.add_subcommand("export-gantt", "Render a schedule as SVG");
  gantt->add_option("scenario", g_scenario, "Scenario JSON file")->required();
  gantt->add_option("schedule", g_schedule, "Schedule JSON file")->required();
  gantt->add_option("--out", g_out, "Output SVG path");

  std::string bench_manifest, bench_out = "bench_out";
  CLI::App* bench = app.add_subcommand("bench", "Run a scenario x method x seed grid");
  bench->add_option("manifest", bench_manifest, "Bench manifest JSON")->required();
  bench->add_option("--out-dir", bench_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*plan) return cmd_plan(plan_opt);
    if (*val) return cmd_validate(val_scenario, val_procedure);
    if (*base) return cmd_baseline(base_scenario, base_out);
    if (*gantt) return cmd_export_gantt(g_scenario, g_schedule, g_out);
    if (*bench) return cmd_bench(bench_manifest, bench_out);
  } catch (const cellplan::InfeasibleError& e) {
    fmt::print(stderr, "infeasible: {}\n", e.what());
    return kExitInfeasible;
  } catch (const cellplan::ParseError& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return kExitUsage;
  } catch (const cellplan::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInvalid;
  }
  return kExitUsage;
}

#include "cellplan/benchrun.hpp"

#include <algorithm>
#include <filesystem>
#include <fmt/format.h>
#include <map>
#include <sstream>

#include "cellplan/artifacts.hpp"
#include "cellplan/errors.hpp"

#include <json.hpp>

namespace cellplan {

namespace {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

BenchSummary run_bench(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("bench manifest: {}", e.what()));
  }

  const fs::path base = fs::path(manifest_path).parent_path();
  const auto scenario_paths = manifest.at("scenarios").get<std::vector<std::string>>();
  const auto methods = manifest.at("methods").get<std::vector<std::string>>();
  const auto seeds = manifest.at("seeds").get<std::vector<std::uint64_t>>();
  const double budget = manifest.value("budget_s", 0.0);
  const int iterations = manifest.value("iterations", 0);
  const int outer_rounds = manifest.value("outer_rounds", 20);

  BenchSummary out;
  std::map<std::string, double> baseline_cache;

  for (const std::string& sp : scenario_paths) {
    const std::string path = (base / sp).string();
    const Scenario scenario = load_scenario(path);
    const TaskPlan plan = prepare_task(scenario);

    if (!baseline_cache.count(scenario.name))
      baseline_cache[scenario.name] = baseline_decentralized(plan, scenario).duration;
    const double baseline_d = baseline_cache[scenario.name];

    for (const std::string& method : methods) {
      for (std::uint64_t seed : seeds) {
        RunConfig cfg;
        cfg.method = parse_method(method);
        cfg.seed = seed;
        cfg.budget_s = budget;
        cfg.scheduler_iterations = iterations;
        cfg.outer_rounds = outer_rounds;
        const RunOutcome run = run_pipeline(scenario, plan, cfg);

        BenchRow row;
        row.scenario = scenario.name;
        row.method = method;
        row.seed = seed;
        row.success = run.report.success;
        row.duration = run.report.duration;
        row.d_min = run.report.d_min;
        row.baseline_duration = baseline_d;
        row.improvement =
            run.report.success && baseline_d > 0.0
                ? (baseline_d - run.report.duration) / baseline_d
                : 0.0;
        row.outer_rounds = run.report.outer_rounds_used;
        row.motion_failures = run.report.motion_failures;
        row.work_state_checks = run.report.work_state_checks;
        row.wall_motion_s = run.report.wall_motion_s;
        out.rows.push_back(std::move(row));
      }
    }
  }

  std::sort(out.rows.begin(), out.rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.scenario, a.method, a.seed) < std::tie(b.scenario, b.method, b.seed);
  });

  // Deterministic CSV (no wall-clock columns).
  std::ostringstream csv;
  csv << "scenario,method,seed,success,d,d_min,baseline_d,improvement,outer_rounds,"
         "motion_failures,work_state_checks\n";
  for (const BenchRow& r : out.rows) {
    csv << fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{},{},{}\n", r.scenario,
                       r.method, r.seed, r.success ? 1 : 0, r.duration, r.d_min,
                       r.baseline_duration, r.improvement, r.outer_rounds, r.motion_failures,
                       r.work_state_checks);
  }
  out.csv = csv.str();

  // Digest with best-d per cell and motion-time quantiles (wall clock;
  // printed, never written into artifacts).
  std::ostringstream digest;
  std::map<std::pair<std::string, std::string>, std::vector<const BenchRow*>> cells;
  for (const BenchRow& r : out.rows) cells[{r.scenario, r.method}].push_back(&r);
  digest << fmt::format("{:<10} {:<9} {:>5} {:>8} {:>9} {:>8} | motion wall s "
                        "(med/p25/p75/p5/p95)\n",
                        "scenario", "method", "runs", "best_d", "baseline", "improv");
  for (const auto& [key, rows] : cells) {
    double best_d = 0.0;
    bool any = false;
    std::vector<double> walls;
    for (const BenchRow* r : rows) {
      walls.push_back(r->wall_motion_s);
      if (r->success && (!any || r->duration < best_d)) {
        best_d = r->duration;
        any = true;
      }
    }
    const double baseline_d = rows.front()->baseline_duration;
    digest << fmt::format(
        "{:<10} {:<9} {:>5} {:>8} {:>9.2f} {:>7.1f}% | {:.3f}/{:.3f}/{:.3f}/{:.3f}/{:.3f}\n",
        key.first, key.second, rows.size(), any ? fmt::format("{:.2f}", best_d) : "-",
        baseline_d, any && baseline_d > 0.0 ? 100.0 * (baseline_d - best_d) / baseline_d : 0.0,
        quantile(walls, 0.5), quantile(walls, 0.25), quantile(walls, 0.75),
        quantile(walls, 0.05), quantile(walls, 0.95));
  }
  out.summary = digest.str();
  return out;
}

}  // namespace cellplan

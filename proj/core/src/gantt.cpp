#include "cellplan/gantt.hpp"

#include <cmath>
#include <fmt/format.h>
#include <set>
#include <sstream>

namespace cellplan {

namespace {

constexpr double kLaneHeight = 36.0;
constexpr double kLaneGap = 10.0;
constexpr double kLeftMargin = 70.0;
constexpr double kTopMargin = 28.0;
constexpr double kPixelsPerSecond = 26.0;

std::string fmt(double v) { return fmt::format("{:.2f}", v); }

}  // namespace

std::string export_gantt(const Schedule& schedule, const SchedulingModel& model,
                         const std::vector<ProblemArea>* areas) {
  const Scenario& scenario = *model.scenario;
  const TaskPlan& plan = *model.plan;
  const double horizon = std::max(1.0, eval_duration(schedule, model));
  const double width = kLeftMargin + horizon * kPixelsPerSecond + 30.0;
  const double height =
      kTopMargin + scenario.robots.size() * (kLaneHeight + kLaneGap) + 40.0;

  auto x_of = [&](double t) { return kLeftMargin + t * kPixelsPerSecond; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\">\n",
      fmt(width), fmt(height), fmt(width), fmt(height));
  svg << "<style>text{font-family:monospace;font-size:11px;}</style>\n";
  svg << fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
                     fmt(width), fmt(height));

  // Shaded problem areas behind everything else.
  if (areas) {
    for (const ProblemArea& area : *areas) {
      svg << fmt::format(
          "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#f5d0d0\" "
          "opacity=\"0.6\"/>\n",
          fmt(x_of(area.t0)), fmt(kTopMargin), fmt((area.t1 - area.t0) * kPixelsPerSecond),
          fmt(scenario.robots.size() * (kLaneHeight + kLaneGap)));
    }
  }

  // Section borders: all core start/end events.
  std::set<double> events;
  for (const CoreOperation& core : plan.cores) {
    const double start = schedule.start_steps[static_cast<std::size_t>(core.id)] * schedule.dt;
    events.insert(start);
    events.insert(start + core.duration);
  }
  for (double ev : events) {
    svg << fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#50a050\" "
        "stroke-width=\"0.6\"/>\n",
        fmt(x_of(ev)), fmt(kTopMargin),
        fmt(kTopMargin + scenario.robots.size() * (kLaneHeight + kLaneGap)));
  }

  for (std::size_t r = 0; r < scenario.robots.size(); ++r) {
    const double y = kTopMargin + r * (kLaneHeight + kLaneGap);
    svg << fmt::format("<text x=\"6\" y=\"{}\">robot {}</text>\n", fmt(y + kLaneHeight / 2 + 4),
                       scenario.robots[r].id);
    svg << fmt::format(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#cccccc\" "
        "stroke-width=\"1\"/>\n",
        fmt(kLeftMargin), fmt(y + kLaneHeight), fmt(x_of(horizon)), fmt(y + kLaneHeight));

    // Traverse windows: outlined; escape traverse runs to the horizon.
    double cursor = 0.0;
    const auto& cores = plan.robot_cores[r];
    for (std::size_t k = 0; k <= cores.size(); ++k) {
      const double w_end =
          k < cores.size()
              ? schedule.start_steps[static_cast<std::size_t>(cores[k])] * schedule.dt
              : horizon;
      if (w_end > cursor + 1e-9) {
        svg << fmt::format(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
            "stroke=\"#7a7aa8\" stroke-width=\"1\" stroke-dasharray=\"3,2\"/>\n",
            fmt(x_of(cursor)), fmt(y + 6), fmt((w_end - cursor) * kPixelsPerSecond),
            fmt(kLaneHeight - 12));
      }
      if (k < cores.size()) {
        const CoreOperation& core = plan.cores[static_cast<std::size_t>(cores[k])];
        const double start =
            schedule.start_steps[static_cast<std::size_t>(core.id)] * schedule.dt;
        svg << fmt::format(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#4878b8\" "
            "stroke=\"#28487a\" stroke-width=\"1\"/>\n",
            fmt(x_of(start)), fmt(y + 3), fmt(core.duration * kPixelsPerSecond),
            fmt(kLaneHeight - 6));
        svg << fmt::format("<text x=\"{}\" y=\"{}\" fill=\"white\">c{}</text>\n",
                           fmt(x_of(start) + 2), fmt(y + kLaneHeight / 2 + 4), core.id);
        cursor = start + core.duration;
      }
    }
  }

  // Time axis ticks every 5 seconds.
  const double axis_y = kTopMargin + scenario.robots.size() * (kLaneHeight + kLaneGap) + 14.0;
  for (double t = 0.0; t <= horizon + 1e-9; t += 5.0) {
    svg << fmt::format("<text x=\"{}\" y=\"{}\">{}s</text>\n", fmt(x_of(t) - 6), fmt(axis_y),
                       fmt::format("{:.0f}", t));
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace cellplan

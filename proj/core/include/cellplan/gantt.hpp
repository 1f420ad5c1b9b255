#pragma once

#include <string>

#include "cellplan/motion.hpp"
#include "cellplan/schedule.hpp"

namespace cellplan {

// SVG schedule chart: one lane per robot, filled blocks for core
// operations, outlined blocks for traverse windows, vertical lines at
// section borders, problem areas shaded. Byte-deterministic for fixed
// input.
std::string export_gantt(const Schedule& schedule, const SchedulingModel& model,
                         const std::vector<ProblemArea>* areas = nullptr);

}  // namespace cellplan

#pragma once

#include <string>

#include "cellplan/procedure.hpp"
#include "cellplan/schedule.hpp"

namespace cellplan {

// Versioned, deterministic JSON/CSV artifact encodings.

std::string schedule_to_json(const Schedule& schedule, const std::string& scenario_name,
                             const std::string& method, std::uint64_t seed);
Schedule schedule_from_json(const std::string& text);

std::string procedure_to_json(const Procedure& proc);
Procedure procedure_from_json(const std::string& text);

// Columns: t, robot, q1..qn.
std::string trajectory_csv(const Procedure& proc);

// FNV-1a over a canonical configuration string.
std::string config_hash(const std::string& canonical);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace cellplan

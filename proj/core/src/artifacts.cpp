#include "cellplan/artifacts.hpp"

#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "cellplan/errors.hpp"

#include <json.hpp>

namespace cellplan {

using ordered_json = nlohmann::ordered_json;

std::string schedule_to_json(const Schedule& schedule, const std::string& scenario_name,
                             const std::string& method, std::uint64_t seed) {
  ordered_json j;
  j["format"] = 1;
  j["kind"] = "schedule";
  j["scenario"] = scenario_name;
  j["method"] = method;
  j["seed"] = seed;
  j["dt"] = schedule.dt;
  j["start_steps"] = schedule.start_steps;
  return j.dump(2) + "\n";
}

Schedule schedule_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", 0) != 1 || j.value("kind", "") != "schedule")
      throw ParseError("schedule JSON: wrong format/kind");
    Schedule s;
    s.dt = j.at("dt").get<double>();
    s.start_steps = j.at("start_steps").get<std::vector<int>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("schedule JSON: {}", e.what()));
  }
}

std::string procedure_to_json(const Procedure& proc) {
  ordered_json j;
  j["format"] = 1;
  j["kind"] = "procedure";
  j["scenario"] = proc.provenance.scenario;
  j["method"] = proc.provenance.method;
  j["seed"] = proc.provenance.seed;
  j["config_hash"] = proc.provenance.config_hash;
  j["dt"] = proc.dt;
  j["duration"] = proc.duration;
  ordered_json robots = ordered_json::array();
  for (std::size_t r = 0; r < proc.robot_ids.size(); ++r) {
    ordered_json rj;
    rj["id"] = proc.robot_ids[r];
    rj["samples"] = proc.samples[r];
    robots.push_back(std::move(rj));
  }
  j["robots"] = std::move(robots);
  ordered_json windows = ordered_json::array();
  for (const CoreWindowInfo& w : proc.core_windows) {
    windows.push_back(ordered_json{
        {"op", w.op_id}, {"robot", w.robot_id}, {"step", w.step_id}, {"t0", w.t0},
        {"t1", w.t1}});
  }
  j["core_windows"] = std::move(windows);
  ordered_json events = ordered_json::array();
  for (const AbsModeEvent& ev : proc.mode_events) {
    events.push_back(ordered_json{{"t", ev.t},
                                  {"attach", ev.attach},
                                  {"robot", ev.robot_id},
                                  {"object", ev.object_id},
                                  {"offset", {ev.grasp_offset.x, ev.grasp_offset.y}}});
  }
  j["mode_events"] = std::move(events);
  return j.dump(2) + "\n";
}

Procedure procedure_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", 0) != 1 || j.value("kind", "") != "procedure")
      throw ParseError("procedure JSON: wrong format/kind");
    Procedure p;
    p.provenance.scenario = j.value("scenario", "");
    p.provenance.method = j.value("method", "");
    p.provenance.seed = j.value("seed", 0ULL);
    p.provenance.config_hash = j.value("config_hash", "");
    p.dt = j.at("dt").get<double>();
    p.duration = j.at("duration").get<double>();
    for (const auto& rj : j.at("robots")) {
      p.robot_ids.push_back(rj.at("id").get<int>());
      p.samples.push_back(rj.at("samples").get<std::vector<std::vector<double>>>());
    }
    for (const auto& wj : j.value("core_windows", nlohmann::json::array())) {
      p.core_windows.push_back({wj.at("op").get<int>(), wj.at("robot").get<int>(),
                                wj.at("step").get<int>(), wj.at("t0").get<double>(),
                                wj.at("t1").get<double>()});
    }
    for (const auto& ej : j.value("mode_events", nlohmann::json::array())) {
      AbsModeEvent ev;
      ev.t = ej.at("t").get<double>();
      ev.attach = ej.at("attach").get<bool>();
      ev.robot_id = ej.at("robot").get<int>();
      ev.object_id = ej.at("object").get<int>();
      ev.grasp_offset = {ej.at("offset").at(0).get<double>(),
                         ej.at("offset").at(1).get<double>()};
      p.mode_events.push_back(ev);
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("procedure JSON: {}", e.what()));
  }
}

std::string trajectory_csv(const Procedure& proc) {
  std::ostringstream out;
  std::size_t max_dof = 0;
  for (const auto& robot : proc.samples)
    if (!robot.empty()) max_dof = std::max(max_dof, robot.front().size());
  out << "t,robot";
  for (std::size_t j = 1; j <= max_dof; ++j) out << ",q" << j;
  out << "\n";
  for (std::size_t i = 0; i < proc.sample_count(); ++i) {
    const double t = static_cast<double>(i) * proc.dt;
    for (std::size_t r = 0; r < proc.robot_ids.size(); ++r) {
      out << fmt::format("{:.6f},{}", t, proc.robot_ids[r]);
      for (std::size_t j = 0; j < max_dof; ++j) {
        if (j < proc.samples[r][i].size())
          out << fmt::format(",{:.9f}", proc.samples[r][i][j]);
        else
          out << ",";
      }
      out << "\n";
    }
  }
  return out.str();
}

std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path));
  out << content;
}

}  // namespace cellplan

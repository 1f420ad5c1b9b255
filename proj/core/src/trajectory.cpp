#include "cellplan/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "cellplan/errors.hpp"

namespace cellplan {

double JointPath::arc_length() const {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < waypoints[i].size(); ++j) {
      const double d = waypoints[i + 1][j] - waypoints[i][j];
      s += d * d;
    }
    len += std::sqrt(s);
  }
  return len;
}

const std::vector<double>& Trajectory::at_time(double t) const {
  const auto idx = static_cast<std::ptrdiff_t>(std::llround(t / dt));
  const auto clamped = std::clamp<std::ptrdiff_t>(idx, 0, std::ssize(samples) - 1);
  return samples[static_cast<std::size_t>(clamped)];
}

double min_time_rest_to_rest_1d(double dq, double v_max, double a_max) {
  const double d = std::abs(dq);
  if (d == 0.0) return 0.0;
  const double cruise_threshold = v_max * v_max / a_max;
  if (d <= cruise_threshold) return 2.0 * std::sqrt(d / a_max);
  return d / v_max + v_max / a_max;
}

double min_time_rest_to_rest(std::span<const double> dq, std::span<const double> v_max,
                             std::span<const double> a_max) {
  double t = 0.0;
  for (std::size_t j = 0; j < dq.size(); ++j)
    t = std::max(t, min_time_rest_to_rest_1d(dq[j], v_max[j], a_max[j]));
  return t;
}

double max_displacement_1d(double T, double v_max, double a_max) {
  if (T <= 0.0) return 0.0;
  if (T <= 2.0 * v_max / a_max) return a_max * T * T / 4.0;
  return v_max * T - v_max * v_max / a_max;
}

std::vector<double> max_displacement(double T, const Robot& robot) {
  std::vector<double> out(robot.dof());
  for (int j = 0; j < robot.dof(); ++j)
    out[j] = max_displacement_1d(T, robot.v_max[j], robot.a_max[j]);
  return out;
}

double rest_to_rest_position(double dq, double v_max, double a_max, double T, double tau) {
  const double d = std::abs(dq);
  if (d == 0.0 || T <= 0.0) return 0.0;
  const double t_min = min_time_rest_to_rest_1d(dq, v_max, a_max);
  // Time-scaling the minimum-time profile only reduces velocity and
  // acceleration, so the stretched profile stays within limits.
  const double u = std::clamp(tau * (t_min / T), 0.0, t_min);
  const double sign = dq < 0.0 ? -1.0 : 1.0;
  const double cruise_threshold = v_max * v_max / a_max;
  double x;
  if (d <= cruise_threshold) {
    const double half = t_min / 2.0;
    x = (u <= half) ? 0.5 * a_max * u * u : d - 0.5 * a_max * (t_min - u) * (t_min - u);
  } else {
    const double t_acc = v_max / a_max;
    if (u <= t_acc)
      x = 0.5 * a_max * u * u;
    else if (u <= t_min - t_acc)
      x = v_max * u - 0.5 * v_max * v_max / a_max;
    else
      x = d - 0.5 * a_max * (t_min - u) * (t_min - u);
  }
  return sign * x;
}

namespace {

Trajectory sample_segments(const JointPath& path, const Robot& robot,
                           const std::vector<double>& segment_times, double dt) {
  const std::size_t n_joints = path.waypoints.front().size();
  double total = 0.0;
  for (double t : segment_times) total += t;

  const auto n_steps = static_cast<std::size_t>(std::ceil(total / dt - 1e-9));
  Trajectory traj;
  traj.dt = dt;
  traj.samples.reserve(n_steps + 1);

  for (std::size_t i = 0; i <= n_steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    // Locate the segment containing t.
    double offset = 0.0;
    std::size_t seg = 0;
    while (seg < segment_times.size() && t > offset + segment_times[seg] + 1e-12) {
      offset += segment_times[seg];
      ++seg;
    }
    std::vector<double> q(n_joints);
    if (seg >= segment_times.size()) {
      q = path.waypoints.back();
    } else {
      const double tau = std::clamp(t - offset, 0.0, segment_times[seg]);
      for (std::size_t j = 0; j < n_joints; ++j) {
        const double dq = path.waypoints[seg + 1][j] - path.waypoints[seg][j];
        q[j] = path.waypoints[seg][j] +
               rest_to_rest_position(dq, robot.v_max[j], robot.a_max[j], segment_times[seg],
                                     tau);
      }
    }
    traj.samples.push_back(std::move(q));
  }
  if (traj.samples.empty()) traj.samples.push_back(path.waypoints.front());
  return traj;
}

std::vector<double> segment_min_times(const JointPath& path, const Robot& robot) {
  std::vector<double> times;
  for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i) {
    std::vector<double> dq(path.waypoints[i].size());
    for (std::size_t j = 0; j < dq.size(); ++j)
      dq[j] = path.waypoints[i + 1][j] - path.waypoints[i][j];
    times.push_back(min_time_rest_to_rest(dq, robot.v_max, robot.a_max));
  }
  return times;
}

}  // namespace

Trajectory parametrize(const JointPath& path, const Robot& robot, double dt) {
  if (path.waypoints.empty()) throw Error("parametrize: empty joint path");
  if (path.waypoints.size() == 1) {
    Trajectory traj;
    traj.dt = dt;
    traj.samples.push_back(path.waypoints.front());
    return traj;
  }
  return sample_segments(path, robot, segment_min_times(path, robot), dt);
}

Trajectory parametrize_into_window(const JointPath& path, const Robot& robot, double window,
                                   double dt) {
  if (path.waypoints.empty()) throw Error("parametrize: empty joint path");
  std::vector<double> times = path.waypoints.size() > 1 ? segment_min_times(path, robot)
                                                        : std::vector<double>{};
  double total = 0.0;
  for (double t : times) total += t;
  const auto n_steps = static_cast<std::size_t>(std::llround(window / dt));

  if (total <= 0.0 || times.empty()) {
    Trajectory traj;
    traj.dt = dt;
    traj.samples.assign(n_steps + 1, path.waypoints.front());
    return traj;
  }

  if (window < total - 1e-9)
    throw Error("parametrize_into_window: window shorter than minimum time");
  const double scale = window / total;
  for (double& t : times) t *= scale;
  Trajectory traj = sample_segments(path, robot, times, dt);
  while (traj.samples.size() < n_steps + 1) traj.samples.push_back(traj.samples.back());
  traj.samples.resize(n_steps + 1, traj.samples.back());
  return traj;
}

}  // namespace cellplan

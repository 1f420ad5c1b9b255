#pragma once

#include <span>
#include <vector>

#include "cellplan/scene.hpp"

namespace cellplan {

// Validator / interpolation resolution. Distinct from the scheduling
// grid (0.2 s); every scheduling-grid instant falls on a sample.
inline constexpr double kDtTraj = 0.02;

struct JointPath {
  int robot_id = -1;
  std::vector<std::vector<double>> waypoints;

  double arc_length() const;
};

struct Trajectory {
  double dt = kDtTraj;
  std::vector<std::vector<double>> samples;

  double duration() const {
    return samples.empty() ? 0.0 : dt * static_cast<double>(samples.size() - 1);
  }
  const std::vector<double>& at_time(double t) const;
};

// Minimum rest-to-rest time for one joint under a symmetric
// velocity/acceleration limit: triangular profile below the cruise
// threshold, trapezoidal above it.
double min_time_rest_to_rest_1d(double dq, double v_max, double a_max);

// Max over joints of the per-joint closed form.
double min_time_rest_to_rest(std::span<const double> dq, std::span<const double> v_max,
                             std::span<const double> a_max);

// Inverse of min_time_rest_to_rest_1d: the largest displacement a joint
// can cover from rest to rest in time T.
double max_displacement_1d(double T, double v_max, double a_max);

// Per-joint reachable radius of `robot` in time T.
std::vector<double> max_displacement(double T, const Robot& robot);

// Position of the scaled rest-to-rest profile for signed displacement dq
// at local time tau in [0, T]; T must be >= the joint's minimum time.
double rest_to_rest_position(double dq, double v_max, double a_max, double T, double tau);

// Per-segment synchronized rest-to-rest profiles: every joint is
// stretched to the slowest joint's closed-form time, so all joints
// arrive together with zero velocity at every waypoint.
Trajectory parametrize(const JointPath& path, const Robot& robot, double dt = kDtTraj);

// Uniformly slows a path to fill `window` seconds (window must be >= the
// minimum parametrization time). Used to place decentralized motions
// into their scheduled slots.
Trajectory parametrize_into_window(const JointPath& path, const Robot& robot, double window,
                                   double dt = kDtTraj);

}  // namespace cellplan

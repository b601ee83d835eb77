#pragma once

#include <vector>

#include "amest/control.hpp"

namespace amest {

/// Excitation reference: diagonal back-and-forth sweep in the xy plane at
/// 0.7 m altitude with both joints swinging, period 10 s. The roll/pitch slots are left at
/// zero; the simulation fills them from the attitude allocation.
TrajectoryPoint reference_trajectory(double t);

struct Waypoint {
  double t = 0.0;
  Vec8 q = Vec8::Zero();
};

/// Rest-to-rest cubic blends between consecutive waypoints (zero velocity at
/// each waypoint); holds the first/last waypoint outside the covered interval.
/// Waypoint times must be strictly increasing.
TrajectoryPoint waypoint_trajectory(const std::vector<Waypoint>& waypoints, double t);

}  // namespace amest

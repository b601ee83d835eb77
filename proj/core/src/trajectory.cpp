#include "amest/trajectory.hpp"

#include <cmath>
#include <numbers>

namespace amest {

TrajectoryPoint reference_trajectory(double t) {
  if (!(t >= 0.0)) throw DomainError("reference trajectory requires t >= 0");
  constexpr double pi = std::numbers::pi;
  constexpr double w = pi / 5.0;
  const double c = std::cos(w * t);
  const double s = std::sin(w * t);

  TrajectoryPoint p;
  p.q(idx::kX) = 0.5 * c;
  p.qd(idx::kX) = -0.5 * w * s;
  p.qdd(idx::kX) = -0.5 * w * w * c;

  p.q(idx::kY) = -p.q(idx::kX);
  p.qd(idx::kY) = -p.qd(idx::kX);
  p.qdd(idx::kY) = -p.qdd(idx::kX);

  p.q(idx::kZ) = 0.7;

  p.q(idx::kJoint1) = -pi / 2.0 + (pi / 4.0) * s;
  p.qd(idx::kJoint1) = (pi / 4.0) * w * c;
  p.qdd(idx::kJoint1) = -(pi / 4.0) * w * w * s;

  p.q(idx::kJoint2) = (pi / 8.0) * s;
  p.qd(idx::kJoint2) = (pi / 8.0) * w * c;
  p.qdd(idx::kJoint2) = -(pi / 8.0) * w * w * s;
  return p;
}

TrajectoryPoint waypoint_trajectory(const std::vector<Waypoint>& waypoints, double t) {
  if (waypoints.empty()) throw DomainError("waypoint trajectory needs at least one waypoint");
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    if (!(waypoints[i].t > waypoints[i - 1].t)) throw DomainError("waypoint times must be strictly increasing");
  }
  TrajectoryPoint p;
  if (t <= waypoints.front().t) {
    p.q = waypoints.front().q;
    return p;
  }
  if (t >= waypoints.back().t) {
    p.q = waypoints.back().q;
    return p;
  }
  std::size_t i = 1;
  while (waypoints[i].t < t) ++i;
  const Waypoint& a = waypoints[i - 1];
  const Waypoint& b = waypoints[i];
  const double T = b.t - a.t;
  const double u = (t - a.t) / T;
  // h(u) = 3u^2 - 2u^3
  const double h = u * u * (3.0 - 2.0 * u);
  const double dh = 6.0 * u * (1.0 - u) / T;
  const double ddh = (6.0 - 12.0 * u) / (T * T);
  const Vec8 delta = b.q - a.q;
  p.q = a.q + h * delta;
  p.qd = dh * delta;
  p.qdd = ddh * delta;
  return p;
}

}  // namespace amest

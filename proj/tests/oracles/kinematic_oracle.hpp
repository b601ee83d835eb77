#pragma once

// Independent reference model used only by the tests. It rebuilds the
// system from elementary rotations and point positions and gets every
// velocity by finite differences in time, so it shares no code with the
// Jacobian/AutoDiff construction in the library.

#include <Eigen/Core>

#include <cmath>

#include "amest/types.hpp"

namespace oracle {

using amest::Mat3;
using amest::Mat8;
using amest::Vec3;
using amest::Vec8;

inline Mat3 rot_x(double a) {
  Mat3 r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}

inline Mat3 rot_y(double a) {
  Mat3 r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}

inline Mat3 rot_z(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

// Full-attitude model only (the small-angle mode is checked separately).
inline Mat3 body_rotation(const Vec8& q) { return rot_z(q(5)) * rot_y(q(4)) * rot_x(q(3)); }

inline Vec3 hanging() { return Vec3(0.0, 0.0, -1.0); }

struct Points {
  Vec3 body;
  Vec3 link1_com;
  Vec3 joint2;
  Vec3 link2_com;
  Mat3 R;
  Mat3 R_link2;
};

inline Points points(const Vec8& q, const amest::ModelConstants& c, double lc) {
  Points p;
  p.R = body_rotation(q);
  p.body = q.head<3>();
  const Vec3 axis1 = p.R * rot_y(q(6)) * hanging();
  p.R_link2 = p.R * rot_y(q(6) + q(7));
  const Vec3 axis2 = p.R_link2 * hanging();
  p.link1_com = p.body + c.lc1 * axis1;
  p.joint2 = p.body + c.l1 * axis1;
  p.link2_com = p.joint2 + lc * axis2;
  return p;
}

inline Vec3 vee(const Mat3& S) { return Vec3(S(2, 1) - S(1, 2), S(0, 2) - S(2, 0), S(1, 0) - S(0, 1)) / 2.0; }

/// Kinetic energy from finite-difference velocities of every point, with
/// link 2 a point mass m2 at distance lc plus the rotational term I_y2.
inline double kinetic_energy(const Vec8& q, const Vec8& qd, const amest::ModelConstants& c, double m2, double lc,
                             double h = 1e-5) {
  const Points a = points(q + h * qd, c, lc);
  const Points b = points(q - h * qd, c, lc);
  const Points mid = points(q, c, lc);
  auto rate = [&](const Vec3& pa, const Vec3& pb) { return Vec3((pa - pb) / (2.0 * h)); };
  const Vec3 v_body = rate(a.body, b.body);
  const Vec3 v_c1 = rate(a.link1_com, b.link1_com);
  const Vec3 v_c2 = rate(a.link2_com, b.link2_com);
  const Vec3 w_body = vee(mid.R.transpose() * (a.R - b.R) / (2.0 * h));
  const Vec3 w_link2 = vee(mid.R_link2.transpose() * (a.R_link2 - b.R_link2) / (2.0 * h));
  return 0.5 * c.m_b * v_body.squaredNorm() + 0.5 * w_body.dot(c.I_b.asDiagonal() * w_body) +
         0.5 * c.m1 * v_c1.squaredNorm() + 0.5 * m2 * v_c2.squaredNorm() + 0.5 * c.I_y2 * w_link2(1) * w_link2(1);
}

/// Inertia matrix as the Hessian of the kinetic energy in qd, by polarization.
inline Mat8 inertia(const Vec8& q, const amest::ModelConstants& c, double m2, double lc) {
  Mat8 M;
  for (int i = 0; i < 8; ++i) {
    const Vec8 ei = Vec8::Unit(i);
    M(i, i) = 2.0 * kinetic_energy(q, ei, c, m2, lc);
    for (int j = 0; j < i; ++j) {
      const Vec8 ej = Vec8::Unit(j);
      const double tij = kinetic_energy(q, ei + ej, c, m2, lc);
      M(i, j) = M(j, i) = tij - 0.5 * M(i, i) - 0.5 * M(j, j);
    }
  }
  return M;
}

inline double potential_energy(const Vec8& q, const amest::ModelConstants& c, double m2, double lc) {
  const Points p = points(q, c, lc);
  return c.g * (c.m_b * p.body(2) + c.m1 * p.link1_com(2) + m2 * p.link2_com(2));
}

/// Central-difference gradient of the potential.
inline Vec8 gravity(const Vec8& q, const amest::ModelConstants& c, double m2, double lc, double h = 1e-6) {
  Vec8 G;
  for (int i = 0; i < 8; ++i) {
    const Vec8 d = h * Vec8::Unit(i);
    G(i) = (potential_energy(q + d, c, m2, lc) - potential_energy(q - d, c, m2, lc)) / (2.0 * h);
  }
  return G;
}

inline double total_energy(const Vec8& q, const Vec8& qd, const amest::ModelConstants& c, double m2, double lc) {
  return kinetic_energy(q, qd, c, m2, lc) + potential_energy(q, c, m2, lc);
}

}  // namespace oracle

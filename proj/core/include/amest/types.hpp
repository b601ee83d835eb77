#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace amest {

inline constexpr int kDof = 8;

using Vec3 = Eigen::Vector3d;
using Vec8 = Eigen::Matrix<double, kDof, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat8 = Eigen::Matrix<double, kDof, kDof>;

// Index of each generalized coordinate inside q = [x y z | phi theta psi | eta1 eta2].
namespace idx {
inline constexpr int kX = 0;
inline constexpr int kY = 1;
inline constexpr int kZ = 2;
inline constexpr int kRoll = 3;
inline constexpr int kPitch = 4;
inline constexpr int kYaw = 5;
inline constexpr int kJoint1 = 6;
inline constexpr int kJoint2 = 7;
}  // namespace idx

/// Configuration and velocity of the combined vehicle + arm system.
///
/// Euler angles follow the Z-Y-X (yaw, pitch, roll) convention. Every
/// operation rejects states with |pitch| >= pi/2.
struct GeneralizedState {
  Vec8 q = Vec8::Zero();
  Vec8 qd = Vec8::Zero();
};

/// Known physical parameters of the vehicle and the arm.
struct ModelConstants {
  double m_b = 1.0;                         // vehicle mass [kg]
  Vec3 I_b = Vec3(0.013, 0.013, 0.021);     // diagonal body inertia [kg m^2]
  double m1 = 0.1;                          // link-1 mass [kg]
  double m2_link = 0.1;                     // bare link-2 mass [kg]
  double l1 = 0.2;                          // link-1 length [m]
  double l2 = 0.2;                          // link-2 length [m]
  double lc1 = 0.1;                         // link-1 COM offset from joint 1 [m]
  double I_y2 = 0.005;                      // link-2 rotational inertia about its joint axis [kg m^2]
  double g = 9.81;                          // gravity [m/s^2]
  // Small roll/pitch approximation with lc1 = 0 (onboard-implementation model).
  bool experiment_mode = false;

  /// Throws DomainError when a field violates its physical bounds.
  void validate() const;
};

/// The unknown link-2 parameter triple (m2, m2*lc, m2*lc^2).
struct UnknownParams {
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;

  static UnknownParams from_mass_and_com(double mass, double lc) {
    return {mass, mass * lc, mass * lc * lc};
  }
  Eigen::Vector3d as_vector() const { return {m2, m3, m4}; }
  static UnknownParams from_vector(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidStateError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class SingularDynamicsError : public Error {
 public:
  using Error::Error;
};

class InternalModelError : public Error {
 public:
  using Error::Error;
};

class GainConfigError : public Error {
 public:
  using Error::Error;
};

class NotIdentifiableError : public Error {
 public:
  using Error::Error;
};

class ThrustSingularityError : public Error {
 public:
  using Error::Error;
};

}  // namespace amest

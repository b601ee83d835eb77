#pragma once

#include <optional>

#include "amest/dynamics.hpp"
#include "amest/estimator.hpp"

namespace amest {

/// Desired configuration with its first two time derivatives.
struct TrajectoryPoint {
  Vec8 q = Vec8::Zero();
  Vec8 qd = Vec8::Zero();
  Vec8 qdd = Vec8::Zero();

  /// |q|^2 + |qd|^2 + |qdd|^2 <= rho.
  bool within_bound(double rho) const { return q.squaredNorm() + qd.squaredNorm() + qdd.squaredNorm() <= rho; }
};

/// Diagonal gains of the passivity-based law; entries must be > 0.
struct PassivityGains {
  Vec8 k = Vec8::Ones();
  Vec8 lambda = Vec8::Ones();

  void validate() const;
};

struct SlidingModeGains {
  Vec8 lambda = Vec8::Ones();
  Vec8 K1 = Vec8::Ones();
  Vec8 K2 = Vec8::Ones();
  double boundary_layer = 0.05;  // 0 recovers the discontinuous sign law

  void validate() const;
};

struct AsmcState {
  Vec8 delta_hat = Vec8::Zero();
  double m2_hat = 0.0;  // most recent mass extraction
};

struct AttitudeSetpoint {
  double phi_d = 0.0;
  double theta_d = 0.0;
};

using Regressor = Eigen::Matrix<double, kDof, 4>;

/// Y = [M2 qdd_d + C2 qd_d + G2 | M3 qdd_d + C3 qd_d + G3 | M4 qdd_d + C4 qd_d | M1 qdd_d + C1 qd_d + G1],
/// so that Y [m2 m3 m4 1]^T = M qdd_d + C qd_d + G.
Regressor regressor(const DecomposedDynamics& parts, const TrajectoryPoint& traj);
Regressor regressor(const GeneralizedState& state, const TrajectoryPoint& traj, const ModelConstants& consts);

inline Eigen::Vector4d augmented(const UnknownParams& xi) { return {xi.m2, xi.m3, xi.m4, 1.0}; }

/// tau = M_hat qdd_d + C_hat qd_d + G_hat - k (de_c + Lambda e_c), e_c = q - q_d.
Vec8 passivity_control(const DecomposedDynamics& parts, const GeneralizedState& state, const TrajectoryPoint& traj,
                       const UnknownParams& estimate, const PassivityGains& gains);
Vec8 passivity_control(const GeneralizedState& state, const TrajectoryPoint& traj, const EstimatorState& est,
                       const PassivityGains& gains, const ModelConstants& consts);

/// Maps the lateral force commands to roll/pitch setpoints under the small-angle
/// assumption. Throws ThrustSingularityError when |tau(3)| <= min_thrust.
AttitudeSetpoint attitude_allocation(const Vec8& tau, double psi, double min_thrust = 1e-6);

struct SlidingSurface {
  Vec8 s = Vec8::Zero();
  Vec8 qd_r = Vec8::Zero();
  Vec8 qdd_r = Vec8::Zero();
};

SlidingSurface sliding_surface(const GeneralizedState& state, const TrajectoryPoint& traj, const Vec8& lambda);

/// Parameters the sliding-mode model uses for a given mass: it only knows m2,
/// so the COM is taken at the bare link's midpoint l2 / 2.
UnknownParams asmc_model_params(double m2_hat, const ModelConstants& consts);

/// Componentwise sign(s) or, with a positive boundary layer, sat(s / width).
Vec8 switching_term(const Vec8& s, double boundary_layer);

/// Adaptation law d(delta_hat)/dt = -[(qd - qd_d) + Lambda (q - q_d)].
Vec8 asmc_adaptation_rate(const GeneralizedState& state, const TrajectoryPoint& traj, const SlidingModeGains& gains);

/// tau = M_hat qdd_r + C_hat qd_r + G_hat + delta_hat - K1 s - K2 sgn(s).
Vec8 asmc_torque(const DecomposedDynamics& parts, const GeneralizedState& state, const TrajectoryPoint& traj,
                 const AsmcState& asmc, const SlidingModeGains& gains, const ModelConstants& consts);

struct AsmcOutput {
  Vec8 tau = Vec8::Zero();
  AsmcState next;
};

/// Torque plus the adaptation term advanced by one explicit Euler step of dt.
AsmcOutput asmc_control(const GeneralizedState& state, const TrajectoryPoint& traj, const AsmcState& asmc,
                        const SlidingModeGains& gains, const ModelConstants& consts, double dt);

enum class MassExtraction {
  kNormalized,  // third-row terms divided by the previous total-mass estimate
  kLiteral,     // third-row terms used as printed
};

/// Extracts m2 from the vertical channel. Returns nullopt when the denominator
/// magnitude is at or below min_denominator; callers keep the previous estimate.
std::optional<double> asmc_mass_estimate(const GeneralizedState& state, const Vec8& qdd, const Vec8& tau,
                                         const AsmcState& asmc, const ModelConstants& consts,
                                         MassExtraction mode = MassExtraction::kNormalized,
                                         double min_denominator = 1e-3);

/// V2 = 1/2 de_c^T M de_c + 1/2 e_c^T k Lambda e_c with M at the true parameters.
double lyapunov_v2(const DecomposedDynamics& parts, const GeneralizedState& state, const TrajectoryPoint& traj,
                   const UnknownParams& truth, const PassivityGains& gains);
double lyapunov_v2(const GeneralizedState& state, const TrajectoryPoint& traj, const UnknownParams& truth,
                   const PassivityGains& gains, const ModelConstants& consts);

/// -de_c^T k de_c + de_c^T Y (xi_hat - xi).
double lyapunov_v2_rate(const DecomposedDynamics& parts, const GeneralizedState& state, const TrajectoryPoint& traj,
                        const UnknownParams& estimate, const UnknownParams& truth, const PassivityGains& gains);

}  // namespace amest

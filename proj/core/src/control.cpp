#include "amest/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace amest {
namespace {

void require_positive(const Vec8& v, const char* name) {
  for (int i = 0; i < kDof; ++i) {
    if (!(std::isfinite(v(i)) && v(i) > 0.0)) {
      std::ostringstream msg;
      msg << name << "[" << i << "] must be > 0 (got " << v(i) << ")";
      throw GainConfigError(msg.str());
    }
  }
}

}  // namespace

void PassivityGains::validate() const {
  require_positive(k, "k");
  require_positive(lambda, "Lambda");
}

void SlidingModeGains::validate() const {
  require_positive(lambda, "Lambda");
  require_positive(K1, "K1");
  require_positive(K2, "K2");
  if (!(std::isfinite(boundary_layer) && boundary_layer >= 0.0)) {
    throw GainConfigError("boundary_layer must be >= 0");
  }
}

Regressor regressor(const DecomposedDynamics& parts, const TrajectoryPoint& traj) {
  Regressor Y;
  Y.leftCols<3>() = parts.parameter_columns(traj.qdd, traj.qd);
  Y.col(3) = parts.known_column(traj.qdd, traj.qd);
  return Y;
}

Regressor regressor(const GeneralizedState& state, const TrajectoryPoint& traj, const ModelConstants& consts) {
  return regressor(decompose_dynamics(state, consts), traj);
}

Vec8 passivity_control(const DecomposedDynamics& parts, const GeneralizedState& state, const TrajectoryPoint& traj,
                       const UnknownParams& estimate, const PassivityGains& gains) {
  const Vec8 e = state.q - traj.q;
  const Vec8 de = state.qd - traj.qd;
  const Vec8 feedforward = regressor(parts, traj) * augmented(estimate);
  return feedforward - gains.k.cwiseProduct(de + gains.lambda.cwiseProduct(e));
}

Vec8 passivity_control(const GeneralizedState& state, const TrajectoryPoint& traj, const EstimatorState& est,
                       const PassivityGains& gains, const ModelConstants& consts) {
  return passivity_control(decompose_dynamics(state, consts), state, traj, est.params(), gains);
}

AttitudeSetpoint attitude_allocation(const Vec8& tau, double psi, double min_thrust) {
  const double thrust = tau(idx::kZ);
  if (!(std::abs(thrust) > min_thrust)) {
    std::ostringstream msg;
    msg << "vertical force " << thrust << " N is too small to allocate attitude";
    throw ThrustSingularityError(msg.str());
  }
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  const double fx = tau(idx::kX);
  const double fy = tau(idx::kY);
  AttitudeSetpoint out;
  out.theta_d = (c * fx + s * fy) / thrust;
  out.phi_d = (s * fx - c * fy) / thrust;
  return out;
}

SlidingSurface sliding_surface(const GeneralizedState& state, const TrajectoryPoint& traj, const Vec8& lambda) {
  SlidingSurface out;
  out.qd_r = traj.qd - lambda.cwiseProduct(state.q - traj.q);
  out.qdd_r = traj.qdd - lambda.cwiseProduct(state.qd - traj.qd);
  out.s = state.qd - out.qd_r;
  return out;
}

UnknownParams asmc_model_params(double m2_hat, const ModelConstants& consts) {
  return UnknownParams::from_mass_and_com(m2_hat, 0.5 * consts.l2);
}

Vec8 switching_term(const Vec8& s, double boundary_layer) {
  Vec8 out;
  for (int i = 0; i < kDof; ++i) {
    if (boundary_layer > 0.0) {
      out(i) = std::clamp(s(i) / boundary_layer, -1.0, 1.0);
    } else {
      out(i) = static_cast<double>((s(i) > 0.0) - (s(i) < 0.0));
    }
  }
  return out;
}

Vec8 asmc_adaptation_rate(const GeneralizedState& state, const TrajectoryPoint& traj, const SlidingModeGains& gains) {
  return -((state.qd - traj.qd) + gains.lambda.cwiseProduct(state.q - traj.q));
}

Vec8 asmc_torque(const DecomposedDynamics& parts, const GeneralizedState& state, const TrajectoryPoint& traj,
                 const AsmcState& asmc, const SlidingModeGains& gains, const ModelConstants& consts) {
  const SlidingSurface surf = sliding_surface(state, traj, gains.lambda);
  const DynamicsMatrices model = parts.reconstruct(asmc_model_params(asmc.m2_hat, consts));
  return model.M * surf.qdd_r + model.C * surf.qd_r + model.G + asmc.delta_hat - gains.K1.cwiseProduct(surf.s) -
         gains.K2.cwiseProduct(switching_term(surf.s, gains.boundary_layer));
}

AsmcOutput asmc_control(const GeneralizedState& state, const TrajectoryPoint& traj, const AsmcState& asmc,
                        const SlidingModeGains& gains, const ModelConstants& consts, double dt) {
  if (!(dt > 0.0)) throw DomainError("asmc_control requires dt > 0");
  AsmcOutput out;
  out.tau = asmc_torque(decompose_dynamics(state, consts), state, traj, asmc, gains, consts);
  out.next = asmc;
  out.next.delta_hat += dt * asmc_adaptation_rate(state, traj, gains);
  return out;
}

std::optional<double> asmc_mass_estimate(const GeneralizedState& state, const Vec8& qdd, const Vec8& tau,
                                         const AsmcState& asmc, const ModelConstants& consts, MassExtraction mode,
                                         double min_denominator) {
  const DecomposedDynamics parts = decompose_dynamics(state, consts);
  const DynamicsMatrices model = parts.reconstruct(asmc_model_params(asmc.m2_hat, consts));
  double row_terms = model.M.row(idx::kZ).dot(qdd) + model.C.row(idx::kZ).dot(state.qd);
  if (mode == MassExtraction::kNormalized) {
    row_terms /= consts.m_b + consts.m1 + asmc.m2_hat;
  }
  const double denominator = consts.g + row_terms;
  if (!(std::abs(denominator) > min_denominator)) return std::nullopt;
  const double total_mass = tau(idx::kZ) / denominator;
  return total_mass - (consts.m_b + consts.m1);
}

double lyapunov_v2(const DecomposedDynamics& parts, const GeneralizedState& state, const TrajectoryPoint& traj,
                   const UnknownParams& truth, const PassivityGains& gains) {
  const Vec8 e = state.q - traj.q;
  const Vec8 de = state.qd - traj.qd;
  const Mat8 M = parts.reconstruct(truth).M;
  return 0.5 * de.dot(M * de) + 0.5 * e.dot(gains.k.cwiseProduct(gains.lambda).cwiseProduct(e));
}

double lyapunov_v2(const GeneralizedState& state, const TrajectoryPoint& traj, const UnknownParams& truth,
                   const PassivityGains& gains, const ModelConstants& consts) {
  return lyapunov_v2(decompose_dynamics(state, consts), state, traj, truth, gains);
}

double lyapunov_v2_rate(const DecomposedDynamics& parts, const GeneralizedState& state, const TrajectoryPoint& traj,
                        const UnknownParams& estimate, const UnknownParams& truth, const PassivityGains& gains) {
  const Vec8 de = state.qd - traj.qd;
  const Eigen::Vector4d dxi = augmented(estimate) - augmented(truth);
  return -de.dot(gains.k.cwiseProduct(de)) + de.dot(regressor(parts, traj) * dxi);
}

}  // namespace amest

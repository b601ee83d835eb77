#pragma once

#include <Eigen/Cholesky>

#include "amest/dynamics.hpp"

namespace amest {

/// Gains of the auxiliary-state parameter estimator.
///
/// `damping` and `stiffness` must be symmetric positive definite and every
/// learning rate strictly positive; the constructor throws GainConfigError
/// otherwise.
class EstimatorGains {
 public:
  EstimatorGains(const Mat8& damping, const Mat8& stiffness, const Eigen::Vector3d& learning_rates);

  const Mat8& damping() const { return damping_; }
  const Mat8& stiffness() const { return stiffness_; }
  const Eigen::Vector3d& learning_rates() const { return gamma_; }

  /// Solves damping * x = rhs.
  Vec8 solve_damping(const Vec8& rhs) const { return damping_ldlt_.solve(rhs); }

 private:
  Mat8 damping_;
  Mat8 stiffness_;
  Eigen::Vector3d gamma_;
  Eigen::LDLT<Mat8> damping_ldlt_;
};

struct EstimatorState {
  Vec8 q_hat = Vec8::Zero();
  Eigen::Vector3d m_hat = Eigen::Vector3d::Zero();  // (m2, m3, m4) estimates

  UnknownParams params() const { return UnknownParams::from_vector(m_hat); }
};

/// One measurement of the plant, with the forcing term computed from it.
struct PlantSample {
  GeneralizedState state;
  Vec8 qdd = Vec8::Zero();
  Vec8 tau = Vec8::Zero();
  Vec8 U = Vec8::Zero();

  static PlantSample make(const GeneralizedState& state, const Vec8& qdd, const Vec8& tau,
                          const ModelConstants& consts);
  static PlantSample make(const DecomposedDynamics& parts, const GeneralizedState& state, const Vec8& qdd,
                          const Vec8& tau);
};

struct EstimatorDerivative {
  Vec8 q_hat_dot = Vec8::Zero();
  Eigen::Vector3d m_hat_dot = Eigen::Vector3d::Zero();
};

EstimatorDerivative estimator_derivative(const EstimatorState& est, const PlantSample& sample,
                                         const EstimatorGains& gains, const ModelConstants& consts);

/// Variant that reuses a decomposition already evaluated at sample.state.
EstimatorDerivative estimator_derivative(const EstimatorState& est, const PlantSample& sample,
                                         const EstimatorGains& gains, const DecomposedDynamics& parts);

/// V1 = 1/2 e^T C* e + sum_i (m_hat_i - m_i)^2 / (2 gamma_i), e = q_hat - q.
double lyapunov_v1(const EstimatorState& est, const UnknownParams& truth, const PlantSample& sample,
                   const EstimatorGains& gains);

/// Analytic time derivative -e^T K* e along the estimator flow.
double lyapunov_v1_rate(const EstimatorState& est, const PlantSample& sample, const EstimatorGains& gains);

struct PayloadEstimate {
  double payload_mass = 0.0;  // kg
  double lc = 0.0;            // m
};

/// Throws NotIdentifiableError while the mass estimate is at or below min_mass.
PayloadEstimate extract_payload(const EstimatorState& est, const ModelConstants& consts, double min_mass = 1e-3);

}  // namespace amest

#include "amest/estimator.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

namespace amest {
namespace {

void require_spd(const Mat8& m, const char* name) {
  if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw GainConfigError(std::string(name) + " must be finite and symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Mat8> eig(m, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw GainConfigError(std::string(name) + " must be positive definite");
  }
}

}  // namespace

EstimatorGains::EstimatorGains(const Mat8& damping, const Mat8& stiffness, const Eigen::Vector3d& learning_rates)
    : damping_(damping), stiffness_(stiffness), gamma_(learning_rates) {
  require_spd(damping_, "estimator damping gain C*");
  require_spd(stiffness_, "estimator stiffness gain K*");
  for (int i = 0; i < 3; ++i) {
    if (!(std::isfinite(gamma_(i)) && gamma_(i) > 0.0)) {
      std::ostringstream msg;
      msg << "learning rate gamma" << i + 1 << " must be > 0";
      throw GainConfigError(msg.str());
    }
  }
  damping_ldlt_.compute(damping_);
}

PlantSample PlantSample::make(const DecomposedDynamics& parts, const GeneralizedState& state, const Vec8& qdd,
                              const Vec8& tau) {
  return {state, qdd, tau, forcing_term(parts, state, qdd, tau)};
}

PlantSample PlantSample::make(const GeneralizedState& state, const Vec8& qdd, const Vec8& tau,
                              const ModelConstants& consts) {
  return make(decompose_dynamics(state, consts), state, qdd, tau);
}

EstimatorDerivative estimator_derivative(const EstimatorState& est, const PlantSample& sample,
                                         const EstimatorGains& gains, const DecomposedDynamics& parts) {
  const Vec8& q = sample.state.q;
  const Vec8& qd = sample.state.qd;
  const Eigen::Matrix<double, kDof, 3> w = parts.parameter_columns(sample.qdd, qd);

  // C* q_hat_dot = U + C* qd + K* (q - q_hat) - sum_i m_hat_i w_i
  const Vec8 rhs = sample.U + gains.damping() * qd + gains.stiffness() * (q - est.q_hat) - w * est.m_hat;

  EstimatorDerivative out;
  out.q_hat_dot = gains.solve_damping(rhs);
  const Vec8 e = est.q_hat - q;
  out.m_hat_dot = gains.learning_rates().cwiseProduct(w.transpose() * e);
  return out;
}

EstimatorDerivative estimator_derivative(const EstimatorState& est, const PlantSample& sample,
                                         const EstimatorGains& gains, const ModelConstants& consts) {
  return estimator_derivative(est, sample, gains, decompose_dynamics(sample.state, consts));
}

double lyapunov_v1(const EstimatorState& est, const UnknownParams& truth, const PlantSample& sample,
                   const EstimatorGains& gains) {
  const Vec8 e = est.q_hat - sample.state.q;
  const Eigen::Vector3d err = est.m_hat - truth.as_vector();
  return 0.5 * e.dot(gains.damping() * e) + 0.5 * err.cwiseProduct(err).cwiseQuotient(gains.learning_rates()).sum();
}

double lyapunov_v1_rate(const EstimatorState& est, const PlantSample& sample, const EstimatorGains& gains) {
  const Vec8 e = est.q_hat - sample.state.q;
  return -e.dot(gains.stiffness() * e);
}

PayloadEstimate extract_payload(const EstimatorState& est, const ModelConstants& consts, double min_mass) {
  const double m2 = est.m_hat(0);
  if (!(m2 > min_mass)) {
    std::ostringstream msg;
    msg << "link-2 mass estimate " << m2 << " kg is not yet identifiable (threshold " << min_mass << " kg)";
    throw NotIdentifiableError(msg.str());
  }
  return {m2 - consts.m2_link, est.m_hat(1) / m2};
}

}  // namespace amest

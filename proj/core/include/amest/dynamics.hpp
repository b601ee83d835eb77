#pragma once

#include <array>

#include "amest/types.hpp"

namespace amest {

/// M(q), C(q, qd) and G(q) of  M qdd + C qd + G = tau.
struct DynamicsMatrices {
  Mat8 M = Mat8::Zero();
  Mat8 C = Mat8::Zero();
  Vec8 G = Vec8::Zero();
};

/// Affine split of the dynamics in the unknown parameters:
///   M = M[0] + m2 M[1] + m3 M[2] + m4 M[3]
///   C = C[0] + m2 C[1] + m3 C[2] + m4 C[3]
///   G = G[0] + m2 G[1] + m3 G[2]
/// Index 0 holds the known-parameter part.
struct DecomposedDynamics {
  std::array<Mat8, 4> M;
  std::array<Mat8, 4> C;
  std::array<Vec8, 3> G;

  DynamicsMatrices reconstruct(const UnknownParams& xi) const;

  /// Column w_i = M_i qdd + C_i qd + G_i for i = 1..3 (G_3 term is zero).
  /// These are the vectors multiplying m2, m3 and m4.
  Eigen::Matrix<double, kDof, 3> parameter_columns(const Vec8& qdd, const Vec8& qd) const;

  /// M_0 qdd + C_0 qd + G_0.
  Vec8 known_column(const Vec8& qdd, const Vec8& qd) const;
};

/// Throws InvalidStateError for non-finite input or |pitch| >= pi/2.
void check_state(const GeneralizedState& state);

DynamicsMatrices synthesize_dynamics(const GeneralizedState& state, const ModelConstants& consts,
                                     const UnknownParams& xi);

/// With verify_affinity set, the split is cross-checked against differences of
/// directly synthesized dynamics and an InternalModelError is thrown when they
/// disagree by more than 1e-9.
DecomposedDynamics decompose_dynamics(const GeneralizedState& state, const ModelConstants& consts,
                                      bool verify_affinity = false);

/// qdd = M^-1 (tau - C qd - G). Throws SingularDynamicsError when cond(M) > 1e12.
Vec8 forward_dynamics(const GeneralizedState& state, const Vec8& tau, const ModelConstants& consts,
                      const UnknownParams& xi);

/// Same as forward_dynamics, from an already evaluated decomposition.
Vec8 forward_dynamics(const DecomposedDynamics& parts, const GeneralizedState& state, const Vec8& tau,
                      const UnknownParams& xi);

/// U = tau - M_0 qdd - C_0 qd - G_0.
Vec8 forcing_term(const GeneralizedState& state, const Vec8& qdd, const Vec8& tau,
                  const ModelConstants& consts);
Vec8 forcing_term(const DecomposedDynamics& parts, const GeneralizedState& state, const Vec8& qdd,
                  const Vec8& tau);

/// Inertia about the link-2 joint axis after attaching a point payload at the tip.
double apply_parallel_axis(double I_y2, double m_payload, double l2);

double kinetic_energy(const GeneralizedState& state, const ModelConstants& consts, const UnknownParams& xi);

/// Zero datum at z = 0.
double potential_energy(const GeneralizedState& state, const ModelConstants& consts, const UnknownParams& xi);

double total_energy(const GeneralizedState& state, const ModelConstants& consts, const UnknownParams& xi);

/// Body rotation R = Rz(psi) Ry(theta) Rx(phi) (yaw only in experiment mode).
Mat3 body_rotation(const Vec8& q, const ModelConstants& consts);

}  // namespace amest

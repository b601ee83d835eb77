#include "amest/dynamics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/AutoDiff>

#include <cmath>
#include <numbers>
#include <sstream>

namespace amest {
namespace {

// Only the Euler angles and the joint angles enter M and the angular part of
// the potential; positions enter G through a constant z-gradient.
constexpr int kAngles = 5;
constexpr int kFirstAngle = idx::kRoll;

using Deriv = Eigen::Matrix<double, kAngles, 1>;
using AD = Eigen::AutoDiffScalar<Deriv>;

template <typename T>
using Mat3T = Eigen::Matrix<T, 3, 3>;
template <typename T>
using Vec3T = Eigen::Matrix<T, 3, 1>;
template <typename T>
using Jac3T = Eigen::Matrix<T, 3, kDof>;
template <typename T>
using Mat8T = Eigen::Matrix<T, kDof, kDof>;

template <typename T>
Mat3T<T> rotation(const T& phi, const T& theta, const T& psi, bool small_angle) {
  using std::cos;
  using std::sin;
  const T cs = cos(psi);
  const T ss = sin(psi);
  Mat3T<T> R;
  if (small_angle) {
    R << cs, -ss, T(0.0), ss, cs, T(0.0), T(0.0), T(0.0), T(1.0);
    return R;
  }
  const T cf = cos(phi);
  const T sf = sin(phi);
  const T ct = cos(theta);
  const T st = sin(theta);
  R << cs * ct, cs * st * sf - ss * cf, cs * st * cf + ss * sf,  //
      ss * ct, ss * st * sf + cs * cf, ss * st * cf - cs * sf,   //
      -st, ct * sf, ct * cf;
  return R;
}

// Body angular velocity = W(phi, theta) * [phi_dot theta_dot psi_dot].
template <typename T>
Mat3T<T> euler_rate_map(const T& phi, const T& theta, bool small_angle) {
  using std::cos;
  using std::sin;
  if (small_angle) return Mat3T<T>::Identity();
  const T cf = cos(phi);
  const T sf = sin(phi);
  const T ct = cos(theta);
  const T st = sin(theta);
  Mat3T<T> W;
  W << T(1.0), T(0.0), -st,  //
      T(0.0), cf, sf * ct,   //
      T(0.0), -sf, cf * ct;
  return W;
}

template <typename T>
Mat3T<T> skew(const Vec3T<T>& r) {
  Mat3T<T> S;
  S << T(0.0), -r(2), r(1), r(2), T(0.0), -r(0), -r(1), r(0), T(0.0);
  return S;
}

// Unit link axis in the body frame after rotating by `angle` about body y;
// angle 0 points along body -z.
template <typename T>
Vec3T<T> link_axis(const T& angle) {
  using std::cos;
  using std::sin;
  return Vec3T<T>(-sin(angle), T(0.0), -cos(angle));
}

template <typename T>
Vec3T<T> link_axis_derivative(const T& angle) {
  using std::cos;
  using std::sin;
  return Vec3T<T>(-cos(angle), T(0.0), sin(angle));
}

// Maps qd to the inertial velocity of a point fixed at body position r(eta).
template <typename T>
Jac3T<T> point_jacobian(const Mat3T<T>& R, const Mat3T<T>& W, const Vec3T<T>& r, const Vec3T<T>& dr_deta1,
                        const Vec3T<T>& dr_deta2, bool translational) {
  Jac3T<T> J = Jac3T<T>::Zero();
  if (translational) J.template block<3, 3>(0, 0) = Mat3T<T>::Identity();
  J.template block<3, 3>(0, 3) = -R * skew<T>(r) * W;
  J.col(6) = R * dr_deta1;
  J.col(7) = R * dr_deta2;
  return J;
}

// Inertia parts and the angle-dependent potential parts (per unit g).
template <typename T>
struct ModelParts {
  std::array<Mat8T<T>, 4> M;
  std::array<T, 3> height;  // known-mass weighted height, joint-2 height, unit link-2 axis height
};

template <typename T>
ModelParts<T> model_parts(const std::array<T, kAngles>& a, const ModelConstants& c) {
  const bool small = c.experiment_mode;
  const T& phi = a[0];
  const T& theta = a[1];
  const T& psi = a[2];
  const T& eta1 = a[3];
  const T& eta2 = a[4];
  const double lc1 = small ? 0.0 : c.lc1;

  const Mat3T<T> R = rotation<T>(phi, theta, psi, small);
  const Mat3T<T> W = euler_rate_map<T>(phi, theta, small);
  const Vec3T<T> zero = Vec3T<T>::Zero();

  const Vec3T<T> d1 = link_axis<T>(eta1);
  const Vec3T<T> dd1 = link_axis_derivative<T>(eta1);
  const T beta = eta1 + eta2;
  const Vec3T<T> d12 = link_axis<T>(beta);
  const Vec3T<T> dd12 = link_axis_derivative<T>(beta);

  const Vec3T<T> r_c1 = d1 * T(lc1);
  const Vec3T<T> r_j2 = d1 * T(c.l1);

  const Jac3T<T> J_c1 = point_jacobian<T>(R, W, r_c1, dd1 * T(lc1), zero, true);
  const Jac3T<T> J_j2 = point_jacobian<T>(R, W, r_j2, dd1 * T(c.l1), zero, true);
  const Jac3T<T> J_axis = point_jacobian<T>(R, W, d12, dd12, dd12, false);

  Jac3T<T> J_w = Jac3T<T>::Zero();
  J_w.template block<3, 3>(0, 3) = W;
  Eigen::Matrix<T, 1, kDof> j_link2 = Eigen::Matrix<T, 1, kDof>::Zero();
  j_link2.template segment<3>(3) = W.row(1);
  j_link2(6) = T(1.0);
  j_link2(7) = T(1.0);

  Mat3T<T> I_body = Mat3T<T>::Zero();
  I_body(0, 0) = T(c.I_b(0));
  I_body(1, 1) = T(c.I_b(1));
  I_body(2, 2) = T(c.I_b(2));

  ModelParts<T> p;
  Mat8T<T> M0 = Mat8T<T>::Zero();
  M0.template block<3, 3>(0, 0) = Mat3T<T>::Identity() * T(c.m_b);
  M0 += T(c.m1) * J_c1.transpose() * J_c1;
  M0 += J_w.transpose() * I_body * J_w;
  M0 += T(c.I_y2) * j_link2.transpose() * j_link2;
  p.M[0] = M0;
  p.M[1] = J_j2.transpose() * J_j2;
  p.M[2] = J_j2.transpose() * J_axis + J_axis.transpose() * J_j2;
  p.M[3] = J_axis.transpose() * J_axis;

  p.height[0] = T(c.m1) * R.row(2).dot(r_c1);
  p.height[1] = R.row(2).dot(r_j2);
  p.height[2] = R.row(2).dot(d12);
  return p;
}

std::array<double, kAngles> angles_of(const Vec8& q) {
  return {q(3), q(4), q(5), q(6), q(7)};
}

// Evaluated parts with first derivatives with respect to the five angles.
struct DifferentiatedParts {
  std::array<Mat8, 4> M;
  std::array<std::array<Mat8, kAngles>, 4> dM;
  std::array<double, 3> height;
  std::array<Deriv, 3> dheight;
};

DifferentiatedParts differentiate(const Vec8& q, const ModelConstants& c) {
  std::array<AD, kAngles> a;
  for (int i = 0; i < kAngles; ++i) a[i] = AD(q(kFirstAngle + i), kAngles, i);
  const ModelParts<AD> parts = model_parts<AD>(a, c);

  DifferentiatedParts out;
  for (int m = 0; m < 4; ++m) {
    for (int r = 0; r < kDof; ++r) {
      for (int col = 0; col < kDof; ++col) {
        const AD& e = parts.M[m](r, col);
        out.M[m](r, col) = e.value();
        const auto& d = e.derivatives();
        for (int k = 0; k < kAngles; ++k) out.dM[m][k](r, col) = d.size() == 0 ? 0.0 : d(k);
      }
    }
  }
  for (int h = 0; h < 3; ++h) {
    out.height[h] = parts.height[h].value();
    const auto& d = parts.height[h].derivatives();
    out.dheight[h] = d.size() == 0 ? Deriv::Zero() : Deriv(d);
  }
  return out;
}

// Christoffel construction: C = 1/2 (Mdot + B - B^T), B.col(j) = dM/dq_j * qd.
Mat8 christoffel(const std::array<Mat8, kAngles>& dM, const Vec8& qd) {
  Mat8 Mdot = Mat8::Zero();
  Mat8 B = Mat8::Zero();
  for (int k = 0; k < kAngles; ++k) {
    Mdot += dM[k] * qd(kFirstAngle + k);
    B.col(kFirstAngle + k) = dM[k] * qd;
  }
  return 0.5 * (Mdot + B - B.transpose());
}

Vec8 gravity_from_height(const Deriv& dheight, double z_weight, double g) {
  Vec8 G = Vec8::Zero();
  G(idx::kZ) = g * z_weight;
  G.segment<kAngles>(kFirstAngle) = g * dheight;
  return G;
}

}  // namespace

void ModelConstants::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw DomainError(std::string("model constant '") + name + "' must be finite and > 0");
    }
  };
  positive(m_b, "m_b");
  positive(I_b(0), "I_b.xx");
  positive(I_b(1), "I_b.yy");
  positive(I_b(2), "I_b.zz");
  positive(m1, "m1");
  positive(m2_link, "m2_link");
  positive(l1, "l1");
  positive(l2, "l2");
  positive(I_y2, "I_y2");
  positive(g, "g");
  if (!(std::isfinite(lc1) && lc1 >= 0.0 && lc1 <= l1)) {
    throw DomainError("model constant 'lc1' must lie in [0, l1]");
  }
}

void check_state(const GeneralizedState& state) {
  if (!state.q.allFinite() || !state.qd.allFinite()) {
    throw InvalidStateError("state contains non-finite components");
  }
  if (std::abs(state.q(idx::kPitch)) >= std::numbers::pi / 2.0) {
    std::ostringstream msg;
    msg << "pitch " << state.q(idx::kPitch) << " rad is at or beyond gimbal lock";
    throw InvalidStateError(msg.str());
  }
}

DynamicsMatrices DecomposedDynamics::reconstruct(const UnknownParams& xi) const {
  DynamicsMatrices d;
  d.M = M[0] + xi.m2 * M[1] + xi.m3 * M[2] + xi.m4 * M[3];
  d.C = C[0] + xi.m2 * C[1] + xi.m3 * C[2] + xi.m4 * C[3];
  d.G = G[0] + xi.m2 * G[1] + xi.m3 * G[2];
  return d;
}

Eigen::Matrix<double, kDof, 3> DecomposedDynamics::parameter_columns(const Vec8& qdd, const Vec8& qd) const {
  Eigen::Matrix<double, kDof, 3> w;
  w.col(0) = M[1] * qdd + C[1] * qd + G[1];
  w.col(1) = M[2] * qdd + C[2] * qd + G[2];
  w.col(2) = M[3] * qdd + C[3] * qd;
  return w;
}

Vec8 DecomposedDynamics::known_column(const Vec8& qdd, const Vec8& qd) const {
  return M[0] * qdd + C[0] * qd + G[0];
}

DynamicsMatrices synthesize_dynamics(const GeneralizedState& state, const ModelConstants& consts,
                                     const UnknownParams& xi) {
  check_state(state);
  const DifferentiatedParts p = differentiate(state.q, consts);
  const std::array<double, 4> w{1.0, xi.m2, xi.m3, xi.m4};

  DynamicsMatrices out;
  std::array<Mat8, kAngles> dM;
  for (auto& m : dM) m.setZero();
  for (int i = 0; i < 4; ++i) {
    out.M += w[i] * p.M[i];
    for (int k = 0; k < kAngles; ++k) dM[k] += w[i] * p.dM[i][k];
  }
  out.C = christoffel(dM, state.qd);

  const Deriv dheight = p.dheight[0] + xi.m2 * p.dheight[1] + xi.m3 * p.dheight[2];
  const double z_weight = consts.m_b + consts.m1 + xi.m2;
  out.G = gravity_from_height(dheight, z_weight, consts.g);
  return out;
}

DecomposedDynamics decompose_dynamics(const GeneralizedState& state, const ModelConstants& consts,
                                      bool verify_affinity) {
  check_state(state);
  const DifferentiatedParts p = differentiate(state.q, consts);

  DecomposedDynamics d;
  for (int i = 0; i < 4; ++i) {
    d.M[i] = p.M[i];
    d.C[i] = christoffel(p.dM[i], state.qd);
  }
  d.G[0] = gravity_from_height(p.dheight[0], consts.m_b + consts.m1, consts.g);
  d.G[1] = gravity_from_height(p.dheight[1], 1.0, consts.g);
  d.G[2] = gravity_from_height(p.dheight[2], 0.0, consts.g);

  if (verify_affinity) {
    const DynamicsMatrices base = synthesize_dynamics(state, consts, {0.0, 0.0, 0.0});
    const std::array<UnknownParams, 3> basis{UnknownParams{1.0, 0.0, 0.0}, UnknownParams{0.0, 1.0, 0.0},
                                             UnknownParams{0.0, 0.0, 1.0}};
    double worst = (base.M - d.M[0]).cwiseAbs().maxCoeff();
    worst = std::max(worst, (base.C - d.C[0]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (base.G - d.G[0]).cwiseAbs().maxCoeff());
    for (int i = 0; i < 3; ++i) {
      const DynamicsMatrices unit = synthesize_dynamics(state, consts, basis[i]);
      worst = std::max(worst, (unit.M - base.M - d.M[i + 1]).cwiseAbs().maxCoeff());
      worst = std::max(worst, (unit.C - base.C - d.C[i + 1]).cwiseAbs().maxCoeff());
      const Vec8 dG = unit.G - base.G;
      const Vec8 expected = i < 2 ? d.G[i + 1] : Vec8::Zero();
      worst = std::max(worst, (dG - expected).cwiseAbs().maxCoeff());
    }
    if (worst > 1e-9) {
      std::ostringstream msg;
      msg << "dynamics are not affine in the unknown parameters (deviation " << worst << ")";
      throw InternalModelError(msg.str());
    }
  }
  return d;
}

Vec8 forward_dynamics(const DecomposedDynamics& parts, const GeneralizedState& state, const Vec8& tau,
                      const UnknownParams& xi) {
  const DynamicsMatrices d = parts.reconstruct(xi);
  const Eigen::SelfAdjointEigenSolver<Mat8> eig(d.M, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    std::ostringstream msg;
    msg << "inertia matrix is singular or ill-conditioned (eigenvalues " << lo << ", " << hi << ")";
    throw SingularDynamicsError(msg.str());
  }
  return d.M.ldlt().solve(tau - d.C * state.qd - d.G);
}

Vec8 forward_dynamics(const GeneralizedState& state, const Vec8& tau, const ModelConstants& consts,
                      const UnknownParams& xi) {
  return forward_dynamics(decompose_dynamics(state, consts), state, tau, xi);
}

Vec8 forcing_term(const DecomposedDynamics& parts, const GeneralizedState& state, const Vec8& qdd,
                  const Vec8& tau) {
  return tau - parts.known_column(qdd, state.qd);
}

Vec8 forcing_term(const GeneralizedState& state, const Vec8& qdd, const Vec8& tau, const ModelConstants& consts) {
  return forcing_term(decompose_dynamics(state, consts), state, qdd, tau);
}

double apply_parallel_axis(double I_y2, double m_payload, double l2) {
  if (I_y2 < 0.0 || m_payload < 0.0 || l2 < 0.0) {
    throw DomainError("parallel-axis inputs must be nonnegative");
  }
  return I_y2 + m_payload * l2 * l2;
}

double kinetic_energy(const GeneralizedState& state, const ModelConstants& consts, const UnknownParams& xi) {
  check_state(state);
  const ModelParts<double> p = model_parts<double>(angles_of(state.q), consts);
  const Mat8 M = p.M[0] + xi.m2 * p.M[1] + xi.m3 * p.M[2] + xi.m4 * p.M[3];
  return 0.5 * state.qd.dot(M * state.qd);
}

double potential_energy(const GeneralizedState& state, const ModelConstants& consts, const UnknownParams& xi) {
  check_state(state);
  const ModelParts<double> p = model_parts<double>(angles_of(state.q), consts);
  const double z = state.q(idx::kZ);
  const double height = (consts.m_b + consts.m1 + xi.m2) * z + p.height[0] + xi.m2 * p.height[1] +
                        xi.m3 * p.height[2];
  return consts.g * height;
}

double total_energy(const GeneralizedState& state, const ModelConstants& consts, const UnknownParams& xi) {
  return kinetic_energy(state, consts, xi) + potential_energy(state, consts, xi);
}

Mat3 body_rotation(const Vec8& q, const ModelConstants& consts) {
  return rotation<double>(q(3), q(4), q(5), consts.experiment_mode);
}

}  // namespace amest

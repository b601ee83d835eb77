#include "amest/validation.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "amest/integrator.hpp"

namespace amest {
namespace {

std::string describe(const GeneralizedState& s) {
  std::ostringstream out;
  out.precision(6);
  out << "q = [" << s.q.transpose() << "], qd = [" << s.qd.transpose() << "]";
  return out.str();
}

// Tracks the worst value of one property across samples.
class Tracker {
 public:
  Tracker(std::string name, double limit, bool lower_bound = false) {
    r_.name = std::move(name);
    r_.limit = limit;
    r_.lower_bound = lower_bound;
    r_.worst = lower_bound ? std::numeric_limits<double>::infinity() : 0.0;
  }

  void observe(double value, std::size_t sample, const GeneralizedState& s) {
    const bool worse = r_.lower_bound ? !(value >= r_.worst) : !(value <= r_.worst);
    if (!seen_ || worse) {
      r_.worst = value;
      r_.worst_sample = sample;
      r_.worst_detail = describe(s);
      seen_ = true;
    }
  }

  PropertyResult finish() {
    r_.passed = seen_ && (r_.lower_bound ? r_.worst > r_.limit : r_.worst <= r_.limit);
    return r_;
  }

 private:
  PropertyResult r_;
  bool seen_ = false;
};

Vec8 random_vector(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec8 v;
  for (int i = 0; i < kDof; ++i) v(i) = u(rng);
  return v;
}

}  // namespace

bool ValidationReport::all_passed() const {
  for (const PropertyResult& p : properties) {
    if (!p.passed) return false;
  }
  return !properties.empty();
}

GeneralizedState random_state(std::mt19937_64& rng, double max_rate) {
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  std::uniform_real_distribution<double> tilt(-1.2, 1.2);
  std::uniform_real_distribution<double> turn(-std::numbers::pi, std::numbers::pi);
  GeneralizedState s;
  s.q << pos(rng), pos(rng), pos(rng), tilt(rng), tilt(rng), turn(rng), turn(rng), turn(rng);
  s.qd = random_vector(rng, -max_rate, max_rate);
  return s;
}

UnknownParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  std::uniform_real_distribution<double> com(0.02, 0.3);
  return UnknownParams::from_mass_and_com(mass(rng), com(rng));
}

Mat8 inertia_rate_fd(const GeneralizedState& state, const ModelConstants& consts, const UnknownParams& xi,
                     double h) {
  GeneralizedState plus = state;
  GeneralizedState minus = state;
  plus.q += h * state.qd;
  minus.q -= h * state.qd;
  return (synthesize_dynamics(plus, consts, xi).M - synthesize_dynamics(minus, consts, xi).M) / (2.0 * h);
}

double free_run_energy_drift(const GeneralizedState& start, const ModelConstants& consts, const UnknownParams& xi,
                             double duration, double dt) {
  ModelConstants free = consts;
  free.g = 0.0;
  using State = Eigen::Matrix<double, 2 * kDof, 1>;
  const auto f = [&](double, const State& x) -> State {
    const GeneralizedState s{x.head<kDof>(), x.tail<kDof>()};
    State dx;
    dx << s.qd, forward_dynamics(s, Vec8::Zero(), free, xi);
    return dx;
  };
  State x;
  x << start.q, start.qd;
  const double e0 = total_energy(start, free, xi);
  double worst = 0.0;
  const auto steps = static_cast<long>(std::llround(duration / dt));
  for (long k = 0; k < steps; ++k) {
    x = rk4_step<State>(f, static_cast<double>(k) * dt, x, dt);
    const double e = total_energy({x.head<kDof>(), x.tail<kDof>()}, free, xi);
    worst = std::max(worst, std::abs(e - e0) / std::abs(e0));
  }
  return worst;
}

ValidationReport run_validation(const ModelConstants& consts, const ValidationOptions& opt) {
  consts.validate();
  std::mt19937_64 rng(opt.seed);

  Tracker symmetry("inertia-symmetry", 1e-10);
  Tracker definite("inertia-positive-definite", 0.0, true);
  Tracker skew("skew-symmetry", 1e-6);
  Tracker mdot("coriolis-mdot-identity", 1e-6);
  Tracker affinity("affinity", 1e-10);
  Tracker gravity("gravity-gradient", 1e-6);
  Tracker regress("regressor-identity", 1e-10);
  Tracker est_residual("estimator-error-dynamics", 1e-9);
  Tracker loop_residual("closed-loop-error-dynamics", 1e-9);
  Tracker v1_rate("lyapunov-rate", 1e-5);

  const Mat8 fault = Mat8::Constant(opt.coriolis_fault);
  const EstimatorGains gains(10.0 * Mat8::Identity(), 20.0 * Mat8::Identity(), Eigen::Vector3d(0.2, 0.1, 0.1));
  const PassivityGains pg = Scenario::default_passivity_gains();
  double max_skew = 0.0;

  for (std::size_t n = 0; n < opt.samples; ++n) {
    const GeneralizedState s = random_state(rng);
    const UnknownParams xi = random_params(rng);
    const UnknownParams xi_hat = random_params(rng);

    const DecomposedDynamics parts = decompose_dynamics(s, consts);
    const DynamicsMatrices dyn = synthesize_dynamics(s, consts, xi);

    symmetry.observe((dyn.M - dyn.M.transpose()).cwiseAbs().maxCoeff(), n, s);
    const Eigen::SelfAdjointEigenSolver<Mat8> eig(dyn.M, Eigen::EigenvaluesOnly);
    definite.observe(eig.eigenvalues().minCoeff(), n, s);

    // Coriolis checks, with the optional fault added.
    const Mat8 C = dyn.C + fault;
    const Mat8 Mdot = inertia_rate_fd(s, consts, xi);
    const Vec8 x = random_vector(rng, -1.0, 1.0);
    const double skew_value = std::abs(x.dot((Mdot - 2.0 * C) * x)) / x.squaredNorm();
    max_skew = std::max(max_skew, skew_value);
    skew.observe(skew_value, n, s);
    mdot.observe((Mdot - C - C.transpose()).cwiseAbs().maxCoeff(), n, s);

    const DynamicsMatrices rebuilt = parts.reconstruct(xi);
    affinity.observe(std::max({(rebuilt.M - dyn.M).cwiseAbs().maxCoeff(), (rebuilt.C - dyn.C).cwiseAbs().maxCoeff(),
                               (rebuilt.G - dyn.G).cwiseAbs().maxCoeff()}),
                     n, s);

    Vec8 grad;
    constexpr double h = 1e-6;
    for (int i = 0; i < kDof; ++i) {
      GeneralizedState plus = s;
      GeneralizedState minus = s;
      plus.q(i) += h;
      minus.q(i) -= h;
      grad(i) = (potential_energy(plus, consts, xi) - potential_energy(minus, consts, xi)) / (2.0 * h);
    }
    gravity.observe((grad - dyn.G).cwiseAbs().maxCoeff(), n, s);

    TrajectoryPoint traj;
    traj.q = s.q + random_vector(rng, -0.2, 0.2);
    traj.qd = random_vector(rng, -1.0, 1.0);
    traj.qdd = random_vector(rng, -1.0, 1.0);
    const Regressor Y = regressor(parts, traj);
    const Vec8 direct = dyn.M * traj.qdd + dyn.C * traj.qd + dyn.G;
    regress.observe((Y * augmented(xi) - direct).cwiseAbs().maxCoeff(), n, s);

    // Closed-loop error dynamics under the passivity law.
    const Vec8 tau = passivity_control(parts, s, traj, xi_hat, pg);
    const Vec8 qdd = forward_dynamics(parts, s, tau, xi);
    const Vec8 e = s.q - traj.q;
    const Vec8 de = s.qd - traj.qd;
    const Vec8 dde = qdd - traj.qdd;
    const Vec8 lhs = dyn.M * dde + (dyn.C + Mat8(pg.k.asDiagonal())) * de + pg.k.cwiseProduct(pg.lambda.cwiseProduct(e));
    const Vec8 rhs = Y * (augmented(xi_hat) - augmented(xi));
    loop_residual.observe((lhs - rhs).cwiseAbs().maxCoeff(), n, s);

    // Estimator error dynamics C* e_dot + K* e + W (m_hat - m) = 0.
    EstimatorState est;
    est.q_hat = s.q + random_vector(rng, -0.3, 0.3);
    est.m_hat = xi_hat.as_vector();
    const PlantSample sample = PlantSample::make(parts, s, qdd, tau);
    const EstimatorDerivative d = estimator_derivative(est, sample, gains, parts);
    const Vec8 err = est.q_hat - s.q;
    const Vec8 derr = d.q_hat_dot - s.qd;
    const Vec8 residual = gains.damping() * derr + gains.stiffness() * err +
                          parts.parameter_columns(qdd, s.qd) * (est.m_hat - xi.as_vector());
    est_residual.observe(residual.cwiseAbs().maxCoeff(), n, s);

    // Analytic dV1/dt against a central difference along the joint flow.
    constexpr double hv = 1e-6;
    auto v1_at = [&](double sign) {
      EstimatorState e2 = est;
      e2.q_hat += sign * hv * d.q_hat_dot;
      e2.m_hat += sign * hv * d.m_hat_dot;
      PlantSample moved = sample;
      moved.state.q += sign * hv * s.qd;
      return lyapunov_v1(e2, xi, moved, gains);
    };
    const double fd = (v1_at(1.0) - v1_at(-1.0)) / (2.0 * hv);
    const double analytic = lyapunov_v1_rate(est, sample, gains);
    v1_rate.observe(std::abs(fd - analytic) / std::max(std::abs(analytic), 1e-12), n, s);
  }

  ValidationReport report;
  for (Tracker* t : {&symmetry, &definite, &skew, &mdot, &affinity, &gravity, &regress, &est_residual,
                     &loop_residual, &v1_rate}) {
    report.properties.push_back(t->finish());
  }
  report.max_skew_residual = max_skew;

  {
    Tracker energy("energy-conservation", 1e-6);
    GeneralizedState start = random_state(rng, 0.5);
    start.q(idx::kRoll) *= 0.5;
    start.q(idx::kPitch) *= 0.5;
    energy.observe(free_run_energy_drift(start, consts, random_params(rng), opt.energy_duration, 1e-3), 0, start);
    report.properties.push_back(energy.finish());
  }

  {
    // V1 along a noise-free closed-loop run must not increase.
    Tracker mono("lyapunov-monotonicity", 1e-8);
    Scenario sc;
    sc.consts = consts;
    sc.duration = opt.lyapunov_duration;
    const SimLog log = run(sc);
    for (std::size_t k = 1; k < log.rows.size(); ++k) {
      const GeneralizedState at{log.rows[k].q, log.rows[k].qd};
      mono.observe(std::max(0.0, log.rows[k].V1 - log.rows[k - 1].V1), k, at);
    }
    report.properties.push_back(mono.finish());
  }
  return report;
}

}  // namespace amest

#include "amest/sim.hpp"

#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

#include "amest/integrator.hpp"

namespace amest {
namespace {

// Coupled state: q, qd, q_hat, m_hat, delta_hat.
constexpr int kCoupled = 8 + 8 + 8 + 3 + 8;
using Coupled = Eigen::Matrix<double, kCoupled, 1>;

Coupled pack(const SimState& s) {
  Coupled x;
  x << s.plant.q, s.plant.qd, s.estimator.q_hat, s.estimator.m_hat, s.asmc.delta_hat;
  return x;
}

GeneralizedState plant_of(const Coupled& x) { return {x.segment<8>(0), x.segment<8>(8)}; }

EstimatorState estimator_of(const Coupled& x) { return {x.segment<8>(16), x.segment<3>(24)}; }

struct Noise {
  Vec8 q = Vec8::Zero();
  Vec8 qd = Vec8::Zero();
  Vec8 qdd = Vec8::Zero();
  bool active = false;
};

Noise draw_noise(const Eigen::Vector3d& sigma, std::mt19937_64& rng) {
  Noise n;
  if (!(sigma.array() > 0.0).any()) return n;
  n.active = true;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < kDof; ++i) n.q(i) = sigma(0) * normal(rng);
  for (int i = 0; i < kDof; ++i) n.qd(i) = sigma(1) * normal(rng);
  for (int i = 0; i < kDof; ++i) n.qdd(i) = sigma(2) * normal(rng);
  return n;
}

UnknownParams control_params(const Scenario& sc, const SimState& s) {
  switch (sc.controller) {
    case ControllerKind::kPassivityAdaptive:
      return s.estimator.params();
    case ControllerKind::kPassivityFixed:
      return sc.initial_estimate;
    case ControllerKind::kAsmc:
      return asmc_model_params(s.asmc.m2_hat, sc.consts);
  }
  return sc.initial_estimate;
}

Vec8 hover_thrust(const ModelConstants& c, double m2) {
  Vec8 tau = Vec8::Zero();
  tau(idx::kZ) = (c.m_b + c.m1 + m2) * c.g;
  return tau;
}

}  // namespace

PassivityGains Scenario::default_passivity_gains() {
  PassivityGains g;
  g.k << 4.5, 4.5, 7.5, 8.0, 8.0, 8.0, 1.4, 1.4;
  g.lambda << 1.0, 1.0, 5.0, 1.0, 1.0, 1.0, 0.2, 0.2;
  return g;
}

SlidingModeGains Scenario::default_sliding_gains() {
  SlidingModeGains g;
  g.lambda << 1.0, 1.0, 5.0, 1.0, 1.0, 1.0, 0.2, 0.2;
  g.K1 << 4.5, 4.5, 7.5, 8.0, 8.0, 8.0, 1.4, 1.4;
  g.K2 = Vec8::Constant(0.1);
  g.boundary_layer = 0.05;
  return g;
}

Vec8 Scenario::default_hover_target() {
  Vec8 q = Vec8::Zero();
  q(idx::kZ) = 0.7;
  q(idx::kJoint1) = -std::numbers::pi / 2.0;
  return q;
}

void Scenario::validate() const {
  consts.validate();
  if (!(truth.m2 > 0.0 && truth.m3 >= 0.0 && truth.m4 >= 0.0)) {
    throw DomainError("truth requires m2 > 0, m3 >= 0, m4 >= 0");
  }
  if (!(dt > 0.0)) throw DomainError("dt must be > 0");
  if (!(duration >= dt)) throw DomainError("duration must be >= dt");
  if (!(noise_sigma.array() >= 0.0).all()) throw DomainError("noise sigma must be >= 0");
  passivity.validate();
  sliding.validate();
  EstimatorGains(est_damping, est_stiffness, est_rates);
  if (trajectory == TrajectoryKind::kWaypoints && waypoints.empty()) {
    throw DomainError("waypoint trajectory needs at least one waypoint");
  }
}

SimState initial_state(const Scenario& sc) {
  SimState s;
  s.previous_tau = hover_thrust(sc.consts, sc.controller == ControllerKind::kAsmc ? sc.consts.m2_link
                                                                                  : sc.initial_estimate.m2);
  const TrajectoryPoint start = desired_point(sc, 0.0, s.previous_tau);
  s.plant.q = start.q;
  s.plant.qd = start.qd;
  s.estimator.q_hat = start.q + Vec8::Constant(sc.q_hat_offset);
  s.estimator.m_hat = sc.initial_estimate.as_vector();
  s.asmc.m2_hat = sc.consts.m2_link;
  return s;
}

TrajectoryPoint desired_point(const Scenario& sc, double t, const Vec8& previous_tau) {
  TrajectoryPoint p;
  switch (sc.trajectory) {
    case TrajectoryKind::kReference:
      p = reference_trajectory(t);
      break;
    case TrajectoryKind::kHover:
      p.q = sc.hover_target;
      break;
    case TrajectoryKind::kWaypoints:
      p = waypoint_trajectory(sc.waypoints, t);
      break;
  }
  // Roll/pitch come from the allocation of the previous torque; they are
  // setpoints, so their derivatives stay zero.
  AttitudeSetpoint att;
  try {
    att = attitude_allocation(previous_tau, p.q(idx::kYaw));
  } catch (const ThrustSingularityError&) {
    att = {};
  }
  p.q(idx::kRoll) = att.phi_d;
  p.q(idx::kPitch) = att.theta_d;
  p.qd(idx::kRoll) = p.qd(idx::kPitch) = 0.0;
  p.qdd(idx::kRoll) = p.qdd(idx::kPitch) = 0.0;
  return p;
}

StepResult step(const Scenario& sc, const SimState& state, double t, std::mt19937_64& rng) {
  const ModelConstants& consts = sc.consts;
  const EstimatorGains gains(sc.est_damping, sc.est_stiffness, sc.est_rates);

  const TrajectoryPoint traj = desired_point(sc, t, state.previous_tau);
  if (!traj.within_bound(sc.trajectory_bound)) {
    std::ostringstream msg;
    msg << "desired trajectory exceeds its bound rho = " << sc.trajectory_bound << " at t = " << t;
    throw DomainError(msg.str());
  }

  const DecomposedDynamics parts = decompose_dynamics(state.plant, consts);
  Vec8 tau;
  if (sc.controller == ControllerKind::kAsmc) {
    tau = asmc_torque(parts, state.plant, traj, state.asmc, sc.sliding, consts);
  } else {
    tau = passivity_control(parts, state.plant, traj, control_params(sc, state), sc.passivity);
  }

  const Noise noise = draw_noise(sc.noise_sigma, rng);

  StepResult out;
  LogRow& row = out.row;
  row.t = t;
  row.q = state.plant.q;
  row.qd = state.plant.qd;
  row.qdd = forward_dynamics(parts, state.plant, tau, sc.truth);
  row.q_hat = state.estimator.q_hat;
  row.m_hat = control_params(sc, state).as_vector();
  if (sc.controller == ControllerKind::kPassivityFixed) row.m_hat = sc.initial_estimate.as_vector();
  row.tau = tau;
  row.e_c = state.plant.q - traj.q;
  {
    const PlantSample truth_sample{state.plant, row.qdd, tau, Vec8::Zero()};
    row.V1 = lyapunov_v1(state.estimator, sc.truth, truth_sample, gains);
  }
  row.V2 = lyapunov_v2(parts, state.plant, traj, sc.truth, sc.passivity);
  row.phi_d = traj.q(idx::kRoll);
  row.theta_d = traj.q(idx::kPitch);

  const Coupled x0 = pack(state);
  const bool track_delta = sc.controller == ControllerKind::kAsmc;

  auto derivative = [&](double s, const Coupled& x) -> Coupled {
    const GeneralizedState plant = plant_of(x);
    const bool at_start = (s == t) && (x == x0);
    const DecomposedDynamics stage_parts = at_start ? parts : decompose_dynamics(plant, consts);
    const Vec8 qdd = at_start ? row.qdd : forward_dynamics(stage_parts, plant, tau, sc.truth);

    GeneralizedState measured = plant;
    DecomposedDynamics measured_parts = stage_parts;
    if (noise.active) {
      measured = {plant.q + noise.q, plant.qd + noise.qd};
      measured_parts = decompose_dynamics(measured, consts);
    }
    const PlantSample sample = PlantSample::make(measured_parts, measured, qdd + noise.qdd, tau);
    const EstimatorDerivative d = estimator_derivative(estimator_of(x), sample, gains, measured_parts);

    Coupled dx;
    dx << plant.qd, qdd, d.q_hat_dot, d.m_hat_dot, Vec8::Zero();
    if (track_delta) {
      dx.segment<8>(27) = asmc_adaptation_rate(plant, desired_point(sc, s, state.previous_tau), sc.sliding);
    }
    return dx;
  };

  const Coupled x1 = rk4_step<Coupled>(derivative, t, x0, sc.dt);

  SimState& next = out.next;
  next.plant = plant_of(x1);
  next.estimator = estimator_of(x1);
  next.asmc.delta_hat = x1.segment<8>(27);
  next.asmc.m2_hat = state.asmc.m2_hat;
  next.previous_tau = tau;

  if (!x1.allFinite()) {
    std::ostringstream msg;
    msg << "state became non-finite during the step at t = " << t;
    throw InvalidStateError(msg.str());
  }

  if (sc.controller == ControllerKind::kAsmc) {
    const Vec8 qdd_next = forward_dynamics(decompose_dynamics(next.plant, consts), next.plant, tau, sc.truth);
    const GeneralizedState measured{next.plant.q + noise.q, next.plant.qd + noise.qd};
    const std::optional<double> m2 =
        asmc_mass_estimate(measured, qdd_next + noise.qdd, tau, state.asmc, consts, sc.extraction);
    if (m2) next.asmc.m2_hat = *m2;
  }
  return out;
}

SimLog run(const Scenario& sc) {
  sc.validate();
  const auto steps = static_cast<std::size_t>(std::llround(sc.duration / sc.dt));
  SimLog log;
  log.rows.reserve(steps);
  std::mt19937_64 rng(sc.seed);
  SimState state = initial_state(sc);

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * sc.dt;
    StepResult r;
    try {
      r = step(sc, state, t, rng);
    } catch (const InvalidStateError& e) {
      throw DivergenceError(e.what(), t, std::move(log));
    } catch (const SingularDynamicsError& e) {
      throw DivergenceError(e.what(), t, std::move(log));
    }
    log.rows.push_back(r.row);
    state = r.next;
    const double worst = state.plant.q.cwiseAbs().maxCoeff();
    if (!(worst <= sc.divergence_bound)) {
      std::ostringstream msg;
      msg << "configuration left the bound |q_i| <= " << sc.divergence_bound << " at t = " << t + sc.dt;
      throw DivergenceError(msg.str(), t + sc.dt, std::move(log));
    }
  }
  return log;
}

RunSummary summarize(const Scenario& sc, const SimLog& log) {
  RunSummary s;
  s.name = sc.name;
  s.controller = sc.controller;
  if (log.rows.empty()) return s;

  const double eps = 1e-9;
  Vec8 sum_sq = Vec8::Zero();
  double pos_sq = 0.0;
  std::size_t n_track = 0;
  double abs_err = 0.0;
  std::size_t n_est = 0;
  for (const LogRow& r : log.rows) {
    if (r.t >= sc.tracking_window_start - eps) {
      sum_sq += r.e_c.cwiseProduct(r.e_c);
      pos_sq += r.e_c.head<3>().squaredNorm();
      ++n_track;
    }
    if (r.t >= sc.estimate_window_start - eps) {
      abs_err += std::abs(r.m_hat(0) - sc.truth.m2);
      ++n_est;
    }
    s.m2_error.push_back(r.m_hat(0) - sc.truth.m2);
  }
  if (n_track > 0) {
    s.rms_tracking = (sum_sq / static_cast<double>(n_track)).cwiseSqrt();
    s.rms_position = std::sqrt(pos_sq / static_cast<double>(n_track));
  }
  if (n_est > 0) s.mean_abs_m2_error = abs_err / static_cast<double>(n_est);
  s.final_estimate = log.rows.back().m_hat;

  const double tol = 0.05 * sc.truth.m2;
  std::size_t first_ok = log.rows.size();
  for (std::size_t i = log.rows.size(); i-- > 0;) {
    if (std::abs(s.m2_error[i]) >= tol) break;
    first_ok = i;
  }
  if (first_ok < log.rows.size()) s.convergence_time = log.rows[first_ok].t;
  return s;
}

ComparisonSummary compare(const std::vector<Scenario>& scenarios) {
  if (scenarios.size() < 2) throw ComparisonMismatchError("comparison needs at least two scenarios");
  const Scenario& ref = scenarios.front();
  for (const Scenario& sc : scenarios) {
    const bool same_truth = sc.truth.as_vector() == ref.truth.as_vector();
    bool same_traj = sc.trajectory == ref.trajectory;
    if (same_traj && sc.trajectory == TrajectoryKind::kHover) same_traj = sc.hover_target == ref.hover_target;
    if (same_traj && sc.trajectory == TrajectoryKind::kWaypoints) {
      same_traj = sc.waypoints.size() == ref.waypoints.size();
      for (std::size_t i = 0; same_traj && i < sc.waypoints.size(); ++i) {
        same_traj = sc.waypoints[i].t == ref.waypoints[i].t && sc.waypoints[i].q == ref.waypoints[i].q;
      }
    }
    const bool same_timing = sc.dt == ref.dt && sc.duration == ref.duration;
    if (!same_truth) {
      throw ComparisonMismatchError("scenario '" + sc.name + "' has different ground-truth parameters than '" +
                                    ref.name + "'");
    }
    if (!same_traj) {
      throw ComparisonMismatchError("scenario '" + sc.name + "' has a different trajectory than '" + ref.name + "'");
    }
    if (!same_timing) {
      throw ComparisonMismatchError("scenario '" + sc.name + "' has different timing than '" + ref.name + "'");
    }
  }

  std::vector<std::future<SimLog>> jobs;
  jobs.reserve(scenarios.size());
  for (const Scenario& sc : scenarios) {
    jobs.push_back(std::async(std::launch::async, [&sc] { return run(sc); }));
  }
  ComparisonSummary out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    out.logs.push_back(jobs[i].get());
    out.runs.push_back(summarize(scenarios[i], out.logs.back()));
  }
  return out;
}

const char* to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kPassivityAdaptive:
      return "passivity-adaptive";
    case ControllerKind::kPassivityFixed:
      return "passivity-fixed";
    case ControllerKind::kAsmc:
      return "asmc";
  }
  return "?";
}

const char* to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kReference:
      return "reference";
    case TrajectoryKind::kHover:
      return "hover";
    case TrajectoryKind::kWaypoints:
      return "custom-waypoints";
  }
  return "?";
}

}  // namespace amest

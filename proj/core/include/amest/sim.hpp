#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "amest/control.hpp"
#include "amest/estimator.hpp"
#include "amest/trajectory.hpp"

namespace amest {

enum class ControllerKind {
  kPassivityAdaptive,  // passivity law fed by the online estimator
  kPassivityFixed,     // passivity law with the initial estimates frozen
  kAsmc,               // adaptive sliding mode with vertical-channel mass extraction
};

enum class TrajectoryKind {
  kReference,  // the periodic excitation reference
  kHover,
  kWaypoints,
};

/// Everything a closed-loop run depends on. Defaults reproduce the reference
/// scenario: 0.4 kg payload at 0.16 m, 10 s at 1 kHz.
struct Scenario {
  std::string name = "proposed";
  ModelConstants consts;
  UnknownParams truth = UnknownParams::from_mass_and_com(0.5, 0.16);
  ControllerKind controller = ControllerKind::kPassivityAdaptive;

  PassivityGains passivity = default_passivity_gains();
  SlidingModeGains sliding = default_sliding_gains();
  MassExtraction extraction = MassExtraction::kNormalized;

  Mat8 est_damping = 10.0 * Mat8::Identity();
  Mat8 est_stiffness = 20.0 * Mat8::Identity();
  Eigen::Vector3d est_rates{0.2, 0.1, 0.1};
  UnknownParams initial_estimate{0.1, 1e-3, 1e-5};
  double q_hat_offset = 0.1;  // q_hat(0) = q(0) + offset on every component

  double duration = 10.0;  // s
  double dt = 1e-3;        // s
  Eigen::Vector3d noise_sigma = Eigen::Vector3d::Zero();  // on (q, qd, qdd) seen by the estimators
  std::uint64_t seed = 1;

  TrajectoryKind trajectory = TrajectoryKind::kReference;
  Vec8 hover_target = default_hover_target();
  std::vector<Waypoint> waypoints;

  double trajectory_bound = 50.0;   // rho
  double divergence_bound = 100.0;  // max |q_i|

  // Window starts used by summaries.
  double tracking_window_start = 2.0;
  double estimate_window_start = 5.0;

  void validate() const;

  static PassivityGains default_passivity_gains();
  static SlidingModeGains default_sliding_gains();
  static Vec8 default_hover_target();
};

struct LogRow {
  double t = 0.0;
  Vec8 q = Vec8::Zero();
  Vec8 qd = Vec8::Zero();
  Vec8 qdd = Vec8::Zero();
  Vec8 q_hat = Vec8::Zero();
  Eigen::Vector3d m_hat = Eigen::Vector3d::Zero();  // parameters the controller acts on
  Vec8 tau = Vec8::Zero();
  Vec8 e_c = Vec8::Zero();
  double V1 = 0.0;
  double V2 = 0.0;
  double phi_d = 0.0;
  double theta_d = 0.0;
};

struct SimLog {
  std::vector<LogRow> rows;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time, SimLog partial)
      : Error(what), time_(time), partial_(std::move(partial)) {}
  double time() const { return time_; }
  const SimLog& partial_log() const { return partial_; }

 private:
  double time_;
  SimLog partial_;
};

class ComparisonMismatchError : public Error {
 public:
  using Error::Error;
};

/// Full state carried between steps.
struct SimState {
  GeneralizedState plant;
  EstimatorState estimator;
  AsmcState asmc;
  Vec8 previous_tau = Vec8::Zero();  // feeds the attitude slots of the reference
};

SimState initial_state(const Scenario& scenario);

/// Desired point at t, with the roll/pitch slots taken from the previous torque.
TrajectoryPoint desired_point(const Scenario& scenario, double t, const Vec8& previous_tau);

struct StepResult {
  SimState next;
  LogRow row;  // describes the state at t, before the step
};

/// One RK4 step of the coupled system (plant with both estimators) with the
/// control held over [t, t + dt]. Noise, when enabled, is drawn once from rng
/// and reaches only what the estimators measure.
StepResult step(const Scenario& scenario, const SimState& state, double t, std::mt19937_64& rng);

/// Throws DivergenceError (with the partial log) when any |q_i| exceeds the
/// divergence bound or the state becomes invalid.
SimLog run(const Scenario& scenario);

struct RunSummary {
  std::string name;
  ControllerKind controller = ControllerKind::kPassivityAdaptive;
  Vec8 rms_tracking = Vec8::Zero();  // per axis over [tracking_window_start, end]
  double rms_position = 0.0;         // RMS of the xyz error norm over the same window
  Eigen::Vector3d final_estimate = Eigen::Vector3d::Zero();
  double mean_abs_m2_error = 0.0;    // over [estimate_window_start, end]
  std::optional<double> convergence_time;  // first t with |m2_hat - m2| < 5% m2 held to the end
  std::vector<double> m2_error;      // m2_hat - m2 per logged step
};

RunSummary summarize(const Scenario& scenario, const SimLog& log);

struct ComparisonSummary {
  std::vector<RunSummary> runs;
  std::vector<SimLog> logs;
};

/// Runs every scenario (concurrently) and summarizes them. Scenarios must
/// share the ground truth and trajectory, and use the same timing; otherwise ComparisonMismatchError.
ComparisonSummary compare(const std::vector<Scenario>& scenarios);

const char* to_string(ControllerKind kind);
const char* to_string(TrajectoryKind kind);

}  // namespace amest

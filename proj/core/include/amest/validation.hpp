#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "amest/sim.hpp"

namespace amest {

/// Outcome of one invariant check over a batch of seeded samples.
struct PropertyResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;         // the least favourable observed value
  double limit = 0.0;         // threshold the value is compared against
  bool lower_bound = false;   // true: worst must exceed limit; false: worst must not exceed it
  std::size_t worst_sample = 0;
  std::string worst_detail;   // the offending sample, printable
};

struct ValidationOptions {
  std::uint64_t seed = 1;
  std::size_t samples = 1000;
  double energy_duration = 5.0;     // s, free run with tau = 0 and g = 0
  double lyapunov_duration = 2.0;   // s, noise-free closed-loop run
  // Negative control: adds this constant to every entry of C before the
  // Coriolis checks. Zero in normal operation.
  double coriolis_fault = 0.0;
};

struct ValidationReport {
  std::vector<PropertyResult> properties;
  double max_skew_residual = 0.0;  // max |x^T (Mdot - 2C) x| / |x|^2
  bool all_passed() const;
};

/// Admissible random configuration: |roll|, |pitch| <= 1.2 rad, positions in
/// [-2, 2] m, joint angles in [-pi, pi], rates in [-max_rate, max_rate].
GeneralizedState random_state(std::mt19937_64& rng, double max_rate = 2.0);

/// Random (m2, m3, m4) from a mass in [0.05, 1] kg at a COM in [0.02, 0.3] m.
UnknownParams random_params(std::mt19937_64& rng);

/// Central-difference dM/dt along qd with step h.
Mat8 inertia_rate_fd(const GeneralizedState& state, const ModelConstants& consts, const UnknownParams& xi,
                     double h = 1e-6);

/// Largest relative deviation |E(t) - E(0)| / |E(0)| over an unforced,
/// gravity-free RK4 run.
double free_run_energy_drift(const GeneralizedState& start, const ModelConstants& consts, const UnknownParams& xi,
                             double duration, double dt);

ValidationReport run_validation(const ModelConstants& consts, const ValidationOptions& options);

}  // namespace amest

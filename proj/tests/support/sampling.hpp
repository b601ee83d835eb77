#pragma once

// Seeded sampling helpers shared by the test suites.

#include <random>

#include "amest/types.hpp"

namespace testing_support {

using amest::GeneralizedState;
using amest::Vec8;

inline Vec8 uniform_vector(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec8 v;
  for (int i = 0; i < 8; ++i) v(i) = u(rng);
  return v;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Admissible configuration with |roll|, |pitch| < 1.2 rad.
inline GeneralizedState sample_state(std::mt19937_64& rng, double max_rate = 2.0) {
  GeneralizedState s;
  s.q = uniform_vector(rng, -3.0, 3.0);
  s.q(3) = uniform(rng, -1.2, 1.2);
  s.q(4) = uniform(rng, -1.2, 1.2);
  s.qd = uniform_vector(rng, -max_rate, max_rate);
  return s;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing_support

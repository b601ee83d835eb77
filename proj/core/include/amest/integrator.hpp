#pragma once

namespace amest {

/// One classical fourth-order Runge-Kutta step of dx/dt = f(t, x).
template <typename State, typename Derivative>
State rk4_step(Derivative&& f, double t, const State& x, double dt) {
  const State k1 = f(t, x);
  const State k2 = f(t + 0.5 * dt, State(x + (0.5 * dt) * k1));
  const State k3 = f(t + 0.5 * dt, State(x + (0.5 * dt) * k2));
  const State k4 = f(t + dt, State(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace amest

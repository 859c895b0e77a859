// Classical fixed-step fourth-order Runge-Kutta. Works for any state type
// with vector-space arithmetic (Eigen vectors, plain doubles). The
// derivative callable is evaluated as rhs(state, time).
#pragma once

namespace quadrise {

template <typename State, typename Rhs>
State rk4_step(const State& x, double t, double dt, Rhs&& rhs) {
    const State k1 = rhs(x, t);
    const State k2 = rhs(State(x + (0.5 * dt) * k1), t + 0.5 * dt);
    const State k3 = rhs(State(x + (0.5 * dt) * k2), t + 0.5 * dt);
    const State k4 = rhs(State(x + dt * k3), t + dt);
    return State(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace quadrise

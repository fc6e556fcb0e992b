// Classical fixed-step 4th-order Runge-Kutta step for small fixed-size systems.
#pragma once

#include <array>
#include <cstddef>

namespace harvest {

template <std::size_t N> using StateVector = std::array<double, N>;

/// Advances `x` from t to t + dt. `system(x, t)` returns dx/dt.
template <std::size_t N, typename System>
void rk4_step(System &&system, StateVector<N> &x, double t, double dt) {
    const double half = 0.5 * dt;

    auto offset = [&x](const StateVector<N> &k, double h) {
        StateVector<N> out;
        for (std::size_t i = 0; i < N; ++i)
            out[i] = x[i] + h * k[i];
        return out;
    };

    const StateVector<N> k1 = system(x, t);
    const StateVector<N> k2 = system(offset(k1, half), t + half);
    const StateVector<N> k3 = system(offset(k2, half), t + half);
    const StateVector<N> k4 = system(offset(k3, dt), t + dt);

    for (std::size_t i = 0; i < N; ++i)
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

} // namespace harvest

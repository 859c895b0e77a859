// A scenario bundles everything one simulation run needs: nominal plant,
// gains, trajectory, disturbance, uncertainty level and numerical settings.
// The true plant the simulation integrates is derived from the nominal one
// by a seeded, signed, per-coefficient perturbation.
#pragma once

#include "quadrise/trajectory.hpp"
#include "quadrise/types.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>

namespace quadrise {

struct Scenario {
    PlantParams nominal;
    ControlGains gains;
    TrajectoryConfig trajectory;
    Disturbance disturbance;

    double uncertainty_level = 0.10;  // signed fraction applied to true params
    std::uint64_t seed = 1;

    double dt = 1e-3;       // s
    double horizon = 40.0;  // s
    ControlMode mode = ControlMode::Adaptive;
    EtaMode eta_mode = EtaMode::FiniteDifference;

    Vec3 initial_offset{0.5, -0.5, 0.2};  // m, added to the reference start
    bool start_on_reference = false;      // exact reference-consistent start

    double max_rotor_speed = 1200.0;  // rad/s command clamp
    double divergence_position = 1e3; // m, abort bound
    double divergence_rate = 1e3;     // rad/s, abort bound
    double rate_diff_step = 1e-3;     // s, stencil for desired body rates
    double setpoint_tc = 0.01;        // s, attitude setpoint shaping filter
    double tilt_limit = 1.2;          // rad, demanded-tilt envelope
    double min_vertical_accel = 1.0;  // m/s^2, demanded vertical specific force floor

    bool allow_large_level = false;   // permit |level| > 0.15

    double metrics_window_start = 0.0;  // s
    double metrics_window_end = -1.0;   // s; negative means full horizon
};

inline long step_count(const Scenario& sc) {
    return std::lround(sc.horizon / sc.dt);
}

inline void validate(const Scenario& sc) {
    validate(sc.nominal);
    validate(sc.gains);
    validate(sc.trajectory);
    validate(sc.disturbance);
    if (sc.dt <= 0.0) throw ConfigError("dt must be positive");
    if (sc.horizon < sc.dt) throw ConfigError("horizon must cover at least one step");
    const long n = step_count(sc);
    if (std::abs(n * sc.dt - sc.horizon) > 1e-9 * std::max(1.0, sc.horizon))
        throw ConfigError("horizon must be an integer multiple of dt");
    if (std::abs(sc.uncertainty_level) > 1.0)
        throw ConfigError("uncertainty level must lie in [-1, 1]");
    if (std::abs(sc.uncertainty_level) > 0.15 && !sc.allow_large_level)
        throw ConfigError(
            "uncertainty level beyond +/-15% requires the explicit override flag");
    if (sc.max_rotor_speed <= 0.0) throw ConfigError("max rotor speed must be positive");
    if (sc.divergence_position <= 0.0 || sc.divergence_rate <= 0.0)
        throw ConfigError("divergence bounds must be positive");
    if (sc.rate_diff_step <= 0.0) throw ConfigError("rate_diff_step must be positive");
    if (sc.setpoint_tc <= 0.0) throw ConfigError("setpoint filter time constant must be positive");
    if (sc.tilt_limit <= 0.0 || sc.tilt_limit >= M_PI / 2.0)
        throw ConfigError("tilt limit must lie in (0, pi/2)");
    if (sc.min_vertical_accel <= 0.0)
        throw ConfigError("minimum vertical specific force must be positive");
    if (sc.metrics_window_start < 0.0) throw ConfigError("metrics window start must be >= 0");
    const double wend = sc.metrics_window_end < 0.0 ? sc.horizon : sc.metrics_window_end;
    if (wend <= sc.metrics_window_start)
        throw ConfigError("metrics window must have positive length");
}

// True plant parameters: every physical coefficient of the nominal set is
// scaled by (1 + level * s) with s = +/-1 drawn per coefficient from the
// seeded generator. Gravity is a constant of nature and stays untouched.
// Identical seed and level always produce the identical plant.
inline PlantParams perturb_params(const PlantParams& nominal, double level,
                                  std::uint64_t seed) {
    if (std::abs(level) > 1.0) throw ConfigError("uncertainty level must lie in [-1, 1]");
    std::mt19937_64 rng(seed);
    const auto scale = [&](double v) {
        const double sign = (rng() & 1u) ? 1.0 : -1.0;
        return v * (1.0 + level * sign);
    };
    PlantParams p = nominal;
    p.mass = scale(p.mass);
    for (int i = 0; i < 3; ++i) p.inertia(i) = scale(p.inertia(i));
    for (int i = 0; i < 3; ++i) p.drag_linear(i) = scale(p.drag_linear(i));
    for (int i = 0; i < 3; ++i) p.drag_angular(i) = scale(p.drag_angular(i));
    p.thrust_coeff = scale(p.thrust_coeff);
    p.drag_moment_coeff = scale(p.drag_moment_coeff);
    p.arm_length = scale(p.arm_length);
    p.rotor_inertia = scale(p.rotor_inertia);
    p.motor_gain = scale(p.motor_gain);
    try {
        validate(p);
    } catch (const ConfigError&) {
        throw ConfigError("perturbation drove a plant parameter nonpositive");
    }
    return p;
}

// FNV-1a over the parameter bytes in declaration order; used to assert that
// paired runs consumed the same true plant.
inline std::uint64_t param_hash(const PlantParams& p) {
    const double values[] = {p.mass,
                             p.inertia(0), p.inertia(1), p.inertia(2),
                             p.drag_linear(0), p.drag_linear(1), p.drag_linear(2),
                             p.drag_angular(0), p.drag_angular(1), p.drag_angular(2),
                             p.thrust_coeff, p.drag_moment_coeff, p.arm_length,
                             p.rotor_inertia, p.motor_gain, p.gravity};
    std::uint64_t h = 1469598103934665603ull;
    for (double v : values) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 1099511628211ull;
        }
    }
    return h;
}

}  // namespace quadrise

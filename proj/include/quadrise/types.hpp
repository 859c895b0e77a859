// Core value types shared by the plant model, controller and simulation
// harness. Everything here is a plain aggregate; invariants are checked by
// the free validate_* helpers rather than by constructors so that tests can
// build deliberately bad values.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace quadrise {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

// Raised for bad configuration or parameter values. CLI exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a run cannot continue (state diverged, Euler chart left,
// degenerate thrust demand). CLI exit code 2.
struct SimulationError : std::runtime_error {
    SimulationError(const std::string& what, double t_failure)
        : std::runtime_error(what + " (t=" + std::to_string(t_failure) + " s)"),
          t(t_failure) {}
    double t;  // simulation time at failure, s
};

enum class ControlMode { Adaptive, Baseline };

inline const char* to_string(ControlMode m) {
    return m == ControlMode::Adaptive ? "adaptive" : "baseline";
}

// How the auxiliary error (the filtered-error derivative) is reconstructed
// inside the closed loop.
//   FiniteDifference: backward difference of the filtered error between
//     steps. Uses only signals a real controller has; introduces an O(dt)
//     realization error. Default.
//   MeasuredDerivative: uses the instantaneous acceleration / angular
//     acceleration of the plant (an ideal accelerometer / differentiated
//     gyro). Makes the closed loop a genuine smooth ODE; used for
//     integrator-order diagnostics.
enum class EtaMode { FiniteDifference, MeasuredDerivative };

// Full plant state.
struct QuadState {
    Vec3 position = Vec3::Zero();      // inertial position, m
    Vec3 velocity = Vec3::Zero();      // inertial velocity, m/s
    Vec3 attitude = Vec3::Zero();      // Euler angles roll/pitch/yaw, rad
    Vec3 body_rates = Vec3::Zero();    // p, q, r, rad/s
    Vec4 rotor_speeds = Vec4::Zero();  // rad/s, nonnegative
};

// Physical constants of the vehicle. Shipped defaults are implementation
// choices for a 2 kg class quadrotor, sized so the stock gains and the
// stock disturbance/uncertainty scenarios have comfortable thrust and
// torque authority (hover at ~495 rad/s against a 1200 rad/s command
// ceiling). Every field can be overridden from a config file.
struct PlantParams {
    double mass = 2.0;                     // kg
    Vec3 inertia{0.01, 0.01, 0.018};       // diagonal I_x, I_y, I_z, kg m^2
    Vec3 drag_linear{0.1, 0.1, 0.1};       // translational drag Kd, N s/m
    Vec3 drag_angular{1e-4, 1e-4, 1e-4};   // aero friction Ka, N m s^2
    double thrust_coeff = 2e-5;            // K_T, N s^2
    double drag_moment_coeff = 1.2e-6;     // K_D, N m s^2
    double arm_length = 0.25;              // l, m
    double rotor_inertia = 5e-5;           // I_r, kg m^2
    double motor_gain = 5e-3;              // k_tau, motor speed-loop constant
    double gravity = 9.81;                 // m/s^2
};

inline void validate(const PlantParams& p) {
    const bool ok = p.mass > 0.0 && (p.inertia.array() > 0.0).all() &&
                    (p.drag_linear.array() > 0.0).all() &&
                    (p.drag_angular.array() > 0.0).all() &&
                    p.thrust_coeff > 0.0 && p.drag_moment_coeff > 0.0 &&
                    p.arm_length > 0.0 && p.rotor_inertia > 0.0 &&
                    p.motor_gain > 0.0 && p.gravity > 0.0;
    if (!ok) throw ConfigError("plant parameters must all be strictly positive");
}

// Control gains for both loops. The k and alpha values are the stock
// tuning; the adaptation rates and the signum-smoothing slope are
// implementation defaults picked so the adaptive gains settle near the
// scale of the reference-jerk/disturbance bound they have to dominate
// without winding up during the initial catch maneuver.
struct ControlGains {
    double k1 = 5.0;    // position error filter
    double k2 = 2.5;    // position auxiliary filter
    double k3 = 20.0;   // attitude error filter
    double k4 = 9.0;    // attitude auxiliary filter
    double alpha_force = 0.01;   // norm feedback, force loop
    double alpha_torque = 0.01;  // norm feedback, torque loop
    double damping_pos = 2.0;    // alpha_1
    double damping_att = 5.0;    // alpha_2
    double adapt_rate_pos = 0.5;   // beta_1
    double adapt_rate_att = 0.01;  // beta_2
    double sign_sharpness = 15.0;     // tanh slope replacing the signum
    double baseline_robust_gain = 0.0;  // fixed gain used in baseline mode
};

inline void validate(const ControlGains& g) {
    const bool positive = g.k1 > 0 && g.k2 > 0 && g.k3 > 0 && g.k4 > 0 &&
                          g.alpha_force > 0 && g.alpha_torque > 0 &&
                          g.damping_pos > 0 && g.damping_att > 0 &&
                          g.adapt_rate_pos >= 0 && g.adapt_rate_att >= 0 &&
                          g.sign_sharpness > 0 && g.baseline_robust_gain >= 0;
    if (!positive) throw ConfigError("control gains must be positive");
    // k > 1/2 keeps the closed-loop damping margin positive.
    if (g.k1 <= 0.5 || g.k2 <= 0.5 || g.k3 <= 0.5 || g.k4 <= 0.5)
        throw ConfigError("filter gains k1..k4 must exceed 1/2");
}

enum class DisturbanceShape { Step, Sinusoid };

// External disturbance applied to the true plant: a force on the
// translational dynamics and a torque on the rotational dynamics, both
// per-axis uniform, switched on at onset_time.
struct Disturbance {
    DisturbanceShape shape = DisturbanceShape::Step;
    double onset_time = 15.0;       // s
    double force_magnitude = 5.0;   // N per axis
    double torque_magnitude = 0.05; // N m per axis
    double frequency = 1.0;         // rad/s, sinusoid shape only

    Vec3 force_at(double t) const { return Vec3::Constant(force_magnitude * profile(t)); }
    Vec3 torque_at(double t) const { return Vec3::Constant(torque_magnitude * profile(t)); }

    double profile(double t) const {
        if (t < onset_time) return 0.0;
        if (shape == DisturbanceShape::Step) return 1.0;
        return std::sin(frequency * (t - onset_time));
    }
};

inline void validate(const Disturbance& d) {
    if (d.force_magnitude < 0 || d.torque_magnitude < 0)
        throw ConfigError("disturbance magnitudes must be nonnegative");
    if (d.onset_time < 0) throw ConfigError("disturbance onset must be nonnegative");
    if (d.shape == DisturbanceShape::Sinusoid && d.frequency <= 0)
        throw ConfigError("sinusoid disturbance needs a positive frequency");
}

// Per-loop controller state. command and robust_gain evolve as ODE states;
// prev_filtered is discrete memory used to reconstruct the auxiliary error
// by backward difference.
struct LoopState {
    Vec3 command = Vec3::Zero();        // integrated control vector
    Vec3 robust_gain = Vec3::Zero();    // adaptive gain estimate, nonnegative
    Vec3 prev_filtered = Vec3::Zero();  // filtered error at the previous step
};

// Error triplet for one loop.
struct LoopErrors {
    Vec3 tracking = Vec3::Zero();   // state minus reference
    Vec3 filtered = Vec3::Zero();   // tracking derivative + k * tracking
    Vec3 auxiliary = Vec3::Zero();  // filtered derivative + k * filtered
};

// One sample of the reference trajectory: the four flat outputs with their
// derivatives, plus the attitude and body rates the flat outputs imply.
struct ReferencePoint {
    double t = 0.0;
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Vec3 acceleration = Vec3::Zero();
    Vec3 jerk = Vec3::Zero();
    double yaw = 0.0;
    double yaw_rate = 0.0;
    Vec3 attitude = Vec3::Zero();    // desired roll/pitch/yaw
    Vec3 body_rates = Vec3::Zero();  // desired p, q, r
};

// Plant + controller internals advanced together by the integrator.
struct AugmentedState {
    QuadState plant;
    LoopState position_loop;
    LoopState attitude_loop;
    double t = 0.0;
};

}  // namespace quadrise

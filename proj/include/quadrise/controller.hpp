// Cascaded tracking controller. Both loops share the same structure: a
// twice-filtered error drives an integrated control vector through a robust
// law with a norm-proportional term, a damping term and an adaptive gain
// acting through a smoothed signum; the adaptive gain itself integrates a
// nonnegative rate, so it never decreases.
//
// The position loop integrates a specific-force command whose magnitude
// becomes collective thrust and whose direction is converted to a roll/pitch
// setpoint through the flatness inversion. The attitude loop integrates an
// angular-acceleration command which motor allocation turns into rotor
// speeds.
#pragma once

#include "quadrise/dynamics.hpp"
#include "quadrise/trajectory.hpp"
#include "quadrise/types.hpp"

#include <cmath>

namespace quadrise {

enum class Loop { Position, Attitude };

// Continuously differentiable replacement for the signum: elementwise
// tanh(sharpness * x).
inline Vec3 smooth_sign(const Vec3& x, double sharpness) {
    return (sharpness * x.array()).tanh().matrix();
}

// Tracking, filtered and auxiliary errors for the position loop. The
// filtered-error derivative inside the auxiliary error is reconstructed by
// backward difference against prev.prev_filtered over `elapsed` seconds.
inline LoopErrors position_errors(const QuadState& s, const ReferencePoint& r,
                                  const ControlGains& g, const LoopState& prev,
                                  double elapsed) {
    LoopErrors e;
    e.tracking = s.position - r.position;
    e.filtered = s.velocity - r.velocity + g.k1 * e.tracking;
    const Vec3 d_filtered = elapsed > 0.0 ? Vec3((e.filtered - prev.prev_filtered) / elapsed)
                                          : Vec3(Vec3::Zero());
    e.auxiliary = d_filtered + g.k2 * e.filtered;
    return e;
}

// Mirror of position_errors for the attitude loop; r.attitude carries the
// attitude setpoint and r.body_rates the rate feedforward.
inline LoopErrors attitude_errors(const QuadState& s, const ReferencePoint& r,
                                  const ControlGains& g, const LoopState& prev,
                                  double elapsed) {
    LoopErrors e;
    e.tracking = s.attitude - r.attitude;
    e.filtered = s.body_rates - r.body_rates + g.k3 * e.tracking;
    const Vec3 d_filtered = elapsed > 0.0 ? Vec3((e.filtered - prev.prev_filtered) / elapsed)
                                          : Vec3(Vec3::Zero());
    e.auxiliary = d_filtered + g.k4 * e.filtered;
    return e;
}

// Rate of change of the integrated control vector:
//   -alpha_norm * |command| * S(eta) - (damping + 1) * eta - gain .* S(eta)
// with S the smoothed signum and .* the elementwise product.
inline Vec3 control_rate(const Vec3& auxiliary, const Vec3& command,
                         const Vec3& robust_gain, const ControlGains& g, Loop loop) {
    const double alpha_norm = loop == Loop::Position ? g.alpha_force : g.alpha_torque;
    const double damping = loop == Loop::Position ? g.damping_pos : g.damping_att;
    const Vec3 sgn = smooth_sign(auxiliary, g.sign_sharpness);
    return -alpha_norm * command.norm() * sgn - (damping + 1.0) * auxiliary -
           (robust_gain.array() * sgn.array()).matrix();
}

// Adaptive gain rate, elementwise beta * S(eta_i) * eta_i. Nonnegative for
// every input, which is what makes the gain estimate monotone.
inline Vec3 adapt_rate(const Vec3& auxiliary, const ControlGains& g, Loop loop) {
    const double beta = loop == Loop::Position ? g.adapt_rate_pos : g.adapt_rate_att;
    const Vec3 sgn = smooth_sign(auxiliary, g.sign_sharpness);
    return beta * (sgn.array() * auxiliary.array()).matrix();
}

struct RotorCommand {
    Vec4 speeds = Vec4::Zero();  // rad/s, clamped to [0, max_speed]
    bool saturated = false;      // any squared speed clamped at 0 or speed at max
};

// Invert the thrust/torque mixing for commanded rotor speeds: solve the
// stacked 4x4 system for squared speeds, clamp negatives to zero and take
// roots. Clamping (either end) is reported, not fatal.
inline RotorCommand allocate_rotors(double thrust, const Vec3& torque,
                                    const PlantParams& nominal, double max_speed) {
    const double kt = nominal.thrust_coeff;
    const double lk = nominal.arm_length * kt;
    const double kd = nominal.drag_moment_coeff;
    Eigen::Matrix4d mixer;
    mixer << kt, kt, kt, kt,
             0.0, -lk, 0.0, lk,
             lk, 0.0, -lk, 0.0,
             kd, -kd, kd, -kd;

    const Eigen::FullPivLU<Eigen::Matrix4d> lu(mixer);
    if (!lu.isInvertible())
        throw ConfigError("rotor mixer is singular; check l, K_T, K_D");

    const Vec4 rhs{thrust, torque.x(), torque.y(), torque.z()};
    Vec4 squared = lu.solve(rhs);

    RotorCommand cmd;
    for (int i = 0; i < 4; ++i) {
        if (squared(i) < 0.0) {
            squared(i) = 0.0;
            cmd.saturated = true;
        }
        double speed = std::sqrt(squared(i));
        if (speed > max_speed) {
            speed = max_speed;
            cmd.saturated = true;
        }
        cmd.speeds(i) = speed;
    }
    return cmd;
}

// Everything a single controller evaluation produces besides the updated
// loop states; logged per step.
struct ControlTelemetry {
    LoopErrors position;       // errors driving the force loop
    LoopErrors attitude;       // errors driving the torque loop
    Vec3 attitude_setpoint = Vec3::Zero();  // roll/pitch from flatness, yaw from reference
    double thrust = 0.0;       // N
    Vec3 torque = Vec3::Zero();  // N m, before allocation
    RotorCommand command;
};

struct ControllerStep {
    LoopState position_loop;
    LoopState attitude_loop;
    ControlTelemetry telemetry;
};

// One discrete controller update (explicit Euler on the integrated laws):
// position errors -> force-command and gain integration -> flatness
// extraction of thrust + attitude setpoint -> attitude errors -> torque
// command and gain integration -> allocation. The returned loop states carry
// the filtered errors forward for the next backward difference.
inline ControllerStep controller_step(const QuadState& s, const ReferencePoint& r,
                                      const LoopState& pos, const LoopState& att,
                                      const ControlGains& g, const PlantParams& nominal,
                                      double dt, ControlMode mode, double max_speed) {
    ControllerStep out;
    out.telemetry.position = position_errors(s, r, g, pos, dt);

    const Vec3& eta1 = out.telemetry.position.auxiliary;
    out.position_loop.command =
        pos.command + dt * control_rate(eta1, pos.command, pos.robust_gain, g, Loop::Position);
    out.position_loop.robust_gain =
        pos.robust_gain +
        (mode == ControlMode::Adaptive ? Vec3(dt * adapt_rate(eta1, g, Loop::Position))
                                       : Vec3(Vec3::Zero()));
    out.position_loop.prev_filtered = out.telemetry.position.filtered;

    const FlatnessResult fr = flatness_attitude(
        out.position_loop.command - Vec3{0.0, 0.0, nominal.gravity}, r.yaw, nominal, r.t);
    out.telemetry.thrust = fr.thrust;
    out.telemetry.attitude_setpoint = {fr.roll, fr.pitch, r.yaw};

    ReferencePoint att_ref = r;
    att_ref.attitude = out.telemetry.attitude_setpoint;
    out.telemetry.attitude = attitude_errors(s, att_ref, g, att, dt);

    const Vec3& eta2 = out.telemetry.attitude.auxiliary;
    out.attitude_loop.command =
        att.command + dt * control_rate(eta2, att.command, att.robust_gain, g, Loop::Attitude);
    out.attitude_loop.robust_gain =
        att.robust_gain +
        (mode == ControlMode::Adaptive ? Vec3(dt * adapt_rate(eta2, g, Loop::Attitude))
                                       : Vec3(Vec3::Zero()));
    out.attitude_loop.prev_filtered = out.telemetry.attitude.filtered;

    out.telemetry.torque = out.attitude_loop.command;
    out.telemetry.command =
        allocate_rotors(out.telemetry.thrust, out.telemetry.torque, nominal, max_speed);
    return out;
}

}  // namespace quadrise

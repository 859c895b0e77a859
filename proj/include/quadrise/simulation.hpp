// Closed-loop simulation: the plant and the controller internals (integrated
// force/torque commands and adaptive gains) form one augmented ODE advanced
// by a single RK4 tableau, so the intermediate stages re-evaluate the control
// laws. The backward-difference memory used to reconstruct the auxiliary
// errors is frozen across the stages of a step and refreshed once per
// accepted step.
//
// The plant side always uses the true (perturbed) parameters; every
// controller-side computation (flatness, allocation, gains) sees only the
// nominal ones.
#pragma once

#include "quadrise/controller.hpp"
#include "quadrise/dynamics.hpp"
#include "quadrise/rk4.hpp"
#include "quadrise/runlog.hpp"
#include "quadrise/scenario.hpp"
#include "quadrise/trajectory.hpp"
#include "quadrise/types.hpp"

#include <cmath>
#include <utility>

namespace quadrise {

// Flat layout of the augmented state. The attitude setpoint shaping filter
// is part of the ODE state: the raw setpoint demanded by the force command
// can slew arbitrarily fast, so the attitude loop tracks a first-order
// filtered copy whose rate is available exactly for feedforward.
using SimVector = Eigen::Matrix<double, 31, 1>;

namespace detail {

inline constexpr int kPos = 0, kVel = 3, kAtt = 6, kRates = 9, kRotors = 12;
inline constexpr int kForceCmd = 16, kGainPos = 19, kTorqueCmd = 22, kGainAtt = 25;
inline constexpr int kAttFilter = 28;

inline SimVector pack(const AugmentedState& s, const Vec3& att_filter) {
    SimVector x;
    x.segment<3>(kPos) = s.plant.position;
    x.segment<3>(kVel) = s.plant.velocity;
    x.segment<3>(kAtt) = s.plant.attitude;
    x.segment<3>(kRates) = s.plant.body_rates;
    x.segment<4>(kRotors) = s.plant.rotor_speeds;
    x.segment<3>(kForceCmd) = s.position_loop.command;
    x.segment<3>(kGainPos) = s.position_loop.robust_gain;
    x.segment<3>(kTorqueCmd) = s.attitude_loop.command;
    x.segment<3>(kGainAtt) = s.attitude_loop.robust_gain;
    x.segment<3>(kAttFilter) = att_filter;
    return x;
}

inline AugmentedState unpack(const SimVector& x, double t) {
    AugmentedState s;
    s.t = t;
    s.plant.position = x.segment<3>(kPos);
    s.plant.velocity = x.segment<3>(kVel);
    s.plant.attitude = x.segment<3>(kAtt);
    s.plant.body_rates = x.segment<3>(kRates);
    s.plant.rotor_speeds = x.segment<4>(kRotors);
    s.position_loop.command = x.segment<3>(kForceCmd);
    s.position_loop.robust_gain = x.segment<3>(kGainPos);
    s.attitude_loop.command = x.segment<3>(kTorqueCmd);
    s.attitude_loop.robust_gain = x.segment<3>(kGainAtt);
    return s;
}

}  // namespace detail

// Backward-difference memory: filtered errors recorded at the previous grid
// point. Frozen while the stages of one step are evaluated.
struct StepMemory {
    Vec3 filtered_pos = Vec3::Zero();
    Vec3 filtered_att = Vec3::Zero();
    double t_prev = 0.0;
};

// Everything fixed over one run.
struct SimContext {
    PlantParams true_params;
    PlantParams nominal;
    ControlGains gains;
    Disturbance disturbance;
    ReferenceTrajectory trajectory;
    ControlMode mode = ControlMode::Adaptive;
    EtaMode eta_mode = EtaMode::FiniteDifference;
    double max_rotor_speed = 1200.0;
    double setpoint_tc = 0.01;  // attitude setpoint filter time constant, s
    double tilt_limit = 1.2;           // rad, demanded-tilt envelope
    double min_vertical_accel = 1.0;   // m/s^2, lower bound on demanded specific force z
};

namespace detail {

inline double smooth_max(double a, double b, double eps) {
    const double d = a - b;
    return 0.5 * (a + b + std::sqrt(d * d + eps * eps));
}

// Envelope protection for the specific-force demand handed to the flatness
// inversion: keep the vertical component positive and the demanded tilt
// inside the chart with margin. Smooth (C^1) so the closed loop stays a
// well-behaved ODE.
inline Vec3 limit_force_demand(const Vec3& f, double tilt_limit, double min_vertical) {
    const double fz = smooth_max(f.z(), min_vertical, 0.05 * min_vertical);
    const double lat = std::hypot(f.x(), f.y());
    const double lat_limit = std::tan(tilt_limit) * fz;
    const double scale = lat_limit / smooth_max(lat, lat_limit, 1e-6);
    return {f.x() * scale, f.y() * scale, fz};
}

}  // namespace detail

// One full evaluation of the loop: reference, errors, control rates, rotor
// command and plant derivative. Shared by the RK4 stages and the per-step
// logger.
struct LoopEvaluation {
    ReferencePoint reference;
    LoopErrors position;
    LoopErrors attitude;
    Vec3 attitude_setpoint = Vec3::Zero();  // filtered setpoint the loop tracks
    Vec3 setpoint_rate = Vec3::Zero();      // its exact derivative (feedforward)
    double thrust = 0.0;
    Vec3 torque = Vec3::Zero();
    RotorCommand command;
    Vec3 force_cmd_rate = Vec3::Zero();
    Vec3 gain_pos_rate = Vec3::Zero();
    Vec3 torque_cmd_rate = Vec3::Zero();
    Vec3 gain_att_rate = Vec3::Zero();
    QuadState plant_derivative;
};

inline LoopEvaluation evaluate_loop(const SimContext& ctx, const SimVector& x,
                                    double t, const StepMemory& mem) {
    const AugmentedState s = detail::unpack(x, t);
    const ControlGains& g = ctx.gains;

    if (std::abs(s.plant.attitude.y()) >= M_PI / 2.0)
        throw SimulationError("pitch left the Euler chart (theta=" +
                                  std::to_string(s.plant.attitude.y()) + ")",
                              t);

    LoopEvaluation ev;
    ev.reference = ctx.trajectory.sample(t);

    // True-plant accelerations; also serve as the measured derivatives when
    // the auxiliary errors are realized from instantaneous signals.
    const RotorWrench wrench = mix_rotors(s.plant.rotor_speeds, ctx.true_params);
    const Vec3 accel = translational_accel(s.plant, ctx.true_params, wrench.thrust,
                                           ctx.disturbance.force_at(t));
    const Vec3 rate_accel = rotational_accel(s.plant, ctx.true_params, wrench.torque,
                                             ctx.disturbance.torque_at(t));

    const double elapsed = t - mem.t_prev;

    // Position loop.
    ev.position.tracking = s.plant.position - ev.reference.position;
    const Vec3 vel_err = s.plant.velocity - ev.reference.velocity;
    ev.position.filtered = vel_err + g.k1 * ev.position.tracking;
    if (ctx.eta_mode == EtaMode::FiniteDifference) {
        const Vec3 d = elapsed > 0.0 ? Vec3((ev.position.filtered - mem.filtered_pos) / elapsed)
                                     : Vec3(Vec3::Zero());
        ev.position.auxiliary = d + g.k2 * ev.position.filtered;
    } else {
        ev.position.auxiliary =
            accel - ev.reference.acceleration + g.k1 * vel_err + g.k2 * ev.position.filtered;
    }

    ev.force_cmd_rate = control_rate(ev.position.auxiliary, s.position_loop.command,
                                     s.position_loop.robust_gain, g, Loop::Position);
    ev.gain_pos_rate = ctx.mode == ControlMode::Adaptive
                           ? adapt_rate(ev.position.auxiliary, g, Loop::Position)
                           : Vec3(Vec3::Zero());

    // Raw attitude demand from the integrated specific-force command, kept
    // inside the flyable envelope; the loop tracks its first-order filtered
    // copy, whose derivative doubles as the rate feedforward.
    const Vec3 demand =
        detail::limit_force_demand(s.position_loop.command, ctx.tilt_limit,
                                   ctx.min_vertical_accel);
    const FlatnessResult fr = flatness_attitude(
        demand - Vec3{0.0, 0.0, ctx.nominal.gravity}, ev.reference.yaw, ctx.nominal, t);
    ev.thrust = fr.thrust;
    const Vec3 raw_setpoint{fr.roll, fr.pitch, ev.reference.yaw};
    ev.attitude_setpoint = x.segment<3>(detail::kAttFilter);
    ev.setpoint_rate = (raw_setpoint - ev.attitude_setpoint) / ctx.setpoint_tc;

    // Attitude loop. In the measured-derivative realization the attitude
    // loop tracks the reference attitude directly: the cascade setpoint
    // involves command-rate memory, while the reference is a smooth function
    // of time, which is what this diagnostic realization is for.
    if (ctx.eta_mode == EtaMode::FiniteDifference) {
        ev.attitude.tracking = s.plant.attitude - ev.attitude_setpoint;
        const Vec3 rate_err = s.plant.body_rates - ev.setpoint_rate;
        ev.attitude.filtered = rate_err + g.k3 * ev.attitude.tracking;
        const Vec3 d = elapsed > 0.0 ? Vec3((ev.attitude.filtered - mem.filtered_att) / elapsed)
                                     : Vec3(Vec3::Zero());
        ev.attitude.auxiliary = d + g.k4 * ev.attitude.filtered;
    } else {
        ev.attitude_setpoint = ev.reference.attitude;
        ev.attitude.tracking = s.plant.attitude - ev.reference.attitude;
        const Vec3 rate_err = s.plant.body_rates - ev.reference.body_rates;
        ev.attitude.filtered = rate_err + g.k3 * ev.attitude.tracking;
        ev.attitude.auxiliary = rate_accel - ctx.trajectory.body_rate_derivative(t) +
                                g.k3 * rate_err + g.k4 * ev.attitude.filtered;
    }

    ev.torque_cmd_rate = control_rate(ev.attitude.auxiliary, s.attitude_loop.command,
                                      s.attitude_loop.robust_gain, g, Loop::Attitude);
    ev.gain_att_rate = ctx.mode == ControlMode::Adaptive
                           ? adapt_rate(ev.attitude.auxiliary, g, Loop::Attitude)
                           : Vec3(Vec3::Zero());

    // Motor allocation from the commanded wrench, nominal parameters only.
    // The integrated attitude command is the physical torque.
    ev.torque = s.attitude_loop.command;
    ev.command = allocate_rotors(ev.thrust, ev.torque, ctx.nominal, ctx.max_rotor_speed);

    // Plant derivative under the commanded speeds, true parameters.
    ev.plant_derivative.position = s.plant.velocity;
    ev.plant_derivative.velocity = accel;
    ev.plant_derivative.attitude = s.plant.body_rates;
    ev.plant_derivative.body_rates = rate_accel;
    ev.plant_derivative.rotor_speeds =
        rotor_derivative(s.plant.rotor_speeds, ev.command.speeds, ctx.true_params);
    return ev;
}

inline SimVector augmented_derivative(const SimContext& ctx, const SimVector& x,
                                      double t, const StepMemory& mem) {
    const LoopEvaluation ev = evaluate_loop(ctx, x, t, mem);
    SimVector dx;
    dx.segment<3>(detail::kPos) = ev.plant_derivative.position;
    dx.segment<3>(detail::kVel) = ev.plant_derivative.velocity;
    dx.segment<3>(detail::kAtt) = ev.plant_derivative.attitude;
    dx.segment<3>(detail::kRates) = ev.plant_derivative.body_rates;
    dx.segment<4>(detail::kRotors) = ev.plant_derivative.rotor_speeds;
    dx.segment<3>(detail::kForceCmd) = ev.force_cmd_rate;
    dx.segment<3>(detail::kGainPos) = ev.gain_pos_rate;
    dx.segment<3>(detail::kTorqueCmd) = ev.torque_cmd_rate;
    dx.segment<3>(detail::kGainAtt) = ev.gain_att_rate;
    dx.segment<3>(detail::kAttFilter) = ev.setpoint_rate;
    return dx;
}

// Attitude setpoint the shaping filter starts from: trailing the raw demand
// of the given force command by exactly the amount that makes the initial
// filter slew equal the reference body rates.
inline Vec3 initial_filtered_setpoint(const Scenario& sc, const Vec3& force_cmd,
                                      const ReferencePoint& r0) {
    const Vec3 demand =
        detail::limit_force_demand(force_cmd, sc.tilt_limit, sc.min_vertical_accel);
    const FlatnessResult fr = flatness_attitude(
        demand - Vec3{0.0, 0.0, sc.nominal.gravity}, r0.yaw, sc.nominal, 0.0);
    return Vec3{fr.roll, fr.pitch, r0.yaw} - sc.setpoint_tc * r0.body_rates;
}

// Initial augmented state. The integrated force command starts at the
// reference-consistent feedforward (for a hover reference this is exactly
// gravity compensation); the torque command starts at zero; adaptive gains
// start at zero in adaptive mode and at the configured constant in baseline
// mode. Rotor speeds start consistent with the initial thrust demand.
inline AugmentedState initial_state(const Scenario& sc, ControlMode mode,
                                    const ReferenceTrajectory& traj) {
    const ReferencePoint r0 = traj.sample(0.0);
    AugmentedState s;
    s.t = 0.0;
    if (sc.start_on_reference) {
        s.plant.position = r0.position;
        s.plant.velocity = r0.velocity;
        s.plant.attitude = r0.attitude;
        s.plant.body_rates = r0.body_rates;
    } else {
        s.plant.position = r0.position + sc.initial_offset;
        s.plant.velocity = Vec3::Zero();
        s.plant.attitude = Vec3::Zero();
        s.plant.body_rates = Vec3::Zero();
    }

    s.position_loop.command = r0.acceleration + Vec3{0.0, 0.0, sc.nominal.gravity};
    s.attitude_loop.command = Vec3::Zero();
    const Vec3 gain0 = mode == ControlMode::Adaptive
                           ? Vec3(Vec3::Zero())
                           : Vec3(Vec3::Constant(sc.gains.baseline_robust_gain));
    s.position_loop.robust_gain = gain0;
    s.attitude_loop.robust_gain = gain0;

    if (sc.start_on_reference) {
        const FlatnessResult fr = flatness_attitude(r0.acceleration, r0.yaw, sc.nominal, 0.0);
        s.plant.rotor_speeds =
            allocate_rotors(fr.thrust, Vec3::Zero(), sc.nominal, sc.max_rotor_speed).speeds;
    } else {
        const double hover =
            std::sqrt(sc.nominal.mass * sc.nominal.gravity / (4.0 * sc.nominal.thrust_coeff));
        s.plant.rotor_speeds = Vec4::Constant(hover);
    }

    s.position_loop.prev_filtered =
        s.plant.velocity - r0.velocity + sc.gains.k1 * (s.plant.position - r0.position);
    const Vec3 att_sp0 = initial_filtered_setpoint(sc, s.position_loop.command, r0);
    s.attitude_loop.prev_filtered = s.plant.body_rates - r0.body_rates +
                                    sc.gains.k3 * (s.plant.attitude - att_sp0);
    return s;
}

// Run the closed loop over [0, horizon]. Aborts with SimulationError when
// the state leaves the configured bounds, turns non-finite or the attitude
// chart is violated. Identical scenarios yield bit-identical logs.
inline RunLog simulate(const Scenario& sc, ControlMode mode) {
    validate(sc);

    SimContext ctx{
        .true_params = perturb_params(sc.nominal, sc.uncertainty_level, sc.seed),
        .nominal = sc.nominal,
        .gains = sc.gains,
        .disturbance = sc.disturbance,
        .trajectory = ReferenceTrajectory(sc.trajectory, sc.nominal, sc.rate_diff_step),
        .mode = mode,
        .eta_mode = sc.eta_mode,
        .max_rotor_speed = sc.max_rotor_speed,
        .setpoint_tc = sc.setpoint_tc,
        .tilt_limit = sc.tilt_limit,
        .min_vertical_accel = sc.min_vertical_accel,
    };

    RunLog log;
    log.dt = sc.dt;
    log.mode = mode;
    log.uncertainty_level = sc.uncertainty_level;
    log.seed = sc.seed;
    log.param_hash = param_hash(ctx.true_params);

    const long n_steps = step_count(sc);
    log.records.reserve(static_cast<std::size_t>(n_steps) + 1);

    AugmentedState init = initial_state(sc, mode, ctx.trajectory);
    const ReferencePoint r0 = ctx.trajectory.sample(0.0);
    const Vec3 sp0 = initial_filtered_setpoint(sc, init.position_loop.command, r0);
    SimVector x = detail::pack(init, sp0);
    StepMemory mem{init.position_loop.prev_filtered, init.attitude_loop.prev_filtered, -sc.dt};

    for (long k = 0; k <= n_steps; ++k) {
        const double t = static_cast<double>(k) * sc.dt;

        if (!x.allFinite())
            throw SimulationError("state turned non-finite", t);
        if (x.segment<3>(detail::kPos).norm() > sc.divergence_position)
            throw SimulationError("position diverged beyond the configured bound", t);
        if (x.segment<3>(detail::kRates).norm() > sc.divergence_rate)
            throw SimulationError("body rates diverged beyond the configured bound", t);

        const LoopEvaluation ev = evaluate_loop(ctx, x, t, mem);

        LogRecord rec;
        rec.t = t;
        const AugmentedState s = detail::unpack(x, t);
        rec.state = s.plant;
        rec.reference = ev.reference;
        rec.position_errors = ev.position;
        rec.attitude_errors = ev.attitude;
        rec.attitude_setpoint = ev.attitude_setpoint;
        rec.commanded_speeds = ev.command.speeds;
        rec.gain_pos = s.position_loop.robust_gain;
        rec.gain_att = s.attitude_loop.robust_gain;
        rec.thrust = ev.thrust;
        rec.torque = ev.torque;
        rec.saturated = ev.command.saturated;
        if (rec.saturated) ++log.saturation_steps;
        log.records.push_back(std::move(rec));

        if (k == n_steps) break;

        x = rk4_step(x, t, sc.dt, [&](const SimVector& xs, double ts) {
            return augmented_derivative(ctx, xs, ts, mem);
        });
        mem = StepMemory{ev.position.filtered, ev.attitude.filtered, t};
    }
    return log;
}

inline RunLog simulate(const Scenario& sc) { return simulate(sc, sc.mode); }

}  // namespace quadrise

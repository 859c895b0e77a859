// Continuous-time quadrotor plant: rigid-body translation and rotation,
// quadratic rotor thrust/drag, gyroscopic coupling from the spinning rotors
// and first-order motor speed dynamics.
//
// Conventions:
//  - attitude is the Euler triple (roll, pitch, yaw); the Euler-rate
//    kinematics are identified with the body rates directly (small-angle
//    model, valid on |pitch| < pi/2),
//  - rotors 1..4 spin with alternating handedness, so yaw drag moments
//    alternate sign and the net rotor angular momentum is
//    I_r * (u1 - u2 + u3 - u4) along body z.
#pragma once

#include "quadrise/types.hpp"

#include <cmath>

namespace quadrise {

// Direction the collective thrust acts along in the inertial frame: the
// third column of the roll-pitch-yaw rotation matrix. A unit vector; spans
// the upper hemisphere over the |pitch| < pi/2 chart.
inline Vec3 thrust_direction(const Vec3& attitude) {
    const double cphi = std::cos(attitude.x()), sphi = std::sin(attitude.x());
    const double cth = std::cos(attitude.y()), sth = std::sin(attitude.y());
    const double cpsi = std::cos(attitude.z()), spsi = std::sin(attitude.z());
    return {cpsi * sth * cphi + spsi * sphi,
            spsi * sth * cphi - cpsi * sphi,
            cth * cphi};
}

// Acceleration of the center of mass: gravity, tilted thrust, linear drag
// and the external force disturbance.
inline Vec3 translational_accel(const QuadState& s, const PlantParams& p,
                                double thrust, const Vec3& force_disturbance) {
    const Vec3 gravity{0.0, 0.0, -p.mass * p.gravity};
    const Vec3 drag = -(p.drag_linear.array() * s.velocity.array()).matrix();
    return (gravity + thrust_direction(s.attitude) * thrust + drag + force_disturbance) / p.mass;
}

// Torque from the spinning rotors' angular momentum interacting with the
// body rotation. Vanishes when the alternating-handed speeds cancel.
inline Vec3 gyroscopic_torque(const Vec3& body_rates, const Vec4& rotor_speeds,
                              double rotor_inertia) {
    const double net = rotor_speeds(0) - rotor_speeds(1) + rotor_speeds(2) - rotor_speeds(3);
    return body_rates.cross(Vec3{0.0, 0.0, rotor_inertia * net});
}

// Aerodynamic friction torque, quadratic in the body rates and opposing
// them axis by axis (signed square keeps it dissipative).
inline Vec3 aero_friction_torque(const Vec3& body_rates, const Vec3& drag_angular) {
    return -(drag_angular.array() * body_rates.array() * body_rates.array().abs()).matrix();
}

struct RotorWrench {
    double thrust = 0.0;  // N
    Vec3 torque = Vec3::Zero();  // N m about body x, y, z
};

// Collective thrust and body torques produced by the four rotor speeds.
// Torque mixing for a plus-configuration frame:
//   roll   <-  l K_T (u4^2 - u2^2)
//   pitch  <-  l K_T (u1^2 - u3^2)
//   yaw    <-  K_D  (u1^2 - u2^2 + u3^2 - u4^2)
inline RotorWrench mix_rotors(const Vec4& rotor_speeds, const PlantParams& p) {
    const Vec4 sq = rotor_speeds.array().square();
    RotorWrench w;
    w.thrust = p.thrust_coeff * sq.sum();
    const double lk = p.arm_length * p.thrust_coeff;
    w.torque = {lk * (sq(3) - sq(1)),
                lk * (sq(0) - sq(2)),
                p.drag_moment_coeff * (sq(0) - sq(1) + sq(2) - sq(3))};
    return w;
}

// First-order motor speed response toward the commanded speeds.
inline Vec4 rotor_derivative(const Vec4& rotor_speeds, const Vec4& commanded,
                             const PlantParams& p) {
    return (p.motor_gain / p.rotor_inertia) * (commanded - rotor_speeds);
}

// Angular acceleration: Euler rigid-body term, rotor wrench, aero friction,
// gyroscopic coupling and the external torque disturbance. The friction
// torque enters additively (it already carries its dissipative sign).
inline Vec3 rotational_accel(const QuadState& s, const PlantParams& p,
                             const Vec3& rotor_torque, const Vec3& torque_disturbance) {
    const Vec3 inertia_rates = (p.inertia.array() * s.body_rates.array()).matrix();
    const Vec3 total = -s.body_rates.cross(inertia_rates) + rotor_torque +
                       aero_friction_torque(s.body_rates, p.drag_angular) +
                       gyroscopic_torque(s.body_rates, s.rotor_speeds, p.rotor_inertia) +
                       torque_disturbance;
    return (total.array() / p.inertia.array()).matrix();
}

// Derivative of the full plant state under commanded rotor speeds and the
// disturbance evaluated at time t. Throws when the Euler chart is left.
inline QuadState state_derivative(const QuadState& s, const Vec4& commanded,
                                  const PlantParams& p_true, const Disturbance& d,
                                  double t) {
    if (std::abs(s.attitude.y()) >= M_PI / 2.0)
        throw SimulationError("pitch left the Euler chart (|theta| >= pi/2)", t);

    const RotorWrench w = mix_rotors(s.rotor_speeds, p_true);
    QuadState ds;
    ds.position = s.velocity;
    ds.velocity = translational_accel(s, p_true, w.thrust, d.force_at(t));
    ds.attitude = s.body_rates;
    ds.body_rates = rotational_accel(s, p_true, w.torque, d.torque_at(t));
    ds.rotor_speeds = rotor_derivative(s.rotor_speeds, commanded, p_true);
    return ds;
}

}  // namespace quadrise

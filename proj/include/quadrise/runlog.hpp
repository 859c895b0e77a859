// Time-series record of a simulation run and its CSV projection.
#pragma once

#include "quadrise/controller.hpp"
#include "quadrise/types.hpp"

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace quadrise {

struct LogRecord {
    double t = 0.0;
    QuadState state;
    ReferencePoint reference;
    LoopErrors position_errors;   // loop-internal: against the filtered setpoints
    LoopErrors attitude_errors;   // loop-internal: against the commanded attitude
    Vec3 attitude_setpoint = Vec3::Zero();
    Vec4 commanded_speeds = Vec4::Zero();
    Vec3 gain_pos = Vec3::Zero();  // adaptive gain estimate, position loop
    Vec3 gain_att = Vec3::Zero();  // adaptive gain estimate, attitude loop
    double thrust = 0.0;
    Vec3 torque = Vec3::Zero();
    bool saturated = false;
};

struct RunLog {
    std::vector<LogRecord> records;
    double dt = 0.0;
    ControlMode mode = ControlMode::Adaptive;
    double uncertainty_level = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t param_hash = 0;  // hash of the true (perturbed) plant parameters
    long saturation_steps = 0;     // grid points whose allocation clamped
};

namespace detail {
// Shortest round-trippable decimal form; byte-stable for identical doubles.
inline void append_number(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}
}  // namespace detail

inline constexpr const char* kRunLogHeader =
    "t,x,y,z,phi,theta,psi,p,q,r,u1,u2,u3,u4,ex,ey,ez,ephi,etheta,epsi,"
    "lam1_1,lam1_2,lam1_3,lam2_1,lam2_2,lam2_3,FT,taux,tauy,tauz,sat";

// One row per step. Position errors are the tracking errors the controller
// regulates; attitude errors are reported relative to the reference attitude
// so that both control modes are measured against the same desired signals.
inline void write_csv(const RunLog& log, std::ostream& os) {
    std::string line;
    line.reserve(1024);
    os << kRunLogHeader << '\n';
    for (const LogRecord& r : log.records) {
        line.clear();
        const Vec3 att_err = r.state.attitude - r.reference.attitude;
        const double cols[] = {
            r.t,
            r.state.position.x(), r.state.position.y(), r.state.position.z(),
            r.state.attitude.x(), r.state.attitude.y(), r.state.attitude.z(),
            r.state.body_rates.x(), r.state.body_rates.y(), r.state.body_rates.z(),
            r.state.rotor_speeds(0), r.state.rotor_speeds(1),
            r.state.rotor_speeds(2), r.state.rotor_speeds(3),
            r.position_errors.tracking.x(), r.position_errors.tracking.y(),
            r.position_errors.tracking.z(),
            att_err.x(), att_err.y(), att_err.z(),
            r.gain_pos.x(), r.gain_pos.y(), r.gain_pos.z(),
            r.gain_att.x(), r.gain_att.y(), r.gain_att.z(),
            r.thrust,
            r.torque.x(), r.torque.y(), r.torque.z(),
        };
        for (double v : cols) {
            detail::append_number(line, v);
            line += ',';
        }
        line += r.saturated ? '1' : '0';
        line += '\n';
        os << line;
    }
}

}  // namespace quadrise

// Reference generation: analytic flat outputs (position + yaw and their
// derivatives), inversion of the thrust-direction map to the attitude those
// outputs imply, and finite-difference desired body rates.
#pragma once

#include "quadrise/dynamics.hpp"
#include "quadrise/types.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace quadrise {

struct FlatnessResult {
    double roll = 0.0;    // rad
    double pitch = 0.0;   // rad
    double thrust = 0.0;  // N, feedforward magnitude
};

// Attitude and thrust that realize a demanded acceleration: the unique
// (roll, pitch, thrust) with thrust_direction(roll, pitch, yaw) * thrust /
// mass = accel_demand + (0, 0, g). Closed form, since the thrust direction
// is the third rotation column:
//   roll  = asin(sin(yaw) nx - cos(yaw) ny)
//   pitch = atan2(cos(yaw) nx + sin(yaw) ny, nz)
// with n the unit demand. Degenerate demands (free fall, downward thrust,
// chart edge) raise SimulationError.
inline FlatnessResult flatness_attitude(const Vec3& accel_demand, double yaw,
                                        const PlantParams& nominal,
                                        double t_diag = 0.0) {
    const Vec3 f = accel_demand + Vec3{0.0, 0.0, nominal.gravity};
    const double fn = f.norm();
    if (fn < 1e-3)
        throw SimulationError("degenerate reference: demanded specific force ~ 0", t_diag);

    const double cpsi = std::cos(yaw), spsi = std::sin(yaw);
    const Vec3 n = f / fn;
    const double roll = std::asin(std::clamp(spsi * n.x() - cpsi * n.y(), -1.0, 1.0));
    const double pitch = std::atan2(cpsi * n.x() + spsi * n.y(), n.z());

    if (std::abs(pitch) >= M_PI / 2 * 0.999 || std::abs(roll) >= M_PI / 2 * 0.999)
        throw SimulationError("demanded attitude outside the Euler chart", t_diag);

    return {roll, pitch, nominal.mass * fn};
}

// Desired body rates from a uniformly spaced attitude sample sequence,
// central differences (second-order one-sided stencils at the endpoints).
inline std::vector<Vec3> desired_rates(std::span<const Vec3> attitude, double dt) {
    if (dt <= 0.0) throw ConfigError("desired_rates needs dt > 0");
    if (attitude.size() < 3) throw ConfigError("desired_rates needs at least 3 samples");
    const std::size_t n = attitude.size();
    std::vector<Vec3> rates(n);
    rates.front() = (-3.0 * attitude[0] + 4.0 * attitude[1] - attitude[2]) / (2.0 * dt);
    for (std::size_t i = 1; i + 1 < n; ++i)
        rates[i] = (attitude[i + 1] - attitude[i - 1]) / (2.0 * dt);
    rates.back() = (3.0 * attitude[n - 1] - 4.0 * attitude[n - 2] + attitude[n - 3]) / (2.0 * dt);
    return rates;
}

struct TrajectoryConfig {
    std::string id = "paper-helix";  // "paper-helix" | "hover"
    double amplitude = 3.0;          // lateral radius, m
    double frequency = 1.0;          // rad/s
    double climb_rate = 1.0;         // m/s
    double yaw_amplitude = 1.0;      // rad
    double hover_height = 1.0;       // m, hover trajectory only
};

inline void validate(const TrajectoryConfig& c) {
    if (c.id != "paper-helix" && c.id != "hover")
        throw ConfigError("unknown trajectory id '" + c.id + "'");
    if (c.id == "paper-helix" && c.frequency <= 0.0)
        throw ConfigError("trajectory frequency must be positive");
}

// Reference trajectory bound to the nominal plant parameters (needed to map
// flat outputs to attitude). Attitude rates come from central differences of
// the flatness attitude with a fixed stencil width, so the reference is a
// fixed smooth function of time regardless of the integrator step.
class ReferenceTrajectory {
public:
    ReferenceTrajectory(const TrajectoryConfig& cfg, const PlantParams& nominal,
                        double rate_diff_step = 1e-3)
        : cfg_(cfg), nominal_(nominal), h_(rate_diff_step) {
        validate(cfg);
        if (h_ <= 0.0) throw ConfigError("rate_diff_step must be positive");
    }

    // Flat outputs and their analytic derivatives only.
    ReferencePoint flat_outputs(double t) const {
        ReferencePoint r;
        r.t = t;
        if (cfg_.id == "hover") {
            r.position = {0.0, 0.0, cfg_.hover_height};
            return r;
        }
        const double A = cfg_.amplitude, w = cfg_.frequency, c = cfg_.climb_rate;
        const double B = cfg_.yaw_amplitude;
        const double s = std::sin(w * t), co = std::cos(w * t);
        r.position = {A * s, A * co, c * t};
        r.velocity = {A * w * co, -A * w * s, c};
        r.acceleration = {-A * w * w * s, -A * w * w * co, 0.0};
        r.jerk = {-A * w * w * w * co, A * w * w * w * s, 0.0};
        r.yaw = B * s;
        r.yaw_rate = B * w * co;
        return r;
    }

    // Attitude implied by the flat outputs at time t.
    Vec3 attitude_at(double t) const {
        const ReferencePoint r = flat_outputs(t);
        const FlatnessResult fr = flatness_attitude(r.acceleration, r.yaw, nominal_, t);
        return {fr.roll, fr.pitch, r.yaw};
    }

    // Full sample: flat outputs plus attitude and body rates.
    ReferencePoint sample(double t) const {
        ReferencePoint r = flat_outputs(t);
        const Vec3 minus = attitude_at(t - h_);
        const Vec3 plus = attitude_at(t + h_);
        r.attitude = attitude_at(t);
        r.body_rates = (plus - minus) / (2.0 * h_);
        return r;
    }

    // Second difference of the desired attitude; feedforward for the
    // measured-derivative auxiliary error.
    Vec3 body_rate_derivative(double t) const {
        const Vec3 minus = attitude_at(t - h_);
        const Vec3 center = attitude_at(t);
        const Vec3 plus = attitude_at(t + h_);
        return (plus - 2.0 * center + minus) / (h_ * h_);
    }

    const TrajectoryConfig& config() const { return cfg_; }
    const PlantParams& nominal() const { return nominal_; }

private:
    TrajectoryConfig cfg_;
    PlantParams nominal_;
    double h_;
};

}  // namespace quadrise

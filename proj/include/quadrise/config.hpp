// Plain-text configuration: `key = value` lines with '#' comments and
// dotted section keys (plant.m, gains.k1, ...). Every key has a default, so
// an empty file is a valid configuration. Unknown and duplicate keys are
// rejected to catch typos early.
#pragma once

#include "quadrise/scenario.hpp"
#include "quadrise/types.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

namespace quadrise {

class ConfigMap {
public:
    static ConfigMap parse(std::istream& in) {
        ConfigMap cfg;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty() || value.empty())
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": empty key or value");
            if (!cfg.values_.emplace(key, value).second)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": duplicate key '" + key + "'");
        }
        return cfg;
    }

    static ConfigMap load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        return parse(in);
    }

    double number(const std::string& key, double fallback) {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        used_.insert(key);
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(it->second, &pos);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': not a number: " + it->second);
        }
        if (pos != it->second.size())
            throw ConfigError("config key '" + key + "': trailing junk: " + it->second);
        return v;
    }

    std::uint64_t unsigned_number(const std::string& key, std::uint64_t fallback) {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        used_.insert(key);
        try {
            return std::stoull(it->second);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': not an unsigned integer: " + it->second);
        }
    }

    std::string text(const std::string& key, const std::string& fallback) {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        used_.insert(key);
        return it->second;
    }

    bool boolean(const std::string& key, bool fallback) {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        used_.insert(key);
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError("config key '" + key + "': expected true/false: " + it->second);
    }

    // Call after consuming all schema keys.
    void reject_unknown() const {
        std::string unknown;
        for (const auto& [key, value] : values_)
            if (!used_.contains(key)) unknown += (unknown.empty() ? "" : ", ") + key;
        if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
    }

private:
    static std::string trim(const std::string& s) {
        const auto begin = s.find_first_not_of(" \t\r");
        if (begin == std::string::npos) return {};
        const auto end = s.find_last_not_of(" \t\r");
        return s.substr(begin, end - begin + 1);
    }

    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
};

// Build a scenario from a parsed config, starting from the shipped defaults.
inline Scenario scenario_from_config(ConfigMap cfg) {
    Scenario sc;

    PlantParams& p = sc.nominal;
    p.mass = cfg.number("plant.m", p.mass);
    p.inertia = {cfg.number("plant.I_x", p.inertia.x()),
                 cfg.number("plant.I_y", p.inertia.y()),
                 cfg.number("plant.I_z", p.inertia.z())};
    p.drag_linear = {cfg.number("plant.Kd_x", p.drag_linear.x()),
                     cfg.number("plant.Kd_y", p.drag_linear.y()),
                     cfg.number("plant.Kd_z", p.drag_linear.z())};
    p.drag_angular = {cfg.number("plant.Ka_x", p.drag_angular.x()),
                      cfg.number("plant.Ka_y", p.drag_angular.y()),
                      cfg.number("plant.Ka_z", p.drag_angular.z())};
    p.thrust_coeff = cfg.number("plant.K_T", p.thrust_coeff);
    p.drag_moment_coeff = cfg.number("plant.K_D", p.drag_moment_coeff);
    p.arm_length = cfg.number("plant.l", p.arm_length);
    p.rotor_inertia = cfg.number("plant.I_r", p.rotor_inertia);
    p.motor_gain = cfg.number("plant.k_tau", p.motor_gain);
    p.gravity = cfg.number("plant.g", p.gravity);

    ControlGains& g = sc.gains;
    g.k1 = cfg.number("gains.k1", g.k1);
    g.k2 = cfg.number("gains.k2", g.k2);
    g.k3 = cfg.number("gains.k3", g.k3);
    g.k4 = cfg.number("gains.k4", g.k4);
    g.alpha_force = cfg.number("gains.alpha_F", g.alpha_force);
    g.alpha_torque = cfg.number("gains.alpha_tau", g.alpha_torque);
    g.damping_pos = cfg.number("gains.alpha1", g.damping_pos);
    g.damping_att = cfg.number("gains.alpha2", g.damping_att);
    g.adapt_rate_pos = cfg.number("gains.beta1", g.adapt_rate_pos);
    g.adapt_rate_att = cfg.number("gains.beta2", g.adapt_rate_att);
    g.sign_sharpness = cfg.number("gains.kappa_s", g.sign_sharpness);
    g.baseline_robust_gain = cfg.number("gains.baseline_lambda", g.baseline_robust_gain);

    TrajectoryConfig& tr = sc.trajectory;
    tr.id = cfg.text("trajectory.id", tr.id);
    tr.amplitude = cfg.number("trajectory.amplitude", tr.amplitude);
    tr.frequency = cfg.number("trajectory.frequency", tr.frequency);
    tr.climb_rate = cfg.number("trajectory.climb_rate", tr.climb_rate);
    tr.yaw_amplitude = cfg.number("trajectory.yaw_amplitude", tr.yaw_amplitude);
    tr.hover_height = cfg.number("trajectory.hover_height", tr.hover_height);

    Disturbance& d = sc.disturbance;
    const std::string shape = cfg.text("disturbance.shape", "step");
    if (shape == "step")
        d.shape = DisturbanceShape::Step;
    else if (shape == "sinusoid")
        d.shape = DisturbanceShape::Sinusoid;
    else
        throw ConfigError("disturbance.shape must be 'step' or 'sinusoid'");
    d.onset_time = cfg.number("disturbance.onset", d.onset_time);
    d.force_magnitude = cfg.number("disturbance.force", d.force_magnitude);
    d.torque_magnitude = cfg.number("disturbance.torque", d.torque_magnitude);
    d.frequency = cfg.number("disturbance.frequency", d.frequency);

    sc.uncertainty_level = cfg.number("sim.level", sc.uncertainty_level);
    sc.seed = cfg.unsigned_number("sim.seed", sc.seed);
    sc.dt = cfg.number("sim.dt", sc.dt);
    sc.horizon = cfg.number("sim.horizon", sc.horizon);
    const std::string mode = cfg.text("sim.mode", "adaptive");
    if (mode == "adaptive")
        sc.mode = ControlMode::Adaptive;
    else if (mode == "baseline")
        sc.mode = ControlMode::Baseline;
    else
        throw ConfigError("sim.mode must be 'adaptive' or 'baseline'");
    const std::string eta = cfg.text("sim.eta_mode", "finite-difference");
    if (eta == "finite-difference")
        sc.eta_mode = EtaMode::FiniteDifference;
    else if (eta == "measured-derivative")
        sc.eta_mode = EtaMode::MeasuredDerivative;
    else
        throw ConfigError("sim.eta_mode must be 'finite-difference' or 'measured-derivative'");
    sc.max_rotor_speed = cfg.number("sim.u_max", sc.max_rotor_speed);
    sc.divergence_position = cfg.number("sim.divergence_position", sc.divergence_position);
    sc.divergence_rate = cfg.number("sim.divergence_rate", sc.divergence_rate);
    sc.rate_diff_step = cfg.number("sim.rate_diff_step", sc.rate_diff_step);
    sc.setpoint_tc = cfg.number("sim.setpoint_tc", sc.setpoint_tc);
    sc.tilt_limit = cfg.number("sim.tilt_limit", sc.tilt_limit);
    sc.min_vertical_accel = cfg.number("sim.min_vertical_accel", sc.min_vertical_accel);
    sc.allow_large_level = cfg.boolean("sim.allow_large_level", sc.allow_large_level);

    sc.initial_offset = {cfg.number("init.offset_x", sc.initial_offset.x()),
                         cfg.number("init.offset_y", sc.initial_offset.y()),
                         cfg.number("init.offset_z", sc.initial_offset.z())};
    sc.start_on_reference = cfg.boolean("init.on_reference", sc.start_on_reference);

    sc.metrics_window_start = cfg.number("metrics.window_start", sc.metrics_window_start);
    sc.metrics_window_end = cfg.number("metrics.window_end", sc.metrics_window_end);

    cfg.reject_unknown();
    return sc;
}

inline Scenario scenario_from_file(const std::string& path) {
    return scenario_from_config(ConfigMap::load(path));
}

}  // namespace quadrise

// Post-run analysis: gain condition checks, the measurable quadratic part of
// the stability function as a run-health monitor, and grouped RMS tracking
// metrics for comparative studies.
#pragma once

#include "quadrise/runlog.hpp"
#include "quadrise/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace quadrise {

// Result of the verifiable gain conditions. c1 is the smallest damping
// margin min(k1-1/2, k2-1/2, 1, k3-1/2, k4-1/2), c2 = min(alpha_1, alpha_2);
// region_scale = 2*sqrt(c1*c2) scales the guaranteed region of attraction.
struct GainReport {
    double c1 = 0.0;
    double c2 = 0.0;
    double region_scale = 0.0;
    bool k1_ok = false, k2_ok = false, k3_ok = false, k4_ok = false;
    bool alpha_force_ok = false;   // alpha_F >= delta_1
    bool alpha_torque_ok = false;  // alpha_tau >= delta_2
    double margin_force = 0.0;     // alpha_F - delta_1
    double margin_torque = 0.0;    // alpha_tau - delta_2

    bool all_ok() const {
        return k1_ok && k2_ok && k3_ok && k4_ok && alpha_force_ok && alpha_torque_ok;
    }
};

inline GainReport check_gains(const ControlGains& g, double delta1, double delta2) {
    if (delta1 < 0.0 || delta1 >= 1.0 || delta2 < 0.0 || delta2 >= 1.0)
        throw ConfigError("delta bounds must lie in [0, 1)");
    GainReport r;
    r.k1_ok = g.k1 > 0.5;
    r.k2_ok = g.k2 > 0.5;
    r.k3_ok = g.k3 > 0.5;
    r.k4_ok = g.k4 > 0.5;
    r.alpha_force_ok = g.alpha_force >= delta1;
    r.alpha_torque_ok = g.alpha_torque >= delta2;
    r.margin_force = g.alpha_force - delta1;
    r.margin_torque = g.alpha_torque - delta2;
    r.c1 = std::min({g.k1 - 0.5, g.k2 - 0.5, 1.0, g.k3 - 0.5, g.k4 - 0.5});
    r.c2 = std::min(g.damping_pos, g.damping_att);
    r.region_scale = (r.c1 > 0.0 && r.c2 > 0.0) ? 2.0 * std::sqrt(r.c1 * r.c2) : 0.0;
    return r;
}

inline std::string format_report(const GainReport& r) {
    auto flag = [](bool ok) { return ok ? "pass" : "FAIL"; };
    std::string out;
    out += "gain conditions\n";
    out += std::string("  k1 > 1/2             : ") + flag(r.k1_ok) + "\n";
    out += std::string("  k2 > 1/2             : ") + flag(r.k2_ok) + "\n";
    out += std::string("  k3 > 1/2             : ") + flag(r.k3_ok) + "\n";
    out += std::string("  k4 > 1/2             : ") + flag(r.k4_ok) + "\n";
    out += std::string("  alpha_F  >= delta_1  : ") + flag(r.alpha_force_ok) +
           " (margin " + std::to_string(r.margin_force) + ")\n";
    out += std::string("  alpha_tau >= delta_2 : ") + flag(r.alpha_torque_ok) +
           " (margin " + std::to_string(r.margin_torque) + ")\n";
    out += "  c1 = " + std::to_string(r.c1) + ", c2 = " + std::to_string(r.c2) +
           ", region scale 2*sqrt(c1*c2) = " + std::to_string(r.region_scale) + "\n";
    return out;
}

// Measurable quadratic part of the stability function: half the squared
// norms of all six loop error vectors per step.
struct SurrogateSeries {
    std::vector<double> values;            // one per record
    double decreasing_fraction = 0.0;      // over the requested window
};

inline SurrogateSeries lyapunov_surrogate(const RunLog& log, double window_start = 0.0) {
    SurrogateSeries out;
    out.values.reserve(log.records.size());
    for (const LogRecord& r : log.records) {
        const double v = 0.5 * (r.position_errors.tracking.squaredNorm() +
                                r.position_errors.filtered.squaredNorm() +
                                r.position_errors.auxiliary.squaredNorm() +
                                r.attitude_errors.tracking.squaredNorm() +
                                r.attitude_errors.filtered.squaredNorm() +
                                r.attitude_errors.auxiliary.squaredNorm());
        out.values.push_back(v);
    }
    long considered = 0, decreasing = 0;
    for (std::size_t i = 1; i < log.records.size(); ++i) {
        if (log.records[i - 1].t < window_start) continue;
        ++considered;
        if (out.values[i] < out.values[i - 1]) ++decreasing;
    }
    out.decreasing_fraction =
        considered > 0 ? static_cast<double>(decreasing) / static_cast<double>(considered) : 0.0;
    return out;
}

// Grouped RMS tracking errors over a time window. The RMS of a group is
// taken over every (component, step) pair, and every group is measured
// against the reference trajectory so that different control modes are
// compared against identical desired signals.
struct MetricsRow {
    double uncertainty_level = 0.0;
    ControlMode mode = ControlMode::Adaptive;
    double rms_position = 0.0;  // m
    double rms_velocity = 0.0;  // m/s
    double rms_attitude = 0.0;  // rad
    double rms_rates = 0.0;     // rad/s
    std::uint64_t param_hash = 0;
    bool diverged = false;
};

inline MetricsRow rms_metrics(const RunLog& log, double t0, double t1) {
    if (!(t0 < t1)) throw ConfigError("metrics window must have positive length");
    double sp = 0, sv = 0, sa = 0, sr = 0;
    long n = 0;
    for (const LogRecord& r : log.records) {
        if (r.t < t0 || r.t > t1) continue;
        ++n;
        sp += (r.state.position - r.reference.position).squaredNorm();
        sv += (r.state.velocity - r.reference.velocity).squaredNorm();
        sa += (r.state.attitude - r.reference.attitude).squaredNorm();
        sr += (r.state.body_rates - r.reference.body_rates).squaredNorm();
    }
    if (n == 0) throw ConfigError("metrics window contains no samples");
    const double denom = 3.0 * static_cast<double>(n);
    MetricsRow row;
    row.uncertainty_level = log.uncertainty_level;
    row.mode = log.mode;
    row.rms_position = std::sqrt(sp / denom);
    row.rms_velocity = std::sqrt(sv / denom);
    row.rms_attitude = std::sqrt(sa / denom);
    row.rms_rates = std::sqrt(sr / denom);
    row.param_hash = log.param_hash;
    return row;
}

inline constexpr const char* kMetricsHeader =
    "uncertainty_level,mode,rms_P,rms_V,rms_w,rms_Omega,param_hash,diverged";

inline void write_csv(const std::vector<MetricsRow>& rows, std::ostream& os) {
    os << kMetricsHeader << '\n';
    std::string line;
    for (const MetricsRow& m : rows) {
        line.clear();
        detail::append_number(line, m.uncertainty_level);
        line += ',';
        line += to_string(m.mode);
        line += ',';
        detail::append_number(line, m.rms_position);
        line += ',';
        detail::append_number(line, m.rms_velocity);
        line += ',';
        detail::append_number(line, m.rms_attitude);
        line += ',';
        detail::append_number(line, m.rms_rates);
        line += ',';
        line += std::to_string(m.param_hash);
        line += ',';
        line += m.diverged ? '1' : '0';
        line += '\n';
        os << line;
    }
}

// Aligned human-readable summary of a metrics table.
inline std::string format_table(const std::vector<MetricsRow>& rows) {
    char buf[160];
    std::string out =
        "  level  mode      rms_P        rms_V        rms_w        rms_Omega    diverged\n";
    for (const MetricsRow& m : rows) {
        std::snprintf(buf, sizeof(buf), "%+7.2f  %-8s  %-11.4e  %-11.4e  %-11.4e  %-11.4e  %s\n",
                      m.uncertainty_level, to_string(m.mode), m.rms_position, m.rms_velocity,
                      m.rms_attitude, m.rms_rates, m.diverged ? "yes" : "no");
        out += buf;
    }
    return out;
}

}  // namespace quadrise

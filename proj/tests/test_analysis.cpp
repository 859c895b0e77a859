#include "quadrise/analysis.hpp"
#include "quadrise/simulation.hpp"

#include <catch2/catch.hpp>

#include <cmath>
#include <sstream>

using namespace quadrise;

TEST_CASE("gain check passes the stock gains with exact margins") {
    const GainReport r = check_gains(ControlGains{}, 0.005, 0.005);
    REQUIRE(r.all_ok());
    REQUIRE(r.c1 == 1.0);  // min(4.5, 2.0, 1.0, 19.5, 8.5)
    REQUIRE(r.c2 == 2.0);  // min(2, 5)
    REQUIRE(r.region_scale == Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
    REQUIRE(r.margin_force == Approx(0.005));
    REQUIRE(r.margin_torque == Approx(0.005));
}

TEST_CASE("gain check flags an undersized filter gain") {
    ControlGains g;
    g.k1 = 0.4;
    const GainReport r = check_gains(g, 0.005, 0.005);
    REQUIRE_FALSE(r.k1_ok);
    REQUIRE(r.k2_ok);
    REQUIRE(r.k3_ok);
    REQUIRE(r.k4_ok);
    REQUIRE_FALSE(r.all_ok());
    REQUIRE(r.c1 == Approx(-0.1));
}

TEST_CASE("gain check flags an undersized norm-feedback gain") {
    const GainReport r = check_gains(ControlGains{}, 0.02, 0.005);
    REQUIRE_FALSE(r.alpha_force_ok);
    REQUIRE(r.alpha_torque_ok);
    REQUIRE(r.margin_force == Approx(-0.01));
}

TEST_CASE("gain check rejects out-of-range uncertainty bounds") {
    REQUIRE_THROWS_AS(check_gains(ControlGains{}, -0.1, 0.0), ConfigError);
    REQUIRE_THROWS_AS(check_gains(ControlGains{}, 0.0, 1.0), ConfigError);
}

TEST_CASE("gain check ignores fields outside the conditions") {
    ControlGains a, b = a;
    b.adapt_rate_pos = 9.0;
    b.sign_sharpness = 200.0;
    b.baseline_robust_gain = 3.0;
    const GainReport ra = check_gains(a, 0.005, 0.005);
    const GainReport rb = check_gains(b, 0.005, 0.005);
    REQUIRE(ra.c1 == rb.c1);
    REQUIRE(ra.c2 == rb.c2);
    REQUIRE(ra.all_ok() == rb.all_ok());
}

namespace {
RunLog synthetic_log(const std::vector<double>& xs) {
    RunLog log;
    log.dt = 1e-3;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        LogRecord r;
        r.t = static_cast<double>(k) * log.dt;
        r.position_errors.tracking = {xs[k], 0.0, 0.0};
        log.records.push_back(r);
    }
    return log;
}
}  // namespace

TEST_CASE("stability surrogate of a perfect log is identically zero") {
    const RunLog log = synthetic_log({0.0, 0.0, 0.0, 0.0});
    const SurrogateSeries s = lyapunov_surrogate(log);
    for (double v : s.values) REQUIRE(v == 0.0);
}

TEST_CASE("stability surrogate matches the quadratic form and counts decreases") {
    RunLog log;
    log.dt = 1.0;
    for (int k = 0; k < 4; ++k) {
        LogRecord r;
        r.t = k;
        const double e = 3.0 - k;  // strictly decreasing error
        r.position_errors.tracking = {e, 0.0, 0.0};
        r.position_errors.filtered = {0.0, 2.0 * e, 0.0};
        r.attitude_errors.auxiliary = {0.0, 0.0, -e};
        log.records.push_back(r);
    }
    const SurrogateSeries s = lyapunov_surrogate(log);
    for (int k = 0; k < 4; ++k) {
        const double e = 3.0 - k;
        REQUIRE(s.values[k] == Approx(0.5 * (e * e + 4.0 * e * e + e * e)));
        REQUIRE(s.values[k] >= 0.0);
    }
    REQUIRE(s.decreasing_fraction == 1.0);
}

TEST_CASE("surrogate decrease fraction measured on the stock scenario") {
    // Calibration note: with the helix reference the error components keep
    // crossing zero at the trajectory frequency, so the stepwise-decrease
    // fraction of the surrogate hovers near one half once converged. The
    // value here pins the behaviour measured in the calibration run.
    Scenario sc;
    sc.uncertainty_level = 0.0;
    sc.disturbance.force_magnitude = 0.0;
    sc.disturbance.torque_magnitude = 0.0;
    const RunLog log = simulate(sc, ControlMode::Adaptive);
    const SurrogateSeries s = lyapunov_surrogate(log, 20.0);
    REQUIRE(s.decreasing_fraction > 0.35);
    REQUIRE(s.decreasing_fraction < 0.75);
}

TEST_CASE("rms metrics of a zero-error log vanish") {
    Scenario sc;
    sc.trajectory.id = "hover";
    sc.start_on_reference = true;
    sc.uncertainty_level = 0.0;
    sc.disturbance.force_magnitude = 0.0;
    sc.disturbance.torque_magnitude = 0.0;
    sc.horizon = 1.0;
    const RunLog log = simulate(sc, ControlMode::Adaptive);
    const MetricsRow m = rms_metrics(log, 0.0, 1.0);
    REQUIRE(m.rms_position < 1e-6);
    REQUIRE(m.rms_velocity < 1e-5);
    REQUIRE(m.rms_attitude < 1e-5);
    REQUIRE(m.rms_rates < 1e-4);
}

TEST_CASE("grouped rms of a constant single-axis error") {
    RunLog log;
    log.dt = 1e-2;
    for (int k = 0; k <= 100; ++k) {
        LogRecord r;
        r.t = k * log.dt;
        r.state.position = {0.25, 0.0, 0.0};
        r.reference.position = Vec3::Zero();
        log.records.push_back(r);
    }
    const MetricsRow m = rms_metrics(log, 0.0, 1.0);
    REQUIRE(m.rms_position == Approx(0.25 / std::sqrt(3.0)).epsilon(1e-12));
    REQUIRE(m.rms_velocity == 0.0);
}

TEST_CASE("rms metrics are invariant under time translation of a stationary error") {
    RunLog log;
    log.dt = 1e-3;
    for (int k = 0; k <= 20000; ++k) {
        LogRecord r;
        r.t = k * log.dt;
        const double period = 1.0;
        r.state.position = {std::sin(2.0 * M_PI * r.t / period), 0.0, 0.0};
        r.reference.position = Vec3::Zero();
        log.records.push_back(r);
    }
    const MetricsRow a = rms_metrics(log, 1.0, 5.0);
    const MetricsRow b = rms_metrics(log, 8.0, 12.0);  // shifted by whole periods
    REQUIRE(a.rms_position == Approx(b.rms_position).epsilon(1e-9));
}

TEST_CASE("rms metrics reject empty or inverted windows") {
    const RunLog log = synthetic_log({1.0, 2.0});
    REQUIRE_THROWS_AS(rms_metrics(log, 1.0, 1.0), ConfigError);
    REQUIRE_THROWS_AS(rms_metrics(log, 5.0, 9.0), ConfigError);  // no samples inside
}

TEST_CASE("metrics csv and table render every row") {
    std::vector<MetricsRow> rows(2);
    rows[0].uncertainty_level = -0.1;
    rows[0].mode = ControlMode::Adaptive;
    rows[0].rms_position = 0.0123;
    rows[1].uncertainty_level = -0.1;
    rows[1].mode = ControlMode::Baseline;
    rows[1].diverged = true;
    std::ostringstream os;
    write_csv(rows, os);
    const std::string text = os.str();
    REQUIRE(text.find("uncertainty_level,mode,rms_P") == 0);
    REQUIRE(text.find("adaptive") != std::string::npos);
    REQUIRE(text.find("baseline") != std::string::npos);
    const std::string table = format_table(rows);
    REQUIRE(table.find("yes") != std::string::npos);
}

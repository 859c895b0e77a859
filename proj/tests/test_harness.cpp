#include "quadrise/config.hpp"
#include "quadrise/harness.hpp"

#include <catch2/catch.hpp>

#include <cmath>
#include <sstream>

using namespace quadrise;

TEST_CASE("perturbation at level zero is the identity") {
    const PlantParams nominal;
    const PlantParams p = perturb_params(nominal, 0.0, 42);
    REQUIRE(p.mass == nominal.mass);
    REQUIRE(p.inertia == nominal.inertia);
    REQUIRE(p.thrust_coeff == nominal.thrust_coeff);
    REQUIRE(p.motor_gain == nominal.motor_gain);
}

TEST_CASE("perturbation moves every coefficient by exactly the level") {
    const PlantParams nominal;
    const PlantParams p = perturb_params(nominal, 0.10, 7);
    const double pairs[][2] = {
        {p.mass, nominal.mass},
        {p.inertia.x(), nominal.inertia.x()},
        {p.inertia.y(), nominal.inertia.y()},
        {p.inertia.z(), nominal.inertia.z()},
        {p.drag_linear.x(), nominal.drag_linear.x()},
        {p.drag_linear.y(), nominal.drag_linear.y()},
        {p.drag_linear.z(), nominal.drag_linear.z()},
        {p.drag_angular.x(), nominal.drag_angular.x()},
        {p.drag_angular.y(), nominal.drag_angular.y()},
        {p.drag_angular.z(), nominal.drag_angular.z()},
        {p.thrust_coeff, nominal.thrust_coeff},
        {p.drag_moment_coeff, nominal.drag_moment_coeff},
        {p.arm_length, nominal.arm_length},
        {p.rotor_inertia, nominal.rotor_inertia},
        {p.motor_gain, nominal.motor_gain},
    };
    for (auto& [perturbed, base] : pairs)
        REQUIRE(std::abs(perturbed / base - 1.0) == Approx(0.10).epsilon(1e-12));
    REQUIRE(p.gravity == nominal.gravity);  // constant of nature
}

TEST_CASE("perturbation is reproducible per seed and varies across seeds") {
    const PlantParams nominal;
    const PlantParams a = perturb_params(nominal, 0.1, 123);
    const PlantParams b = perturb_params(nominal, 0.1, 123);
    const PlantParams c = perturb_params(nominal, 0.1, 124);
    REQUIRE(param_hash(a) == param_hash(b));
    REQUIRE(param_hash(a) != param_hash(c));
}

TEST_CASE("perturbation rejects levels that kill positivity") {
    REQUIRE_THROWS_AS(perturb_params(PlantParams{}, -1.0, 1), ConfigError);
    REQUIRE_THROWS_AS(perturb_params(PlantParams{}, 1.5, 1), ConfigError);
}

TEST_CASE("config: empty input yields the stock scenario") {
    std::istringstream in("");
    const Scenario sc = scenario_from_config(ConfigMap::parse(in));
    const Scenario stock;
    REQUIRE(sc.nominal.mass == stock.nominal.mass);
    REQUIRE(sc.gains.k3 == stock.gains.k3);
    REQUIRE(sc.dt == stock.dt);
    REQUIRE(sc.horizon == stock.horizon);
    REQUIRE(sc.uncertainty_level == stock.uncertainty_level);
}

TEST_CASE("config: values land in the right fields") {
    std::istringstream in(
        "# comment line\n"
        "plant.m = 1.5\n"
        "plant.I_z = 0.02\n"
        "gains.k1 = 6\n"
        "gains.beta2 = 0.25\n"
        "trajectory.id = hover\n"
        "disturbance.shape = sinusoid\n"
        "disturbance.frequency = 2.5\n"
        "sim.dt = 0.002\n"
        "sim.mode = baseline\n"
        "sim.eta_mode = measured-derivative\n"
        "sim.seed = 99\n"
        "init.offset_x = 0.25\n"
        "init.on_reference = true\n"
        "metrics.window_start = 5\n");
    const Scenario sc = scenario_from_config(ConfigMap::parse(in));
    REQUIRE(sc.nominal.mass == 1.5);
    REQUIRE(sc.nominal.inertia.z() == 0.02);
    REQUIRE(sc.gains.k1 == 6.0);
    REQUIRE(sc.gains.adapt_rate_att == 0.25);
    REQUIRE(sc.trajectory.id == "hover");
    REQUIRE(sc.disturbance.shape == DisturbanceShape::Sinusoid);
    REQUIRE(sc.disturbance.frequency == 2.5);
    REQUIRE(sc.dt == 0.002);
    REQUIRE(sc.mode == ControlMode::Baseline);
    REQUIRE(sc.eta_mode == EtaMode::MeasuredDerivative);
    REQUIRE(sc.seed == 99);
    REQUIRE(sc.initial_offset.x() == 0.25);
    REQUIRE(sc.start_on_reference);
    REQUIRE(sc.metrics_window_start == 5.0);
}

TEST_CASE("config: unknown keys are rejected by name") {
    std::istringstream in("plant.m = 1.0\nplant.mass_typo = 2\n");
    try {
        scenario_from_config(ConfigMap::parse(in));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("plant.mass_typo") != std::string::npos);
    }
}

TEST_CASE("config: malformed input is rejected") {
    std::istringstream dup("sim.dt = 0.001\nsim.dt = 0.002\n");
    REQUIRE_THROWS_AS(ConfigMap::parse(dup), ConfigError);

    std::istringstream noeq("sim.dt 0.001\n");
    REQUIRE_THROWS_AS(ConfigMap::parse(noeq), ConfigError);

    std::istringstream badnum("sim.dt = fast\n");
    REQUIRE_THROWS_AS(scenario_from_config(ConfigMap::parse(badnum)), ConfigError);

    std::istringstream badbool("init.on_reference = yep\n");
    REQUIRE_THROWS_AS(scenario_from_config(ConfigMap::parse(badbool)), ConfigError);

    std::istringstream badmode("sim.mode = turbo\n");
    REQUIRE_THROWS_AS(scenario_from_config(ConfigMap::parse(badmode)), ConfigError);
}

TEST_CASE("paired comparison shares the true plant and differs only in mode") {
    Scenario sc;
    sc.horizon = 2.0;
    sc.uncertainty_level = 0.10;
    const CompareResult res = run_compare(sc);
    REQUIRE(res.adaptive.param_hash == res.baseline.param_hash);
    REQUIRE(res.metrics.size() == 2);
    REQUIRE(res.metrics[0].mode == ControlMode::Adaptive);
    REQUIRE(res.metrics[1].mode == ControlMode::Baseline);
    REQUIRE(res.metrics[0].param_hash == res.metrics[1].param_hash);

    // baseline gains frozen, adaptive gains non-decreasing
    for (const LogRecord& r : res.baseline.records)
        REQUIRE(r.gain_pos == Vec3::Constant(sc.gains.baseline_robust_gain));
    const auto& recs = res.adaptive.records;
    REQUIRE(recs.back().gain_pos.minCoeff() >= 0.0);
    REQUIRE(recs.back().gain_pos.sum() > recs.front().gain_pos.sum());
}

TEST_CASE("compare emits byte-identical csv on repeated runs") {
    Scenario sc;
    sc.horizon = 1.0;
    const CompareResult a = run_compare(sc);
    const CompareResult b = run_compare(sc);
    std::ostringstream la, lb, ma, mb;
    write_csv(a.adaptive, la);
    write_csv(b.adaptive, lb);
    write_csv(a.metrics, ma);
    write_csv(b.metrics, mb);
    REQUIRE(la.str() == lb.str());
    REQUIRE(ma.str() == mb.str());
}

TEST_CASE("sweep covers levels x modes in order with paired seeds") {
    Scenario sc;
    sc.horizon = 1.0;
    SweepOptions opt;
    opt.levels = {-0.05, 0.0, 0.05};
    const std::vector<MetricsRow> rows = run_sweep(sc, opt);
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 0; i < rows.size(); i += 2) {
        REQUIRE(rows[i].mode == ControlMode::Adaptive);
        REQUIRE(rows[i + 1].mode == ControlMode::Baseline);
        REQUIRE(rows[i].uncertainty_level == opt.levels[i / 2]);
        REQUIRE(rows[i].param_hash == rows[i + 1].param_hash);  // paired cells
        REQUIRE_FALSE(rows[i].diverged);
    }
    // distinct levels consume distinct plants
    REQUIRE(rows[0].param_hash != rows[2].param_hash);
}

TEST_CASE("sweep reduced to one nominal level matches the paired comparison") {
    Scenario sc;
    sc.horizon = 1.0;
    sc.uncertainty_level = 0.0;
    SweepOptions opt;
    opt.levels = {0.0};
    const auto rows = run_sweep(sc, opt);
    const CompareResult cmp = run_compare(sc);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].rms_position == cmp.metrics[0].rms_position);
    REQUIRE(rows[1].rms_position == cmp.metrics[1].rms_position);
}

TEST_CASE("sweep marks diverged cells and keeps going") {
    Scenario sc;
    sc.horizon = 1.0;
    sc.divergence_position = 0.1;  // everything diverges immediately
    SweepOptions opt;
    opt.levels = {0.0, 0.05};
    const auto rows = run_sweep(sc, opt);
    REQUIRE(rows.size() == 4);
    for (const MetricsRow& r : rows) {
        REQUIRE(r.diverged);
        REQUIRE(std::isnan(r.rms_position));
    }
}

TEST_CASE("sweep determinism is independent of the worker count") {
    Scenario sc;
    sc.horizon = 1.0;
    SweepOptions serial, parallel;
    serial.levels = parallel.levels = {-0.1, 0.0, 0.1};
    serial.workers = 1;
    parallel.workers = 4;
    const auto a = run_sweep(sc, serial);
    const auto b = run_sweep(sc, parallel);
    std::ostringstream ca, cb;
    write_csv(a, ca);
    write_csv(b, cb);
    REQUIRE(ca.str() == cb.str());
}

TEST_CASE("sweep rejects an empty level list") {
    REQUIRE_THROWS_AS(run_sweep(Scenario{}, SweepOptions{.levels = {}}), ConfigError);
}

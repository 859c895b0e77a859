// Experiment harness: paired adaptive-vs-baseline runs and uncertainty
// sweeps. Paired runs share the identical true plant, disturbance and
// initial condition; sweep cells run in a small worker pool and are
// aggregated in level order, so repeated invocations produce identical
// output bytes.
#pragma once

#include "quadrise/analysis.hpp"
#include "quadrise/scenario.hpp"
#include "quadrise/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace quadrise {

struct CompareResult {
    RunLog adaptive;
    RunLog baseline;
    std::vector<MetricsRow> metrics;  // adaptive row first
};

inline std::pair<double, double> metrics_window(const Scenario& sc) {
    const double t1 = sc.metrics_window_end < 0.0 ? sc.horizon : sc.metrics_window_end;
    return {sc.metrics_window_start, t1};
}

// Two runs differing only in the control mode. Throws SimulationError with
// the failing mode named if either run diverges.
inline CompareResult run_compare(const Scenario& sc) {
    validate(sc);
    const auto [t0, t1] = metrics_window(sc);
    CompareResult out;
    try {
        out.adaptive = simulate(sc, ControlMode::Adaptive);
    } catch (const SimulationError& e) {
        throw SimulationError(std::string("adaptive run failed: ") + e.what(), e.t);
    }
    try {
        out.baseline = simulate(sc, ControlMode::Baseline);
    } catch (const SimulationError& e) {
        throw SimulationError(std::string("baseline run failed: ") + e.what(), e.t);
    }
    out.metrics.push_back(rms_metrics(out.adaptive, t0, t1));
    out.metrics.push_back(rms_metrics(out.baseline, t0, t1));
    return out;
}

struct SweepOptions {
    std::vector<double> levels{-0.15, -0.10, -0.05, 0.0, 0.05, 0.10, 0.15};
    unsigned workers = 0;  // 0: hardware concurrency
};

// Cross product of uncertainty levels and the two control modes. Each level
// is paired: both modes consume the plant perturbed with seed + level index.
// A diverged cell is marked in its row and the sweep continues. Rows come
// back ordered by level, adaptive before baseline.
inline std::vector<MetricsRow> run_sweep(const Scenario& base, const SweepOptions& opt) {
    if (opt.levels.empty()) throw ConfigError("sweep needs at least one level");

    struct Cell {
        double level;
        std::uint64_t seed;
        ControlMode mode;
    };
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < opt.levels.size(); ++i) {
        const std::uint64_t seed = base.seed + static_cast<std::uint64_t>(i);
        cells.push_back({opt.levels[i], seed, ControlMode::Adaptive});
        cells.push_back({opt.levels[i], seed, ControlMode::Baseline});
    }

    // Validate every cell before spending any simulation time.
    for (const Cell& c : cells) {
        Scenario sc = base;
        sc.uncertainty_level = c.level;
        sc.seed = c.seed;
        validate(sc);
    }

    const auto [t0, t1] = metrics_window(base);
    std::vector<MetricsRow> rows(cells.size());

    const auto run_cell = [&](std::size_t i) {
        Scenario sc = base;
        sc.uncertainty_level = cells[i].level;
        sc.seed = cells[i].seed;
        try {
            const RunLog log = simulate(sc, cells[i].mode);
            rows[i] = rms_metrics(log, t0, t1);
        } catch (const SimulationError&) {
            MetricsRow& r = rows[i];
            r.uncertainty_level = cells[i].level;
            r.mode = cells[i].mode;
            r.rms_position = r.rms_velocity = r.rms_attitude = r.rms_rates =
                std::numeric_limits<double>::quiet_NaN();
            r.param_hash = param_hash(perturb_params(sc.nominal, sc.uncertainty_level, sc.seed));
            r.diverged = true;
        }
    };

    unsigned workers = opt.workers ? opt.workers : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cells.size())));

    if (workers == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
                    run_cell(i);
            });
        for (std::thread& th : pool) th.join();
    }
    return rows;
}

}  // namespace quadrise

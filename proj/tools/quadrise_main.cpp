// Command-line front end.
//
//   quadrise simulate    one run, CSV log
//   quadrise compare     paired adaptive/baseline runs, logs + metrics
//   quadrise sweep       uncertainty sweep, bar-graph metrics CSV
//   quadrise check-gains gain condition report
//
// Exit codes: 0 success, 1 validation/config error, 2 simulation divergence.

#include "quadrise/quadrise.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace quadrise;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::string mode;
    std::string eta_mode;
    double level = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
    bool seed_set = false;
    double dt = 0.0;
    double horizon = 0.0;
    bool allow_large_level = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_mode) {
    cmd->add_option("--config", a.config_path, "configuration file (key = value lines)");
    cmd->add_option("--out", a.out_dir, "output directory")->capture_default_str();
    if (with_mode)
        cmd->add_option("--mode", a.mode, "control mode: adaptive|baseline");
    cmd->add_option("--level", a.level, "uncertainty level as a signed fraction");
    cmd->add_option("--seed", a.seed, "perturbation seed")->each([&](const std::string&) {
        a.seed_set = true;
    });
    cmd->add_option("--dt", a.dt, "integration step, s");
    cmd->add_option("--horizon", a.horizon, "run length, s");
    cmd->add_flag("--allow-large-level", a.allow_large_level,
                  "permit uncertainty levels beyond +/-15%");
}

Scenario build_scenario(const CommonArgs& a) {
    Scenario sc = a.config_path.empty() ? Scenario{} : scenario_from_file(a.config_path);
    if (!a.mode.empty()) {
        if (a.mode == "adaptive")
            sc.mode = ControlMode::Adaptive;
        else if (a.mode == "baseline")
            sc.mode = ControlMode::Baseline;
        else
            throw ConfigError("--mode must be adaptive or baseline");
    }
    if (!std::isnan(a.level)) sc.uncertainty_level = a.level;
    if (a.seed_set) sc.seed = a.seed;
    if (a.dt > 0.0) sc.dt = a.dt;
    if (a.horizon > 0.0) sc.horizon = a.horizon;
    if (a.allow_large_level) sc.allow_large_level = true;
    return sc;
}

fs::path prepare_out(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << contents;
}

void write_log_csv(const fs::path& path, const RunLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    write_csv(log, out);
}

int cmd_simulate(const CommonArgs& a) {
    const Scenario sc = build_scenario(a);
    const RunLog log = simulate(sc);
    const fs::path out = prepare_out(a.out_dir);
    write_log_csv(out / "run.csv", log);

    const auto [t0, t1] = metrics_window(sc);
    const MetricsRow m = rms_metrics(log, t0, t1);
    const LogRecord& last = log.records.back();
    std::cout << "mode " << to_string(log.mode) << ", level " << log.uncertainty_level
              << ", seed " << log.seed << ", param hash " << log.param_hash << "\n"
              << "final position error " << last.position_errors.tracking.norm()
              << " m, saturated steps " << log.saturation_steps << "\n"
              << format_table({m}) << "wrote " << (out / "run.csv").string() << "\n";
    return 0;
}

int cmd_compare(const CommonArgs& a) {
    const Scenario sc = build_scenario(a);
    const CompareResult res = run_compare(sc);
    const fs::path out = prepare_out(a.out_dir);
    write_log_csv(out / "adaptive.csv", res.adaptive);
    write_log_csv(out / "baseline.csv", res.baseline);
    std::ostringstream metrics;
    write_csv(res.metrics, metrics);
    write_file(out / "metrics.csv", metrics.str());
    const std::string table = format_table(res.metrics);
    write_file(out / "summary.txt", table);
    std::cout << table << "wrote adaptive.csv, baseline.csv, metrics.csv, summary.txt under "
              << out.string() << "\n";
    return 0;
}

int cmd_sweep(const CommonArgs& a, const std::string& levels_arg, unsigned workers) {
    Scenario sc = build_scenario(a);
    SweepOptions opt;
    opt.workers = workers;
    if (!levels_arg.empty()) {
        opt.levels.clear();
        std::stringstream ss(levels_arg);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                opt.levels.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError("--levels: not a number: " + item);
            }
        }
    }
    const std::vector<MetricsRow> rows = run_sweep(sc, opt);
    const fs::path out = prepare_out(a.out_dir);
    std::ostringstream metrics;
    write_csv(rows, metrics);
    write_file(out / "sweep_metrics.csv", metrics.str());
    const std::string table = format_table(rows);
    write_file(out / "summary.txt", table);
    std::cout << table << "wrote sweep_metrics.csv, summary.txt under " << out.string() << "\n";
    return 0;
}

int cmd_check_gains(const CommonArgs& a, double delta1, double delta2, bool write_report) {
    const Scenario sc = a.config_path.empty() ? Scenario{} : scenario_from_file(a.config_path);
    const GainReport rep = check_gains(sc.gains, delta1, delta2);
    const std::string text = format_report(rep);
    std::cout << text;
    if (write_report) write_file(prepare_out(a.out_dir) / "gain_report.txt", text);
    return rep.all_ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadrotor adaptive robust tracking control simulator"};
    app.require_subcommand(1);

    CommonArgs sim_args, cmp_args, swp_args, gain_args;
    std::string levels_arg;
    unsigned workers = 0;
    double delta1 = 0.005, delta2 = 0.005;

    CLI::App* sim = app.add_subcommand("simulate", "run one closed-loop simulation");
    add_common(sim, sim_args, true);
    CLI::App* cmp = app.add_subcommand("compare", "paired adaptive vs baseline run");
    add_common(cmp, cmp_args, false);
    CLI::App* swp = app.add_subcommand("sweep", "uncertainty sweep over both modes");
    add_common(swp, swp_args, false);
    swp->add_option("--levels", levels_arg, "comma-separated uncertainty levels");
    swp->add_option("--workers", workers, "worker threads (0 = hardware)");
    CLI::App* gains = app.add_subcommand("check-gains", "verify the gain conditions");
    gains->add_option("--config", gain_args.config_path, "configuration file");
    CLI::Option* gains_out =
        gains->add_option("--out", gain_args.out_dir, "output directory for the report");
    gains->add_option("--delta1", delta1, "force-loop uncertainty bound")->capture_default_str();
    gains->add_option("--delta2", delta2, "torque-loop uncertainty bound")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_args);
        if (cmp->parsed()) return cmd_compare(cmp_args);
        if (swp->parsed()) return cmd_sweep(swp_args, levels_arg, workers);
        if (gains->parsed())
            return cmd_check_gains(gain_args, delta1, delta2, gains_out->count() > 0);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const SimulationError& e) {
        std::cerr << "simulation aborted: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

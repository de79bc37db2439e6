#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdtc/harness.hpp"
#include "sdtc/scenario.hpp"

namespace {

sdtc::ScenarioConfig resolve_scenario(const std::string& name_or_path) {
    if (std::filesystem::exists(name_or_path)) return sdtc::load_scenario(name_or_path);
    if (name_or_path == "single" || name_or_path == "arterial3")
        return sdtc::builtin_scenario(name_or_path);
    throw sdtc::ConfigError("scenario '" + name_or_path +
                            "' is neither a readable file nor a bundled scenario "
                            "(single, arterial3)");
}

// Keep the measurement window at the same fractions of the run when the
// duration is overridden from the command line.
void override_duration(sdtc::ScenarioConfig& sc, double duration) {
    const double from_frac = sc.measure_from_s / sc.duration_s;
    const double to_frac = sc.measure_to_s / sc.duration_s;
    sc.duration_s = duration;
    sc.measure_from_s = from_frac * duration;
    sc.measure_to_s = to_frac * duration;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Schedule-driven traffic control simulator"};
    app.require_subcommand(1);

    // ---- run: one scenario, one seed --------------------------------------
    std::string run_scn = "single";
    std::uint64_t run_seed = 1;
    std::string run_controller, run_demand, run_out;
    double run_interval = -1.0, run_penetration = -1.0, run_duration = -1.0;
    auto* run = app.add_subcommand("run", "Simulate one scenario with one seed");
    run->add_option("--scenario", run_scn, "Bundled name (single, arterial3) or JSON path");
    run->add_option("--seed", run_seed, "Random seed");
    run->add_option("--controller", run_controller, "fixed | schedule | coop")
        ->check(CLI::IsMember({"fixed", "schedule", "coop"}));
    run->add_option("--demand", run_demand, "Demand tier (low | med | high)");
    run->add_option("--interval", run_interval, "Clustering interval (s)");
    run->add_option("--penetration", run_penetration, "CAV fraction in [0, 1]");
    run->add_option("--duration", run_duration, "Simulated seconds");
    run->add_option("--out", run_out, "Write per-run CSV here");

    // ---- sweep: cross product of axes --------------------------------------
    std::string sw_scn = "single", sw_out;
    std::vector<std::string> sw_controllers{"fixed", "schedule", "coop"};
    std::vector<std::string> sw_demands{"low", "med", "high"};
    std::vector<double> sw_intervals{0.0, 3.0};
    std::vector<double> sw_penetrations{1.0};
    std::vector<std::uint64_t> sw_seeds;
    double sw_duration = -1.0;
    int sw_threads = 0;
    auto* sw = app.add_subcommand("sweep", "Run a demand x controller x interval x "
                                           "penetration grid over several seeds");
    sw->add_option("--scenario", sw_scn, "Bundled name or JSON path");
    sw->add_option("--controllers", sw_controllers, "Comma-separated controller list")
        ->delimiter(',');
    sw->add_option("--demands", sw_demands, "Comma-separated demand tiers")->delimiter(',');
    sw->add_option("--intervals", sw_intervals, "Comma-separated intervals (s)")
        ->delimiter(',');
    sw->add_option("--penetrations", sw_penetrations, "Comma-separated CAV fractions")
        ->delimiter(',');
    sw->add_option("--seeds", sw_seeds, "Comma-separated seeds (default: scenario's)")
        ->delimiter(',');
    sw->add_option("--duration", sw_duration, "Simulated seconds");
    sw->add_option("--threads", sw_threads, "Worker threads (0 = hardware)");
    sw->add_option("--out", sw_out, "Write per-run CSV here");

    // ---- export: write a bundled scenario as an editable file --------------
    std::string ex_name = "single", ex_out;
    auto* ex = app.add_subcommand("export", "Write a bundled scenario as JSON");
    ex->add_option("--scenario", ex_name, "Bundled name (single, arterial3)");
    ex->add_option("--out", ex_out, "Output path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            sdtc::ScenarioConfig sc = resolve_scenario(run_scn);
            if (!run_controller.empty()) sc.controller = run_controller;
            if (!run_demand.empty()) sc.demand_tier = run_demand;
            if (run_interval >= 0.0) sc.clustering_interval_s = run_interval;
            if (run_penetration >= 0.0) sc.penetration = run_penetration;
            if (run_duration > 0.0) override_duration(sc, run_duration);
            const sdtc::RunResult r = sdtc::run_scenario(sc, run_seed);
            const std::vector<sdtc::RunResult> rows{r};
            std::cout << sdtc::results_table(rows);
            if (r.no_vehicles)
                std::cout << "note: no vehicles entered the measurement window\n";
            if (!run_out.empty()) {
                sdtc::write_results_csv(run_out, rows);
                std::cout << "wrote " << run_out << "\n";
            }
        } else if (sw->parsed()) {
            sdtc::ScenarioConfig sc = resolve_scenario(sw_scn);
            if (sw_duration > 0.0) override_duration(sc, sw_duration);
            const auto seeds = sw_seeds.empty() ? sc.seeds : sw_seeds;
            sdtc::SweepAxes axes;
            axes.demands = sw_demands;
            axes.controllers = sw_controllers;
            axes.intervals = sw_intervals;
            axes.penetrations = sw_penetrations;
            const auto results = sdtc::sweep(sc, axes, seeds, sw_threads);
            std::cout << sdtc::results_table(results);
            if (!sw_out.empty()) {
                sdtc::write_results_csv(sw_out, results);
                std::cout << "wrote " << sw_out << "\n";
            }
        } else if (ex->parsed()) {
            const std::string text = sdtc::scenario_to_json(sdtc::builtin_scenario(ex_name));
            if (ex_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(ex_out);
                if (!out) throw sdtc::ConfigError("cannot write '" + ex_out + "'");
                out << text;
                std::cout << "wrote " << ex_out << "\n";
            }
        }
    } catch (const sdtc::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

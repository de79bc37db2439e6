#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdtc/scenario.hpp"

namespace sdtc {

/// Outcome of one seeded run: delay statistics over the vehicles that entered
/// the network inside the measurement window and completed their trips.
struct RunResult {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string controller;
    std::string demand;  // tier name
    double interval = 0.0;
    double penetration = 1.0;
    int vehicles = 0;  // measured trips
    double mean_delay_s = 0.0;
    double std_delay_s = 0.0;
    int throughput = 0;        // completed trips over the whole run
    bool no_vehicles = false;  // measured set was empty; stats reported as 0
    std::uint64_t determinism_hash = 0;
};

/// Simulates one scenario with one seed. Validation errors name the field.
RunResult run_scenario(const ScenarioConfig& sc, std::uint64_t seed);

/// Grid axes for sweep(); an empty axis inherits the template's setting.
struct SweepAxes {
    std::vector<std::string> demands;
    std::vector<std::string> controllers;
    std::vector<double> intervals;
    std::vector<double> penetrations;
};

/// Runs the full cross product of axes x seeds, cells in parallel, results in
/// deterministic grid order (demand, controller, interval, penetration, seed).
/// Errors propagate with the failing cell's coordinates. max_threads <= 0 uses
/// the hardware concurrency.
std::vector<RunResult> sweep(const ScenarioConfig& base, const SweepAxes& axes,
                             const std::vector<std::uint64_t>& seeds, int max_threads = 0);

/// One row per run under the exact header
/// scenario,seed,controller,demand,interval,penetration,vehicles,mean_delay_s,std_delay_s
std::string results_csv(const std::vector<RunResult>& results);
void write_results_csv(const std::string& path, const std::vector<RunResult>& results);

/// Aligned text table, seeds pooled per cell: mean of the per-run means and
/// their spread across seeds.
std::string results_table(const std::vector<RunResult>& results);

}  // namespace sdtc

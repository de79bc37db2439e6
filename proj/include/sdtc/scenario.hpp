#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sdtc/cooperative.hpp"
#include "sdtc/idm.hpp"
#include "sdtc/network.hpp"
#include "sdtc/types.hpp"

namespace sdtc {

/// Full description of one simulation run: network, demand, controller and
/// measurement settings. Serializable to/from JSON scenario files.
struct ScenarioConfig {
    std::string name = "scenario";
    Network network;
    TurnFractions turns;

    std::map<std::string, double> demand_tiers = {
        {"low", 363.0}, {"med", 750.0}, {"high", 1250.0}};
    std::string demand_tier = "med";

    std::string controller = "schedule";  // fixed | schedule | coop
    double clustering_interval_s = 0.0;
    double penetration = 1.0;  // CAV fraction in [0, 1]
    bool batch_reschedule = false;

    double duration_s = 1200.0;
    double measure_from_s = 300.0;
    double measure_to_s = 900.0;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

    double dt_s = 0.5;
    double control_period_s = 1.0;
    double service_time_s = 2.0;
    double queue_speed_mps = 2.0;
    double vehicle_length_m = 5.0;
    double sensing_horizon_s = 90.0;

    IdmParams idm;
    CoopConfig coop;

    double demand_rate() const;  // veh/h of the active tier
    void validate() const;
};

/// Bundled scenarios: "single" (one two-phase intersection, two-lane main road
/// crossing a one-lane side street) and "arterial3" (three coordinated
/// intersections along a 300 m-link arterial).
ScenarioConfig builtin_scenario(const std::string& name);

ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig scenario_from_json_text(const std::string& text, const std::string& origin);
std::string scenario_to_json(const ScenarioConfig& sc);

}  // namespace sdtc

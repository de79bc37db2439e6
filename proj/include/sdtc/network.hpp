#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdtc/rng.hpp"
#include "sdtc/scheduler.hpp"
#include "sdtc/types.hpp"

namespace sdtc {

enum class Turn { straight, left, right };

const char* turn_name(Turn t);

/// A directed road segment. Roads ending at an intersection carry the phase
/// that serves them there; roads without a downstream intersection exit the
/// network.
struct RoadDef {
    RoadId id;
    double length = 300.0;
    int lanes = 1;
    double limit = 18.06;  // m/s
    std::string to;        // downstream intersection id, "" = network exit
    int phase = -1;        // phase at `to` (-1 when exiting)
};

/// Exit roads reachable from one entry road. Missing movements get empty ids;
/// their probability mass goes to the remaining movements.
struct TurnMap {
    RoadId from;
    RoadId straight;
    RoadId left;
    RoadId right;
};

struct IntersectionDef {
    std::string id;
    int phase_count = 2;
    double min_switch_s = 4.0;
    double startup_lost_s = 2.0;
    double max_green_s = 60.0;
    double min_green_s = 5.0;
    std::vector<TurnMap> turns;

    IntersectionConfig signal_config() const;
};

/// A boundary inflow: vehicles spawn onto `road` at rate weight * total demand.
struct SourceDef {
    RoadId road;
    double weight = 0.0;
};

struct TurnFractions {
    double straight = 0.8;
    double left = 0.1;
    double right = 0.1;
};

struct Network {
    std::vector<RoadDef> roads;
    std::vector<IntersectionDef> intersections;
    std::vector<SourceDef> sources;

    const RoadDef& road(const RoadId& id) const;
    const IntersectionDef& intersection(const std::string& id) const;
    const TurnMap& turn_map(const std::string& intersection, const RoadId& from) const;
    std::vector<RoadId> entry_roads(const std::string& intersection) const;
    void validate() const;  // throws ConfigError naming the offending field
};

/// Samples a route from `start` to a network exit using the turn fractions.
std::vector<RoadId> draw_route(const Network& net, const RoadId& start,
                               const TurnFractions& frac, Rng& rng);

/// Expected steady-state flow (veh/h) per road given per-source rates,
/// propagating turn fractions downstream. Used to derive fixed-time demands.
std::map<RoadId, double> expected_flows(const Network& net,
                                        const std::map<RoadId, double>& source_rates,
                                        const TurnFractions& frac);

}  // namespace sdtc

#include "sdtc/cluster.hpp"

#include <algorithm>

namespace sdtc {

int InputClusterSequence::total_clusters() const {
    int n = 0;
    for (const auto& roads : by_phase)
        for (const auto& seq : roads) n += static_cast<int>(seq.clusters.size());
    return n;
}

int InputClusterSequence::total_vehicles() const {
    int n = 0;
    for (const auto& roads : by_phase)
        for (const auto& seq : roads)
            for (const auto& c : seq.clusters) n += c.count;
    return n;
}

RoadClusterSequence cluster_vehicles(const std::vector<Observation>& observations,
                                     double interval, RoadId road,
                                     std::optional<double> horizon) {
    if (interval < 0.0) throw ConfigError("cluster_vehicles: interval must be >= 0");
    RoadClusterSequence out;
    out.road = std::move(road);
    for (std::size_t i = 0; i + 1 < observations.size(); ++i) {
        if (observations[i + 1].arrival < observations[i].arrival)
            throw ConfigError("cluster_vehicles: observations must be sorted by arrival");
    }
    for (const auto& ob : observations) {
        if (ob.clearance < ob.arrival)
            throw ConfigError("cluster_vehicles: observation clearance precedes arrival");
        // An explicit look-ahead bound truncates the sequence: arrivals beyond
        // it are not part of this plan (a straddling cluster keeps the members
        // that arrive in time and sheds the rest).
        if (horizon && ob.arrival > *horizon) continue;
        if (!out.clusters.empty() && ob.arrival - out.clusters.back().dep <= interval) {
            Cluster& c = out.clusters.back();
            c.count += 1;
            c.dep = std::max(c.dep, ob.clearance);
            c.members.push_back(ob.vehicle);
        } else {
            out.clusters.push_back(Cluster{1, ob.arrival, ob.clearance, {ob.vehicle}});
        }
    }
    double h = 0.0;
    for (const auto& c : out.clusters) h = std::max(h, c.arr);
    out.horizon = horizon.value_or(h);
    return out;
}

InputClusterSequence combine_by_phase(const std::vector<RoadClusterSequence>& sequences,
                                      const std::map<RoadId, int>& phase_of_road,
                                      std::optional<int> phase_count) {
    int phases = phase_count.value_or(0);
    if (!phase_count) {
        for (const auto& [road, p] : phase_of_road) phases = std::max(phases, p + 1);
    }
    InputClusterSequence out;
    out.by_phase.resize(static_cast<std::size_t>(std::max(phases, 0)));
    for (const auto& seq : sequences) {
        auto it = phase_of_road.find(seq.road);
        if (it == phase_of_road.end())
            throw ConfigError("combine_by_phase: road '" + seq.road + "' has no phase mapping");
        if (it->second < 0 || it->second >= phases)
            throw ConfigError("combine_by_phase: road '" + seq.road + "' maps to phase " +
                              std::to_string(it->second) + " outside [0, " +
                              std::to_string(phases) + ")");
        out.by_phase[static_cast<std::size_t>(it->second)].push_back(seq);
        out.horizon = std::max(out.horizon, seq.horizon);
    }
    return out;
}

}  // namespace sdtc

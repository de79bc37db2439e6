#pragma once

#include <map>
#include <optional>
#include <vector>

#include "sdtc/types.hpp"

namespace sdtc {

/// A platoon of consecutive vehicles treated as one scheduling job.
/// arr is the predicted arrival of the first member at the stop line,
/// dep the predicted clearance of the last member. |c| == count == members.size().
struct Cluster {
    int count = 0;
    double arr = 0.0;
    double dep = 0.0;
    std::vector<VehicleId> members;

    double service() const { return dep - arr; }
};

/// One sensed vehicle: predicted stop-line arrival and clearance time.
struct Observation {
    VehicleId vehicle = 0;
    double arrival = 0.0;
    double clearance = 0.0;
};

/// Time-ordered, non-overlapping clusters observed on one entry road.
struct RoadClusterSequence {
    RoadId road;
    std::vector<Cluster> clusters;
    double horizon = 0.0;  // look-ahead bound; every cluster arr <= horizon
};

/// Road sequences grouped by the signal phase that serves them.
struct InputClusterSequence {
    std::vector<std::vector<RoadClusterSequence>> by_phase;
    double horizon = 0.0;

    int phase_count() const { return static_cast<int>(by_phase.size()); }
    int total_clusters() const;
    int total_vehicles() const;
};

/// Greedy left-to-right clustering: a vehicle joins the current cluster when the
/// gap between its arrival and the cluster's clearance is <= interval.
/// interval == 0 merges only contiguous vehicles. Observations must be sorted by
/// arrival; each observed vehicle lands in exactly one cluster.
RoadClusterSequence cluster_vehicles(const std::vector<Observation>& observations,
                                     double interval, RoadId road = {},
                                     std::optional<double> horizon = std::nullopt);

/// Groups road sequences under their phases per the road->phase map.
/// Throws ConfigError for a road missing from the map. Roads with no clusters
/// are retained. phase_count defaults to max mapped phase + 1.
InputClusterSequence combine_by_phase(const std::vector<RoadClusterSequence>& sequences,
                                      const std::map<RoadId, int>& phase_of_road,
                                      std::optional<int> phase_count = std::nullopt);

}  // namespace sdtc

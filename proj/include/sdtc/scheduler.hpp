#pragma once

#include <vector>

#include "sdtc/cluster.hpp"
#include "sdtc/types.hpp"

namespace sdtc {

/// Per-intersection signal timing parameters shared by planner and executor.
/// min_switch is a phase_count x phase_count matrix (row s, column i) of
/// changeover times; the diagonal must be zero.
struct IntersectionConfig {
    int phase_count = 2;
    std::vector<double> min_switch;     // row-major [s * phase_count + i]
    std::vector<double> startup_lost;   // slt per phase, added once per stopped start
    std::vector<double> max_green;      // fairness cap per phase
    std::vector<double> min_green;      // shortest allowed green run per phase

    double min_switch_at(int s, int i) const {
        return min_switch[static_cast<std::size_t>(s * phase_count + i)];
    }
    void validate() const;  // throws ConfigError naming the bad field

    /// Convenience: same changeover/lost/max/min values for every phase.
    static IntersectionConfig uniform(int phases, double switch_s = 4.0, double slt_s = 2.0,
                                      double max_green_s = 60.0, double min_green_s = 5.0);
};

/// Forward-recursion state after scheduling k clusters: current phase s, duration
/// pd of the phase's running green, finish time t of the last cluster, and the
/// cumulative delay d accrued so far.
struct ScheduleState {
    int phase = 0;
    double pd = 0.0;
    double t = 0.0;
    double d = 0.0;
};

/// One scheduled cluster with its permitted start (pst), actual start (ast) and
/// finish annotations.
struct ScheduledCluster {
    int phase = 0;
    RoadId road;
    Cluster cluster;
    double pst = 0.0;
    double ast = 0.0;
    double finish = 0.0;

    double delay() const { return cluster.count * (ast - cluster.arr); }
};

/// A complete signal schedule: the phase sequence with per-cluster annotations,
/// plus the state it started from and ended in.
struct ControlFlow {
    std::vector<ScheduledCluster> entries;
    ScheduleState initial;
    ScheduleState final_state;

    std::vector<int> phase_sequence() const;
};

struct StateAdvance {
    ScheduleState state;
    double pst = 0.0;
    double ast = 0.0;
};

/// Appends one cluster on phase `next_phase` to the partial schedule `prev`:
///   pst = t + MinSwitch(s, i)
///   ast = max(arr, pst), plus startup lost time when switching onto a waiting cluster
///   t'  = ast + (dep - arr)
///   pd' = t' - pst on a phase change, else pd + (t' - pst)
///   d'  = d + |c| * (ast - arr)
StateAdvance advance_state(const ScheduleState& prev, int next_phase, const Cluster& c,
                           const IntersectionConfig& cfg);

/// Same transition as the planner uses: when switching away from a green run
/// shorter than min_green, the run is first held open until min_green elapses.
StateAdvance advance_with_min_green(const ScheduleState& prev, int next_phase,
                                    const Cluster& c, const IntersectionConfig& cfg);

/// Sum of |c| * (ast - arr) over all scheduled clusters (Eq. form of total delay).
double cumulative_delay(const ControlFlow& flow);

struct DpOptions {
    /// When set, a green run may not accumulate more service than max_green while
    /// another phase still has unscheduled clusters. enforce_max_green uses this.
    bool cap_max_green = false;
};

/// Optimal interleaving of the per-phase cluster sequences (order within each
/// road preserved) minimizing cumulative delay. States with equal consumed-cluster
/// index vectors and phase are pruned by Pareto dominance; equal-delay schedules
/// tie-break to the lexicographically smallest phase sequence.
ControlFlow forward_dp(const InputClusterSequence& input, const ScheduleState& initial,
                       const IntersectionConfig& cfg, const DpOptions& opts = {});

/// Splits clusters so no phase run needs more green than max_green while other
/// traffic waits, re-solving until the schedule is violation-free. A schedule
/// without violations is returned unchanged.
ControlFlow enforce_max_green(const ControlFlow& flow, const InputClusterSequence& input,
                              const ScheduleState& initial, const IntersectionConfig& cfg);

/// Picks the cluster with the largest schedule-level delay (max ast - arr),
/// re-expresses every vehicle arriving inside its [arr, ast] window as a
/// singleton batch, re-solves, and returns whichever of the two schedules has
/// less cumulative delay. Never increases cumulative delay.
ControlFlow reschedule_largest_delay_batch(const ControlFlow& flow,
                                           const InputClusterSequence& input,
                                           const ScheduleState& initial,
                                           const IntersectionConfig& cfg);

}  // namespace sdtc

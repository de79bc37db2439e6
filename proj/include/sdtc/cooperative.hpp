#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "sdtc/scheduler.hpp"
#include "sdtc/types.hpp"

namespace sdtc {

/// Speed-advisory parameters. Advisories are only generated while the
/// arrival/permitted-start ratio gamma lies strictly inside (thr_up, thr_down).
struct CoopConfig {
    double thr_up = 0.6;
    double thr_down = 1.4;
    double a_max = 5.0;          // advisory acceleration scale (m/s^2)
    double omega = 4.0;          // acceleration exponent
    double v_limit = 18.06;      // advisory ceiling (m/s)
    double v_min = 2.0;          // advisory floor (m/s)
    double advisory_horizon = 1.0;  // seconds a vehicle gets to reach the new speed
    double slow_margin_s = 8.0;     // slow-downs pace to this many seconds before pst

    void validate() const;
};

/// One per-cluster advisory: the target speed for the cluster's CAV members.
struct SpeedAdvisory {
    std::size_t entry_index = 0;          // index into ControlFlow.entries
    std::vector<VehicleId> cav_members;   // recipients
    double speed = 0.0;                   // advised speed (m/s)
    double issue_time = 0.0;
};

/// Progress of the schedule scan; delta is the slack the previous phase
/// released, applied to the current phase's permitted starts.
struct PhaseScan {
    int phase = -1;
    double pst_prev = 0.0;     // recorded pst of the previous phase
    double pst_cur = 0.0;      // recorded pst of the current phase (pre-shift)
    double end = 0.0;          // latest unmodified arrival seen this phase
    double updated_end = 0.0;  // latest arrival after advisories this phase
    double delta = 0.0;        // >= 0
};

/// gamma = (arr - now) / (pst - now); nullopt when pst or arr is not ahead of now.
std::optional<double> compute_gamma(double arr, double pst, double now);

/// clamp(v + a_max * (1 - gamma^-omega), v_min, v_limit); gamma == 1 returns v
/// unchanged (within clamps).
double new_speed(double v, double gamma, const CoopConfig& cfg);

/// A speed change is acceptable when the target lies within [v_min, v_limit]
/// and is reachable within one advisory horizon at a_max.
bool is_safe(double v, double v_new, const CoopConfig& cfg);

struct ClusterAdvice {
    std::optional<double> speed;   // advised speed, when gamma was in band
    double updated_end = 0.0;      // accumulator advanced with arr' (or arr)
    double revised_arrival = 0.0;  // arr' when advised, else arr
};

/// Applies the gamma band to one scheduled cluster. `pst` is the (shifted)
/// permitted start. Advised speed never moves the cluster's arrival across pst
/// (slow-downs pace to slow_margin_s before it), so waiting clusters stay
/// waiting and free-flowing ones stay free-flowing.
ClusterAdvice advisory_for_cluster(const Cluster& c, double pst, double v, double now,
                                   double updated_end, const CoopConfig& cfg);

struct AdvisoryPlan {
    std::vector<SpeedAdvisory> advisories;
    ControlFlow revised;  // schedule re-costed with the advised arrivals
};

/// Scans the schedule in order, shifting each phase's permitted starts by the
/// slack the previous phase released and advising clusters whose gamma falls in
/// band. Only clusters with at least one CAV member are advised; their revised
/// arrivals never increase the schedule's cumulative delay.
AdvisoryPlan plan_advisories(const ControlFlow& flow,
                             const std::map<VehicleId, double>& speeds,
                             const std::set<VehicleId>& cavs, double now,
                             const IntersectionConfig& icfg, const CoopConfig& cfg);

}  // namespace sdtc

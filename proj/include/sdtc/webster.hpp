#pragma once

#include <vector>

#include "sdtc/scheduler.hpp"
#include "sdtc/types.hpp"

namespace sdtc {

/// A fixed-time signal plan: phases served cyclically with the given greens.
struct FixedPlan {
    double cycle = 0.0;          // total cycle length incl. changeovers (s)
    std::vector<double> greens;  // green per phase (s)
    double lost_time = 0.0;      // per-cycle lost time L (s)
};

/// Webster's method: y_i is the phase's critical flow ratio demand/saturation,
/// C = (1.5 L + 5) / (1 - Y) clamped to [30, 120] s, greens split in proportion
/// to y_i / Y. Throws ConfigError when Y >= 1 (oversaturated).
FixedPlan webster_fixed_plan(const std::vector<double>& demand_veh_h,
                             const std::vector<double>& saturation_veh_h,
                             const IntersectionConfig& cfg);

}  // namespace sdtc

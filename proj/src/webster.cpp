#include "sdtc/webster.hpp"

#include <algorithm>

namespace sdtc {

FixedPlan webster_fixed_plan(const std::vector<double>& demand_veh_h,
                             const std::vector<double>& saturation_veh_h,
                             const IntersectionConfig& cfg) {
    cfg.validate();
    const auto P = static_cast<std::size_t>(cfg.phase_count);
    if (demand_veh_h.size() != P)
        throw ConfigError("webster_fixed_plan: demand must have one entry per phase");
    if (saturation_veh_h.size() != P)
        throw ConfigError("webster_fixed_plan: saturation must have one entry per phase");

    double L = 0.0;
    for (std::size_t i = 0; i < P; ++i) {
        const int prev = static_cast<int>((i + P - 1) % P);
        L += cfg.min_switch_at(prev, static_cast<int>(i)) + cfg.startup_lost[i];
    }

    double Y = 0.0;
    std::vector<double> y(P, 0.0);
    for (std::size_t i = 0; i < P; ++i) {
        if (demand_veh_h[i] < 0.0)
            throw ConfigError("webster_fixed_plan: demand entries must be >= 0");
        if (!(saturation_veh_h[i] > 0.0))
            throw ConfigError("webster_fixed_plan: saturation entries must be > 0");
        y[i] = demand_veh_h[i] / saturation_veh_h[i];
        Y += y[i];
    }
    if (Y >= 1.0)
        throw ConfigError("webster_fixed_plan: critical flow ratio Y >= 1 (oversaturated)");

    double C = (1.5 * L + 5.0) / (1.0 - Y);
    C = std::clamp(C, 30.0, 120.0);

    FixedPlan plan;
    plan.lost_time = L;
    plan.greens.resize(P);
    const double G = std::max(C - L, 0.0);
    for (std::size_t i = 0; i < P; ++i) {
        double g = (Y > 0.0) ? G * y[i] / Y : G / static_cast<double>(P);
        plan.greens[i] = std::max(g, cfg.min_green[i]);
    }
    plan.cycle = L;
    for (const double g : plan.greens) plan.cycle += g;
    return plan;
}

}  // namespace sdtc

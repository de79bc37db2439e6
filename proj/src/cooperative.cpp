#include "sdtc/cooperative.hpp"

#include <algorithm>
#include <cmath>

namespace sdtc {

namespace {
constexpr double kEps = 1e-9;
}

void CoopConfig::validate() const {
    if (!(thr_up > 0.0) || !(thr_up < 1.0))
        throw ConfigError("CoopConfig.thr_up must lie in (0, 1)");
    if (!(thr_down > 1.0)) throw ConfigError("CoopConfig.thr_down must be > 1");
    if (!(a_max > 0.0)) throw ConfigError("CoopConfig.a_max must be > 0");
    if (!(omega > 0.0)) throw ConfigError("CoopConfig.omega must be > 0");
    if (v_min < 0.0) throw ConfigError("CoopConfig.v_min must be >= 0");
    if (!(v_limit > v_min)) throw ConfigError("CoopConfig.v_limit must exceed v_min");
    if (!(advisory_horizon > 0.0)) throw ConfigError("CoopConfig.advisory_horizon must be > 0");
    if (slow_margin_s < 0.0) throw ConfigError("CoopConfig.slow_margin_s must be >= 0");
}

std::optional<double> compute_gamma(double arr, double pst, double now) {
    if (pst - now <= kEps || arr - now <= kEps) return std::nullopt;
    return (arr - now) / (pst - now);
}

double new_speed(double v, double gamma, const CoopConfig& cfg) {
    const double target = v + cfg.a_max * (1.0 - std::pow(gamma, -cfg.omega));
    return std::clamp(target, cfg.v_min, cfg.v_limit);
}

bool is_safe(double v, double v_new, const CoopConfig& cfg) {
    if (v_new < cfg.v_min - kEps || v_new > cfg.v_limit + kEps) return false;
    return std::abs(v_new - v) <= cfg.a_max * cfg.advisory_horizon + kEps;
}

ClusterAdvice advisory_for_cluster(const Cluster& c, double pst, double v, double now,
                                   double updated_end, const CoopConfig& cfg) {
    const auto gamma = compute_gamma(c.arr, pst, now);
    if (!gamma || *gamma <= cfg.thr_up || *gamma >= cfg.thr_down)
        return {std::nullopt, std::max(updated_end, c.arr), c.arr};

    double vn = new_speed(v, *gamma, cfg);
    // The advised arrival must stay on its side of pst: a speed-up may reach pst
    // but not overshoot into the red, a slow-down may coast back to pst but not
    // past it. v' = gamma * v is the speed that lands exactly on pst.
    if (*gamma > 1.0)
        vn = std::min(vn, *gamma * v);
    else if (*gamma < 1.0) {
        // Pace the platoon head slow_margin_s short of the permitted start so
        // the advisory keeps its slot even when the next re-solve lands a
        // slightly earlier green than this one promised.
        const double pm = pst - cfg.slow_margin_s - now;
        if (pm <= kEps) return {std::nullopt, std::max(updated_end, c.arr), c.arr};
        vn = std::max(vn, (c.arr - now) / pm * v);
    }
    const bool useless = (*gamma > 1.0) ? (vn <= v + kEps)
                                        : (*gamma < 1.0 && vn >= v - kEps);
    if (useless) return {std::nullopt, std::max(updated_end, c.arr), c.arr};

    const double arr2 = v / vn * (c.arr - now) + now;
    return {vn, std::max(updated_end, arr2), arr2};
}

AdvisoryPlan plan_advisories(const ControlFlow& flow,
                             const std::map<VehicleId, double>& speeds,
                             const std::set<VehicleId>& cavs, double now,
                             const IntersectionConfig& icfg, const CoopConfig& cfg) {
    cfg.validate();
    AdvisoryPlan plan;
    plan.revised = flow;
    if (flow.entries.empty()) return plan;

    PhaseScan scan;
    scan.pst_prev = now;
    scan.pst_cur = now;
    scan.end = now;
    scan.updated_end = now;

    ScheduleState rc = flow.initial;  // schedule re-costed with realized arrivals
    for (std::size_t k = 0; k < flow.entries.size(); ++k) {
        const ScheduledCluster& e = flow.entries[k];
        // Permitted start the realized schedule actually allows this cluster.
        const double pst_recost = advance_with_min_green(rc, e.phase, e.cluster, icfg).pst;

        if (e.phase != scan.phase) {
            if (scan.phase < 0) {
                scan.phase = e.phase;
                scan.pst_cur = e.pst;
                scan.delta = 0.0;
            } else {
                double d_new = 0.0;
                if (scan.end > scan.pst_cur + kEps)  // not all of the phase waited
                    d_new = scan.end - std::max(scan.pst_cur, scan.updated_end);
                d_new = std::max(0.0, d_new);
                if (e.pst - d_new <= scan.pst_cur + kEps) d_new = 0.0;
                // Never promise an earlier start than the realized schedule gives.
                d_new = std::min(d_new, std::max(0.0, e.pst - pst_recost));
                scan.pst_prev = scan.pst_cur;
                scan.pst_cur = e.pst;
                scan.delta = d_new;
                scan.end = now;
                scan.updated_end = now;
                scan.phase = e.phase;
            }
        }

        const double pst_eff = std::max(e.pst - scan.delta, pst_recost);
        scan.end = std::max(scan.end, e.cluster.arr);

        // Lead speed of the cluster; advisories need a moving lead and >= 1 CAV.
        std::optional<double> v;
        if (!e.cluster.members.empty()) {
            const auto it = speeds.find(e.cluster.members.front());
            if (it != speeds.end()) v = it->second;
        }
        std::vector<VehicleId> cav_members;
        for (const VehicleId m : e.cluster.members)
            if (cavs.count(m)) cav_members.push_back(m);

        double realized_arr = e.cluster.arr;
        if (v && *v >= cfg.v_min && !cav_members.empty()) {
            const ClusterAdvice a =
                advisory_for_cluster(e.cluster, pst_eff, *v, now, scan.updated_end, cfg);
            scan.updated_end = a.updated_end;
            if (a.speed && std::abs(*a.speed - *v) > kEps && is_safe(*v, *a.speed, cfg)) {
                plan.advisories.push_back(
                    SpeedAdvisory{k, std::move(cav_members), *a.speed, now});
                realized_arr = a.revised_arrival;
            }
        } else {
            scan.updated_end = std::max(scan.updated_end, e.cluster.arr);
        }

        Cluster revised_cluster = e.cluster;
        const double svc = e.cluster.service();
        revised_cluster.arr = realized_arr;
        revised_cluster.dep = realized_arr + svc;
        const StateAdvance sa = advance_with_min_green(rc, e.phase, revised_cluster, icfg);
        rc = sa.state;

        ScheduledCluster& out = plan.revised.entries[k];
        out.cluster = std::move(revised_cluster);
        out.pst = sa.pst;
        out.ast = sa.ast;
        out.finish = rc.t;
    }
    plan.revised.final_state = rc;
    return plan;
}

}  // namespace sdtc

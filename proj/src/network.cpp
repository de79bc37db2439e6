#include "sdtc/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sdtc {

const char* turn_name(Turn t) {
    switch (t) {
        case Turn::straight: return "straight";
        case Turn::left: return "left";
        case Turn::right: return "right";
    }
    return "?";
}

IntersectionConfig IntersectionDef::signal_config() const {
    return IntersectionConfig::uniform(phase_count, min_switch_s, startup_lost_s,
                                       max_green_s, min_green_s);
}

const RoadDef& Network::road(const RoadId& id) const {
    for (const auto& r : roads)
        if (r.id == id) return r;
    throw ConfigError("network: unknown road '" + id + "'");
}

const IntersectionDef& Network::intersection(const std::string& id) const {
    for (const auto& x : intersections)
        if (x.id == id) return x;
    throw ConfigError("network: unknown intersection '" + id + "'");
}

const TurnMap& Network::turn_map(const std::string& intersection_id,
                                 const RoadId& from) const {
    const auto& x = intersection(intersection_id);
    for (const auto& t : x.turns)
        if (t.from == from) return t;
    throw ConfigError("network: intersection '" + intersection_id +
                      "' has no turns entry for road '" + from + "'");
}

std::vector<RoadId> Network::entry_roads(const std::string& intersection_id) const {
    std::vector<RoadId> out;
    for (const auto& r : roads)
        if (r.to == intersection_id) out.push_back(r.id);
    return out;
}

void Network::validate() const {
    if (roads.empty()) throw ConfigError("network.roads must not be empty");
    std::set<RoadId> road_ids;
    for (std::size_t i = 0; i < roads.size(); ++i) {
        const auto& r = roads[i];
        const std::string ctx = "network.roads[" + std::to_string(i) + "]";
        if (r.id.empty()) throw ConfigError(ctx + ".id must not be empty");
        if (!road_ids.insert(r.id).second)
            throw ConfigError(ctx + ".id duplicates road '" + r.id + "'");
        if (!(r.length > 0.0)) throw ConfigError(ctx + ".length must be > 0");
        if (r.lanes < 1) throw ConfigError(ctx + ".lanes must be >= 1");
        if (!(r.limit > 0.0)) throw ConfigError(ctx + ".limit must be > 0");
    }
    std::set<std::string> x_ids;
    for (std::size_t i = 0; i < intersections.size(); ++i) {
        const auto& x = intersections[i];
        const std::string ctx = "network.intersections[" + std::to_string(i) + "]";
        if (x.id.empty()) throw ConfigError(ctx + ".id must not be empty");
        if (!x_ids.insert(x.id).second)
            throw ConfigError(ctx + ".id duplicates intersection '" + x.id + "'");
        x.signal_config().validate();
        for (std::size_t k = 0; k < x.turns.size(); ++k) {
            const auto& t = x.turns[k];
            const std::string tctx = ctx + ".turns[" + std::to_string(k) + "]";
            if (!road_ids.count(t.from))
                throw ConfigError(tctx + ".from references unknown road '" + t.from + "'");
            if (road(t.from).to != x.id)
                throw ConfigError(tctx + ".from road '" + t.from +
                                  "' does not end at this intersection");
            bool any = false;
            for (const RoadId* out : {&t.straight, &t.left, &t.right}) {
                if (out->empty()) continue;
                any = true;
                if (!road_ids.count(*out))
                    throw ConfigError(tctx + " references unknown road '" + *out + "'");
            }
            if (!any) throw ConfigError(tctx + " must name at least one exit road");
        }
    }
    for (const auto& r : roads) {
        if (r.to.empty()) continue;
        if (!x_ids.count(r.to))
            throw ConfigError("network.roads '" + r.id +
                              "'.to references unknown intersection '" + r.to + "'");
        const auto& x = intersection(r.to);
        if (r.phase < 0 || r.phase >= x.phase_count)
            throw ConfigError("network.roads '" + r.id + "'.phase must lie in [0, " +
                              std::to_string(x.phase_count) + ")");
        turn_map(x.id, r.id);  // every entry road needs a turns row
    }
    if (sources.empty()) throw ConfigError("network.sources must not be empty");
    double wsum = 0.0;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const auto& s = sources[i];
        const std::string ctx = "network.sources[" + std::to_string(i) + "]";
        if (!road_ids.count(s.road))
            throw ConfigError(ctx + ".road references unknown road '" + s.road + "'");
        if (!(s.weight > 0.0)) throw ConfigError(ctx + ".weight must be > 0");
        wsum += s.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-6)
        throw ConfigError("network.sources weights must sum to 1");
}

namespace {

struct Movement {
    const RoadId* target;
    double weight;
};

// Available movements with their renormalized probabilities.
std::vector<Movement> movements(const TurnMap& tm, const TurnFractions& frac) {
    std::vector<Movement> m;
    if (!tm.straight.empty()) m.push_back({&tm.straight, frac.straight});
    if (!tm.left.empty()) m.push_back({&tm.left, frac.left});
    if (!tm.right.empty()) m.push_back({&tm.right, frac.right});
    double sum = 0.0;
    for (const auto& mv : m) sum += mv.weight;
    if (sum <= 0.0 && !m.empty()) {
        for (auto& mv : m) mv.weight = 1.0 / static_cast<double>(m.size());
        sum = 1.0;
    }
    for (auto& mv : m) mv.weight /= sum;
    return m;
}

}  // namespace

std::vector<RoadId> draw_route(const Network& net, const RoadId& start,
                               const TurnFractions& frac, Rng& rng) {
    std::vector<RoadId> route{start};
    const RoadDef* cur = &net.road(start);
    for (int hop = 0; hop < 64 && !cur->to.empty(); ++hop) {
        const auto m = movements(net.turn_map(cur->to, cur->id), frac);
        const double u = rng.uniform();
        double acc = 0.0;
        const RoadId* pick = m.back().target;
        for (const auto& mv : m) {
            acc += mv.weight;
            if (u < acc) {
                pick = mv.target;
                break;
            }
        }
        route.push_back(*pick);
        cur = &net.road(*pick);
    }
    if (!cur->to.empty()) throw ConfigError("network: route from '" + start + "' has a cycle");
    return route;
}

std::map<RoadId, double> expected_flows(const Network& net,
                                        const std::map<RoadId, double>& source_rates,
                                        const TurnFractions& frac) {
    std::map<RoadId, double> flow;
    // DAG propagation from each source, guarded against cycles by depth.
    struct Walker {
        const Network& net;
        const TurnFractions& frac;
        std::map<RoadId, double>& flow;
        void visit(const RoadId& id, double rate, int depth) {
            if (rate <= 0.0 || depth > 64) return;
            flow[id] += rate;
            const RoadDef& r = net.road(id);
            if (r.to.empty()) return;
            for (const auto& mv : movements(net.turn_map(r.to, r.id), frac))
                visit(*mv.target, rate * mv.weight, depth + 1);
        }
    } w{net, frac, flow};
    for (const auto& [road, rate] : source_rates) w.visit(road, rate, 0);
    return flow;
}

}  // namespace sdtc

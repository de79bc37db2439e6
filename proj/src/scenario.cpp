#include "sdtc/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sdtc {

using nlohmann::json;

double ScenarioConfig::demand_rate() const {
    const auto it = demand_tiers.find(demand_tier);
    if (it == demand_tiers.end())
        throw ConfigError("scenario.demand_tier '" + demand_tier + "' is not defined");
    return it->second;
}

void ScenarioConfig::validate() const {
    network.validate();
    if (turns.straight < 0 || turns.left < 0 || turns.right < 0)
        throw ConfigError("scenario.turn_fractions must be >= 0");
    if (turns.straight + turns.left + turns.right <= 0)
        throw ConfigError("scenario.turn_fractions must not all be zero");
    if (demand_tiers.empty()) throw ConfigError("scenario.demand_tiers must not be empty");
    for (const auto& [tier, rate] : demand_tiers)
        if (!(rate >= 0.0))
            throw ConfigError("scenario.demand_tiers['" + tier + "'] must be >= 0");
    demand_rate();
    if (controller != "fixed" && controller != "schedule" && controller != "coop")
        throw ConfigError("scenario.controller must be fixed, schedule or coop");
    if (clustering_interval_s < 0.0)
        throw ConfigError("scenario.clustering_interval_s must be >= 0");
    if (penetration < 0.0 || penetration > 1.0)
        throw ConfigError("scenario.penetration must lie in [0, 1]");
    if (!(duration_s > 0.0)) throw ConfigError("scenario.duration_s must be > 0");
    if (measure_from_s < 0.0 || measure_to_s > duration_s || measure_from_s >= measure_to_s)
        throw ConfigError("scenario.measure window must satisfy 0 <= from < to <= duration");
    if (seeds.empty()) throw ConfigError("scenario.seeds must not be empty");
    if (!(dt_s > 0.0)) throw ConfigError("scenario.dt_s must be > 0");
    if (control_period_s < dt_s)
        throw ConfigError("scenario.control_period_s must be >= dt_s");
    if (!(service_time_s > 0.0)) throw ConfigError("scenario.service_time_s must be > 0");
    if (queue_speed_mps < 0.0) throw ConfigError("scenario.queue_speed_mps must be >= 0");
    if (!(vehicle_length_m > 0.0)) throw ConfigError("scenario.vehicle_length_m must be > 0");
    if (!(sensing_horizon_s > 0.0)) throw ConfigError("scenario.sensing_horizon_s must be > 0");
    idm.validate();
    coop.validate();
}

namespace {

// --- bundled scenario builders -------------------------------------------

RoadDef mk_road(RoadId id, double length, int lanes, double limit, std::string to = "",
                int phase = -1) {
    RoadDef r;
    r.id = std::move(id);
    r.length = length;
    r.lanes = lanes;
    r.limit = limit;
    r.to = std::move(to);
    r.phase = phase;
    return r;
}

ScenarioConfig make_single() {
    constexpr double kLimit = 18.06;  // 65 km/h
    ScenarioConfig sc;
    sc.name = "single";
    Network& n = sc.network;
    // Main street: two lanes each way on phase 0. Side street: one lane each
    // way on phase 1. Each approach is 300 m.
    n.roads = {
        mk_road("EB_in", 300.0, 2, kLimit, "X", 0),
        mk_road("WB_in", 300.0, 2, kLimit, "X", 0),
        mk_road("NB_in", 300.0, 1, kLimit, "X", 1),
        mk_road("SB_in", 300.0, 1, kLimit, "X", 1),
        mk_road("EB_out", 300.0, 2, kLimit),
        mk_road("WB_out", 300.0, 2, kLimit),
        mk_road("NB_out", 300.0, 1, kLimit),
        mk_road("SB_out", 300.0, 1, kLimit),
    };
    IntersectionDef x;
    x.id = "X";
    x.phase_count = 2;
    x.turns = {
        TurnMap{"EB_in", "EB_out", "NB_out", "SB_out"},
        TurnMap{"WB_in", "WB_out", "SB_out", "NB_out"},
        TurnMap{"NB_in", "NB_out", "WB_out", "EB_out"},
        TurnMap{"SB_in", "SB_out", "EB_out", "WB_out"},
    };
    n.intersections = {x};
    n.sources = {
        SourceDef{"EB_in", 0.35},
        SourceDef{"WB_in", 0.35},
        SourceDef{"NB_in", 0.15},
        SourceDef{"SB_in", 0.15},
    };
    return sc;
}

ScenarioConfig make_arterial3() {
    constexpr double kLimit = 18.06;
    ScenarioConfig sc;
    sc.name = "arterial3";
    Network& n = sc.network;
    // Three intersections X1..X3 along a west-east arterial, 300 m links,
    // one-lane side streets at each.
    n.roads = {
        mk_road("EB0", 300.0, 2, kLimit, "X1", 0),
        mk_road("EB1", 300.0, 2, kLimit, "X2", 0),
        mk_road("EB2", 300.0, 2, kLimit, "X3", 0),
        mk_road("EB3", 300.0, 2, kLimit),
        mk_road("WB0", 300.0, 2, kLimit, "X3", 0),
        mk_road("WB1", 300.0, 2, kLimit, "X2", 0),
        mk_road("WB2", 300.0, 2, kLimit, "X1", 0),
        mk_road("WB3", 300.0, 2, kLimit),
    };
    for (int k = 1; k <= 3; ++k) {
        const std::string xs = std::to_string(k);
        n.roads.push_back(mk_road("NB" + xs + "_in", 300.0, 1, kLimit, "X" + xs, 1));
        n.roads.push_back(mk_road("SB" + xs + "_in", 300.0, 1, kLimit, "X" + xs, 1));
        n.roads.push_back(mk_road("NB" + xs + "_out", 300.0, 1, kLimit));
        n.roads.push_back(mk_road("SB" + xs + "_out", 300.0, 1, kLimit));
    }
    auto mk_x = [](const std::string& id, const RoadId& eb_in, const RoadId& eb_out,
                   const RoadId& wb_in, const RoadId& wb_out, const std::string& k) {
        IntersectionDef x;
        x.id = id;
        x.phase_count = 2;
        x.turns = {
            TurnMap{eb_in, eb_out, "NB" + k + "_out", "SB" + k + "_out"},
            TurnMap{wb_in, wb_out, "SB" + k + "_out", "NB" + k + "_out"},
            TurnMap{"NB" + k + "_in", "NB" + k + "_out", wb_out, eb_out},
            TurnMap{"SB" + k + "_in", "SB" + k + "_out", eb_out, wb_out},
        };
        return x;
    };
    n.intersections = {
        mk_x("X1", "EB0", "EB1", "WB2", "WB3", "1"),
        mk_x("X2", "EB1", "EB2", "WB1", "WB2", "2"),
        mk_x("X3", "EB2", "EB3", "WB0", "WB1", "3"),
    };
    n.sources = {SourceDef{"EB0", 0.25}, SourceDef{"WB0", 0.25}};
    for (int k = 1; k <= 3; ++k) {
        const std::string xs = std::to_string(k);
        n.sources.push_back(SourceDef{"NB" + xs + "_in", 1.0 / 12.0});
        n.sources.push_back(SourceDef{"SB" + xs + "_in", 1.0 / 12.0});
    }
    return sc;
}

// --- json (de)serialization ----------------------------------------------

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw ConfigError(origin + ": " + what);
}

template <typename T>
T req(const json& j, const std::string& key, const std::string& origin) {
    if (!j.contains(key)) fail(origin, "missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(origin, "key '" + key + "' has the wrong type");
    }
}

template <typename T>
T opt(const json& j, const std::string& key, T fallback, const std::string& origin) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(origin, "key '" + key + "' has the wrong type");
    }
}

json network_to_json(const Network& n) {
    json j;
    j["roads"] = json::array();
    for (const auto& r : n.roads) {
        json rj{{"id", r.id}, {"length_m", r.length}, {"lanes", r.lanes},
                {"limit_mps", r.limit}};
        if (!r.to.empty()) {
            rj["to"] = r.to;
            rj["phase"] = r.phase;
        }
        j["roads"].push_back(rj);
    }
    j["intersections"] = json::array();
    for (const auto& x : n.intersections) {
        json xj{{"id", x.id},
                {"phase_count", x.phase_count},
                {"min_switch_s", x.min_switch_s},
                {"startup_lost_s", x.startup_lost_s},
                {"max_green_s", x.max_green_s},
                {"min_green_s", x.min_green_s}};
        xj["turns"] = json::array();
        for (const auto& t : x.turns) {
            json tj{{"from", t.from}};
            if (!t.straight.empty()) tj["straight"] = t.straight;
            if (!t.left.empty()) tj["left"] = t.left;
            if (!t.right.empty()) tj["right"] = t.right;
            xj["turns"].push_back(tj);
        }
        j["intersections"].push_back(xj);
    }
    j["sources"] = json::array();
    for (const auto& s : n.sources)
        j["sources"].push_back(json{{"road", s.road}, {"weight", s.weight}});
    return j;
}

Network network_from_json(const json& j, const std::string& origin) {
    Network n;
    for (const auto& rj : req<json>(j, "roads", origin)) {
        RoadDef r;
        r.id = req<std::string>(rj, "id", origin + ".roads");
        const std::string ctx = origin + ".roads['" + r.id + "']";
        r.length = req<double>(rj, "length_m", ctx);
        r.lanes = opt<int>(rj, "lanes", 1, ctx);
        r.limit = req<double>(rj, "limit_mps", ctx);
        r.to = opt<std::string>(rj, "to", "", ctx);
        r.phase = opt<int>(rj, "phase", r.to.empty() ? -1 : 0, ctx);
        n.roads.push_back(std::move(r));
    }
    for (const auto& xj : req<json>(j, "intersections", origin)) {
        IntersectionDef x;
        x.id = req<std::string>(xj, "id", origin + ".intersections");
        const std::string ctx = origin + ".intersections['" + x.id + "']";
        x.phase_count = req<int>(xj, "phase_count", ctx);
        x.min_switch_s = opt<double>(xj, "min_switch_s", 4.0, ctx);
        x.startup_lost_s = opt<double>(xj, "startup_lost_s", 2.0, ctx);
        x.max_green_s = opt<double>(xj, "max_green_s", 60.0, ctx);
        x.min_green_s = opt<double>(xj, "min_green_s", 5.0, ctx);
        for (const auto& tj : opt<json>(xj, "turns", json::array(), ctx)) {
            TurnMap t;
            t.from = req<std::string>(tj, "from", ctx + ".turns");
            t.straight = opt<std::string>(tj, "straight", "", ctx);
            t.left = opt<std::string>(tj, "left", "", ctx);
            t.right = opt<std::string>(tj, "right", "", ctx);
            x.turns.push_back(std::move(t));
        }
        n.intersections.push_back(std::move(x));
    }
    for (const auto& sj : opt<json>(j, "sources", json::array(), origin)) {
        SourceDef s;
        s.road = req<std::string>(sj, "road", origin + ".sources");
        s.weight = req<double>(sj, "weight", origin + ".sources['" + s.road + "']");
        n.sources.push_back(std::move(s));
    }
    return n;
}

}  // namespace

ScenarioConfig builtin_scenario(const std::string& name) {
    ScenarioConfig sc;
    if (name == "single")
        sc = make_single();
    else if (name == "arterial3")
        sc = make_arterial3();
    else
        throw ConfigError("unknown builtin scenario '" + name +
                          "' (available: single, arterial3)");
    sc.validate();
    return sc;
}

ScenarioConfig scenario_from_json_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
    ScenarioConfig sc;
    sc.name = opt<std::string>(j, "name", "scenario", origin);
    sc.network = network_from_json(req<json>(j, "network", origin), origin + ".network");
    if (j.contains("turn_fractions")) {
        const json& tf = j["turn_fractions"];
        sc.turns.straight = opt<double>(tf, "straight", 0.8, origin + ".turn_fractions");
        sc.turns.left = opt<double>(tf, "left", 0.1, origin + ".turn_fractions");
        sc.turns.right = opt<double>(tf, "right", 0.1, origin + ".turn_fractions");
    }
    if (j.contains("demand_tiers")) {
        sc.demand_tiers.clear();
        for (const auto& [tier, rate] : j["demand_tiers"].items())
            sc.demand_tiers[tier] = rate.get<double>();
    }
    sc.demand_tier = opt<std::string>(j, "demand_tier", sc.demand_tier, origin);
    sc.controller = opt<std::string>(j, "controller", sc.controller, origin);
    sc.clustering_interval_s =
        opt<double>(j, "clustering_interval_s", sc.clustering_interval_s, origin);
    sc.penetration = opt<double>(j, "penetration", sc.penetration, origin);
    sc.batch_reschedule = opt<bool>(j, "batch_reschedule", sc.batch_reschedule, origin);
    sc.duration_s = opt<double>(j, "duration_s", sc.duration_s, origin);
    if (j.contains("measure_window_s")) {
        const auto w = j["measure_window_s"].get<std::vector<double>>();
        if (w.size() != 2) fail(origin, "measure_window_s must be [from, to]");
        sc.measure_from_s = w[0];
        sc.measure_to_s = w[1];
    }
    sc.seeds = opt<std::vector<std::uint64_t>>(j, "seeds", sc.seeds, origin);
    sc.dt_s = opt<double>(j, "dt_s", sc.dt_s, origin);
    sc.control_period_s = opt<double>(j, "control_period_s", sc.control_period_s, origin);
    sc.service_time_s = opt<double>(j, "service_time_s", sc.service_time_s, origin);
    sc.queue_speed_mps = opt<double>(j, "queue_speed_mps", sc.queue_speed_mps, origin);
    sc.vehicle_length_m = opt<double>(j, "vehicle_length_m", sc.vehicle_length_m, origin);
    sc.sensing_horizon_s = opt<double>(j, "sensing_horizon_s", sc.sensing_horizon_s, origin);
    if (j.contains("idm")) {
        const json& ij = j["idm"];
        const std::string ctx = origin + ".idm";
        sc.idm.v0 = opt<double>(ij, "desired_speed_mps", sc.idm.v0, ctx);
        sc.idm.T = opt<double>(ij, "headway_s", sc.idm.T, ctx);
        sc.idm.s0 = opt<double>(ij, "min_gap_m", sc.idm.s0, ctx);
        sc.idm.a_max = opt<double>(ij, "max_accel_mps2", sc.idm.a_max, ctx);
        sc.idm.b = opt<double>(ij, "comfort_decel_mps2", sc.idm.b, ctx);
        sc.idm.omega = opt<double>(ij, "exponent", sc.idm.omega, ctx);
    }
    if (j.contains("coop")) {
        const json& cj = j["coop"];
        const std::string ctx = origin + ".coop";
        sc.coop.thr_up = opt<double>(cj, "thr_up", sc.coop.thr_up, ctx);
        sc.coop.thr_down = opt<double>(cj, "thr_down", sc.coop.thr_down, ctx);
        sc.coop.a_max = opt<double>(cj, "max_accel_mps2", sc.coop.a_max, ctx);
        sc.coop.omega = opt<double>(cj, "exponent", sc.coop.omega, ctx);
        sc.coop.v_limit = opt<double>(cj, "speed_limit_mps", sc.coop.v_limit, ctx);
        sc.coop.v_min = opt<double>(cj, "speed_min_mps", sc.coop.v_min, ctx);
        sc.coop.advisory_horizon =
            opt<double>(cj, "advisory_horizon_s", sc.coop.advisory_horizon, ctx);
        sc.coop.slow_margin_s = opt<double>(cj, "slow_margin_s", sc.coop.slow_margin_s, ctx);
    }
    sc.validate();
    return sc;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_json_text(buf.str(), path);
}

std::string scenario_to_json(const ScenarioConfig& sc) {
    json j;
    j["name"] = sc.name;
    j["network"] = network_to_json(sc.network);
    j["turn_fractions"] = {
        {"straight", sc.turns.straight}, {"left", sc.turns.left}, {"right", sc.turns.right}};
    j["demand_tiers"] = sc.demand_tiers;
    j["demand_tier"] = sc.demand_tier;
    j["controller"] = sc.controller;
    j["clustering_interval_s"] = sc.clustering_interval_s;
    j["penetration"] = sc.penetration;
    j["batch_reschedule"] = sc.batch_reschedule;
    j["duration_s"] = sc.duration_s;
    j["measure_window_s"] = {sc.measure_from_s, sc.measure_to_s};
    j["seeds"] = sc.seeds;
    j["dt_s"] = sc.dt_s;
    j["control_period_s"] = sc.control_period_s;
    j["service_time_s"] = sc.service_time_s;
    j["queue_speed_mps"] = sc.queue_speed_mps;
    j["vehicle_length_m"] = sc.vehicle_length_m;
    j["sensing_horizon_s"] = sc.sensing_horizon_s;
    j["idm"] = {{"desired_speed_mps", sc.idm.v0},   {"headway_s", sc.idm.T},
                {"min_gap_m", sc.idm.s0},           {"max_accel_mps2", sc.idm.a_max},
                {"comfort_decel_mps2", sc.idm.b},   {"exponent", sc.idm.omega}};
    j["coop"] = {{"thr_up", sc.coop.thr_up},
                 {"thr_down", sc.coop.thr_down},
                 {"max_accel_mps2", sc.coop.a_max},
                 {"exponent", sc.coop.omega},
                 {"speed_limit_mps", sc.coop.v_limit},
                 {"speed_min_mps", sc.coop.v_min},
                 {"advisory_horizon_s", sc.coop.advisory_horizon},
                 {"slow_margin_s", sc.coop.slow_margin_s}};
    return j.dump(2) + "\n";
}

}  // namespace sdtc

#include "sdtc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "sdtc/cooperative.hpp"
#include "sdtc/idm.hpp"
#include "sdtc/network.hpp"

namespace sdtc {

namespace {

constexpr double kEps = 1e-9;
constexpr double kMinClearance = 0.1;   // hard floor on bumper-to-bumper gaps (m)
constexpr double kLandingMargin = 0.5;  // spare room required behind a crossing vehicle (m)

std::uint64_t fnv_update(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv_double(std::uint64_t h, double x) {
    std::uint64_t bits = 0;
    static_assert(sizeof bits == sizeof x);
    std::memcpy(&bits, &x, sizeof bits);
    return fnv_update(h, &bits, sizeof bits);
}

}  // namespace

// --- SignalController ------------------------------------------------------

SignalController::SignalController(std::string intersection, IntersectionConfig cfg,
                                   std::string mode, FixedPlan plan)
    : id_(std::move(intersection)),
      cfg_(std::move(cfg)),
      mode_(std::move(mode)),
      plan_(std::move(plan)) {
    cfg_.validate();
    if (mode_ != "fixed" && mode_ != "schedule" && mode_ != "coop")
        throw ConfigError("SignalController: mode must be fixed, schedule or coop");
    if (mode_ == "fixed" &&
        plan_.greens.size() != static_cast<std::size_t>(cfg_.phase_count))
        throw ConfigError("SignalController: fixed mode needs one plan green per phase");
    events_.push_back({0.0, phase_});
}

void SignalController::request_switch(int target, double now) {
    if (in_changeover_ || target == phase_) return;
    if (target < 0 || target >= cfg_.phase_count)
        throw ConfigError("SignalController: switch target phase out of range");
    changeover_left_ = cfg_.min_switch_at(phase_, target);
    in_changeover_ = true;
    phase_ = target;  // the changeover target; green_phase() stays -1 meanwhile
    elapsed_ = 0.0;
    events_.push_back({now, -1});
}

void SignalController::advance(double dt, double now_end) {
    if (in_changeover_) {
        changeover_left_ -= dt;
        if (changeover_left_ <= kEps) {
            in_changeover_ = false;
            elapsed_ = std::max(0.0, -changeover_left_);
            changeover_left_ = 0.0;
            events_.push_back({now_end - elapsed_, phase_});
        }
        return;
    }
    elapsed_ += dt;
    if (mode_ == "fixed" && cfg_.phase_count > 1 &&
        elapsed_ + kEps >= plan_.greens[static_cast<std::size_t>(phase_)])
        request_switch((phase_ + 1) % cfg_.phase_count, now_end);
}

// --- World construction ----------------------------------------------------

World::World(ScenarioConfig sc, std::uint64_t seed) : sc_(std::move(sc)), seed_(seed) {
    sc_.validate();
    const double ratio = sc_.control_period_s / sc_.dt_s;
    ctrl_every_ = std::llround(ratio);
    if (ctrl_every_ < 1 || std::abs(ratio - static_cast<double>(ctrl_every_)) > 1e-9)
        throw ConfigError("scenario.control_period_s must be an integer multiple of dt_s");
    plan_mode_ = sc_.controller != "fixed";
    coop_mode_ = sc_.controller == "coop";
    hard_brake_ = std::max(2.0 * sc_.idm.b, sc_.idm.a_max);

    const Network& net = sc_.network;
    road_states_.resize(net.roads.size());
    for (std::size_t i = 0; i < net.roads.size(); ++i) {
        road_index_[net.roads[i].id] = static_cast<int>(i);
        road_states_[i].def_index = static_cast<int>(i);
        road_states_[i].lanes.resize(static_cast<std::size_t>(net.roads[i].lanes));
    }

    std::map<RoadId, double> src_rates;
    const double rate = sc_.demand_rate();
    for (const auto& s : net.sources) src_rates[s.road] += rate * s.weight;
    const auto flows = expected_flows(net, src_rates, sc_.turns);

    for (std::size_t i = 0; i < net.intersections.size(); ++i) {
        const auto& x = net.intersections[i];
        IntersectionConfig icfg = x.signal_config();
        FixedPlan plan;
        if (!plan_mode_) {
            // Webster on the critical (highest flow-ratio) approach per phase.
            std::vector<double> demand(static_cast<std::size_t>(x.phase_count), 0.0);
            std::vector<double> sat(static_cast<std::size_t>(x.phase_count),
                                    3600.0 / sc_.service_time_s);
            for (const auto& r : net.roads) {
                if (r.to != x.id) continue;
                const auto it = flows.find(r.id);
                const double f = it == flows.end() ? 0.0 : it->second;
                const double cap = (3600.0 / sc_.service_time_s) * r.lanes;
                const auto p = static_cast<std::size_t>(r.phase);
                if (f / cap > demand[p] / sat[p]) {
                    demand[p] = f;
                    sat[p] = cap;
                }
            }
            plan = webster_fixed_plan(demand, sat, icfg);
            for (std::size_t g = 0; g < plan.greens.size(); ++g)
                plan.greens[g] = std::min(plan.greens[g], icfg.max_green[g]);
        }
        intersection_index_[x.id] = static_cast<int>(i);
        controllers_.emplace_back(x.id, std::move(icfg), sc_.controller, std::move(plan));
        entry_roads_.push_back(net.entry_roads(x.id));
        for (const RoadId& rid : entry_roads_.back())
            road_states_[static_cast<std::size_t>(road_index_.at(rid))].signal_index =
                static_cast<int>(i);
    }

    for (const auto& s : net.sources) {
        SourceState st{road_index_.at(s.road),
                       rate * s.weight,
                       0.0,
                       Rng(Rng::derive(seed_, "gaps/" + s.road)),
                       Rng(Rng::derive(seed_, "routes/" + s.road)),
                       Rng(Rng::derive(seed_, "cav/" + s.road))};
        st.next_arrival = st.rate_veh_h > 0.0
                              ? st.gaps.exponential(3600.0 / st.rate_veh_h)
                              : std::numeric_limits<double>::infinity();
        sources_.push_back(std::move(st));
    }
}

// --- lookups ---------------------------------------------------------------

const RoadDef& World::road_def(const RoadId& id) const {
    return sc_.network.roads[static_cast<std::size_t>(road_index_.at(id))];
}

World::RoadState& World::road_state(const RoadId& id) {
    return road_states_[static_cast<std::size_t>(road_index_.at(id))];
}

const World::RoadState& World::road_state(const RoadId& id) const {
    return road_states_[static_cast<std::size_t>(road_index_.at(id))];
}

const SignalController& World::controller(const std::string& intersection) const {
    const auto it = intersection_index_.find(intersection);
    if (it == intersection_index_.end())
        throw ConfigError("unknown intersection '" + intersection + "'");
    return controllers_[static_cast<std::size_t>(it->second)];
}

double World::free_speed(const RoadDef& def) const { return std::min(sc_.idm.v0, def.limit); }

double World::route_free_flow(const std::vector<RoadId>& route) const {
    double t = 0.0;
    for (const auto& rid : route) {
        const RoadDef& r = road_def(rid);
        t += r.length / free_speed(r);
    }
    return t;
}

double World::desired_speed(const VehicleState& v, const RoadDef& def) const {
    if (v.advisory) return std::clamp(*v.advisory, sc_.coop.v_min, def.limit);
    return free_speed(def);
}

std::int64_t World::pending() const {
    std::int64_t n = 0;
    for (const auto& s : sources_) n += static_cast<std::int64_t>(s.queue.size());
    return n;
}

// --- sensing ---------------------------------------------------------------

std::vector<Observation> World::sense_road(const RoadId& rid) const {
    const RoadState& rs = road_state(rid);
    const RoadDef& def = road_def(rs.def_index);
    const double now = this->now();
    const double svc = sc_.service_time_s / def.lanes;

    struct Item {
        double dist = 0.0;
        VehicleId id = 0;
        double speed = 0.0;
    };
    std::vector<Item> queued;
    std::vector<Item> moving;
    for (const auto& lane : rs.lanes)
        for (const VehicleId id : lane) {
            const VehicleState& v = vehicles_.at(id);
            const Item item{std::max(def.length - v.pos, 0.0), id, v.speed};
            if (v.speed < sc_.queue_speed_mps)
                queued.push_back(item);
            else
                moving.push_back(item);
        }
    std::sort(queued.begin(), queued.end(), [](const Item& a, const Item& b) {
        return a.dist != b.dist ? a.dist < b.dist : a.id < b.id;
    });

    std::vector<Observation> obs;
    obs.reserve(queued.size() + moving.size());
    int k = 0;
    for (const auto& q : queued) {
        const double arr = now + k * svc;  // queue discharge: one service per position
        obs.push_back({q.id, arr, arr + svc});
        ++k;
    }
    for (const auto& m : moving) {
        const double arr = now + m.dist / m.speed;
        obs.push_back({m.id, arr, arr + svc});
    }
    const double horizon = now + sc_.sensing_horizon_s;
    std::erase_if(obs, [&](const Observation& o) { return o.arrival > horizon; });
    std::sort(obs.begin(), obs.end(), [](const Observation& a, const Observation& b) {
        if (a.arrival != b.arrival) return a.arrival < b.arrival;
        if (a.clearance != b.clearance) return a.clearance < b.clearance;
        return a.vehicle < b.vehicle;
    });
    return obs;
}

// --- control ---------------------------------------------------------------

void World::control_all(double now) {
    if (!plan_mode_) return;
    for (std::size_t i = 0; i < controllers_.size(); ++i) {
        try {
            plan_intersection(static_cast<int>(i), now);
        } catch (const ConfigError& e) {
            std::ostringstream os;
            os << "intersection '" << controllers_[i].intersection() << "' at t=" << now
               << ": " << e.what();
            throw ConfigError(os.str());
        }
    }
}

void World::plan_intersection(int index, double now) {
    SignalController& ctl = controllers_[static_cast<std::size_t>(index)];
    if (ctl.in_changeover()) return;
    const IntersectionConfig& icfg = ctl.config();

    std::vector<RoadClusterSequence> seqs;
    std::map<RoadId, int> phase_of;
    bool any = false;
    for (const RoadId& rid : entry_roads_[static_cast<std::size_t>(index)]) {
        phase_of[rid] = road_def(rid).phase;
        auto seq = cluster_vehicles(sense_road(rid), sc_.clustering_interval_s, rid,
                                    now + sc_.sensing_horizon_s);
        any = any || !seq.clusters.empty();
        seqs.push_back(std::move(seq));
    }
    if (!any) return;  // nothing sensed: hold the current green

    const auto input = combine_by_phase(seqs, phase_of, icfg.phase_count);
    const ScheduleState init{ctl.current_phase(), ctl.elapsed(), now, 0.0};
    ControlFlow flow = forward_dp(input, init, icfg);
    flow = enforce_max_green(flow, input, init, icfg);

    if (coop_mode_ && sc_.penetration > 0.0) {
        if (sc_.batch_reschedule && sc_.clustering_interval_s > 0.0)
            flow = reschedule_largest_delay_batch(flow, input, init, icfg);
        std::map<VehicleId, double> speeds;
        std::set<VehicleId> cavs;
        for (const auto& seq : seqs)
            for (const auto& c : seq.clusters)
                for (const VehicleId id : c.members) {
                    const VehicleState& v = vehicles_.at(id);
                    speeds[id] = v.speed;
                    if (v.is_cav) cavs.insert(id);
                }
        AdvisoryPlan plan = plan_advisories(flow, speeds, cavs, now, icfg, sc_.coop);
        for (const auto& adv : plan.advisories) {
            const double pst = plan.revised.entries[adv.entry_index].pst;
            const bool slow = adv.speed < vehicles_.at(adv.cav_members.front()).speed;
            for (const VehicleId id : adv.cav_members) {
                VehicleState& v = vehicles_.at(id);
                // Per-member reachability: an advisory a member cannot reach
                // within one horizon would leave it out of compliance.
                if (std::abs(adv.speed - v.speed) >
                    sc_.coop.a_max * sc_.coop.advisory_horizon + kEps)
                    continue;
                double until = now + sc_.coop.advisory_horizon;
                if (slow) {
                    // A slow-down paces free-flowing vehicles only. A follower
                    // inherits its leader's pacing through car-following;
                    // advising it directly stretches the platoon's
                    // time-headways and starves the green. The advisory also
                    // must never throttle the discharge once the permitted
                    // start arrives, so it expires at pst.
                    const RoadState& rs = road_state(v.current_road());
                    const auto& order =
                        rs.lanes[static_cast<std::size_t>(v.lane)];
                    const auto it = std::find(order.begin(), order.end(), id);
                    if (it != order.end() && it != order.begin()) {
                        const VehicleState& lead = vehicles_.at(*std::prev(it));
                        const double gap =
                            lead.pos - v.pos - sc_.vehicle_length_m;
                        if (gap < v.speed * 3.0 + 10.0) continue;
                    }
                    until = std::min(until, pst);
                }
                if (until <= now + kEps) continue;
                const double lim = road_def(v.current_road()).limit;
                v.advisory = std::clamp(adv.speed, sc_.coop.v_min, lim);
                v.advisory_until = until;
            }
        }
        advisories_issued_ += static_cast<std::int64_t>(plan.advisories.size());
        flow = std::move(plan.revised);
    }

    if (flow.entries.empty()) return;
    const int target = flow.entries.front().phase;
    if (target == ctl.current_phase()) return;
    if (ctl.elapsed() + kEps >=
        icfg.min_green[static_cast<std::size_t>(ctl.current_phase())])
        ctl.request_switch(target, now);
}

// --- movement --------------------------------------------------------------

std::optional<std::pair<double, double>> World::through_leader(const VehicleState& v,
                                                               const RoadDef& def) const {
    if (v.route_index + 1 >= v.route.size()) return std::nullopt;
    const RoadState& ns = road_state(v.route[v.route_index + 1]);
    const int lane = pick_landing_lane(ns, 0.0);
    if (lane < 0)  // downstream entrance jammed: hold at the stop line
        return std::make_pair(std::max(def.length - v.pos, 0.05), 0.0);
    const auto& order = ns.lanes[static_cast<std::size_t>(lane)];
    if (order.empty()) return std::nullopt;
    const VehicleState& tail = vehicles_.at(order.back());
    const double gap = (def.length - v.pos) + tail.pos - sc_.vehicle_length_m;
    return std::make_pair(std::max(gap, 0.05), tail.speed);
}

int World::pick_landing_lane(const RoadState& rs, double landing) const {
    int best = -1;
    std::size_t best_n = 0;
    for (std::size_t l = 0; l < rs.lanes.size(); ++l) {
        const auto& order = rs.lanes[l];
        if (!order.empty()) {
            const VehicleState& tail = vehicles_.at(order.back());
            if (tail.pos - sc_.vehicle_length_m - landing < kLandingMargin) continue;
        }
        if (best < 0 || order.size() < best_n) {
            best = static_cast<int>(l);
            best_n = order.size();
        }
    }
    return best;
}

void World::compute_accelerations() {
    IdmParams idm = sc_.idm;
    for (const auto& rs : road_states_) {
        const RoadDef& def = road_def(rs.def_index);
        const SignalController* ctl =
            rs.signal_index >= 0 ? &controllers_[static_cast<std::size_t>(rs.signal_index)]
                                 : nullptr;
        const bool green = ctl != nullptr && ctl->is_green(def.phase);
        for (const auto& lane : rs.lanes) {
            for (std::size_t k = 0; k < lane.size(); ++k) {
                VehicleState& v = vehicles_.at(lane[k]);
                std::optional<double> gap;
                double dv = 0.0;
                if (k > 0) {
                    const VehicleState& lead = vehicles_.at(lane[k - 1]);
                    const double g = lead.pos - sc_.vehicle_length_m - v.pos;
                    min_gap_ = std::min(min_gap_, g);
                    if (g <= 0.0) {
                        std::ostringstream os;
                        os << "collision on road '" << def.id << "' between vehicles "
                           << lead.id << " and " << v.id << " at t=" << now();
                        throw SimulationError(os.str());
                    }
                    gap = g;
                    dv = v.speed - lead.speed;
                } else if (ctl != nullptr) {
                    if (!green) {  // standing virtual leader at the stop line
                        gap = std::max(def.length - v.pos, 0.05);
                        dv = v.speed;
                    } else if (const auto lead = through_leader(v, def)) {
                        gap = std::max(lead->first, 0.05);
                        dv = v.speed - lead->second;
                    }
                }
                idm.v0 = desired_speed(v, def);
                v.accel = std::clamp(idm_acceleration(v.speed, gap, dv, idm), -hard_brake_,
                                     sc_.idm.a_max);
            }
        }
    }
}

void World::integrate_and_order() {
    const double dt = sc_.dt_s;
    for (auto& [id, v] : vehicles_) {
        const RoadDef& def = road_def(v.current_road());
        v.prev_pos = v.pos;
        v.speed = std::clamp(v.speed + v.accel * dt, 0.0, def.limit);
        v.pos += v.speed * dt;
        if (v.advisory && v.speed > *v.advisory + sc_.idm.a_max * dt + 1e-6)
            ++advisory_violations_;
    }
    // Synchronous update can in principle squeeze a follower past safety; keep
    // every bumper gap at or above the hard floor.
    for (const auto& rs : road_states_) {
        for (const auto& lane : rs.lanes) {
            for (std::size_t k = 1; k < lane.size(); ++k) {
                VehicleState& f = vehicles_.at(lane[k]);
                const VehicleState& l = vehicles_.at(lane[k - 1]);
                const double cap = l.pos - sc_.vehicle_length_m - kMinClearance;
                if (f.pos > cap) {
                    f.pos = std::max(cap, f.prev_pos);
                    f.speed = std::min(f.speed, l.speed);
                }
            }
        }
    }
}

void World::transfer_and_exit(double now) {
    const double dt = sc_.dt_s;
    for (auto& rs : road_states_) {
        const RoadDef& def = road_def(rs.def_index);
        const SignalController* ctl =
            rs.signal_index >= 0 ? &controllers_[static_cast<std::size_t>(rs.signal_index)]
                                 : nullptr;
        for (auto& lane : rs.lanes) {
            while (!lane.empty()) {
                VehicleState& v = vehicles_.at(lane.front());
                if (v.pos < def.length) break;
                if (def.to.empty()) {  // network exit
                    const double denom = std::max(v.pos - v.prev_pos, 1e-12);
                    const double frac =
                        std::clamp((def.length - v.prev_pos) / denom, 0.0, 1.0);
                    record_exit(v, now + dt * frac);
                    const VehicleId id = v.id;
                    lane.erase(lane.begin());
                    vehicles_.erase(id);
                    continue;
                }
                // Crossing needs green; during a changeover only a vehicle that
                // physically could not stop (still moving) may clear the line.
                const bool may_cross =
                    ctl->is_green(def.phase) ||
                    (ctl->in_changeover() && v.speed > sc_.queue_speed_mps);
                if (!may_cross) {
                    v.pos = def.length;
                    v.speed = 0.0;
                    break;
                }
                if (v.route_index + 1 >= v.route.size()) {
                    std::ostringstream os;
                    os << "vehicle " << v.id << " route ends at intersection '" << def.to
                       << "'";
                    throw SimulationError(os.str());
                }
                RoadState& ns = road_state(v.route[v.route_index + 1]);
                const RoadDef& ndef = road_def(ns.def_index);
                const double landing = std::min(v.pos - def.length, ndef.length * 0.5);
                const int tl = pick_landing_lane(ns, landing);
                if (tl < 0) {  // landing zone occupied: wait at the line
                    v.pos = def.length;
                    v.speed = 0.0;
                    break;
                }
                v.route_index += 1;
                v.lane = tl;
                v.pos = landing;
                v.prev_pos = landing;
                v.speed = std::min(v.speed, ndef.limit);
                v.advisory.reset();
                ns.lanes[static_cast<std::size_t>(tl)].push_back(v.id);
                lane.erase(lane.begin());
            }
        }
    }
}

void World::advance_signals(double now_end) {
    for (auto& ctl : controllers_) ctl.advance(sc_.dt_s, now_end);
}

// --- arrivals --------------------------------------------------------------

void World::spawn_arrivals(double until) {
    for (auto& src : sources_) {
        while (src.next_arrival <= until) {
            Pending p;
            p.id = next_id_++;
            p.entry_time = src.next_arrival;
            p.route = draw_route(sc_.network,
                                 sc_.network.roads[static_cast<std::size_t>(src.road_index)].id,
                                 sc_.turns, src.routes);
            p.is_cav = src.cav.bernoulli(sc_.penetration);
            p.free_flow = route_free_flow(p.route);
            src.queue.push_back(std::move(p));
            ++spawned_;
            src.next_arrival += src.gaps.exponential(3600.0 / src.rate_veh_h);
        }
        insert_pending(src, until);
    }
}

void World::insert_pending(SourceState& src, double now_end) {
    RoadState& rs = road_states_[static_cast<std::size_t>(src.road_index)];
    const RoadDef& def = road_def(rs.def_index);
    const double vfree = free_speed(def);
    while (!src.queue.empty()) {
        int chosen = -1;
        double ins_speed = vfree;
        for (int t = 0; t < def.lanes; ++t) {
            const int l = (src.round_robin + t) % def.lanes;
            const auto& order = rs.lanes[static_cast<std::size_t>(l)];
            if (order.empty()) {
                chosen = l;
                ins_speed = vfree;
                break;
            }
            const VehicleState& tail = vehicles_.at(order.back());
            const double gap = tail.pos - sc_.vehicle_length_m;
            if (gap >= sc_.idm.s0 + 1.0) {
                chosen = l;
                ins_speed = std::min(
                    vfree,
                    tail.speed + std::sqrt(2.0 * sc_.idm.b * std::max(0.0, gap - sc_.idm.s0)));
                break;
            }
        }
        if (chosen < 0) break;  // entrance blocked; head waits outside the network
        Pending p = std::move(src.queue.front());
        src.queue.pop_front();
        VehicleState v;
        v.id = p.id;
        v.route = std::move(p.route);
        v.lane = chosen;
        v.speed = ins_speed;
        v.is_cav = p.is_cav;
        v.entry_time = p.entry_time;
        v.insert_time = now_end;
        v.free_flow_s = p.free_flow;
        const VehicleId id = v.id;
        rs.lanes[static_cast<std::size_t>(chosen)].push_back(id);
        vehicles_.emplace(id, std::move(v));
        src.round_robin = (chosen + 1) % def.lanes;
    }
}

VehicleId World::place_vehicle(const std::vector<RoadId>& route, int lane, double pos,
                               double speed, bool is_cav) {
    if (route.empty()) throw ConfigError("place_vehicle: route must not be empty");
    for (const auto& rid : route)
        if (!road_index_.count(rid))
            throw ConfigError("place_vehicle: unknown road '" + rid + "'");
    RoadState& rs = road_state(route.front());
    const RoadDef& def = road_def(rs.def_index);
    if (lane < 0 || lane >= def.lanes)
        throw ConfigError("place_vehicle: lane out of range");
    if (pos < 0.0 || pos > def.length)
        throw ConfigError("place_vehicle: position outside the road");

    VehicleState v;
    v.id = next_id_++;
    v.route = route;
    v.lane = lane;
    v.pos = pos;
    v.prev_pos = pos;
    v.speed = std::clamp(speed, 0.0, def.limit);
    v.is_cav = is_cav;
    v.entry_time = now();
    v.insert_time = now();
    v.free_flow_s = (def.length - pos) / free_speed(def);
    for (std::size_t i = 1; i < route.size(); ++i) {
        const RoadDef& r = road_def(route[i]);
        v.free_flow_s += r.length / free_speed(r);
    }
    auto& order = rs.lanes[static_cast<std::size_t>(lane)];
    const auto it = std::find_if(order.begin(), order.end(), [&](VehicleId other) {
        return vehicles_.at(other).pos < pos;
    });
    const VehicleId id = v.id;
    order.insert(it, id);
    vehicles_.emplace(id, std::move(v));
    ++spawned_;
    return id;
}

// --- accounting ------------------------------------------------------------

void World::record_exit(const VehicleState& v, double time) {
    ExitRecord rec;
    rec.id = v.id;
    rec.entry_time = v.entry_time;
    rec.exit_time = time;
    rec.delay = std::max(0.0, time - v.entry_time - v.free_flow_s);
    exit_fold_ = fnv_update(exit_fold_, &rec.id, sizeof rec.id);
    exit_fold_ = fnv_double(exit_fold_, rec.entry_time);
    exit_fold_ = fnv_double(exit_fold_, rec.exit_time);
    exit_fold_ = fnv_double(exit_fold_, rec.delay);
    exits_.push_back(rec);
}

void World::check_conservation() const {
    const auto accounted = pending() + active() + static_cast<std::int64_t>(exits_.size());
    if (accounted != spawned_) {
        std::ostringstream os;
        os << "vehicle conservation violated at t=" << now() << ": spawned " << spawned_
           << " vs accounted " << accounted;
        throw SimulationError(os.str());
    }
}

std::uint64_t World::exit_hash() const {
    std::uint64_t h = exit_fold_;
    for (const auto& ctl : controllers_) {
        for (const auto& e : ctl.events()) {
            h = fnv_double(h, e.time);
            h = fnv_update(h, &e.phase, sizeof e.phase);
        }
    }
    return h;
}

// --- main loop ---------------------------------------------------------------

void World::step() {
    const double now = this->now();
    if (step_index_ % ctrl_every_ == 0) control_all(now);
    for (auto& [id, v] : vehicles_)
        if (v.advisory && now > v.advisory_until + kEps) v.advisory.reset();
    compute_accelerations();
    integrate_and_order();
    transfer_and_exit(now);
    advance_signals(now + sc_.dt_s);
    spawn_arrivals(now + sc_.dt_s);
    check_conservation();
    ++step_index_;
}

void World::run() {
    const auto steps = static_cast<std::int64_t>(std::llround(sc_.duration_s / sc_.dt_s));
    while (step_index_ < steps) step();
}

}  // namespace sdtc

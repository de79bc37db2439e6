#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdtc/cluster.hpp"
#include "sdtc/rng.hpp"
#include "sdtc/scenario.hpp"
#include "sdtc/scheduler.hpp"
#include "sdtc/webster.hpp"

namespace sdtc {

/// One vehicle in the network. Positions are front-bumper distances from the
/// road start; the stop line sits at the road's length.
struct VehicleState {
    VehicleId id = 0;
    std::vector<RoadId> route;
    std::size_t route_index = 0;
    int lane = 0;
    double pos = 0.0;
    double speed = 0.0;
    bool is_cav = false;
    double entry_time = 0.0;   // scheduled network arrival
    double insert_time = 0.0;  // actual entry onto the first road
    double free_flow_s = 0.0;  // route traversal time at the desired speed
    std::optional<double> advisory;  // active advised speed (m/s)
    double advisory_until = 0.0;     // advisory expires after this time

    // integration scratch, managed by World::step
    double accel = 0.0;
    double prev_pos = 0.0;

    const RoadId& current_road() const { return route[route_index]; }
};

/// One completed trip. delay = exit - entry - free_flow, floored at zero.
struct ExitRecord {
    VehicleId id = 0;
    double entry_time = 0.0;
    double exit_time = 0.0;
    double delay = 0.0;
};

/// Signal head state machine: at any instant exactly one phase is green, or a
/// changeover (yellow + all-red) is counting down and nothing is green.
class SignalController {
  public:
    /// A mode of "fixed" follows `plan` cyclically; "schedule" and "coop" wait
    /// for request_switch calls from the planner.
    SignalController(std::string intersection, IntersectionConfig cfg, std::string mode,
                     FixedPlan plan = {});

    const std::string& intersection() const { return id_; }
    const std::string& mode() const { return mode_; }
    const IntersectionConfig& config() const { return cfg_; }
    const FixedPlan& plan() const { return plan_; }

    /// Green phase right now, or -1 during a changeover.
    int green_phase() const { return in_changeover_ ? -1 : phase_; }
    bool is_green(int phase) const { return !in_changeover_ && phase_ == phase; }
    bool in_changeover() const { return in_changeover_; }
    /// Current phase; the changeover target while one is running.
    int current_phase() const { return phase_; }
    /// Green time accumulated by the current phase (0 while changing over).
    double elapsed() const { return in_changeover_ ? 0.0 : elapsed_; }

    /// Begins the changeover toward `target`; ignored when already there or
    /// already changing over.
    void request_switch(int target, double now);
    /// Advances clocks by dt ending at time `now_end`; completes changeovers
    /// and, in fixed mode, rotates phases per the plan.
    void advance(double dt, double now_end);

    /// Audit log: phase >= 0 marks a green onset, -1 a changeover start.
    struct Event {
        double time = 0.0;
        int phase = 0;
    };
    const std::vector<Event>& events() const { return events_; }

  private:
    std::string id_;
    IntersectionConfig cfg_;
    std::string mode_;
    FixedPlan plan_;
    int phase_ = 0;
    double elapsed_ = 0.0;
    bool in_changeover_ = false;
    double changeover_left_ = 0.0;
    std::vector<Event> events_;
};

/// Deterministic fixed-timestep world: Poisson arrivals, IDM car-following,
/// signal execution and the once-a-second replan (and advise) loop.
class World {
  public:
    World(ScenarioConfig sc, std::uint64_t seed);

    void step();  // one dt tick
    void run();   // steps until the scenario duration

    double now() const { return static_cast<double>(step_index_) * sc_.dt_s; }
    const ScenarioConfig& scenario() const { return sc_; }
    std::uint64_t seed() const { return seed_; }

    const std::vector<ExitRecord>& exits() const { return exits_; }
    const std::map<VehicleId, VehicleState>& vehicles() const { return vehicles_; }
    const SignalController& controller(const std::string& intersection) const;

    /// Sensed observations (sorted by predicted arrival) for one entry road.
    std::vector<Observation> sense_road(const RoadId& road) const;

    /// Drops a vehicle into the world (test/tool hook). The route must start
    /// at `route.front()`; entry time is the current clock.
    VehicleId place_vehicle(const std::vector<RoadId>& route, int lane, double pos,
                            double speed, bool is_cav = false);

    // invariant bookkeeping
    std::int64_t spawned() const { return spawned_; }
    std::int64_t active() const { return static_cast<std::int64_t>(vehicles_.size()); }
    std::int64_t pending() const;
    double min_gap() const { return min_gap_; }
    std::int64_t advisory_violations() const { return advisory_violations_; }
    std::int64_t advisories_issued() const { return advisories_issued_; }
    /// Digest of the exit log and every signal event; equal digests mean
    /// bit-identical runs.
    std::uint64_t exit_hash() const;

  private:
    struct RoadState {
        int def_index = 0;
        int signal_index = -1;  // controllers_ slot of the downstream signal
        std::vector<std::vector<VehicleId>> lanes;  // each sorted by pos, leader first
    };
    struct Pending {
        VehicleId id = 0;
        double entry_time = 0.0;
        std::vector<RoadId> route;
        bool is_cav = false;
        double free_flow = 0.0;
    };
    struct SourceState {
        int road_index = 0;
        double rate_veh_h = 0.0;
        double next_arrival = 0.0;
        Rng gaps;
        Rng routes;
        Rng cav;
        std::deque<Pending> queue;
        int round_robin = 0;
    };

    const RoadDef& road_def(int index) const { return sc_.network.roads[index]; }
    const RoadDef& road_def(const RoadId& id) const;
    RoadState& road_state(const RoadId& id);
    const RoadState& road_state(const RoadId& id) const;
    double free_speed(const RoadDef& def) const;
    double route_free_flow(const std::vector<RoadId>& route) const;
    double desired_speed(const VehicleState& v, const RoadDef& def) const;

    void control_all(double now);
    void plan_intersection(int index, double now);
    void compute_accelerations();
    void integrate_and_order();
    void transfer_and_exit(double now);
    void advance_signals(double now_end);
    void spawn_arrivals(double until);
    void insert_pending(SourceState& src, double now_end);
    void check_conservation() const;

    int pick_landing_lane(const RoadState& rs, double landing) const;
    std::optional<std::pair<double, double>> through_leader(const VehicleState& v,
                                                            const RoadDef& def) const;
    void record_exit(const VehicleState& v, double time);

    ScenarioConfig sc_;
    std::uint64_t seed_ = 0;
    std::int64_t step_index_ = 0;
    std::int64_t ctrl_every_ = 2;
    bool plan_mode_ = false;  // schedule or coop
    bool coop_mode_ = false;
    double hard_brake_ = 6.0;

    std::vector<RoadState> road_states_;
    std::map<RoadId, int> road_index_;
    std::vector<SignalController> controllers_;
    std::map<std::string, int> intersection_index_;
    std::vector<std::vector<RoadId>> entry_roads_;
    std::vector<SourceState> sources_;

    std::map<VehicleId, VehicleState> vehicles_;
    std::vector<ExitRecord> exits_;
    VehicleId next_id_ = 1;
    std::int64_t spawned_ = 0;
    double min_gap_ = std::numeric_limits<double>::infinity();
    std::int64_t advisory_violations_ = 0;
    std::int64_t advisories_issued_ = 0;
    std::uint64_t exit_fold_ = 1469598103934665603ull;
};

}  // namespace sdtc

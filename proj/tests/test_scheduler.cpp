#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "sdtc/rng.hpp"
#include "sdtc/scheduler.hpp"
#include "support/oracles.hpp"

using namespace sdtc;

namespace {

Cluster mk_cluster(int count, double arr, double dep, VehicleId first_id = 1) {
    Cluster c;
    c.count = count;
    c.arr = arr;
    c.dep = dep;
    for (int k = 0; k < count; ++k) c.members.push_back(first_id + k);
    return c;
}

}  // namespace

// --- Algorithm-1 transition: the three hand-traced conformance cases --------

TEST_CASE("advance_state: same phase, arrival after green is available") {
    const IntersectionConfig cfg = IntersectionConfig::uniform(2, 4.0, 2.0);
    const ScheduleState prev{0, 0.0, 5.0, 0.0};
    const StateAdvance sa = advance_state(prev, 0, mk_cluster(1, 10.0, 13.0), cfg);
    CHECK(sa.pst == doctest::Approx(5.0));
    CHECK(sa.ast == doctest::Approx(10.0));
    CHECK(sa.state.t == doctest::Approx(13.0));
    CHECK(sa.state.d == doctest::Approx(0.0));  // no waiting added
    CHECK(sa.state.phase == 0);
    CHECK(sa.state.pd == doctest::Approx(prev.pd + (13.0 - 5.0)));
}

TEST_CASE("advance_state: phase switch onto a waiting cluster") {
    const IntersectionConfig cfg = IntersectionConfig::uniform(2, 4.0, 2.0);
    const ScheduleState prev{0, 0.0, 5.0, 0.0};
    const StateAdvance sa = advance_state(prev, 1, mk_cluster(3, 2.0, 4.0), cfg);
    CHECK(sa.pst == doctest::Approx(9.0));    // 5 + MinSwitch 4
    CHECK(sa.ast == doctest::Approx(11.0));   // waiting: pst + slt 2
    CHECK(sa.state.t == doctest::Approx(13.0));
    CHECK(sa.state.pd == doctest::Approx(4.0));
    CHECK(sa.state.d == doctest::Approx(27.0));  // 3 * (11 - 2)
    CHECK(sa.state.phase == 1);
}

TEST_CASE("advance_state: phase switch with arrival at or after pst adds no lost time") {
    const IntersectionConfig cfg = IntersectionConfig::uniform(2, 4.0, 2.0);
    const ScheduleState prev{0, 0.0, 5.0, 0.0};
    const StateAdvance sa = advance_state(prev, 1, mk_cluster(2, 10.0, 14.0), cfg);
    CHECK(sa.pst == doctest::Approx(9.0));
    CHECK(sa.ast == doctest::Approx(10.0));  // arr >= pst: no startup lost time
    CHECK(sa.state.t == doctest::Approx(14.0));
    CHECK(sa.state.d == doctest::Approx(0.0));
}

TEST_CASE("advance_state matches the independent recurrence on random inputs") {
    Rng rng(101);
    for (int trial = 0; trial < 300; ++trial) {
        const int phases = rng.uniform_int(2, 4);
        const auto inst = oracle::random_instance(rng, phases, 1);
        const oracle::Job j{rng.uniform_int(0, phases - 1), rng.uniform_int(1, 6),
                            rng.uniform(0.0, 30.0), 0.0};
        oracle::Job job = j;
        job.dep = job.arr + rng.uniform(0.0, 10.0);

        const auto m = oracle::matrix_of(inst.cfg);
        const oracle::Step expect =
            oracle::advance(inst.initial, job, m, inst.cfg.startup_lost);
        const StateAdvance got =
            advance_state(oracle::lib_state(inst.initial), job.phase,
                          mk_cluster(job.count, job.arr, job.dep), inst.cfg);
        CHECK(got.pst == doctest::Approx(expect.pst).epsilon(1e-12));
        CHECK(got.ast == doctest::Approx(expect.ast).epsilon(1e-12));
        CHECK(got.state.t == doctest::Approx(expect.state.t).epsilon(1e-12));
        CHECK(got.state.pd == doctest::Approx(expect.state.pd).epsilon(1e-12));
        CHECK(got.state.d == doctest::Approx(expect.state.d).epsilon(1e-12));
    }
}

TEST_CASE("advance_with_min_green holds a short run open before switching away") {
    const IntersectionConfig cfg = IntersectionConfig::uniform(2, 4.0, 2.0, 60.0, 5.0);
    const ScheduleState prev{0, 2.0, 10.0, 0.0};
    const StateAdvance held = advance_with_min_green(prev, 1, mk_cluster(1, 0.0, 2.0), cfg);
    // Oracle: hold green to min_green (t 10 -> 13), then switch.
    const oracle::Step expect = oracle::advance_min_green(
        {0, 2.0, 10.0, 0.0}, {1, 1, 0.0, 2.0}, oracle::matrix_of(cfg), cfg.startup_lost,
        cfg.min_green);
    CHECK(held.pst == doctest::Approx(expect.pst));
    CHECK(held.ast == doctest::Approx(expect.ast));
    CHECK(held.state.t == doctest::Approx(expect.state.t));
    // Same phase: no hold applies.
    const StateAdvance same = advance_with_min_green(prev, 0, mk_cluster(1, 0.0, 2.0), cfg);
    const StateAdvance raw = advance_state(prev, 0, mk_cluster(1, 0.0, 2.0), cfg);
    CHECK(same.state.t == doctest::Approx(raw.state.t));
}

TEST_CASE("advance_state input validation") {
    const IntersectionConfig cfg = IntersectionConfig::uniform(2);
    const ScheduleState prev;
    CHECK_THROWS_AS(advance_state(prev, 2, mk_cluster(1, 0, 1), cfg), ConfigError);
    CHECK_THROWS_AS(advance_state(prev, 0, mk_cluster(0, 0, 1), cfg), ConfigError);
    CHECK_THROWS_AS(advance_state(prev, 0, mk_cluster(1, 2, 1), cfg), ConfigError);
}

// --- cumulative delay --------------------------------------------------------

TEST_CASE("cumulative_delay sums count-weighted waits and matches the final state") {
    const IntersectionConfig cfg = IntersectionConfig::uniform(2, 4.0, 2.0);

    SUBCASE("zero when every cluster starts at its arrival") {
        const auto in = oracle::input_of({{{0, 2, 10.0, 14.0}, {0, 1, 20.0, 22.0}}, {}});
        const ControlFlow flow = forward_dp(in, ScheduleState{0, 10.0, 0.0, 0.0}, cfg);
        CHECK(cumulative_delay(flow) == doctest::Approx(0.0));
    }
    SUBCASE("single cluster of 4 delayed 5 seconds scores 20") {
        // Phase 1 cluster arriving now while phase 0 holds the green: pst = 4
        // (changeover) + slt 2 -> ast 7, arr 2 -> wait 5 each for 4 vehicles.
        const auto in = oracle::input_of({{}, {{1, 4, 2.0, 6.0}}});
        const ControlFlow flow = forward_dp(in, ScheduleState{0, 10.0, 1.0, 0.0}, cfg);
        REQUIRE(flow.entries.size() == 1);
        CHECK(flow.entries[0].ast - flow.entries[0].cluster.arr == doctest::Approx(5.0));
        CHECK(cumulative_delay(flow) == doctest::Approx(20.0));
        CHECK(flow.final_state.d == doctest::Approx(cumulative_delay(flow)));
    }
    SUBCASE("hand-traced switch example accumulates 27") {
        ControlFlow flow;
        flow.initial = ScheduleState{0, 0.0, 5.0, 0.0};
        const StateAdvance sa =
            advance_state(flow.initial, 1, mk_cluster(3, 2.0, 4.0),
                          IntersectionConfig::uniform(2, 4.0, 2.0));
        ScheduledCluster e;
        e.phase = 1;
        e.cluster = mk_cluster(3, 2.0, 4.0);
        e.pst = sa.pst;
        e.ast = sa.ast;
        e.finish = sa.state.t;
        flow.entries.push_back(e);
        flow.final_state = sa.state;
        CHECK(cumulative_delay(flow) == doctest::Approx(27.0));
    }
}

// --- forward_dp ---------------------------------------------------------------

TEST_CASE("forward_dp schedules a lone cluster immediately with zero delay") {
    const IntersectionConfig cfg = IntersectionConfig::uniform(1, 4.0, 2.0);
    const auto in = oracle::input_of({{{0, 3, 5.0, 11.0}}});
    const ControlFlow flow = forward_dp(in, ScheduleState{0, 10.0, 0.0, 0.0}, cfg);
    REQUIRE(flow.entries.size() == 1);
    CHECK(flow.entries[0].ast == doctest::Approx(5.0));
    CHECK(cumulative_delay(flow) == doctest::Approx(0.0));
}

TEST_CASE("forward_dp breaks symmetric ties toward the lower phase index") {
    const IntersectionConfig cfg = IntersectionConfig::uniform(2, 4.0, 2.0);
    // Both clusters arrive far in the future; either order costs the same.
    const auto in = oracle::input_of({{{0, 1, 100.0, 100.5}}, {{1, 1, 100.0, 100.5}}});
    const ControlFlow flow = forward_dp(in, ScheduleState{0, 10.0, 0.0, 0.0}, cfg);
    REQUIRE(flow.entries.size() == 2);
    CHECK(flow.entries[0].phase == 0);
    CHECK(flow.phase_sequence() == std::vector<int>{0, 1});
}

TEST_CASE("forward_dp equals brute force with min_green disabled (pure Algorithm-1 cost)") {
    Rng rng(2024);
    int checked = 0;
    while (checked < 60) {
        const auto inst = oracle::random_instance(rng, 2, rng.uniform_int(1, 8), 0.0);
        const auto in = oracle::input_of(inst.per_phase);
        const ControlFlow flow = forward_dp(in, oracle::lib_state(inst.initial), inst.cfg);
        const double best = oracle::brute_force_min_delay(
            inst.initial, inst.per_phase, oracle::matrix_of(inst.cfg), inst.cfg.startup_lost);
        REQUIRE(cumulative_delay(flow) == best);  // exact equality
        ++checked;
    }
}

TEST_CASE("forward_dp equals brute force under the min_green hold as well") {
    Rng rng(2025);
    for (int trial = 0; trial < 40; ++trial) {
        const auto inst = oracle::random_instance(rng, 2, rng.uniform_int(1, 7), 5.0);
        const auto in = oracle::input_of(inst.per_phase);
        const ControlFlow flow = forward_dp(in, oracle::lib_state(inst.initial), inst.cfg);
        const double best = oracle::brute_force_min_delay(
            inst.initial, inst.per_phase, oracle::matrix_of(inst.cfg),
            inst.cfg.startup_lost, &inst.cfg.min_green);
        REQUIRE(cumulative_delay(flow) == best);
    }
}

TEST_CASE("forward_dp preserves per-road cluster order and annotations are consistent") {
    Rng rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const int phases = rng.uniform_int(2, 4);
        const auto inst = oracle::random_instance(rng, phases, rng.uniform_int(2, 10));
        const auto in = oracle::input_of(inst.per_phase);
        const ControlFlow flow = forward_dp(in, oracle::lib_state(inst.initial), inst.cfg);

        // Every cluster appears once, per-road order (= per-phase here) intact.
        std::map<int, double> last_arr;
        int total = 0;
        for (const auto& e : flow.entries) {
            if (last_arr.count(e.phase)) CHECK(e.cluster.arr > last_arr[e.phase] - 1e-12);
            last_arr[e.phase] = e.cluster.arr;
            total += e.cluster.count;
            CHECK(e.ast >= e.pst - 1e-12);
            CHECK(e.ast >= e.cluster.arr - 1e-12);
            CHECK(e.finish >= e.ast - 1e-12);
        }
        CHECK(total == in.total_vehicles());

        // The final state replays exactly as the oracle fold of the entries.
        const oracle::State re =
            oracle::fold(inst.initial, oracle::jobs_of(flow), oracle::matrix_of(inst.cfg),
                         inst.cfg.startup_lost, &inst.cfg.min_green);
        CHECK(flow.final_state.d == doctest::Approx(re.d).epsilon(1e-12));
        CHECK(flow.final_state.t == doctest::Approx(re.t).epsilon(1e-12));
        CHECK(cumulative_delay(flow) == doctest::Approx(re.d).epsilon(1e-12));
    }
}

// --- enforce_max_green ---------------------------------------------------------

TEST_CASE("enforce_max_green returns schedules without violations unchanged") {
    const IntersectionConfig cfg = IntersectionConfig::uniform(2, 4.0, 2.0, 60.0, 5.0);
    const auto in = oracle::input_of({{{0, 3, 5.0, 11.0}}, {{1, 2, 6.0, 10.0}}});
    const ScheduleState init{0, 10.0, 0.0, 0.0};
    const ControlFlow flow = forward_dp(in, init, cfg);
    const ControlFlow kept = enforce_max_green(flow, in, init, cfg);
    REQUIRE(kept.entries.size() == flow.entries.size());
    for (std::size_t i = 0; i < kept.entries.size(); ++i) {
        CHECK(kept.entries[i].cluster.count == flow.entries[i].cluster.count);
        CHECK(kept.entries[i].ast == doctest::Approx(flow.entries[i].ast));
    }
}

TEST_CASE("enforce_max_green splits 30 vehicles at 2 s each under a 40 s cap into 20+10") {
    const IntersectionConfig cfg = IntersectionConfig::uniform(2, 4.0, 2.0, 40.0, 5.0);
    const auto in = oracle::input_of({{{0, 30, 0.0, 60.0}}, {}});
    const ScheduleState init{0, 0.0, 0.0, 0.0};
    const ControlFlow flow = forward_dp(in, init, cfg);
    const ControlFlow split = enforce_max_green(flow, in, init, cfg);
    REQUIRE(split.entries.size() == 2);
    CHECK(split.entries[0].cluster.count == 20);
    CHECK(split.entries[1].cluster.count == 10);
    CHECK(split.entries[0].cluster.service() == doctest::Approx(40.0));
    CHECK(split.entries[1].cluster.service() == doctest::Approx(20.0));
    // Conservation and the per-cluster cap.
    int total = 0;
    for (const auto& e : split.entries) {
        total += e.cluster.count;
        CHECK(e.cluster.service() <= 40.0 + 1e-9);
    }
    CHECK(total == 30);
}

TEST_CASE("enforce_max_green rejects a single vehicle needing more than max_green") {
    const IntersectionConfig cfg = IntersectionConfig::uniform(2, 4.0, 2.0, 40.0, 5.0);
    const auto in = oracle::input_of({{{0, 1, 0.0, 50.0}}, {}});
    const ScheduleState init{0, 0.0, 0.0, 0.0};
    const ControlFlow flow = forward_dp(in, init, cfg);
    CHECK_THROWS_AS(enforce_max_green(flow, in, init, cfg), ConfigError);
}

TEST_CASE("enforce_max_green caps runs when cross traffic waits, conserving vehicles") {
    Rng rng(57);
    for (int trial = 0; trial < 30; ++trial) {
        auto inst = oracle::random_instance(rng, 2, rng.uniform_int(2, 6), 5.0);
        // Caps of 8-20 s always exceed the generated per-vehicle service
        // (at most 3 s), so every violating cluster stays splittable.
        for (auto& g : inst.cfg.max_green) g = rng.uniform(8.0, 20.0);
        inst.initial.pd = 0.0;
        const auto in = oracle::input_of(inst.per_phase);
        const ScheduleState init = oracle::lib_state(inst.initial);
        const ControlFlow flow = forward_dp(in, init, inst.cfg);
        const ControlFlow capped = enforce_max_green(flow, in, init, inst.cfg);

        int total = 0;
        for (const auto& e : capped.entries) {
            total += e.cluster.count;
            CHECK(e.cluster.service() <=
                  inst.cfg.max_green[static_cast<std::size_t>(e.phase)] + 1e-6);
        }
        CHECK(total == in.total_vehicles());

        // Runs that keep competitors waiting never exceed the cap.
        std::size_t i = 0;
        while (i < capped.entries.size()) {
            std::size_t j = i;
            double service = 0.0;
            while (j < capped.entries.size() &&
                   capped.entries[j].phase == capped.entries[i].phase) {
                service += capped.entries[j].cluster.service();
                ++j;
            }
            double used = service;
            if (i == 0 && capped.entries[i].phase == init.phase) used += init.pd;
            const double cap =
                inst.cfg.max_green[static_cast<std::size_t>(capped.entries[i].phase)];
            bool waiter = false;
            for (std::size_t k = j; k < capped.entries.size(); ++k)
                if (capped.entries[k].phase != capped.entries[i].phase &&
                    capped.entries[k].cluster.arr < capped.entries[j - 1].finish - 1e-9)
                    waiter = true;
            if (waiter) CHECK(used <= cap + 1e-6);
            i = j;
        }
    }
}

// --- reschedule_largest_delay_batch ----------------------------------------------

TEST_CASE("batch rescheduling leaves all-singleton and zero-delay schedules unchanged") {
    const IntersectionConfig cfg = IntersectionConfig::uniform(2, 4.0, 2.0);
    const ScheduleState init{0, 10.0, 0.0, 0.0};

    SUBCASE("all clusters already singletons") {
        const auto in = oracle::input_of({{{0, 1, 3.0, 5.0}}, {{1, 1, 4.0, 6.0}}});
        const ControlFlow flow = forward_dp(in, init, cfg);
        const ControlFlow batched = reschedule_largest_delay_batch(flow, in, init, cfg);
        CHECK(cumulative_delay(batched) == doctest::Approx(cumulative_delay(flow)));
        REQUIRE(batched.entries.size() == flow.entries.size());
        for (std::size_t i = 0; i < batched.entries.size(); ++i)
            CHECK(batched.entries[i].cluster.count == flow.entries[i].cluster.count);
    }
    SUBCASE("zero-delay schedule") {
        const auto in = oracle::input_of({{{0, 4, 10.0, 18.0}}, {}});
        const ControlFlow flow = forward_dp(in, init, cfg);
        REQUIRE(cumulative_delay(flow) == doctest::Approx(0.0));
        const ControlFlow batched = reschedule_largest_delay_batch(flow, in, init, cfg);
        CHECK(cumulative_delay(batched) == doctest::Approx(0.0));
    }
}

TEST_CASE("batch rescheduling frees a blocked cross-street platoon") {
    // Cheap changeovers (1 s, no lost time): inserting the late side-street
    // platoon into the long main-street cluster pays off once the batch breaks
    // the window into singletons.
    const IntersectionConfig cfg = IntersectionConfig::uniform(2, 1.0, 0.0, 60.0, 5.0);
    const ScheduleState init{0, 10.0, 0.0, 0.0};
    const auto in = oracle::input_of({{{0, 10, 0.0, 40.0}}, {{1, 4, 30.0, 38.0}}});
    const ControlFlow flow = forward_dp(in, init, cfg);
    REQUIRE(cumulative_delay(flow) == doctest::Approx(44.0));  // side street waits out the green
    const ControlFlow batched = reschedule_largest_delay_batch(flow, in, init, cfg);
    CHECK(cumulative_delay(batched) <= cumulative_delay(flow) + 1e-12);
    CHECK(cumulative_delay(batched) < cumulative_delay(flow) - 1e-9);  // strictly helps
    int total = 0;
    for (const auto& e : batched.entries) total += e.cluster.count;
    CHECK(total == 14);
}

TEST_CASE("batch rescheduling never increases cumulative delay (random instances)") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const auto inst = oracle::random_instance(rng, rng.uniform_int(2, 3),
                                                  rng.uniform_int(1, 8), 5.0);
        const auto in = oracle::input_of(inst.per_phase);
        const ScheduleState init = oracle::lib_state(inst.initial);
        const ControlFlow flow = forward_dp(in, init, inst.cfg);
        const ControlFlow batched = reschedule_largest_delay_batch(flow, in, init, inst.cfg);
        CHECK(cumulative_delay(batched) <= cumulative_delay(flow) + 1e-12);
        int total = 0;
        for (const auto& e : batched.entries) total += e.cluster.count;
        CHECK(total == in.total_vehicles());
    }
}

TEST_CASE("IntersectionConfig validation names bad fields") {
    IntersectionConfig cfg = IntersectionConfig::uniform(2);
    CHECK_NOTHROW(cfg.validate());
    cfg.min_switch[0] = 1.0;  // nonzero diagonal
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = IntersectionConfig::uniform(2);
    cfg.max_green[0] = cfg.min_green[0];  // a pinned green duration is legal
    CHECK_NOTHROW(cfg.validate());
    cfg.min_green[0] = cfg.max_green[0] + 1.0;  // but min above max is not
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

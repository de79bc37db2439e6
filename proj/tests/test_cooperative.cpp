#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "sdtc/cooperative.hpp"
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

TEST_CASE("compute_gamma is the arrival/permitted-start ratio measured from now") {
    CHECK(compute_gamma(24.0, 24.0, 0.0).value() == doctest::Approx(1.0));
    CHECK(compute_gamma(24.0, 20.0, 0.0).value() == doctest::Approx(1.2));
    CHECK(compute_gamma(12.0, 20.0, 0.0).value() == doctest::Approx(0.6));
    CHECK(compute_gamma(34.0, 30.0, 10.0).value() == doctest::Approx(1.2));  // shifted origin
    CHECK_FALSE(compute_gamma(5.0, 0.0, 0.0).has_value());   // green already permitted
    CHECK_FALSE(compute_gamma(5.0, 10.0, 5.0).has_value());  // arrival is now
    CHECK_FALSE(compute_gamma(-1.0, -2.0, 0.0).has_value());
}

TEST_CASE("new_speed follows the acceleration law with clamping") {
    const CoopConfig cfg;  // a_max 5, omega 4, limits [2, 18.06]
    // 15 + 5 * (1 - 1.2^-4) = 17.588734567901235
    CHECK(new_speed(15.0, 1.2, cfg) == doctest::Approx(17.588734567901235).epsilon(1e-12));
    // 15 + 5 * (1 - 0.8^-4) = 7.79296875
    CHECK(new_speed(15.0, 0.8, cfg) == doctest::Approx(7.79296875).epsilon(1e-12));
    CHECK(new_speed(15.0, 1.0, cfg) == doctest::Approx(15.0));  // on time: keep speed
    CHECK(new_speed(17.0, 1.2, cfg) == doctest::Approx(cfg.v_limit));  // ceiling
    CHECK(new_speed(5.0, 0.7, cfg) == doctest::Approx(cfg.v_min));     // floor
}

TEST_CASE("is_safe bounds both the speed range and the change rate") {
    const CoopConfig cfg;  // reachable band: +-5 m/s within one second
    CHECK(is_safe(15.0, 18.0, cfg));
    CHECK(is_safe(14.0, 18.06, cfg));       // exactly the limit
    CHECK(is_safe(15.0, 10.5, cfg));
    CHECK_FALSE(is_safe(15.0, 9.5, cfg));   // |dv| = 5.5 > a_max * horizon
    CHECK_FALSE(is_safe(15.0, 19.0, cfg));  // above v_limit
    CHECK_FALSE(is_safe(3.0, 1.5, cfg));    // below v_min
}

TEST_CASE("advisory_for_cluster ignores clusters outside the gamma band") {
    const CoopConfig cfg;
    SUBCASE("gamma above thr_down") {
        const auto a = advisory_for_cluster(mk_cluster(2, 40.0, 44.0), 20.0, 15.0, 0.0, 0.0, cfg);
        CHECK_FALSE(a.speed.has_value());
        CHECK(a.revised_arrival == doctest::Approx(40.0));
        CHECK(a.updated_end == doctest::Approx(40.0));
    }
    SUBCASE("gamma below thr_up") {
        const auto a = advisory_for_cluster(mk_cluster(2, 10.0, 14.0), 20.0, 15.0, 0.0, 0.0, cfg);
        CHECK_FALSE(a.speed.has_value());
    }
    SUBCASE("band edges are exclusive") {
        CHECK_FALSE(advisory_for_cluster(mk_cluster(1, 12.0, 13.0), 20.0, 15.0, 0.0, 0.0, cfg)
                        .speed.has_value());  // gamma = 0.6
        CHECK_FALSE(advisory_for_cluster(mk_cluster(1, 28.0, 29.0), 20.0, 15.0, 0.0, 0.0, cfg)
                        .speed.has_value());  // gamma = 1.4
    }
    SUBCASE("gamma of exactly one changes nothing") {
        const auto a = advisory_for_cluster(mk_cluster(1, 20.0, 22.0), 20.0, 15.0, 0.0, 0.0, cfg);
        if (a.speed) CHECK(*a.speed == doctest::Approx(15.0));
        CHECK(a.revised_arrival == doctest::Approx(20.0));
    }
}

TEST_CASE("advisory_for_cluster speeds a late platoon up to meet its slot") {
    const CoopConfig cfg;
    // gamma = 24/20 = 1.2; advised speed is the acceleration-law value.
    const auto a = advisory_for_cluster(mk_cluster(2, 24.0, 28.0), 20.0, 15.0, 0.0, 0.0, cfg);
    REQUIRE(a.speed.has_value());
    const double vn = 17.588734567901235;
    CHECK(*a.speed == doctest::Approx(vn).epsilon(1e-12));
    CHECK(a.revised_arrival == doctest::Approx(360.0 / vn));  // ~20.468, after pst
    CHECK(a.revised_arrival >= 20.0 - 1e-9);                  // never into the red
    CHECK(is_safe(15.0, *a.speed, cfg));
}

TEST_CASE("speed-up advisories never move the arrival before the permitted start") {
    const CoopConfig cfg;
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const double pst = rng.uniform(5.0, 60.0);
        const double arr = pst * rng.uniform(1.0, 1.6);
        const double v = rng.uniform(3.0, 18.0);
        const auto a =
            advisory_for_cluster(mk_cluster(1, arr, arr + 2.0), pst, v, 0.0, 0.0, cfg);
        if (!a.speed) continue;
        if (*a.speed > v) {
            CHECK(a.revised_arrival >= pst - 1e-9);
            CHECK(a.revised_arrival <= arr + 1e-9);
        }
    }
}

TEST_CASE("advisory_for_cluster paces an early platoon to just before its slot") {
    const CoopConfig cfg;  // slow_margin_s = 8
    // gamma = 16/25 = 0.64; the law wants v_min but the pacing floor wins:
    // (16/(25-8)) * 15 = 240/17, which lands the platoon at pst - 8 = 17 s.
    const auto a = advisory_for_cluster(mk_cluster(3, 16.0, 22.0), 25.0, 15.0, 0.0, 0.0, cfg);
    REQUIRE(a.speed.has_value());
    CHECK(*a.speed == doctest::Approx(240.0 / 17.0).epsilon(1e-12));
    CHECK(a.revised_arrival == doctest::Approx(17.0).epsilon(1e-12));
    CHECK(is_safe(15.0, *a.speed, cfg));
}

TEST_CASE("slow-downs that cannot buy at least the margin are suppressed") {
    const CoopConfig cfg;
    SUBCASE("slot too close for the margin") {
        // gamma = 6/7.5 = 0.8 in band, but pst - margin = -0.5 is behind now.
        const auto a = advisory_for_cluster(mk_cluster(1, 6.0, 8.0), 7.5, 15.0, 0.0, 0.0, cfg);
        CHECK_FALSE(a.speed.has_value());
        CHECK(a.revised_arrival == doctest::Approx(6.0));
    }
    SUBCASE("pacing floor above the current speed is useless") {
        // gamma = 13/20 = 0.65 in band; floor (13/12)*15 = 16.25 >= v.
        const auto a = advisory_for_cluster(mk_cluster(1, 13.0, 15.0), 20.0, 15.0, 0.0, 0.0, cfg);
        CHECK_FALSE(a.speed.has_value());
        CHECK(a.revised_arrival == doctest::Approx(13.0));
    }
}

// --- plan_advisories ----------------------------------------------------------

TEST_CASE("plan_advisories on an empty schedule returns an empty plan") {
    const IntersectionConfig icfg = IntersectionConfig::uniform(2);
    const AdvisoryPlan plan =
        plan_advisories(ControlFlow{}, {}, {}, 0.0, icfg, CoopConfig{});
    CHECK(plan.advisories.empty());
    CHECK(plan.revised.entries.empty());
}

TEST_CASE("plan_advisories without any equipped vehicle reproduces the schedule") {
    const IntersectionConfig icfg = IntersectionConfig::uniform(2, 4.0, 2.0, 60.0, 5.0);
    const ScheduleState init{0, 10.0, 20.0, 0.0};
    const auto in =
        oracle::input_of({{{0, 2, 24.0, 28.0}}, {{1, 2, 10.0, 14.0}}});
    const ControlFlow flow = forward_dp(in, init, icfg);
    std::map<VehicleId, double> speeds{{1, 15.0}, {2, 15.0}, {3, 15.0}, {4, 15.0}};

    const AdvisoryPlan plan = plan_advisories(flow, speeds, {}, 0.0, icfg, CoopConfig{});
    CHECK(plan.advisories.empty());
    REQUIRE(plan.revised.entries.size() == flow.entries.size());
    for (std::size_t k = 0; k < flow.entries.size(); ++k) {
        CHECK(plan.revised.entries[k].cluster.arr ==
              doctest::Approx(flow.entries[k].cluster.arr).epsilon(1e-12));
        CHECK(plan.revised.entries[k].ast == doctest::Approx(flow.entries[k].ast).epsilon(1e-12));
        CHECK(plan.revised.entries[k].pst == doctest::Approx(flow.entries[k].pst).epsilon(1e-12));
    }
    CHECK(cumulative_delay(plan.revised) == doctest::Approx(cumulative_delay(flow)));
}

TEST_CASE("plan_advisories requires a moving lead vehicle") {
    const IntersectionConfig icfg = IntersectionConfig::uniform(2, 4.0, 2.0, 60.0, 5.0);
    const ScheduleState init{0, 10.0, 20.0, 0.0};
    const auto in = oracle::input_of({{{0, 2, 24.0, 28.0}}, {}});
    const ControlFlow flow = forward_dp(in, init, icfg);
    const std::set<VehicleId> cavs{1, 2};

    SUBCASE("no speed reading for the lead") {
        const AdvisoryPlan plan = plan_advisories(flow, {}, cavs, 0.0, icfg, CoopConfig{});
        CHECK(plan.advisories.empty());
    }
    SUBCASE("lead below the advisory floor") {
        const AdvisoryPlan plan =
            plan_advisories(flow, {{1, 0.5}}, cavs, 0.0, icfg, CoopConfig{});
        CHECK(plan.advisories.empty());
    }
    SUBCASE("moving lead yields the advisory") {
        const AdvisoryPlan plan =
            plan_advisories(flow, {{1, 15.0}}, cavs, 0.0, icfg, CoopConfig{});
        REQUIRE(plan.advisories.size() == 1);
        CHECK(plan.advisories[0].entry_index == 0);
        CHECK(plan.advisories[0].cav_members == std::vector<VehicleId>{1, 2});
        CHECK(plan.advisories[0].speed == doctest::Approx(17.588734567901235));
    }
}

TEST_CASE("plan_advisories slows an early platoon and lowers the re-costed delay") {
    const IntersectionConfig icfg = IntersectionConfig::uniform(2, 4.0, 2.0, 60.0, 5.0);
    const ScheduleState init{1, 10.0, 21.0, 0.0};
    const auto in = oracle::input_of({{{0, 3, 16.0, 22.0}}, {}});
    const ControlFlow flow = forward_dp(in, init, icfg);
    REQUIRE(cumulative_delay(flow) == doctest::Approx(33.0));  // 3 * (27 - 16)

    const AdvisoryPlan plan = plan_advisories(flow, {{1, 15.0}}, {1, 2, 3}, 0.0, icfg,
                                              CoopConfig{});
    REQUIRE(plan.advisories.size() == 1);
    CHECK(plan.advisories[0].speed == doctest::Approx(240.0 / 17.0));
    CHECK(plan.revised.entries[0].cluster.arr == doctest::Approx(17.0));
    CHECK(plan.revised.entries[0].ast == doctest::Approx(27.0));  // still waits for green
    CHECK(cumulative_delay(plan.revised) == doctest::Approx(30.0));  // 3 * (27 - 17)
}

TEST_CASE("a speed-up's released slack shifts the next phase's permitted start") {
    const IntersectionConfig icfg = IntersectionConfig::uniform(2, 4.0, 2.0, 60.0, 5.0);
    const ScheduleState init{0, 10.0, 20.0, 0.0};
    const auto in =
        oracle::input_of({{{0, 2, 24.0, 28.0}}, {{1, 2, 10.0, 14.0}}});
    const ControlFlow flow = forward_dp(in, init, icfg);
    REQUIRE(flow.phase_sequence() == std::vector<int>{0, 1});
    REQUIRE(cumulative_delay(flow) == doctest::Approx(48.0));  // side street: 2 * 24

    std::map<VehicleId, double> speeds{{1, 15.0}, {2, 15.0}, {3, 15.0}, {4, 15.0}};
    const AdvisoryPlan plan =
        plan_advisories(flow, speeds, {1, 2, 3, 4}, 0.0, icfg, CoopConfig{});

    // Only the main-street platoon is in band; the side street is deep in red.
    REQUIRE(plan.advisories.size() == 1);
    CHECK(plan.advisories[0].entry_index == 0);
    const double vn = new_speed(15.0, 1.2, CoopConfig{});
    const double arr2 = 15.0 / vn * 24.0;
    CHECK(plan.revised.entries[0].ast == doctest::Approx(arr2));

    // The compressed green hands (28 - arr2 - 4) seconds to the cross street.
    CHECK(plan.revised.entries[1].pst == doctest::Approx(arr2 + 4.0 + 4.0));
    CHECK(plan.revised.entries[1].ast == doctest::Approx(arr2 + 8.0 + 2.0));
    CHECK(cumulative_delay(plan.revised) == doctest::Approx(2.0 * arr2));
    CHECK(cumulative_delay(plan.revised) < cumulative_delay(flow) - 1e-9);
}

TEST_CASE("advisories are always safe and never increase the re-costed delay") {
    Rng rng(404);
    for (int trial = 0; trial < 150; ++trial) {
        auto inst = oracle::random_instance(rng, 2, rng.uniform_int(1, 7), 5.0);
        inst.initial.t = rng.uniform(0.0, 30.0);
        inst.initial.pd = rng.uniform(5.0, 15.0);
        const auto in = oracle::input_of(inst.per_phase);
        const ControlFlow flow = forward_dp(in, oracle::lib_state(inst.initial), inst.cfg);

        std::map<VehicleId, double> speeds;
        std::set<VehicleId> cavs;
        for (const auto& roads : in.by_phase)
            for (const auto& seq : roads)
                for (const auto& c : seq.clusters)
                    for (const VehicleId m : c.members) {
                        speeds[m] = rng.uniform(2.0, 18.0);
                        if (rng.bernoulli(0.6)) cavs.insert(m);
                    }

        const CoopConfig cfg;
        const AdvisoryPlan plan = plan_advisories(flow, speeds, cavs, 0.0, inst.cfg, cfg);

        CHECK(cumulative_delay(plan.revised) <= cumulative_delay(flow) + 1e-9);
        REQUIRE(plan.revised.entries.size() == flow.entries.size());
        for (const auto& adv : plan.advisories) {
            REQUIRE(adv.entry_index < flow.entries.size());
            const auto& members = flow.entries[adv.entry_index].cluster.members;
            REQUIRE(!members.empty());
            const double lead_v = speeds.at(members.front());
            CHECK(is_safe(lead_v, adv.speed, cfg));
            CHECK(adv.speed >= cfg.v_min - 1e-9);
            CHECK(adv.speed <= cfg.v_limit + 1e-9);
            CHECK(!adv.cav_members.empty());
            for (const VehicleId m : adv.cav_members) CHECK(cavs.count(m) == 1);
        }
        // Vehicle conservation through the revision.
        int before = 0, after = 0;
        for (const auto& e : flow.entries) before += e.cluster.count;
        for (const auto& e : plan.revised.entries) after += e.cluster.count;
        CHECK(before == after);
    }
}

TEST_CASE("CoopConfig validation rejects out-of-range parameters") {
    CHECK_NOTHROW(CoopConfig{}.validate());
    auto bad = [](auto&& mutate) {
        CoopConfig c;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), ConfigError);
    };
    bad([](CoopConfig& c) { c.thr_up = 0.0; });
    bad([](CoopConfig& c) { c.thr_up = 1.0; });
    bad([](CoopConfig& c) { c.thr_down = 1.0; });
    bad([](CoopConfig& c) { c.a_max = 0.0; });
    bad([](CoopConfig& c) { c.omega = 0.0; });
    bad([](CoopConfig& c) { c.v_min = -1.0; });
    bad([](CoopConfig& c) { c.v_limit = c.v_min; });
    bad([](CoopConfig& c) { c.advisory_horizon = 0.0; });
    bad([](CoopConfig& c) { c.slow_margin_s = -0.1; });
}

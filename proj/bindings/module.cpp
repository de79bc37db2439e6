// Python bindings for the sdtc core: clustering, scheduling, speed advisories,
// and the scenario harness. Kept intentionally thin — every function forwards
// to the C++ library that the CLI and the tests use.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sdtc/cluster.hpp"
#include "sdtc/cooperative.hpp"
#include "sdtc/harness.hpp"
#include "sdtc/idm.hpp"
#include "sdtc/rng.hpp"
#include "sdtc/scenario.hpp"
#include "sdtc/scheduler.hpp"
#include "sdtc/types.hpp"
#include "sdtc/webster.hpp"

namespace py = pybind11;
using namespace sdtc;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Schedule-driven traffic control with cooperative speed advisories";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);

    // --- clusters ------------------------------------------------------
    py::class_<Cluster>(m, "Cluster")
        .def(py::init<>())
        .def(py::init([](int count, double arr, double dep, std::vector<VehicleId> members) {
                 return Cluster{count, arr, dep, std::move(members)};
             }),
             py::arg("count"), py::arg("arr"), py::arg("dep"),
             py::arg("members") = std::vector<VehicleId>{})
        .def_readwrite("count", &Cluster::count)
        .def_readwrite("arr", &Cluster::arr)
        .def_readwrite("dep", &Cluster::dep)
        .def_readwrite("members", &Cluster::members)
        .def("service", &Cluster::service)
        .def("__repr__", [](const Cluster& c) {
            return "Cluster(count=" + std::to_string(c.count) +
                   ", arr=" + std::to_string(c.arr) + ", dep=" + std::to_string(c.dep) + ")";
        });

    py::class_<Observation>(m, "Observation")
        .def(py::init([](VehicleId vehicle, double arrival, double clearance) {
                 return Observation{vehicle, arrival, clearance};
             }),
             py::arg("vehicle"), py::arg("arrival"), py::arg("clearance"))
        .def_readwrite("vehicle", &Observation::vehicle)
        .def_readwrite("arrival", &Observation::arrival)
        .def_readwrite("clearance", &Observation::clearance);

    py::class_<RoadClusterSequence>(m, "RoadClusterSequence")
        .def(py::init<>())
        .def_readwrite("road", &RoadClusterSequence::road)
        .def_readwrite("clusters", &RoadClusterSequence::clusters)
        .def_readwrite("horizon", &RoadClusterSequence::horizon);

    py::class_<InputClusterSequence>(m, "InputClusterSequence")
        .def(py::init<>())
        .def_readwrite("by_phase", &InputClusterSequence::by_phase)
        .def_readwrite("horizon", &InputClusterSequence::horizon)
        .def("phase_count", &InputClusterSequence::phase_count)
        .def("total_clusters", &InputClusterSequence::total_clusters)
        .def("total_vehicles", &InputClusterSequence::total_vehicles);

    m.def("cluster_vehicles", &cluster_vehicles, py::arg("observations"), py::arg("interval"),
          py::arg("road") = RoadId{}, py::arg("horizon") = std::nullopt,
          "Greedy headway clustering of arrival observations into platoons");
    m.def("combine_by_phase", &combine_by_phase, py::arg("sequences"), py::arg("phase_of_road"),
          py::arg("phase_count") = std::nullopt);

    // --- scheduling ----------------------------------------------------
    py::class_<IntersectionConfig>(m, "IntersectionConfig")
        .def(py::init<>())
        .def_readwrite("phase_count", &IntersectionConfig::phase_count)
        .def_readwrite("min_switch", &IntersectionConfig::min_switch)
        .def_readwrite("startup_lost", &IntersectionConfig::startup_lost)
        .def_readwrite("max_green", &IntersectionConfig::max_green)
        .def_readwrite("min_green", &IntersectionConfig::min_green)
        .def("min_switch_at", &IntersectionConfig::min_switch_at, py::arg("s"), py::arg("i"))
        .def("validate", &IntersectionConfig::validate)
        .def_static("uniform", &IntersectionConfig::uniform, py::arg("phases"),
                    py::arg("switch_s") = 4.0, py::arg("slt_s") = 2.0,
                    py::arg("max_green_s") = 60.0, py::arg("min_green_s") = 5.0);

    py::class_<ScheduleState>(m, "ScheduleState")
        .def(py::init<>())
        .def(py::init([](int phase, double pd, double t, double d) {
                 return ScheduleState{phase, pd, t, d};
             }),
             py::arg("phase") = 0, py::arg("pd") = 0.0, py::arg("t") = 0.0, py::arg("d") = 0.0)
        .def_readwrite("phase", &ScheduleState::phase)
        .def_readwrite("pd", &ScheduleState::pd)
        .def_readwrite("t", &ScheduleState::t)
        .def_readwrite("d", &ScheduleState::d)
        .def("__repr__", [](const ScheduleState& s) {
            return "ScheduleState(phase=" + std::to_string(s.phase) +
                   ", pd=" + std::to_string(s.pd) + ", t=" + std::to_string(s.t) +
                   ", d=" + std::to_string(s.d) + ")";
        });

    py::class_<ScheduledCluster>(m, "ScheduledCluster")
        .def_readonly("phase", &ScheduledCluster::phase)
        .def_readonly("road", &ScheduledCluster::road)
        .def_readonly("cluster", &ScheduledCluster::cluster)
        .def_readonly("pst", &ScheduledCluster::pst)
        .def_readonly("ast", &ScheduledCluster::ast)
        .def_readonly("finish", &ScheduledCluster::finish)
        .def("delay", &ScheduledCluster::delay);

    py::class_<ControlFlow>(m, "ControlFlow")
        .def(py::init<>())
        .def_readonly("entries", &ControlFlow::entries)
        .def_readonly("initial", &ControlFlow::initial)
        .def_readonly("final_state", &ControlFlow::final_state)
        .def("phase_sequence", &ControlFlow::phase_sequence);

    py::class_<StateAdvance>(m, "StateAdvance")
        .def_readonly("state", &StateAdvance::state)
        .def_readonly("pst", &StateAdvance::pst)
        .def_readonly("ast", &StateAdvance::ast);

    py::class_<DpOptions>(m, "DpOptions")
        .def(py::init<>())
        .def_readwrite("cap_max_green", &DpOptions::cap_max_green);

    m.def("advance_state", &advance_state, py::arg("prev"), py::arg("next_phase"),
          py::arg("cluster"), py::arg("config"),
          "One forward-recursion transition: appends a cluster to a partial schedule");
    m.def("advance_with_min_green", &advance_with_min_green, py::arg("prev"),
          py::arg("next_phase"), py::arg("cluster"), py::arg("config"));
    m.def("cumulative_delay", &cumulative_delay, py::arg("flow"));
    m.def("forward_dp", &forward_dp, py::arg("input"), py::arg("initial"), py::arg("config"),
          py::arg("options") = DpOptions{},
          "Delay-optimal interleaving of the per-phase cluster sequences");
    m.def("enforce_max_green", &enforce_max_green, py::arg("flow"), py::arg("input"),
          py::arg("initial"), py::arg("config"));
    m.def("reschedule_largest_delay_batch", &reschedule_largest_delay_batch, py::arg("flow"),
          py::arg("input"), py::arg("initial"), py::arg("config"));

    // --- cooperative advisories ----------------------------------------
    py::class_<CoopConfig>(m, "CoopConfig")
        .def(py::init<>())
        .def_readwrite("thr_up", &CoopConfig::thr_up)
        .def_readwrite("thr_down", &CoopConfig::thr_down)
        .def_readwrite("a_max", &CoopConfig::a_max)
        .def_readwrite("omega", &CoopConfig::omega)
        .def_readwrite("v_limit", &CoopConfig::v_limit)
        .def_readwrite("v_min", &CoopConfig::v_min)
        .def_readwrite("advisory_horizon", &CoopConfig::advisory_horizon)
        .def_readwrite("slow_margin_s", &CoopConfig::slow_margin_s)
        .def("validate", &CoopConfig::validate);

    py::class_<SpeedAdvisory>(m, "SpeedAdvisory")
        .def_readonly("entry_index", &SpeedAdvisory::entry_index)
        .def_readonly("cav_members", &SpeedAdvisory::cav_members)
        .def_readonly("speed", &SpeedAdvisory::speed)
        .def_readonly("issue_time", &SpeedAdvisory::issue_time);

    py::class_<ClusterAdvice>(m, "ClusterAdvice")
        .def_readonly("speed", &ClusterAdvice::speed)
        .def_readonly("updated_end", &ClusterAdvice::updated_end)
        .def_readonly("revised_arrival", &ClusterAdvice::revised_arrival);

    py::class_<AdvisoryPlan>(m, "AdvisoryPlan")
        .def_readonly("advisories", &AdvisoryPlan::advisories)
        .def_readonly("revised", &AdvisoryPlan::revised);

    m.def("compute_gamma", &compute_gamma, py::arg("arr"), py::arg("pst"), py::arg("now"),
          "Arrival/permitted-start ratio, or None when either lies in the past");
    m.def("new_speed", &new_speed, py::arg("v"), py::arg("gamma"), py::arg("config"));
    m.def("is_safe", &is_safe, py::arg("v"), py::arg("v_new"), py::arg("config"));
    m.def("advisory_for_cluster", &advisory_for_cluster, py::arg("cluster"), py::arg("pst"),
          py::arg("v"), py::arg("now"), py::arg("updated_end"), py::arg("config"));
    m.def("plan_advisories", &plan_advisories, py::arg("flow"), py::arg("speeds"),
          py::arg("cavs"), py::arg("now"), py::arg("intersection_config"), py::arg("config"),
          "Per-cluster speed advisories plus the schedule re-costed with advised arrivals");

    // --- models ---------------------------------------------------------
    py::class_<IdmParams>(m, "IdmParams")
        .def(py::init<>())
        .def_readwrite("v0", &IdmParams::v0)
        .def_readwrite("T", &IdmParams::T)
        .def_readwrite("s0", &IdmParams::s0)
        .def_readwrite("a_max", &IdmParams::a_max)
        .def_readwrite("b", &IdmParams::b)
        .def_readwrite("omega", &IdmParams::omega)
        .def("validate", &IdmParams::validate);
    m.def("idm_acceleration", &idm_acceleration, py::arg("v"), py::arg("gap"),
          py::arg("closing_speed"), py::arg("params"));

    py::class_<FixedPlan>(m, "FixedPlan")
        .def(py::init<>())
        .def_readwrite("cycle", &FixedPlan::cycle)
        .def_readwrite("greens", &FixedPlan::greens)
        .def_readwrite("lost_time", &FixedPlan::lost_time);
    m.def("webster_fixed_plan", &webster_fixed_plan, py::arg("demand_veh_h"),
          py::arg("saturation_veh_h"), py::arg("config"));

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("uniform", py::overload_cast<>(&Rng::uniform))
        .def("uniform_range", py::overload_cast<double, double>(&Rng::uniform), py::arg("lo"),
             py::arg("hi"))
        .def("uniform_int", &Rng::uniform_int, py::arg("lo"), py::arg("hi"))
        .def("exponential", &Rng::exponential, py::arg("mean"))
        .def("bernoulli", &Rng::bernoulli, py::arg("p"))
        .def("word", &Rng::word)
        .def_static("derive", &Rng::derive, py::arg("seed"), py::arg("label"));

    // --- scenarios and harness ------------------------------------------
    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("name", &ScenarioConfig::name)
        .def_readwrite("demand_tiers", &ScenarioConfig::demand_tiers)
        .def_readwrite("demand_tier", &ScenarioConfig::demand_tier)
        .def_readwrite("controller", &ScenarioConfig::controller)
        .def_readwrite("clustering_interval_s", &ScenarioConfig::clustering_interval_s)
        .def_readwrite("penetration", &ScenarioConfig::penetration)
        .def_readwrite("batch_reschedule", &ScenarioConfig::batch_reschedule)
        .def_readwrite("duration_s", &ScenarioConfig::duration_s)
        .def_readwrite("measure_from_s", &ScenarioConfig::measure_from_s)
        .def_readwrite("measure_to_s", &ScenarioConfig::measure_to_s)
        .def_readwrite("seeds", &ScenarioConfig::seeds)
        .def_readwrite("dt_s", &ScenarioConfig::dt_s)
        .def_readwrite("control_period_s", &ScenarioConfig::control_period_s)
        .def_readwrite("service_time_s", &ScenarioConfig::service_time_s)
        .def_readwrite("idm", &ScenarioConfig::idm)
        .def_readwrite("coop", &ScenarioConfig::coop)
        .def("demand_rate", &ScenarioConfig::demand_rate)
        .def("validate", &ScenarioConfig::validate);

    m.def("builtin_scenario", &builtin_scenario, py::arg("name"),
          "Bundled scenarios: 'single' or 'arterial3'");
    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("scenario_from_json_text", &scenario_from_json_text, py::arg("text"),
          py::arg("origin") = std::string("<string>"));
    m.def("scenario_to_json", &scenario_to_json, py::arg("scenario"));

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("scenario", &RunResult::scenario)
        .def_readonly("seed", &RunResult::seed)
        .def_readonly("controller", &RunResult::controller)
        .def_readonly("demand", &RunResult::demand)
        .def_readonly("interval", &RunResult::interval)
        .def_readonly("penetration", &RunResult::penetration)
        .def_readonly("vehicles", &RunResult::vehicles)
        .def_readonly("mean_delay_s", &RunResult::mean_delay_s)
        .def_readonly("std_delay_s", &RunResult::std_delay_s)
        .def_readonly("throughput", &RunResult::throughput)
        .def_readonly("no_vehicles", &RunResult::no_vehicles)
        .def_readonly("determinism_hash", &RunResult::determinism_hash)
        .def("__repr__", [](const RunResult& r) {
            return "RunResult(" + r.scenario + ", seed=" + std::to_string(r.seed) + ", " +
                   r.controller + ", mean_delay_s=" + std::to_string(r.mean_delay_s) + ")";
        });

    py::class_<SweepAxes>(m, "SweepAxes")
        .def(py::init<>())
        .def_readwrite("demands", &SweepAxes::demands)
        .def_readwrite("controllers", &SweepAxes::controllers)
        .def_readwrite("intervals", &SweepAxes::intervals)
        .def_readwrite("penetrations", &SweepAxes::penetrations);

    m.def("run_scenario", &run_scenario, py::arg("scenario"), py::arg("seed"),
          py::call_guard<py::gil_scoped_release>(),
          "Simulates one scenario with one seed and reports delay statistics");
    m.def("sweep", &sweep, py::arg("base"), py::arg("axes"), py::arg("seeds"),
          py::arg("max_threads") = 0, py::call_guard<py::gil_scoped_release>());
    m.def("results_csv", &results_csv, py::arg("results"));
    m.def("results_table", &results_table, py::arg("results"));
}

"""Schedule-driven traffic control with cooperative speed advisories.

The package re-exports the native module: platoon clustering, the
forward-recursion scheduler, gamma-band speed advisories, and the scenario
harness (run_scenario / sweep) used by the `sdtc` command-line tool.
"""

from ._core import (  # noqa: F401
    AdvisoryPlan,
    Cluster,
    ClusterAdvice,
    ConfigError,
    ControlFlow,
    CoopConfig,
    DpOptions,
    FixedPlan,
    IdmParams,
    InputClusterSequence,
    IntersectionConfig,
    Observation,
    Rng,
    RoadClusterSequence,
    RunResult,
    ScenarioConfig,
    ScheduleState,
    ScheduledCluster,
    SimulationError,
    SpeedAdvisory,
    StateAdvance,
    SweepAxes,
    advance_state,
    advance_with_min_green,
    advisory_for_cluster,
    builtin_scenario,
    cluster_vehicles,
    combine_by_phase,
    compute_gamma,
    cumulative_delay,
    enforce_max_green,
    forward_dp,
    idm_acceleration,
    is_safe,
    load_scenario,
    new_speed,
    plan_advisories,
    reschedule_largest_delay_batch,
    results_csv,
    results_table,
    run_scenario,
    scenario_from_json_text,
    scenario_to_json,
    sweep,
    webster_fixed_plan,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

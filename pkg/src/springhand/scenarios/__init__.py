"""Scenario harness: scenario files, runners and trace writers."""
from .runners import (
    CategoryResult,
    coupling_diagnosis,
    run_category,
    run_grasp_taxonomy,
    run_load_test,
    run_lever_test,
    run_lock_turn,
    run_scenario,
    run_schedule,
    run_wipe_contact,
    shape_violations,
)
from .spec import (
    CategorySpec,
    ScenarioSpec,
    builtin_scenarios,
    load_builtin_scenario,
    load_scenario,
    resolve_hand,
    scenario_from_document,
)
from .trace import ScenarioOutcome, TraceRecord, columns, summary_json, trace_csv

__all__ = [
    "CategoryResult", "CategorySpec", "ScenarioOutcome", "ScenarioSpec", "TraceRecord",
    "builtin_scenarios", "columns", "coupling_diagnosis", "load_builtin_scenario", "load_scenario",
    "resolve_hand", "run_category", "run_grasp_taxonomy", "run_lever_test", "run_load_test",
    "run_lock_turn", "run_scenario", "run_schedule", "run_wipe_contact", "scenario_from_document",
    "shape_violations", "summary_json", "trace_csv",
]

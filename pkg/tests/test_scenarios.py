import copy
import csv
import io
import json
import math
from dataclasses import replace

import numpy as np
import pytest

from springhand.errors import InvalidModelError, SchemaError
from springhand.scenarios import (
    columns,
    coupling_diagnosis,
    load_builtin_scenario,
    run_grasp_taxonomy,
    run_lock_turn,
    run_scenario,
    run_wipe_contact,
    scenario_from_document,
    shape_violations,
    summary_json,
    trace_csv,
)


@pytest.fixture(scope="module")
def taxonomy():
    return load_builtin_scenario("taxonomy")


def test_schema_errors_carry_the_field_path():
    doc = {"schema_version": 1, "kind": "lever", "hand": "builtin:kengoro-default", "schedule": [{}], "bogus": 1}
    with pytest.raises(SchemaError, match="bogus"):
        scenario_from_document(doc)
    doc = {"schema_version": 1, "kind": "lever", "hand": "builtin:kengoro-default", "schedule": [{"rigidity": "x"}]}
    with pytest.raises(SchemaError, match="schedule/0"):
        scenario_from_document(doc)
    with pytest.raises(SchemaError, match="schema_version"):
        scenario_from_document({"schema_version": 7, "kind": "lever", "hand": "x", "schedule": [{}]})


def test_kind_specific_requirements():
    with pytest.raises((SchemaError, InvalidModelError)):
        scenario_from_document({"schema_version": 1, "kind": "taxonomy", "hand": "builtin:kengoro-default"})
    with pytest.raises((SchemaError, InvalidModelError)):
        scenario_from_document({"schema_version": 1, "kind": "lever", "hand": "builtin:kengoro-default",
                                "schedule": []})


def test_shape_and_coupling_diagnosis(hand_models):
    hand, net = hand_models
    assert shape_violations(hand, hand.rest, ["index"], []) == ["index flexed 0.0 deg < 30"]
    q = hand.rest.copy()
    q[hand.dof_index("middle.PIP.flexion")] = math.radians(20.0)
    assert shape_violations(hand, q, [], ["middle"]) == ["middle.PIP.flexion at 20.0 deg > 10"]
    light = coupling_diagnosis(hand, net, ["index.DIP.flexion"], ["index.MP.flexion"])
    assert len(light) == 1 and light[0].startswith("index_middle_flexor") and "one flexor per finger" in light[0]
    pinch = coupling_diagnosis(hand, net, ["index"], ["middle", "ring", "little"])
    assert any("ring connector" in d for d in pinch)
    assert coupling_diagnosis(hand, net, ["index", "middle"], ["thumb"]) == []


def test_taxonomy_result_ignores_suite_order(taxonomy, hand_models):
    hand, net = hand_models
    suite = [c for c in taxonomy.suite if c.category in ("Power sphere", "Thumb-index finger", "Tripod")]
    a = run_grasp_taxonomy(hand, net, suite)
    b = run_grasp_taxonomy(hand, net, list(reversed(suite)))
    assert a.details == b.details
    assert trace_csv(a.records, hand, net) == trace_csv(b.records, hand, net)
    status = {r["category"]: r["status"] for r in a.details["table"]}
    assert status == {"Power sphere": "feasible", "Thumb-index finger": "infeasible", "Tripod": "untested"}


def test_duplicate_categories_rejected(taxonomy, hand_models):
    hand, net = hand_models
    with pytest.raises(InvalidModelError):
        run_grasp_taxonomy(hand, net, [taxonomy.suite[0], taxonomy.suite[0]])


def wipe(**kw):
    spec = load_builtin_scenario("wipe_contact")
    hand, net = spec.load_models()
    table = spec.build_objects()[0]
    p = dict(spec.params, **kw)
    return spec, hand, run_wipe_contact(hand, net, table, spec.schedule, **p)


def test_wipe_detects_at_first_penetrating_step():
    spec, _, out = wipe()
    p = spec.params
    first = next(k for k in range(p["descend_steps"] + 1) if p["start_gap"] - k * p["descend_step"] < -1e-12)
    assert out.detection_step == len(spec.schedule) + first
    assert out.success


def test_wipe_palm_channels_sum_to_applied_load():
    spec, _, out = wipe()
    palm = out.details["palm_after_detection"]
    table = spec.objects[0]
    depth = -(spec.params["start_gap"] - (out.detection_step - len(spec.schedule)) * spec.params["descend_step"])
    assert palm["applied_N"] == pytest.approx(table["stiffness"] * depth, rel=1e-6)
    assert palm["sum_N"] == pytest.approx(palm["applied_N"], rel=1e-9)


def test_wipe_far_table_not_detected():
    _, _, out = wipe(start_gap=0.05, descend_steps=5)
    assert not out.success
    assert out.detection_step is None
    assert out.failure_mode == "not_detected"


def test_wipe_threshold_above_load_not_detected():
    _, _, out = wipe(threshold=1e3)
    assert out.detection_step is None


def lock(**kw):
    spec = load_builtin_scenario("lock_turn")
    hand, net = spec.load_models()
    knob = spec.build_objects()[0]
    mu = kw.pop("mu", None)
    if mu is not None:
        knob = replace(knob, mu=mu)
    p = dict(spec.params, **kw)
    return run_lock_turn(hand, net, knob, spec.schedule, rigidity=spec.rigidity, **p)


def test_lock_turn_outcomes():
    ok = lock()
    assert ok.success and ok.failure_mode == "none"
    assert ok.details["largest_torque_Nm"] == pytest.approx(0.3 + 0.2 * math.pi / 2, rel=1e-12)
    assert lock(torque=0.0).success
    slip = lock(mu=0.0)
    assert not slip.success and slip.failure_mode == "slip"
    assert slip.records[-1].failure_mode == "slip"


def test_lock_needs_a_hinge(hand_models):
    hand, net = hand_models
    spec = load_builtin_scenario("lock_turn")
    knob = replace(spec.build_objects()[0], support="free")
    with pytest.raises(InvalidModelError):
        run_lock_turn(hand, net, knob, spec.schedule)


def test_trace_columns_are_frozen(hand_models):
    hand, net = hand_models
    cols = columns(hand, net)
    assert cols[:2] == ["step", "case"]
    assert cols[2:10] == [f"cmd:{a}" for a in net.actuator_ids]
    assert cols[10:30] == [f"q:{d}" for d in hand.dof_names]
    assert cols[-4:] == ["load_N", "lateral_force_N", "closure_margin", "failure_mode"]
    assert [c for c in cols if c.startswith("cell:")] == [f"cell:{c.name}" for c in hand.loadcells]


def test_trace_angles_are_degrees_and_summary_is_versioned():
    spec = load_builtin_scenario("lever")
    hand, net = spec.load_models()
    out = run_scenario(spec, hand, net)
    rows = list(csv.DictReader(io.StringIO(trace_csv(out.records, hand, net))))
    assert len(rows) == len(out.records)
    last = out.records[-1]
    i = hand.dof_index("index.MP.abduction")
    assert float(rows[-1]["q:index.MP.abduction"]) == pytest.approx(math.degrees(last.q[i]), rel=1e-8)
    s = json.loads(summary_json(out))
    assert s["schema_version"] == 1 and s["kind"] == "lever" and s["success"] is True
    assert summary_json(out).endswith("\n")


def test_load_trace_stops_at_first_failing_level():
    spec = load_builtin_scenario("load_test")
    out = run_scenario(spec)
    ramp = [r for r in out.records if r.load_N]
    assert all(r.failure_mode == "none" for r in ramp[:-1])
    assert ramp[-1].failure_mode == "tension_capacity"
    assert ramp[-2].load_N <= out.max_load < ramp[-1].load_N
    assert np.all(np.diff([r.load_N for r in ramp]) == spec.params["ramp_step"])


def test_builtin_documents_validate():
    from springhand.scenarios import builtin_scenarios
    for name in builtin_scenarios():
        spec = load_builtin_scenario(name.removesuffix(".json"))
        doc = copy.deepcopy(spec.to_dict())
        assert scenario_from_document(doc, base_dir=spec.base_dir).kind == spec.kind

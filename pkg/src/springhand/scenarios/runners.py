"""The five experiment scenarios, run over the simulator core.

Every runner is a pure function of its inputs: no randomness, no shared
state, and each category/step warm-starts only from its own previous step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..equilibrium import SolverOptions, solve_equilibrium
from ..errors import ContactInfeasibleError, InvalidModelError
from ..grasp import grasp_quality, max_supported_load
from ..hand import FINGER_NAMES
from ..objects import RigidObject
from ..sensors import contact_event, loadcell_readout
from ..tendons import actuator_arm_matrix
from .spec import CategorySpec, ScenarioSpec
from .trace import ScenarioOutcome, TraceRecord

FLEXED_DEG = 30.0  # a required-flexed joint (or finger, summed) reaches this
EXTENDED_DEG = 10.0  # a required-extended joint stays within this
CONTACT_GAP = 1e-9  # m; contacts this close count for closure
F_SWITCH = 3.0  # N, lever switching force
KNOB_TORQUE = 0.3  # Nm, lock resisting torque


def _options(options) -> SolverOptions:
    return options if isinstance(options, SolverOptions) else SolverOptions.from_dict(options or {})


def _commands(setpoint: dict, rigidity: float, network) -> dict[str, float]:
    cmds = {}
    if network.rigidity_actuator:
        cmds[network.rigidity_actuator] = float(rigidity)
    cmds.update({k: float(v) for k, v in setpoint.items()})
    return cmds


def _record(step, cmds, res, hand, *, case="", failure=None, **scalars) -> TraceRecord:
    frame = loadcell_readout(res, hand, step)
    return TraceRecord(
        step=step, case=case, commands=dict(cmds), q=res.q.copy(),
        branch_tensions=dict(res.branch_tensions), loadcells=frame.to_dict(),
        failure_mode=res.failure_mode if failure is None else failure, **scalars,
    )


def _body(owner: str) -> str:
    return owner.split(".")[0]


def _touching(res):
    return [c for c in res.contacts if c.separation <= CONTACT_GAP]


def run_schedule(hand, network, schedule, objects, *, rigidity=0.0, options=None, q0=None, case="",
                 start_step=0):
    """Solve each setpoint in turn, warm-starting from the previous posture.

    Returns (records, results)."""
    opts = _options(options)
    records, results = [], []
    q = q0
    for k, sp in enumerate(schedule):
        cmds = _commands(sp, rigidity, network)
        res = solve_equilibrium(hand, network, cmds, objects, opts, q0=q)
        q = res.q
        records.append(_record(start_step + k, cmds, res, hand, case=case))
        results.append(res)
    return records, results


# -- grasp taxonomy ----------------------------------------------------------

@dataclass
class CategoryResult:
    category: str
    status: str  # "feasible" | "infeasible" | "untested"
    force_closure: bool | None = None
    closure_margin: float | None = None
    shape_ok: bool | None = None
    shape_violations: list[str] = field(default_factory=list)
    stray_contacts: list[str] = field(default_factory=list)
    touching: list[str] = field(default_factory=list)
    coupling: list[str] = field(default_factory=list)
    failure_mode: str = "none"

    def to_dict(self) -> dict:
        return dict(vars(self))


def _flexion_dofs(hand, finger: str) -> list[int]:
    return [i for i, d in enumerate(hand.dofs) if d.name.startswith(finger + ".") and d.axis_label == "flexion"]


def _expand(hand, names) -> list[int]:
    out = []
    for n in names:
        if n in FINGER_NAMES:
            out += _flexion_dofs(hand, n)
        else:
            out.append(hand.dof_index(n))
    return out


def shape_violations(hand, q, flexed, extended) -> list[str]:
    """Unmet hand-shape requirements. A finger name asks for its flexion
    angles to sum to FLEXED_DEG (flexed) or each stay within EXTENDED_DEG."""
    deg = np.degrees(q)
    out = []
    for n in flexed:
        idx = _expand(hand, [n])
        total = float(np.sum(deg[idx]))
        if total < FLEXED_DEG:
            out.append(f"{n} flexed {total:.1f} deg < {FLEXED_DEG:g}")
    for n in extended:
        for i in _expand(hand, [n]):
            if deg[i] > EXTENDED_DEG:
                out.append(f"{hand.dof_names[i]} at {deg[i]:.1f} deg > {EXTENDED_DEG:g}")
    return out


def coupling_diagnosis(hand, network, flexed, extended) -> list[str]:
    """Actuators that would have to flex a required-flexed DOF and a
    required-extended DOF at once (both carry a moment arm of the same sign)."""
    M = actuator_arm_matrix(network, hand)
    fl, ex = _expand(hand, flexed), _expand(hand, extended)
    out = []
    for a, row in zip(network.actuators, M):
        if a.mode != "length":
            continue
        hit_f = [i for i in fl if row[i] > 0]
        hit_e = [i for i in ex if row[i] > 0]
        if not hit_f or not hit_e:
            continue
        ff = sorted({hand.dof_names[i].split(".")[0] for i in hit_f})
        fe = sorted({hand.dof_names[i].split(".")[0] for i in hit_e})
        if set(ff) & set(fe):
            why = "one flexor per finger"
        else:
            why = "fingers joined at a ring connector"
        out.append(f"{a.id} drives {hand.dof_names[hit_f[0]]} (flexed) and "
                   f"{hand.dof_names[hit_e[0]]} (extended): {why}")
    return out


def run_category(hand, network, cat: CategorySpec, *, rigidity=0.0, options=None):
    """Feasible iff the final equilibrium is force closed, touches only the
    participating bodies and meets the hand-shape requirements."""
    if not cat.schedule:
        return CategoryResult(cat.category, "untested"), [], []
    objects = [RigidObject.from_dict(d) for d in cat.objects]
    records, results = run_schedule(hand, network, cat.schedule, objects, rigidity=rigidity,
                                    options=options, case=cat.category)
    res = results[-1]
    touch = _touching(res)
    bodies = sorted({_body(c.owner) for c in touch})
    allowed = set(cat.participants) if cat.participants else set(bodies)
    stray = sorted(b for b in bodies if b not in allowed)
    if touch:
        gq = grasp_quality(touch, n_edges=_options(options).cone_edges)
        closure, margin = gq.force_closure, float(gq.margin)
    else:
        closure, margin = False, None
    viol = shape_violations(hand, res.q, cat.flexed, cat.extended)
    ok = closure and not stray and not viol
    out = CategoryResult(
        category=cat.category, status="feasible" if ok else "infeasible", force_closure=closure,
        closure_margin=margin, shape_ok=not viol, shape_violations=viol, stray_contacts=stray,
        touching=bodies, failure_mode=res.failure_mode,
    )
    if viol:
        out.coupling = coupling_diagnosis(hand, network, cat.flexed, cat.extended)
    records[-1].closure_margin = margin
    return out, records, results


def run_grasp_taxonomy(hand, network, suite, *, rigidity=0.0, options=None, name="taxonomy") -> ScenarioOutcome:
    names = [c.category for c in suite]
    if len(set(names)) != len(names):
        raise InvalidModelError("taxonomy categories must be distinct", where="suite")
    table, records, scenes = [], [], []
    # categories are independent and reported in name order, so the table
    # does not depend on the order of the suite
    for cat in sorted(suite, key=lambda c: c.category):
        row, recs, results = run_category(hand, network, cat, rigidity=rigidity, options=options)
        table.append(row)
        objects = [RigidObject.from_dict(d) for d in cat.objects]
        for r, res in zip(recs, results):
            r.step = len(records)
            records.append(r)
            scenes.append((r.step, cat.category, res, objects))
    tested = [r for r in table if r.status != "untested"]
    return ScenarioOutcome(
        kind="taxonomy", name=name, records=records, success=bool(tested),
        failure_mode="none", details={"table": [r.to_dict() for r in table]}, scenes=scenes,
    )


# -- load test ---------------------------------------------------------------

def run_load_test(hand, network, objects, schedule, *, object_name=None, direction=(0.0, 0.0, 1.0),
                  rigidity=0.0, options=None, ramp_step=50.0, resolution=1.0, limit=5000.0,
                  name="load_test") -> ScenarioOutcome:
    """Grasp by the schedule, then pull the object along ``direction``.

    The trace holds the grasp steps (load 0) and then a load ramp in
    ``ramp_step`` increments up to the first failing level."""
    opts = _options(options)
    objects = list(objects)
    target = object_name or objects[0].name
    records, results = run_schedule(hand, network, schedule, objects, rigidity=rigidity, options=opts)
    for r in records:
        r.load_N = 0.0
    scenes = [(r.step, "", res, objects) for r, res in zip(records, results)]
    cmds = _commands(schedule[-1], rigidity, network)
    lr = max_supported_load(hand, network, cmds, objects, target, direction, step=ramp_step,
                            limit=limit, resolution=resolution, options=opts)
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    k = [o.name for o in objects].index(target)
    load, q = ramp_step, results[-1].q
    while True:
        objs = list(objects)
        objs[k] = replace(objs[k], external_wrench=objs[k].external_wrench + np.concatenate([load * d, np.zeros(3)]))
        res = solve_equilibrium(hand, network, cmds, objs, opts, q0=q)
        q = res.q
        step = len(records)
        failed = not (res.held and res.failure_mode not in ("tension_capacity", "slip"))
        records.append(_record(step, cmds, res, hand, load_N=load,
                               failure=res.failure_mode if failed else "none"))
        scenes.append((step, "", res, objs))
        if failed or load >= limit or load > lr.max_load:
            break
        load += ramp_step
    return ScenarioOutcome(
        kind="load_test", name=name, records=records, success=lr.max_load > 0, max_load=lr.max_load,
        failure_mode=lr.failure_mode,
        details={"direction": d.tolist(), "object": target,
                 "levels": [{"load_N": a, "held": b, "failure_mode": c} for a, b, c, _ in lr.levels]},
        scenes=scenes,
    )


# -- lever -------------------------------------------------------------------

def run_lever_test(hand, network, lever, schedule, *, rigidity=0.0, f_switch=F_SWITCH,
                   sweep=(0.0, -0.0002, 0.0), steps=60, dof="index.MP.abduction",
                   match_deflection_deg=5.0, options=None, name="lever") -> ScenarioOutcome:
    """Push a fixed pin into the side of the index finger in ``steps``
    increments of ``sweep`` (m). Success iff the side force reaches
    ``f_switch`` before the abduction DOF reaches its range of motion."""
    opts = _options(options)
    i = hand.dof_index(dof)
    records, results = run_schedule(hand, network, schedule, [lever], rigidity=rigidity, options=opts)
    scenes = []
    for r, res in zip(records, results):
        r.lateral_force_N = _side_force(res, lever.name)
        scenes.append((r.step, "", res, [lever]))
    cmds = _commands(schedule[-1], rigidity, network)
    q, rest = results[-1].q, hand.rest[i]
    success, failure, curve = False, "none", [(abs(math.degrees(q[i] - rest)), records[-1].lateral_force_N)]
    shift = np.asarray(sweep, dtype=float)
    for k in range(1, steps + 1):
        pin = lever.moved(k * shift)
        try:
            res = solve_equilibrium(hand, network, cmds, [pin], opts, q0=q)
        except ContactInfeasibleError:
            failure = "rom_limit"  # the pin cannot pass the finger at its stop
            break
        q = res.q
        force = _side_force(res, lever.name)
        at_stop = q[i] <= hand.rom_lower[i] + 1e-9 or q[i] >= hand.rom_upper[i] - 1e-9
        step = len(records)
        records.append(_record(step, cmds, res, hand, lateral_force_N=force,
                               failure="rom_limit" if at_stop and force < f_switch else res.failure_mode))
        scenes.append((step, "", res, [pin]))
        curve.append((abs(math.degrees(q[i] - rest)), force))
        if force >= f_switch:
            success = True
            break
        if at_stop:
            failure = "rom_limit"
            break
    else:
        failure = "rom_limit" if not success else "none"
    defl = np.array([c[0] for c in curve])
    force = np.array([c[1] for c in curve])
    matched = None
    if defl.size > 1 and defl.max() >= match_deflection_deg:
        matched = float(np.interp(match_deflection_deg, defl, force))
    return ScenarioOutcome(
        kind="lever", name=name, records=records, success=success,
        failure_mode="none" if success else failure,
        details={"rigidity_N": rigidity, "f_switch_N": f_switch,
                 "peak_force_N": float(force.max(initial=0.0)),
                 "match_deflection_deg": match_deflection_deg, "force_at_match_N": matched},
        scenes=scenes,
    )


def _side_force(res, obj_name) -> float:
    return float(math.fsum(c.normal_force for c in res.contacts if c.object == obj_name))


# -- lock turn ---------------------------------------------------------------

def run_lock_turn(hand, network, knob, schedule, *, rigidity=0.0, torque=KNOB_TORQUE, lock_stiffness=0.0,
                  sweep_deg=90.0, steps=6, options=None, name="lock_turn") -> ScenarioOutcome:
    """Pinch the hinged knob by the schedule, then turn the forearm through
    ``sweep_deg`` in ``steps``. The hand turns with the knob, so in the palm
    frame only the resisting torque changes: ``torque + lock_stiffness *
    angle`` about the knob axis, opposing the turn. Success iff the knob is
    held at every step."""
    if knob.support != "hinge":
        raise InvalidModelError("the knob must have a hinge support", where=knob.name)
    opts = _options(options)
    records, results = run_schedule(hand, network, schedule, [knob], rigidity=rigidity, options=opts)
    scenes = [(r.step, "", res, [knob]) for r, res in zip(records, results)]
    cmds = _commands(schedule[-1], rigidity, network)
    q = results[-1].q
    held_all, worst = True, 0.0
    for k in range(steps + 1):
        psi = math.radians(sweep_deg) * k / steps
        tau = torque + lock_stiffness * psi
        w = knob.external_wrench.copy()
        w[3:] -= tau * knob.axis
        turned = replace(knob, external_wrench=w)
        res = solve_equilibrium(hand, network, cmds, [turned], opts, q0=q)
        q = res.q
        step = len(records)
        records.append(_record(step, cmds, res, hand, load_N=tau, failure="none" if res.held else "slip"))
        scenes.append((step, "", res, [turned]))
        worst = max(worst, tau)
        if not res.held:
            held_all = False
            break
    return ScenarioOutcome(
        kind="lock_turn", name=name, records=records, success=held_all,
        failure_mode="none" if held_all else "slip",
        details={"rigidity_N": rigidity, "resisting_torque_Nm": torque, "lock_stiffness_Nm_per_rad": lock_stiffness,
                 "sweep_deg": sweep_deg, "largest_torque_Nm": worst},
        scenes=scenes,
    )


# -- wiping ------------------------------------------------------------------

def run_wipe_contact(hand, network, table, schedule, *, start_gap=0.01, descend_step=0.001, descend_steps=15,
                     sweep_step=0.01, sweep_steps=3, threshold=1.0, rigidity=0.0, options=None,
                     name="wipe_contact") -> ScenarioOutcome:
    """Lower the open hand toward a sprung table until a loadcell reads
    ``threshold``, then sweep along the table at that depth.

    ``table`` is a slider whose axis is its surface normal; it is placed so
    that its top face starts ``start_gap`` below the palm surface. The hand
    holds the last setpoint of the schedule throughout (the thumb opposition
    command should leave the opposition DOF at full extension)."""
    if table.support != "slider":
        raise InvalidModelError("the table must have a slider support", where=table.name)
    opts = _options(options)
    axis = table.axis
    records, results = run_schedule(hand, network, schedule, [], rigidity=rigidity, options=opts)
    scenes = [(r.step, "", res, []) for r, res in zip(records, results)]
    cmds = _commands(schedule[-1], rigidity, network)
    q = results[-1].q
    top0 = _palm_height(hand, axis)
    half = _half_depth(table, axis)
    detected_at, gap = None, start_gap
    for k in range(descend_steps + 1):
        gap = start_gap - k * descend_step
        res, q, placed = _table_step(hand, network, cmds, table, axis, top0 + gap + half, np.zeros(3), opts, q)
        step = len(records)
        frame = loadcell_readout(res, hand, step)
        ev = contact_event(frame, threshold)
        rec = _record(step, cmds, res, hand, load_N=_table_load(res, table, placed))
        records.append(rec)
        scenes.append((step, "", res, [placed]))
        if ev.detected:
            detected_at = step
            break
    palm = None
    if detected_at is not None:
        along = _sweep_dir(axis)
        for k in range(1, sweep_steps + 1):
            res, q, placed = _table_step(hand, network, cmds, table, axis, top0 + gap + half,
                                         k * sweep_step * along, opts, q)
            step = len(records)
            records.append(_record(step, cmds, res, hand, load_N=_table_load(res, table, placed)))
            scenes.append((step, "", res, [placed]))
        cells = {c.name: records[-1].loadcells[c.name] for c in hand.loadcells if c.kind == "palm"}
        palm = {"channels_N": cells, "sum_N": math.fsum(cells.values()), "applied_N": records[-1].load_N}
    return ScenarioOutcome(
        kind="wipe_contact", name=name, records=records, success=detected_at is not None,
        detection_step=detected_at, failure_mode="none" if detected_at is not None else "not_detected",
        details={"threshold_N": threshold, "palm_after_detection": palm}, scenes=scenes,
    )


def _palm_height(hand, axis) -> float:
    s = hand.palm.samples
    return float(np.max(s @ axis)) if len(s) else 0.0


def _half_depth(table, axis) -> float:
    if table.shape == "box":
        local = table.rotation.T @ axis
        return 0.5 * float(np.abs(local) @ np.asarray(table.extents))
    return table.radius


def _sweep_dir(axis) -> np.ndarray:
    t = np.cross(axis, [0.0, 1.0, 0.0])
    if np.linalg.norm(t) < 1e-9:
        t = np.cross(axis, [1.0, 0.0, 0.0])
    t = t / np.linalg.norm(t)
    return t if t[0] >= 0 else -t


def _table_step(hand, network, cmds, table, axis, centre_height, along, opts, q):
    pos = table.position - (table.position @ axis) * axis + centre_height * axis + along
    placed = replace(table, position=pos)
    res = solve_equilibrium(hand, network, cmds, [placed], opts, q0=q)
    return res, res.q, placed


def _table_load(res, table, placed) -> float:
    """Normal load the table applies: its spring force plus any axial load."""
    u = res.object_offsets.get(table.name, 0.0)
    return float(table.stiffness * u + table.external_wrench[:3] @ table.axis)


# -- dispatcher --------------------------------------------------------------

def run_scenario(spec: ScenarioSpec, hand=None, network=None) -> ScenarioOutcome:
    if hand is None or network is None:
        hand, network = spec.load_models()
    p = spec.params
    opts = _options(spec.options)
    if spec.kind == "taxonomy":
        return run_grasp_taxonomy(hand, network, spec.suite, rigidity=spec.rigidity, options=opts,
                                  name=spec.name or "taxonomy")
    objects = spec.build_objects()
    if spec.kind == "load_test":
        return run_load_test(hand, network, objects, spec.schedule, object_name=p.get("object"),
                             direction=p.get("direction", (0.0, 0.0, 1.0)), rigidity=spec.rigidity,
                             options=opts, ramp_step=p.get("ramp_step", 50.0),
                             resolution=p.get("resolution", 1.0), limit=p.get("limit", 5000.0),
                             name=spec.name or "load_test")
    if not objects:
        raise InvalidModelError(f"a {spec.kind} scenario needs an object", where="ScenarioSpec.objects")
    if spec.kind == "lever":
        return run_lever_test(hand, network, objects[0], spec.schedule, rigidity=spec.rigidity,
                              f_switch=p.get("f_switch", F_SWITCH), sweep=p.get("sweep", (0.0, -0.0002, 0.0)),
                              steps=int(p.get("steps", 60)), dof=p.get("dof", "index.MP.abduction"),
                              match_deflection_deg=p.get("match_deflection_deg", 5.0), options=opts,
                              name=spec.name or "lever")
    if spec.kind == "lock_turn":
        return run_lock_turn(hand, network, objects[0], spec.schedule, rigidity=spec.rigidity,
                             torque=p.get("torque", KNOB_TORQUE), lock_stiffness=p.get("lock_stiffness", 0.0),
                             sweep_deg=p.get("sweep_deg", 90.0), steps=int(p.get("steps", 6)), options=opts,
                             name=spec.name or "lock_turn")
    return run_wipe_contact(hand, network, objects[0], spec.schedule, start_gap=p.get("start_gap", 0.01),
                            descend_step=p.get("descend_step", 0.001),
                            descend_steps=int(p.get("descend_steps", 15)),
                            sweep_step=p.get("sweep_step", 0.01), sweep_steps=int(p.get("sweep_steps", 3)),
                            threshold=p.get("threshold", 1.0), rigidity=spec.rigidity, options=opts,
                            name=spec.name or "wipe_contact")

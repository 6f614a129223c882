"""Default hand description.

Spring constants are the design compliances of the machined springs. Link
lengths, loadcell coordinates, moment arms and branch angles are chosen to
be human-sized; every one of them is a field of the hand-description
document and can be overridden there.
"""
from __future__ import annotations

import copy

SCHEMA_VERSION = 1

SPRINGS = {
    # deg/Nm
    "thumb_cm_pair": 903.0,  # the two parallel CM springs, as a pair
    "thumb_cm_third": 443.0,
    "thumb_mp": 443.0,
    "thumb_ip": 443.0,
    "finger_mp": 664.0,
    "finger_pip": 863.0,
    "finger_dip": 443.0,
}

PAD = 0.008  # half thickness of a phalanx (pad offset), m
SIDE = 0.008  # half width of a phalanx, m
PALM_PAD = 0.012  # palmar surface height of the palm sponge, m

FINGERS = {
    # base (x, y) on the MP line and proximal/middle/distal lengths, m
    "index": ((0.094, 0.027), (0.042, 0.025, 0.020)),
    "middle": ((0.096, 0.009), (0.046, 0.028, 0.021)),
    "ring": ((0.092, -0.009), (0.043, 0.027, 0.020)),
    "little": ((0.085, -0.027), (0.034, 0.020, 0.018)),
}
THUMB_BASE = (0.025, 0.035, 0.0)
THUMB_YAW_DEG = 45.0
THUMB_LINKS = (0.045, 0.032, 0.027)

ARM = {"mp": 0.008, "pip": 0.006, "dip": 0.005, "abduction": 0.004, "opposition": 0.010}
KNOT_HALF_ANGLE_DEG = 60.0
INTEROSSEI_FREE_SPAN = 0.025
TENSION_CAPACITY = 600.0


def _r(x):
    return round(x, 9)


def link_samples(length: float, distal: bool) -> list[list[float]]:
    pts = [[_r(f * length), 0.0, PAD] for f in (0.1, 0.3, 0.5, 0.7, 0.9)]
    for f in (0.3, 0.7):
        pts.append([_r(f * length), SIDE, 0.0])
        pts.append([_r(f * length), -SIDE, 0.0])
    if distal:
        pts.append([length, 0.0, 0.004])
    return pts


def _link(length, distal=False):
    return {"length": length, "samples": link_samples(length, distal)}


def _dof(name, label, axis, spring, rom_deg, rest_deg=0.0):
    return {"name": name, "axis_label": label, "axis": axis, "spring": spring,
            "rest_deg": rest_deg, "rom_deg": list(rom_deg)}


FLEX_AXIS = [0.0, -1.0, 0.0]
ABD_AXIS = [0.0, 0.0, 1.0]


def five_finger_document(*, tension_capacity: float = TENSION_CAPACITY, cm_pair: str = "combined") -> dict:
    """Hand-description document of the five-fingered hand.

    ``cm_pair`` selects how the thumb-CM "parallel two springs" constant is
    read: ``"combined"`` (the value is the pair's compliance) or
    ``"per_spring"`` (each of the two springs has that compliance).
    """
    springs = dict(SPRINGS)
    if cm_pair == "combined":
        opposition_spring = {"series": ["thumb_cm_pair", "thumb_cm_third"]}
    elif cm_pair == "per_spring":
        springs.pop("thumb_cm_pair")
        springs["thumb_cm_pair_a"] = SPRINGS["thumb_cm_pair"]
        springs["thumb_cm_pair_b"] = SPRINGS["thumb_cm_pair"]
        opposition_spring = {"series": [{"parallel": ["thumb_cm_pair_a", "thumb_cm_pair_b"]}, "thumb_cm_third"]}
    else:
        raise ValueError(f"unknown cm_pair reading {cm_pair!r}")

    joints = {
        "thumb.CM": [
            _dof("thumb.CM.opposition", "opposition", [0.7071067811865476, -0.7071067811865476, 0.0],
                 opposition_spring, (0.0, 120.0)),
            _dof("thumb.CM.abduction", "abduction", ABD_AXIS, "thumb_cm_third", (-30.0, 30.0)),
        ],
        "thumb.MP": [_dof("thumb.MP.flexion", "flexion", FLEX_AXIS, "thumb_mp", (0.0, 100.0))],
        "thumb.IP": [_dof("thumb.IP.flexion", "flexion", FLEX_AXIS, "thumb_ip", (0.0, 100.0))],
    }
    chains = [{
        "name": "thumb",
        "base_position": list(THUMB_BASE),
        "base_rotation_deg": [THUMB_YAW_DEG, 0.0, 0.0],
        "segments": [
            {"joint": "thumb.CM", "link": _link(THUMB_LINKS[0])},
            {"joint": "thumb.MP", "link": _link(THUMB_LINKS[1])},
            {"joint": "thumb.IP", "link": _link(THUMB_LINKS[2], distal=True)},
        ],
    }]
    for f, ((bx, by), (l1, l2, l3)) in FINGERS.items():
        joints[f"{f}.MP"] = [
            _dof(f"{f}.MP.abduction", "abduction", ABD_AXIS, "finger_mp", (-15.0, 15.0)),
            _dof(f"{f}.MP.flexion", "flexion", FLEX_AXIS, "finger_mp", (0.0, 100.0)),
        ]
        joints[f"{f}.PIP"] = [_dof(f"{f}.PIP.flexion", "flexion", FLEX_AXIS, "finger_pip", (0.0, 100.0))]
        joints[f"{f}.DIP"] = [_dof(f"{f}.DIP.flexion", "flexion", FLEX_AXIS, "finger_dip", (0.0, 100.0))]
        chains.append({
            "name": f,
            "base_position": [bx, by, 0.0],
            "base_rotation_deg": [0.0, 0.0, 0.0],
            "segments": [
                {"joint": f"{f}.MP", "link": _link(l1)},
                {"joint": f"{f}.PIP", "link": _link(l2)},
                {"joint": f"{f}.DIP", "link": _link(l3, distal=True)},
            ],
        })

    palm_samples = [[x, y, PALM_PAD] for x in (0.015, 0.03, 0.045, 0.06, 0.075)
                    for y in (-0.027, -0.009, 0.009, 0.027)]
    loadcells = [
        {"name": "palm1", "kind": "palm", "owner": "palm", "position": [0.065, 0.018, PALM_PAD]},
        {"name": "palm2", "kind": "palm", "owner": "palm", "position": [0.065, -0.018, PALM_PAD]},
        {"name": "palm3", "kind": "palm", "owner": "palm", "position": [0.030, 0.018, PALM_PAD]},
        {"name": "palm4", "kind": "palm", "owner": "palm", "position": [0.030, -0.018, PALM_PAD]},
    ]
    distal = {"thumb": THUMB_LINKS[2], **{f: v[1][2] for f, v in FINGERS.items()}}
    for f in ("thumb", "index", "middle", "ring", "little"):
        loadcells.append({"name": f"{f}tip", "kind": "fingertip", "owner": f,
                          "position": [_r(0.7 * distal[f]), 0.0, PAD]})

    cap = tension_capacity
    actuators = [
        {"id": "thumb_flexor", "role": "hand", "mode": "length", "tension_capacity": cap, "excursion_limits": [-0.01, 0.08]},
        {"id": "thumb_opposition", "role": "hand", "mode": "length", "tension_capacity": cap, "excursion_limits": [-0.01, 0.08]},
        {"id": "index_middle_flexor", "role": "hand", "mode": "length", "tension_capacity": cap, "excursion_limits": [-0.01, 0.08]},
        {"id": "ring_little_flexor", "role": "hand", "mode": "length", "tension_capacity": cap, "excursion_limits": [-0.01, 0.08]},
        {"id": "rigidity", "role": "hand", "mode": "tension", "tension_capacity": cap, "excursion_limits": [-0.01, 0.01]},
        {"id": "wrist_1", "role": "wrist", "mode": "tension", "tension_capacity": cap, "excursion_limits": [-0.02, 0.02]},
        {"id": "wrist_2", "role": "wrist", "mode": "tension", "tension_capacity": cap, "excursion_limits": [-0.02, 0.02]},
        {"id": "wrist_3", "role": "wrist", "mode": "tension", "tension_capacity": cap, "excursion_limits": [-0.02, 0.02]},
    ]
    paths = [
        {"id": "thumb_flex", "actuator": "thumb_flexor", "anchor": "thumb distal phalanx",
         "segments": [["thumb.MP.flexion", ARM["mp"]], ["thumb.IP.flexion", ARM["dip"]]]},
        {"id": "thumb_opp", "actuator": "thumb_opposition", "anchor": "thumb metacarpal",
         "segments": [["thumb.CM.opposition", ARM["opposition"]], ["thumb.CM.abduction", -ARM["abduction"]]]},
    ]
    for f, act in (("index", "index_middle_flexor"), ("middle", "index_middle_flexor"),
                   ("ring", "ring_little_flexor"), ("little", "ring_little_flexor")):
        paths.append({"id": f"{f}_flex", "actuator": act, "anchor": f"{f} distal phalanx",
                      "segments": [[f"{f}.MP.flexion", ARM["mp"]], [f"{f}.PIP.flexion", ARM["pip"]],
                                   [f"{f}.DIP.flexion", ARM["dip"]]]})
    for f in ("index", "middle", "ring", "little"):
        for side, sign in (("palmar", 1.0), ("dorsal", -1.0)):
            paths.append({"id": f"{f}_{side}", "actuator": "rigidity", "anchor": f"{f} proximal phalanx",
                          "segments": [[f"{f}.MP.abduction", sign * ARM["abduction"], INTEROSSEI_FREE_SPAN]]})
    a = KNOT_HALF_ANGLE_DEG
    junctions = [
        {"id": "ring_index_middle", "kind": "ring", "parent": "index_middle_flexor", "children": ["index_flex", "middle_flex"]},
        {"id": "ring_ring_little", "kind": "ring", "parent": "ring_little_flexor", "children": ["ring_flex", "little_flex"]},
        {"id": "rigidity_back", "kind": "ring", "parent": "rigidity", "children": ["rigidity_radial", "rigidity_ulnar"]},
        {"id": "rigidity_radial", "kind": "ring", "parent": "rigidity_back", "children": ["knot_index", "knot_middle"]},
        {"id": "rigidity_ulnar", "kind": "ring", "parent": "rigidity_back", "children": ["knot_ring", "knot_little"]},
    ]
    for f, parent in (("index", "rigidity_radial"), ("middle", "rigidity_radial"),
                      ("ring", "rigidity_ulnar"), ("little", "rigidity_ulnar")):
        junctions.append({"id": f"knot_{f}", "kind": "knot", "parent": parent,
                          "children": [f"{f}_palmar", f"{f}_dorsal"], "branch_angles_deg": [a, -a]})

    return copy.deepcopy({
        "schema_version": SCHEMA_VERSION,
        "name": "five-finger machined-spring hand",
        "layout": "five_finger",
        "units_mode": "compliance",
        "springs": springs,
        "joints": joints,
        "chains": chains,
        "palm": {
            "samples": palm_samples,
            "outline": [[0.0, -0.04], [0.09, -0.04], [0.098, 0.04], [0.0, 0.045]],
        },
        "loadcells": loadcells,
        "tendons": {
            "actuators": actuators,
            "paths": paths,
            "junctions": junctions,
            "rigidity_actuator": "rigidity",
        },
    })


def planar_finger_document(lengths, compliances, arms, *, rom_deg=(-180.0, 180.0), samples=None,
                           mode: str = "tension", tension_capacity: float = 1e6) -> dict:
    """A single planar finger (flexion DOFs about -y, moving in the x-z
    plane) driven by one tendon, on a bare palm. ``samples`` gives per-link
    sample points; by default only the fingertip is sampled."""
    n = len(lengths)
    if not (len(compliances) == n and len(arms) == n):
        raise ValueError("lengths, compliances and arms must have equal length")
    springs = {f"s{i}": float(c) for i, c in enumerate(compliances)}
    joints = {f"f.J{i}": [_dof(f"f.J{i}.flexion", "flexion", FLEX_AXIS, f"s{i}", rom_deg)] for i in range(n)}
    segs = []
    for i, L in enumerate(lengths):
        pts = [] if samples is None else samples[i]
        if samples is None and i == n - 1:
            pts = [[float(L), 0.0, 0.0]]
        segs.append({"joint": f"f.J{i}", "link": {"length": float(L), "samples": pts}})
    return {
        "schema_version": SCHEMA_VERSION,
        "name": "planar finger",
        "layout": "custom",
        "units_mode": "compliance",
        "springs": springs,
        "joints": joints,
        "chains": [{"name": "f", "base_position": [0.0, 0.0, 0.0], "base_rotation_deg": [0.0, 0.0, 0.0],
                    "segments": segs}],
        "palm": {"samples": []},
        "loadcells": [],
        "tendons": {
            "actuators": [{"id": "flexor", "mode": mode, "tension_capacity": tension_capacity,
                           "excursion_limits": [-1.0, 1.0]}],
            "paths": [{"id": "flexor_path", "actuator": "flexor",
                       "segments": [[f"f.J{i}.flexion", float(a)] for i, a in enumerate(arms) if a != 0]}],
            "junctions": [],
            "rigidity_actuator": None,
        },
    }

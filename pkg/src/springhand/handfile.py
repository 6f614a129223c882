"""Reading and writing hand-description files (UTF-8 JSON).

Compliances are in deg/Nm, lengths in metres and angles in degrees; angles
are converted to radians on load.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .errors import InvalidModelError, SchemaError
from .hand import DOF, FingerChain, HandModel, JointSpec, Link, Loadcell, Palm
from .kinematics import euler_zyx_deg
from .springs import SpringElement, arrangement_from_data, arrangement_to_data, leaves
from .tendons import (
    Actuator,
    BranchJunction,
    Segment,
    TendonNetwork,
    TendonPath,
    validate_network,
)

SUPPORTED_VERSIONS = (1,)

_vec3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_points = {"type": "array", "items": _vec3}

HAND_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "springs", "joints", "chains", "loadcells", "palm"],
    "properties": {
        "schema_version": {"type": "integer"},
        "name": {"type": "string"},
        "layout": {"enum": ["five_finger", "custom"]},
        "units_mode": {"enum": ["compliance", "stiffness"]},
        "springs": {"type": "object", "additionalProperties": {"type": "number"}},
        "joints": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "required": ["name", "axis_label", "axis", "spring", "rom_deg"],
                    "properties": {
                        "name": {"type": "string"},
                        "axis_label": {"type": "string"},
                        "axis": _vec3,
                        "spring": {"type": ["string", "object"]},
                        "rest_deg": {"type": "number"},
                        "rom_deg": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                    },
                },
            },
        },
        "chains": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "base_position", "segments"],
                "properties": {
                    "name": {"type": "string"},
                    "base_position": _vec3,
                    "base_rotation_deg": _vec3,
                    "base_rotation": {"type": "array", "items": _vec3, "minItems": 3, "maxItems": 3},
                    "segments": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["joint", "link"],
                            "properties": {
                                "joint": {"type": "string"},
                                "link": {
                                    "type": "object",
                                    "required": ["length"],
                                    "properties": {"length": {"type": "number"}, "samples": _points},
                                },
                            },
                        },
                    },
                },
            },
        },
        "palm": {
            "type": "object",
            "required": ["samples"],
            "properties": {"samples": _points, "outline": {"type": "array"}},
        },
        "loadcells": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "kind", "owner", "position"],
                "properties": {
                    "name": {"type": "string"},
                    "kind": {"enum": ["palm", "fingertip"]},
                    "owner": {"type": "string"},
                    "position": _vec3,
                },
            },
        },
        "tendons": {
            "type": "object",
            "required": ["actuators", "paths"],
            "properties": {
                "actuators": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id"],
                        "properties": {
                            "id": {"type": "string"},
                            "role": {"enum": ["hand", "wrist"]},
                            "mode": {"enum": ["length", "tension"]},
                            "tension_capacity": {"type": "number"},
                            "excursion_limits": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                        },
                    },
                },
                "paths": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "actuator", "segments"],
                        "properties": {
                            "segments": {
                                "type": "array",
                                "items": {"type": "array", "minItems": 2, "maxItems": 3},
                            }
                        },
                    },
                },
                "junctions": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "kind", "parent", "children"],
                        "properties": {
                            "kind": {"enum": ["ring", "knot"]},
                            "children": {"type": "array", "items": {"type": "string"}},
                            "branch_angles_deg": {"type": "array", "items": {"type": "number"}},
                        },
                    },
                },
                "rigidity_actuator": {"type": ["string", "null"]},
            },
        },
    },
}


_VALIDATOR = jsonschema.Draft202012Validator(HAND_SCHEMA)


def _deg(x):
    return math.radians(float(x))


def _to_deg(x):
    return round(math.degrees(x), 10)


def check_schema(doc: dict) -> None:
    if not isinstance(doc, dict):
        raise SchemaError("hand description must be a JSON object")
    version = doc.get("schema_version")
    if version is not None and version not in SUPPORTED_VERSIONS:
        raise SchemaError(f"unsupported schema_version {version!r}; supported: {SUPPORTED_VERSIONS}")
    exc = jsonschema.exceptions.best_match(_VALIDATOR.iter_errors(doc))
    if exc is not None:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"field {where}: {exc.message}")


def hand_from_document(doc: dict) -> HandModel:
    check_schema(doc)
    mode = doc.get("units_mode", "compliance")
    springs = {}
    for name, value in doc["springs"].items():
        value = float(value)
        if mode == "stiffness":
            # the value is read as Nm/deg
            if not value > 0:
                raise InvalidModelError(f"stiffness must be > 0, got {value!r}", where=f"spring {name!r}")
            value = 1.0 / value
        springs[name] = SpringElement(name, value)

    joints = {}
    for jname, dofs in doc["joints"].items():
        built = []
        for d in dofs:
            try:
                arrangement = arrangement_from_data(d["spring"], springs)
            except InvalidModelError as exc:
                raise InvalidModelError(str(exc), where=f"DOF {d['name']!r}") from None
            lo, hi = d["rom_deg"]
            built.append(DOF(
                name=d["name"],
                axis_label=d["axis_label"],
                axis=np.array(d["axis"], dtype=float),
                arrangement=arrangement,
                rest_angle=_deg(d.get("rest_deg", 0.0)),
                rom=(_deg(lo), _deg(hi)),
            ))
        joints[jname] = JointSpec(jname, tuple(built))

    chains = []
    for c in doc["chains"]:
        if "base_rotation" in c:
            R = np.array(c["base_rotation"], dtype=float)
        else:
            R = euler_zyx_deg(*c.get("base_rotation_deg", (0.0, 0.0, 0.0)))
        js, ls = [], []
        for seg in c["segments"]:
            if seg["joint"] not in joints:
                raise InvalidModelError(f"unknown joint {seg['joint']!r}", where=f"chain {c['name']!r}")
            js.append(joints[seg["joint"]])
            try:
                ls.append(Link(float(seg["link"]["length"]), np.array(seg["link"].get("samples", []), dtype=float)))
            except InvalidModelError as exc:
                raise InvalidModelError(str(exc), where=f"chain {c['name']!r} link after {seg['joint']!r}") from None
        chains.append(FingerChain(c["name"], np.array(c["base_position"], dtype=float), R, tuple(js), tuple(ls)))

    palm = Palm(
        samples=np.array(doc["palm"]["samples"], dtype=float),
        outline=np.array(doc["palm"].get("outline", []), dtype=float),
    )
    cells = tuple(Loadcell(l["name"], l["kind"], l["owner"], np.array(l["position"], dtype=float))
                  for l in doc["loadcells"])
    return HandModel(tuple(chains), palm, cells, layout=doc.get("layout", "five_finger"))


def network_from_document(doc: dict) -> TendonNetwork:
    t = doc.get("tendons")
    if t is None:
        raise SchemaError("field tendons: missing")
    actuators = tuple(
        Actuator(
            id=a["id"],
            role=a.get("role", "hand"),
            mode=a.get("mode", "tension"),
            tension_capacity=float(a.get("tension_capacity", 600.0)),
            excursion_limits=tuple(float(v) for v in a.get("excursion_limits", (-0.05, 0.05))),
        )
        for a in t["actuators"]
    )
    paths = tuple(
        TendonPath(
            id=p["id"],
            actuator=p["actuator"],
            segments=tuple(Segment(s[0], float(s[1]), float(s[2]) if len(s) > 2 and s[2] is not None else None)
                           for s in p["segments"]),
            anchor=p.get("anchor", ""),
        )
        for p in t["paths"]
    )
    junctions = tuple(
        BranchJunction(
            id=j["id"],
            kind=j["kind"],
            parent=j["parent"],
            children=tuple(j["children"]),
            branch_angles=tuple(_deg(a) for a in j.get("branch_angles_deg", ())),
        )
        for j in t.get("junctions", ())
    )
    return TendonNetwork(actuators, paths, junctions, t.get("rigidity_actuator"))


def models_from_document(doc: dict) -> tuple[HandModel, TendonNetwork]:
    """Build and fully validate the hand and its tendon network."""
    hand = hand_from_document(doc)
    network = network_from_document(doc)
    report = validate_network(network, hand)
    if not report.ok:
        raise InvalidModelError("; ".join(report.errors), where="TendonNetwork")
    return hand, network


def read_json(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def load_hand_description(path) -> tuple[HandModel, TendonNetwork]:
    return models_from_document(read_json(path))


def document_from_models(hand: HandModel, network: TendonNetwork, name: str = "") -> dict:
    """Inverse of :func:`models_from_document` (compliance units, rotation matrices)."""
    springs = {}
    joints = {}
    chains = []
    for c in hand.chains:
        segs = []
        for j, l in zip(c.joints, c.links):
            dofs = []
            for d in j.dofs:
                for s in leaves(d.arrangement):
                    springs[s.name] = s.compliance
                dofs.append({
                    "name": d.name,
                    "axis_label": d.axis_label,
                    "axis": d.axis.tolist(),
                    "spring": arrangement_to_data(d.arrangement),
                    "rest_deg": _to_deg(d.rest_angle),
                    "rom_deg": [_to_deg(d.rom[0]), _to_deg(d.rom[1])],
                })
            joints[j.name] = dofs
            segs.append({"joint": j.name, "link": {"length": l.length, "samples": l.samples.tolist()}})
        chains.append({
            "name": c.name,
            "base_position": c.base_position.tolist(),
            "base_rotation": c.base_rotation.tolist(),
            "segments": segs,
        })
    return {
        "schema_version": 1,
        "name": name,
        "layout": hand.layout,
        "units_mode": "compliance",
        "springs": springs,
        "joints": joints,
        "chains": chains,
        "palm": {"samples": hand.palm.samples.tolist(), "outline": hand.palm.outline.tolist()},
        "loadcells": [
            {"name": l.name, "kind": l.kind, "owner": l.owner, "position": l.position.tolist()}
            for l in hand.loadcells
        ],
        "tendons": {
            "actuators": [
                {"id": a.id, "role": a.role, "mode": a.mode, "tension_capacity": a.tension_capacity,
                 "excursion_limits": list(a.excursion_limits)}
                for a in network.actuators
            ],
            "paths": [
                {"id": p.id, "actuator": p.actuator, "anchor": p.anchor,
                 "segments": [[s.dof, s.moment_arm] + ([s.free_span] if s.free_span is not None else [])
                              for s in p.segments]}
                for p in network.paths
            ],
            "junctions": [
                {"id": j.id, "kind": j.kind, "parent": j.parent, "children": list(j.children),
                 **({"branch_angles_deg": [_to_deg(a) for a in j.branch_angles]} if j.kind == "knot" else {})}
                for j in network.junctions
            ],
            "rigidity_actuator": network.rigidity_actuator,
        },
    }

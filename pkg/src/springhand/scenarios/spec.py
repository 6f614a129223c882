"""Scenario files: kind, hand reference, objects, setpoint schedule, options.

A schedule is a list of setpoint vectors, one per step, each mapping
actuator ids to commands (metres for length-mode actuators, newtons for
tension-mode ones). ``rigidity`` is the interossei co-contraction tension
applied at every step unless a step sets it explicitly.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from ..errors import InvalidModelError, SchemaError
from ..handfile import models_from_document, read_json
from ..objects import RigidObject, objects_from_list

SCENARIO_VERSIONS = (1,)
KINDS = ("taxonomy", "load_test", "lever", "lock_turn", "wipe_contact")
BUILTIN = "builtin:"

_SETPOINT = {"type": "object", "additionalProperties": {"type": "number"}}
_CATEGORY = {
    "type": "object",
    "required": ["category"],
    "additionalProperties": False,
    "properties": {
        "category": {"type": "string", "minLength": 1},
        "participants": {"type": "array", "items": {"type": "string"}},
        "flexed": {"type": "array", "items": {"type": "string"}},
        "extended": {"type": "array", "items": {"type": "string"}},
        "objects": {"type": "array", "items": {"type": "object"}},
        "schedule": {"type": "array", "items": _SETPOINT},
        "note": {"type": "string"},
    },
}
SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "kind", "hand"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"type": "integer"},
        "kind": {"enum": list(KINDS)},
        "name": {"type": "string"},
        "hand": {"type": "string", "minLength": 1},
        "objects": {"type": "array", "items": {"type": "object"}},
        "schedule": {"type": "array", "items": _SETPOINT},
        "rigidity": {"type": "number", "minimum": 0},
        "options": {"type": "object"},
        "params": {"type": "object"},
        "suite": {"type": "array", "items": _CATEGORY},
    },
}
_VALIDATOR = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)


@dataclass
class CategorySpec:
    category: str
    participants: list[str] = field(default_factory=list)
    flexed: list[str] = field(default_factory=list)
    extended: list[str] = field(default_factory=list)
    objects: list[dict] = field(default_factory=list)
    schedule: list[dict] = field(default_factory=list)
    note: str = ""


@dataclass
class ScenarioSpec:
    kind: str
    hand: str
    name: str = ""
    objects: list[dict] = field(default_factory=list)
    schedule: list[dict] = field(default_factory=list)
    rigidity: float = 0.0
    options: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    suite: list[CategorySpec] = field(default_factory=list)
    base_dir: Path | None = None  # where relative hand references resolve

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidModelError(f"unknown scenario kind {self.kind!r}", where="ScenarioSpec")
        if self.kind == "taxonomy":
            if not self.suite:
                raise InvalidModelError("a taxonomy scenario needs a non-empty suite", where="ScenarioSpec")
        elif not self.schedule:
            raise InvalidModelError("schedule must not be empty", where="ScenarioSpec")
        if self.rigidity < 0:
            raise InvalidModelError("rigidity tension must be >= 0", where="ScenarioSpec")

    def build_objects(self, items=None) -> list[RigidObject]:
        return objects_from_list(self.objects if items is None else items)

    def load_models(self):
        return models_from_document(self.hand_document())

    def hand_document(self) -> dict:
        return resolve_hand(self.hand, self.base_dir)

    def to_dict(self) -> dict:
        d = {"schema_version": SCENARIO_VERSIONS[-1], "kind": self.kind, "name": self.name, "hand": self.hand,
             "objects": copy.deepcopy(self.objects), "rigidity": self.rigidity,
             "options": dict(self.options), "params": dict(self.params)}
        if self.kind == "taxonomy":
            d["suite"] = [{k: v for k, v in vars(c).items() if v not in ("", [])} | {"category": c.category}
                          for c in self.suite]
        else:
            d["schedule"] = copy.deepcopy(self.schedule)
        return d


def resolve_hand(ref: str, base_dir=None) -> dict:
    """Hand document for ``builtin:<name>`` or a path (relative to ``base_dir``)."""
    if ref.startswith(BUILTIN):
        name = ref[len(BUILTIN):]
        res = resources.files("springhand") / "data" / f"{name}.json"
        if not res.is_file():
            raise InvalidModelError(f"no built-in hand {name!r}", where="ScenarioSpec.hand")
        return json.loads(res.read_text(encoding="utf-8"))
    path = Path(ref)
    if not path.is_absolute() and base_dir is not None:
        path = Path(base_dir) / path
    if not path.is_file():
        raise InvalidModelError(f"hand file {str(path)!r} not found", where="ScenarioSpec.hand")
    return read_json(path)


def scenario_from_document(doc: dict, base_dir=None) -> ScenarioSpec:
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.path) or "<root>"
        raise SchemaError(f"scenario schema violation at {where}: {e.message}")
    if doc["schema_version"] not in SCENARIO_VERSIONS:
        raise SchemaError(f"unsupported scenario schema_version {doc['schema_version']}")
    suite = [CategorySpec(**c) for c in doc.get("suite", [])]
    spec = ScenarioSpec(
        kind=doc["kind"], hand=doc["hand"], name=doc.get("name", ""),
        objects=copy.deepcopy(doc.get("objects", [])), schedule=copy.deepcopy(doc.get("schedule", [])),
        rigidity=float(doc.get("rigidity", 0.0)), options=dict(doc.get("options", {})),
        params=dict(doc.get("params", {})), suite=suite, base_dir=base_dir,
    )
    spec.build_objects()  # object definitions must parse
    for c in suite:
        spec.build_objects(c.objects)
    return spec


def load_scenario(path) -> ScenarioSpec:
    path = Path(path)
    return scenario_from_document(read_json(path), base_dir=path.parent)


def builtin_scenarios() -> list[str]:
    root = resources.files("springhand") / "data" / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def load_builtin_scenario(name: str) -> ScenarioSpec:
    root = resources.files("springhand") / "data" / "scenarios"
    res = root / (name if name.endswith(".json") else f"{name}.json")
    if not res.is_file():
        raise InvalidModelError(f"no built-in scenario {name!r}")
    return scenario_from_document(json.loads(res.read_text(encoding="utf-8")), base_dir=Path(str(root)))

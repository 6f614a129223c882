"""Trace records and their CSV / JSON serializations.

CSV column order (frozen):

    step, case,
    cmd:<actuator>      one per actuator, network order (m or N)
    q:<dof>             one per DOF, hand order, degrees
    tension:<branch>    one per tendon path, network order, N
    cell:<loadcell>     one per loadcell, hand order, N
    load_N, lateral_force_N, closure_margin, failure_mode

``case`` names the taxonomy category (empty for the other kinds). Numbers
are written with ``%.9g``; absent scalars are empty cells.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

SUMMARY_VERSION = 1
SCALARS = ("load_N", "lateral_force_N", "closure_margin")


@dataclass
class TraceRecord:
    step: int
    commands: dict[str, float]
    q: np.ndarray  # rad
    branch_tensions: dict[str, float]
    loadcells: dict[str, float]
    load_N: float | None = None
    lateral_force_N: float | None = None
    closure_margin: float | None = None
    failure_mode: str = "none"
    case: str = ""


@dataclass
class ScenarioOutcome:
    kind: str
    name: str
    records: list[TraceRecord]
    success: bool | None
    max_load: float | None = None
    detection_step: int | None = None
    failure_mode: str = "none"
    details: dict = field(default_factory=dict)
    scenes: list = field(default_factory=list)  # (step, case, result, objects), for rendering

    def summary(self) -> dict:
        return {
            "schema_version": SUMMARY_VERSION,
            "kind": self.kind,
            "name": self.name,
            "success": self.success,
            "max_load": self.max_load,
            "detection_step": self.detection_step,
            "failure_mode": self.failure_mode,
            "details": self.details,
        }


def columns(hand, network) -> list[str]:
    return (["step", "case"]
            + [f"cmd:{a.id}" for a in network.actuators]
            + [f"q:{d}" for d in hand.dof_names]
            + [f"tension:{p.id}" for p in network.paths]
            + [f"cell:{c.name}" for c in hand.loadcells]
            + list(SCALARS) + ["failure_mode"])


def _num(v) -> str:
    if v is None:
        return ""
    v = float(v)
    if v == 0.0:
        v = 0.0  # no negative zero in the output
    return "%.9g" % v


def record_row(rec: TraceRecord, hand, network) -> list[str]:
    row = [str(rec.step), rec.case]
    row += [_num(rec.commands.get(a.id, 0.0)) for a in network.actuators]
    row += [_num(math.degrees(v)) for v in rec.q]
    row += [_num(rec.branch_tensions.get(p.id, 0.0)) for p in network.paths]
    row += [_num(rec.loadcells.get(c.name, 0.0)) for c in hand.loadcells]
    row += [_num(getattr(rec, s)) for s in SCALARS]
    row.append(rec.failure_mode)
    return row


def trace_csv(records, hand, network) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns(hand, network))
    for rec in records:
        w.writerow(record_row(rec, hand, network))
    return buf.getvalue()


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return None if not math.isfinite(v) else (0.0 if v == 0.0 else v)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def summary_json(outcome: ScenarioOutcome) -> str:
    return json.dumps(_clean(outcome.summary()), indent=2, sort_keys=True) + "\n"

"""Command-line entry point.

    springhand simulate SCENARIO [SCENARIO ...] [--set KEY=VALUE] [--out DIR] [--emit csv,json,svg]
    springhand validate HAND

Exit status: 0 when every scenario ran (a failed grasp is a result, not an
error), 2 for bad input, 3 when the solver diverges or finds no contact
configuration, 4 for I/O errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields
from pathlib import Path

from .equilibrium import SolverOptions
from .errors import ContactInfeasibleError, DivergedError, InvalidModelError, SchemaError
from .handfile import load_hand_description, read_json
from .render import render_scene
from .scenarios import run_scenario, scenario_from_document, summary_json, trace_csv
from .scenarios.spec import BUILTIN, SCENARIO_SCHEMA
from .tendons import validate_network

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4
EMITS = ("csv", "json", "svg")
PARAMS = {
    "taxonomy": set(),
    "load_test": {"object", "direction", "ramp_step", "resolution", "limit"},
    "lever": {"f_switch", "sweep", "steps", "dof", "match_deflection_deg"},
    "lock_turn": {"torque", "lock_stiffness", "sweep_deg", "steps"},
    "wipe_contact": {"start_gap", "descend_step", "descend_steps", "sweep_step", "sweep_steps", "threshold"},
}
OBJECT_FIELDS = {"name", "shape", "radius", "length", "extents", "position", "rotation", "rotation_deg", "mu",
                 "support", "axis", "stiffness", "external_wrench"}

HELP = """\
Units: lengths in metres, forces in newtons, torques in newton-metres.
Angles in scenario and hand files and in every output (trace q:<dof>
columns, summaries) are degrees; the solver works in radians internally.
Length-mode actuator commands are tendon excursions in metres;
tension-mode commands (rigidity) are newtons.

SCENARIO is a JSON file or builtin:<name> (see data/scenarios).
--set KEY=VALUE edits the scenario before it runs; KEY is a dotted path
such as rigidity, params.torque, objects.0.mu or options.tolerance, and
VALUE is parsed as JSON when possible.

Exit status: 0 ok, 2 bad input, 3 solver divergence or no contact
configuration, 4 I/O error. SPRINGHAND_THREADS caps how many scenarios
run at once.
"""


class InputError(Exception):
    pass


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(doc: dict, key: str, value) -> None:
    """Set a dotted ``key`` in a scenario document; unknown keys are errors."""
    parts = key.split(".")
    top = parts[0]
    if top not in SCENARIO_SCHEMA["properties"] or top == "schema_version":
        raise InputError(f"unknown override key {key!r}")
    if len(parts) == 1:
        doc[top] = value
        return
    if top == "options":
        allowed = {f.name for f in fields(SolverOptions)}
        if len(parts) != 2 or parts[1] not in allowed:
            raise InputError(f"unknown solver option in {key!r}")
        doc.setdefault("options", {})[parts[1]] = value
        return
    if top == "params":
        if len(parts) != 2 or parts[1] not in PARAMS.get(doc.get("kind"), set()):
            raise InputError(f"unknown parameter in {key!r} for kind {doc.get('kind')!r}")
        doc.setdefault("params", {})[parts[1]] = value
        return
    if top == "objects":
        try:
            i = int(parts[1])
            obj = doc.get("objects", [])[i]
        except (ValueError, IndexError):
            raise InputError(f"no object {parts[1]!r} in {key!r}") from None
        if len(parts) != 3 or parts[2] not in OBJECT_FIELDS:
            raise InputError(f"unknown object field in {key!r}")
        obj[parts[2]] = value
        return
    raise InputError(f"{top!r} cannot be overridden field by field")


def load_scenario_document(ref: str) -> tuple[dict, Path | None]:
    if ref.startswith(BUILTIN):
        from importlib import resources
        name = ref[len(BUILTIN):]
        res = resources.files("springhand") / "data" / "scenarios" / f"{name}.json"
        if not res.is_file():
            raise InputError(f"no built-in scenario {name!r}")
        return json.loads(res.read_text(encoding="utf-8")), Path(str(res)).parent
    path = Path(ref)
    if not path.is_file():
        raise InputError(f"scenario file {ref!r} not found")
    return read_json(path), path.parent


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(outcome, hand, network, out_dir: Path, emits) -> list[Path]:
    written = []
    if "csv" in emits:
        p = out_dir / "trace.csv"
        atomic_write(p, trace_csv(outcome.records, hand, network))
        written.append(p)
    if "json" in emits:
        p = out_dir / "summary.json"
        atomic_write(p, summary_json(outcome))
        written.append(p)
    if "svg" in emits:
        for step, case, res, objects in outcome.scenes:
            title = f"{outcome.name} step {step}" + (f" ({case})" if case else "")
            p = out_dir / "svg" / f"step_{step:04d}.svg"
            atomic_write(p, render_scene(res, hand, objects, title=title))
            written.append(p)
    return written


def _threads(n_jobs: int) -> int:
    cap = os.environ.get("SPRINGHAND_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise InputError(f"SPRINGHAND_THREADS must be an integer, got {cap!r}") from None
    return max(1, min(n_jobs, limit))


def cmd_simulate(args) -> int:
    emits = [e.strip() for e in args.emit.split(",") if e.strip()]
    bad = [e for e in emits if e not in EMITS]
    if bad:
        raise InputError(f"unknown --emit value(s) {bad}; choose from {','.join(EMITS)}")
    jobs, names = [], []
    for ref in args.scenario:
        doc, base = load_scenario_document(ref)
        for item in args.set or []:
            if "=" not in item:
                raise InputError(f"--set expects KEY=VALUE, got {item!r}")
            k, v = item.split("=", 1)
            apply_override(doc, k.strip(), _parse_value(v))
        spec = scenario_from_document(doc, base_dir=base)
        hand, network = spec.load_models()
        name = spec.name or Path(ref.replace(BUILTIN, "")).stem
        while name in names:
            name += "_"
        names.append(name)
        jobs.append((name, spec, hand, network))

    def work(job):
        name, spec, hand, network = job
        return run_scenario(spec, hand, network)

    with ThreadPoolExecutor(max_workers=_threads(len(jobs))) as pool:
        outcomes = list(pool.map(work, jobs))
    out_root = Path(args.out)
    for (name, spec, hand, network), outcome in zip(jobs, outcomes):
        out_dir = out_root / name
        emit(outcome, hand, network, out_dir, emits)
        s = outcome.summary()
        print(f"{name}: kind={s['kind']} success={s['success']} failure_mode={s['failure_mode']} "
              f"max_load={s['max_load']} detection_step={s['detection_step']} -> {out_dir}")
    return EXIT_OK


def cmd_validate(args) -> int:
    if not Path(args.hand).is_file():
        raise InputError(f"hand file {args.hand!r} not found")
    hand, network = load_hand_description(args.hand)
    report = validate_network(network, hand)
    print(f"{args.hand}: {hand.n_dof} DOFs, {len(hand.chains)} chains, {len(network.actuators)} actuators, "
          f"{len(network.paths)} tendon paths, {len(hand.loadcells)} loadcells")
    for w in report.warnings:
        print(f"warning: {w}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="springhand", description="Quasi-static simulator of a tendon-driven, "
                                 "machined-spring five-fingered hand.", epilog=HELP,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", help="run scenario files", epilog=HELP,
                         formatter_class=argparse.RawDescriptionHelpFormatter)
    sim.add_argument("scenario", nargs="+", help="scenario JSON file or builtin:<name>")
    sim.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a scenario field (repeatable)")
    sim.add_argument("--out", default="out", help="output directory (default: out)")
    sim.add_argument("--emit", default="csv,json", help="comma list of csv,json,svg (default: csv,json)")
    sim.set_defaults(func=cmd_simulate)
    val = sub.add_parser("validate", help="load and check a hand description", epilog=HELP,
                         formatter_class=argparse.RawDescriptionHelpFormatter)
    val.add_argument("hand", help="hand description JSON file")
    val.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, SchemaError, InvalidModelError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DivergedError, ContactInfeasibleError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Write the shipped hand descriptions.

    python tools/make_hand_files.py [--calibrate]

``kengoro-default.json`` uses the nominal 600 N servo capacity.
``kengoro-calibrated.json`` raises the capacity so that the shipped bar
load test sustains 400 N; with ``--calibrate`` the capacity is searched
again (bisection on a 10 N grid), otherwise the recorded value is used.
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

from springhand.handfile import models_from_document
from springhand.presets import TENSION_CAPACITY, five_finger_document
from springhand.scenarios import load_builtin_scenario, run_scenario

DATA = Path(__file__).resolve().parents[1] / "src" / "springhand" / "data"
CALIBRATED_CAPACITY = 1250.0  # N, result of --calibrate
TARGET = 400.0  # N


def write(name: str, doc: dict) -> None:
    (DATA / name).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def max_load(capacity: float) -> float:
    spec = load_builtin_scenario("load_test")
    hand, network = models_from_document(five_finger_document(tension_capacity=capacity))
    return run_scenario(spec, hand, network).max_load


def calibrate(lo: float = 600.0, hi: float = 3000.0, grid: float = 10.0) -> float:
    # max load grows with capacity; find the smallest grid capacity reaching TARGET
    while hi - lo > grid:
        mid = round((lo + hi) / 2 / grid) * grid
        load = max_load(mid)
        print(f"capacity {mid:7.1f} N -> max load {load:7.1f} N")
        if load >= TARGET:
            hi = mid
        else:
            lo = mid
    return hi


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--calibrate", action="store_true", help="search the capacity again")
    args = ap.parse_args(argv)
    doc = five_finger_document(tension_capacity=TENSION_CAPACITY)
    doc["name"] = "five-finger machined-spring hand, nominal servo capacity"
    write("kengoro-default.json", doc)
    cap = calibrate() if args.calibrate else CALIBRATED_CAPACITY
    doc = five_finger_document(tension_capacity=cap)
    doc["name"] = f"five-finger machined-spring hand, servo capacity {cap:g} N (load-test calibration)"
    write("kengoro-calibrated.json", doc)
    print(f"calibrated capacity {cap:g} N, max load {max_load(cap):.1f} N")


if __name__ == "__main__":
    main()

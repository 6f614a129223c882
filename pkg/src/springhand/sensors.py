"""Loadcell readout and threshold contact detection.

Each loadcell reads the compressive normal force of the contacts assigned to
it: a contact on a distal phalanx goes to that finger's tip cell, a contact
on the palm goes to the nearest palm cell, and contacts elsewhere are not
measured.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contact import PALM
from .errors import InvalidModelError


@dataclass(frozen=True)
class LoadcellFrame:
    names: tuple[str, ...]
    channels: np.ndarray  # N, one per loadcell, in hand order
    step: int = 0

    def __getitem__(self, name: str) -> float:
        return float(self.channels[self.names.index(name)])

    def to_dict(self) -> dict:
        return {n: float(v) for n, v in zip(self.names, self.channels)}


@dataclass(frozen=True)
class ContactEvent:
    detected: bool
    sites: tuple[str, ...]


def assign_contacts(contacts, hand) -> list[int | None]:
    """Loadcell index for every contact (None when it is not on an instrumented body)."""
    names = [c.name for c in hand.chains]
    tip_cell = {}
    palm_cells = []
    for i, cell in enumerate(hand.loadcells):
        if cell.kind == "fingertip":
            tip_cell[names.index(cell.owner)] = i
        else:
            palm_cells.append(i)
    out = []
    for c in contacts:
        if c.chain == PALM:
            if not palm_cells:
                out.append(None)
                continue
            d = [np.linalg.norm(hand.loadcells[i].position - c.position) for i in palm_cells]
            out.append(palm_cells[int(np.argmin(d))])
        elif c.link == len(hand.chains[c.chain].links) - 1 and c.chain in tip_cell:
            out.append(tip_cell[c.chain])
        else:
            out.append(None)
    return out


def loadcell_readout(result, hand, step: int = 0) -> LoadcellFrame:
    assigned = assign_contacts(result.contacts, hand)
    buckets = [[] for _ in hand.loadcells]
    for c, i in zip(result.contacts, assigned):
        if i is not None:
            buckets[i].append(max(c.normal_force, 0.0))
    values = np.array([math.fsum(b) for b in buckets])
    return LoadcellFrame(names=tuple(cell.name for cell in hand.loadcells), channels=values, step=step)


def contact_event(frame: LoadcellFrame, threshold: float = 1.0) -> ContactEvent:
    """Detected when any channel reaches ``threshold`` (inclusive)."""
    if not threshold > 0:
        raise InvalidModelError(f"threshold must be > 0, got {threshold!r}")
    sites = tuple(n for n, v in zip(frame.names, frame.channels) if v >= threshold)
    return ContactEvent(detected=bool(sites), sites=sites)

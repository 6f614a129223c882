"""Machined-spring compliance and its serial/parallel composition.

Spring constants are angular compliances in deg/Nm. Composition
follows the usual rules: compliances add in series, stiffnesses add in
parallel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import InvalidModelError

DEG = math.pi / 180.0


@dataclass(frozen=True)
class SpringElement:
    name: str
    compliance: float  # deg/Nm

    def __post_init__(self):
        if not (self.compliance > 0 and math.isfinite(self.compliance)):
            raise InvalidModelError(
                f"compliance must be finite and > 0, got {self.compliance!r}",
                where=f"spring {self.name!r}",
            )

    @property
    def compliance_rad(self) -> float:
        """Compliance in rad/Nm."""
        return self.compliance * DEG

    @property
    def stiffness(self) -> float:
        """Stiffness in Nm/rad."""
        return 1.0 / self.compliance_rad


@dataclass(frozen=True)
class Single:
    spring: SpringElement


@dataclass(frozen=True)
class Parallel:
    children: tuple


@dataclass(frozen=True)
class Series:
    children: tuple


Arrangement = Union[Single, Parallel, Series, SpringElement]


def composite_compliance(arrangement: Arrangement) -> float:
    """Compliance (deg/Nm) of a spring composition tree."""
    if isinstance(arrangement, SpringElement):
        return arrangement.compliance
    if isinstance(arrangement, Single):
        return arrangement.spring.compliance
    if isinstance(arrangement, (Parallel, Series)):
        if not arrangement.children:
            raise InvalidModelError("empty spring composition")
        parts = [composite_compliance(c) for c in arrangement.children]
        if isinstance(arrangement, Series):
            return math.fsum(parts)
        return 1.0 / math.fsum(1.0 / c for c in parts)
    raise InvalidModelError(f"not a spring arrangement: {arrangement!r}")


def compliance_to_stiffness(compliance_deg: float) -> float:
    """deg/Nm -> Nm/rad."""
    return 1.0 / (compliance_deg * DEG)


def leaves(arrangement: Arrangement) -> list[SpringElement]:
    if isinstance(arrangement, SpringElement):
        return [arrangement]
    if isinstance(arrangement, Single):
        return [arrangement.spring]
    out = []
    for c in arrangement.children:
        out.extend(leaves(c))
    return out


def arrangement_to_data(arrangement: Arrangement):
    """Serialize a tree to the hand-file form (spring names, nested dicts)."""
    if isinstance(arrangement, SpringElement):
        return arrangement.name
    if isinstance(arrangement, Single):
        return arrangement.spring.name
    key = "series" if isinstance(arrangement, Series) else "parallel"
    return {key: [arrangement_to_data(c) for c in arrangement.children]}


def arrangement_from_data(data, springs: dict[str, SpringElement]) -> Arrangement:
    if isinstance(data, str):
        try:
            return Single(springs[data])
        except KeyError:
            raise InvalidModelError(f"unknown spring {data!r}") from None
    if isinstance(data, dict) and len(data) == 1:
        (key, children), = data.items()
        if key not in ("series", "parallel") or not isinstance(children, list) or not children:
            raise InvalidModelError(f"bad spring arrangement {data!r}")
        parts = tuple(arrangement_from_data(c, springs) for c in children)
        return Series(parts) if key == "series" else Parallel(parts)
    raise InvalidModelError(f"bad spring arrangement {data!r}")

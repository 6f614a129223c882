"""Tendon network: actuators, routed paths, branch junctions and the
tension-dependent stiffening of the MP abduction joints.

Tendons are inextensible and frictionless along their sheaths, and cross each
joint at a constant moment arm. A junction is either a ring connector (the two
children carry the parent tension) or a knot (children tensions follow from
planar force balance at the knot).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidModelError,
    JunctionInfeasibleError,
    NetworkConsistencyError,
    SlackViolationError,
)

MODES = ("length", "tension")


@dataclass(frozen=True)
class Actuator:
    id: str
    role: str = "hand"  # "hand" | "wrist" (wrist actuators are inert)
    mode: str = "tension"
    tension_capacity: float = 600.0  # N
    excursion_limits: tuple[float, float] = (-0.05, 0.05)  # m

    def __post_init__(self):
        if self.role not in ("hand", "wrist"):
            raise InvalidModelError(f"unknown actuator role {self.role!r}", where=self.id)
        if self.mode not in MODES:
            raise InvalidModelError(f"unknown actuator mode {self.mode!r}", where=self.id)
        if not self.tension_capacity > 0:
            raise InvalidModelError("tension capacity must be > 0", where=self.id)
        lo, hi = self.excursion_limits
        if lo > hi:
            raise InvalidModelError("excursion limits reversed", where=self.id)


@dataclass(frozen=True)
class Segment:
    dof: str
    moment_arm: float  # m, signed
    free_span: float | None = None  # m; set on antagonist branches that stiffen their DOF


@dataclass(frozen=True)
class TendonPath:
    id: str
    actuator: str
    segments: tuple[Segment, ...]
    anchor: str = ""


@dataclass(frozen=True)
class BranchJunction:
    id: str
    kind: str  # "ring" | "knot"
    parent: str  # actuator or junction id
    children: tuple[str, ...]  # junction or path ids
    branch_angles: tuple[float, ...] = ()  # rad, knot only


@dataclass(frozen=True)
class TendonNetwork:
    actuators: tuple[Actuator, ...]
    paths: tuple[TendonPath, ...]
    junctions: tuple[BranchJunction, ...] = ()
    rigidity_actuator: str | None = None

    def actuator(self, aid: str) -> Actuator:
        for a in self.actuators:
            if a.id == aid:
                return a
        raise KeyError(aid)

    @property
    def actuator_ids(self) -> list[str]:
        return [a.id for a in self.actuators]

    @property
    def path_ids(self) -> list[str]:
        return [p.id for p in self.paths]

    def path(self, pid: str) -> TendonPath:
        for p in self.paths:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def junction(self, jid: str) -> BranchJunction:
        for j in self.junctions:
            if j.id == jid:
                return j
        raise KeyError(jid)

    def children_of(self, node: str) -> list[str]:
        """Direct children of an actuator or junction."""
        for j in self.junctions:
            if j.id == node:
                return list(j.children)
        kids = [j.id for j in self.junctions if j.parent == node]
        if kids:
            return kids
        claimed = {c for j in self.junctions for c in j.children}
        return [p.id for p in self.paths if p.actuator == node and p.id not in claimed]


# -- single-path maps --------------------------------------------------------

def _dof_lookup(hand):
    names = hand.dof_names
    return {n: i for i, n in enumerate(names)}


def excursion(path: TendonPath, q, hand) -> float:
    """Tendon length drawn in by the joints of ``path`` relative to rest (m)."""
    idx = _dof_lookup(hand)
    q = hand.check_configuration(q)
    rest = hand.rest
    total = []
    for s in path.segments:
        if s.dof not in idx:
            raise NetworkConsistencyError(f"path {path.id!r} references unknown DOF {s.dof!r}")
        i = idx[s.dof]
        total.append(s.moment_arm * (q[i] - rest[i]))
    return math.fsum(total)


def joint_torques_from_tension(path: TendonPath, tension: float) -> dict[str, float]:
    """Torque (Nm) a tendon under ``tension`` applies to each DOF it crosses."""
    if tension < 0:
        raise SlackViolationError(f"tendon {path.id!r} cannot carry negative tension {tension!r}")
    out: dict[str, float] = {}
    for s in path.segments:
        out[s.dof] = out.get(s.dof, 0.0) + s.moment_arm * tension
    return out


def path_arm_vector(path: TendonPath, hand) -> np.ndarray:
    idx = _dof_lookup(hand)
    v = np.zeros(hand.n_dof)
    for s in path.segments:
        if s.dof not in idx:
            raise NetworkConsistencyError(f"path {path.id!r} references unknown DOF {s.dof!r}")
        v[idx[s.dof]] += s.moment_arm
    return v


# -- junctions ---------------------------------------------------------------

def knot_split(tension: float, angles) -> np.ndarray:
    """Child tensions at a knot with children at ``angles`` (rad) from the
    parent line; solves sum(t cos a) = T, sum(t sin a) = 0 (minimum-norm when
    the children are not independent)."""
    angles = np.asarray(angles, dtype=float)
    A = np.vstack([np.cos(angles), np.sin(angles)])
    b = np.array([tension, 0.0])
    t, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.max(np.abs(A @ t - b))) if t.size else abs(tension)
    scale = max(1.0, abs(tension))
    if resid > 1e-9 * scale or np.any(t < -1e-12 * scale):
        raise JunctionInfeasibleError(
            f"no non-negative tension split for branch angles {np.degrees(angles).round(6).tolist()} deg"
        )
    return np.clip(t, 0.0, None)


def knot_balance_residual(parent_tension: float, child_tensions, angles) -> float:
    """Norm of the planar force imbalance at a knot (N)."""
    angles = np.asarray(angles, dtype=float)
    t = np.asarray(child_tensions, dtype=float)
    pulled = np.array([np.sum(t * np.cos(angles)), np.sum(t * np.sin(angles))])
    return float(np.linalg.norm(pulled - np.array([parent_tension, 0.0])))


def distribute_tension(network: TendonNetwork, actuator_tensions: dict[str, float]) -> dict[str, float]:
    """Tension carried by every junction and path, given actuator tensions.

    Actuators missing from ``actuator_tensions`` are slack.
    """
    junctions = {j.id: j for j in network.junctions}
    out: dict[str, float] = {}

    def flow(node: str, tension: float):
        jn = junctions.get(node)
        kids = network.children_of(node)
        if jn is None or jn.kind == "ring":
            split = [tension] * len(kids)
        else:
            split = knot_split(tension, jn.branch_angles)
        for child, t in zip(kids, split):
            out[child] = float(t)
            if child in junctions:
                flow(child, float(t))

    for a in network.actuators:
        T = float(actuator_tensions.get(a.id, 0.0))
        if T < 0:
            raise SlackViolationError(f"actuator {a.id!r} tension {T!r} is negative")
        flow(a.id, T)
    for p in network.paths:
        out.setdefault(p.id, 0.0)
    return out


def path_ratios(network: TendonNetwork) -> dict[str, dict[str, float]]:
    """For each actuator, tension of each of its paths per newton of actuator tension."""
    ratios = {}
    for a in network.actuators:
        dist = distribute_tension(network, {a.id: 1.0})
        ratios[a.id] = {p.id: dist[p.id] for p in network.paths if dist.get(p.id, 0.0) != 0.0}
    return ratios


def actuator_arm_matrix(network: TendonNetwork, hand) -> np.ndarray:
    """Row a: generalized force per newton of actuator a (equivalently the
    gradient of that actuator's excursion with respect to q)."""
    ratios = path_ratios(network)
    M = np.zeros((len(network.actuators), hand.n_dof))
    for i, a in enumerate(network.actuators):
        for pid, beta in ratios[a.id].items():
            M[i] += beta * path_arm_vector(network.path(pid), hand)
    return M


def actuator_excursion(network: TendonNetwork, hand, actuator: str, q) -> float:
    i = network.actuator_ids.index(actuator)
    q = hand.check_configuration(q)
    return float(actuator_arm_matrix(network, hand)[i] @ (q - hand.rest))


# -- variable rigidity -------------------------------------------------------

def effective_abduction_stiffness(base: float, interossei_tension: float, moment_arm: float, free_span: float) -> float:
    """Abduction stiffness (Nm/rad) of an MP joint whose antagonist pair each
    carries ``interossei_tension``: a taut string of tension T offset r from
    the axis over span L resists rotation with T r^2 / L, twice for the pair."""
    if moment_arm <= 0 or free_span <= 0:
        raise InvalidModelError("moment arm and free span must be positive")
    if interossei_tension < 0:
        raise SlackViolationError("interossei tension cannot be negative")
    return base + 2.0 * interossei_tension * moment_arm**2 / free_span


def tension_stiffening(network: TendonNetwork, hand, path_tensions: dict[str, float]) -> np.ndarray:
    """Per-DOF stiffness added by taut antagonist branches (Nm/rad)."""
    idx = _dof_lookup(hand)
    add = np.zeros(hand.n_dof)
    for p in network.paths:
        t = path_tensions.get(p.id, 0.0)
        for s in p.segments:
            if s.free_span:
                add[idx[s.dof]] += t * s.moment_arm**2 / s.free_span
    return add


# -- diagnostics -------------------------------------------------------------

@dataclass
class NetworkReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    n_actuators: int = 0
    n_rigidity_actuators: int = 0

    @property
    def ok(self) -> bool:
        return not self.errors

    def count(self, word: str) -> int:
        return sum(word in e for e in self.errors)


def validate_network(network: TendonNetwork, hand=None) -> NetworkReport:
    rep = NetworkReport(n_actuators=len(network.actuators))
    act = network.actuator_ids
    jids = [j.id for j in network.junctions]
    pids = network.path_ids
    for kind, ids in (("actuator", act), ("junction", jids), ("path", pids)):
        if len(set(ids)) != len(ids):
            rep.errors.append(f"duplicate {kind} ids")
    if len(set(act) & set(jids) | set(act) & set(pids) | set(jids) & set(pids)):
        rep.errors.append("ids shared between actuators, junctions and paths")

    if network.rigidity_actuator is not None:
        rep.n_rigidity_actuators = 1 if network.rigidity_actuator in act else 0
        if not rep.n_rigidity_actuators:
            rep.errors.append(f"rigidity actuator {network.rigidity_actuator!r} is not an actuator")

    # junction arity and geometry
    for j in network.junctions:
        if j.kind == "ring":
            if len(j.children) != 2:
                rep.errors.append(f"arity: ring junction {j.id!r} has {len(j.children)} children, needs 2")
        elif j.kind == "knot":
            if len(j.children) < 2:
                rep.errors.append(f"arity: knot junction {j.id!r} has {len(j.children)} children, needs >= 2")
            elif len(j.branch_angles) != len(j.children):
                rep.errors.append(f"knot {j.id!r} needs one branch angle per child")
            else:
                try:
                    knot_split(1.0, j.branch_angles)
                except JunctionInfeasibleError as exc:
                    rep.errors.append(f"junction {j.id!r}: {exc}")
        else:
            rep.errors.append(f"junction {j.id!r} has unknown kind {j.kind!r}")
        for c in j.children:
            if c not in jids and c not in pids:
                rep.errors.append(f"orphan: junction {j.id!r} child {c!r} does not exist")
        if j.parent not in act and j.parent not in jids:
            rep.errors.append(f"orphan: junction {j.id!r} parent {j.parent!r} does not exist")
        for c in j.children:
            if c in jids and network.junction(c).parent != j.id:
                rep.errors.append(f"junction {c!r} is listed under {j.id!r} but names parent {network.junction(c).parent!r}")

    # cycles among junctions: walk parent pointers
    for j in network.junctions:
        seen, node = set(), j.id
        while node in jids:
            if node in seen:
                rep.errors.append(f"cycle: junction {j.id!r} lies on a branch cycle")
                break
            seen.add(node)
            node = network.junction(node).parent
    if rep.count("cycle") > 1:
        # one cycle, reported once
        first = next(e for e in rep.errors if "cycle" in e)
        rep.errors = [e for e in rep.errors if "cycle" not in e]
        rep.errors.append(first)

    # each path reached by exactly one parent, consistent with its actuator
    claimed = {}
    for j in network.junctions:
        for c in j.children:
            claimed.setdefault(c, []).append(j.id)
    for c, parents in claimed.items():
        if len(parents) > 1:
            rep.errors.append(f"{c!r} has several parent junctions {parents}")
    if not rep.count("cycle"):
        for p in network.paths:
            if p.actuator not in act:
                rep.errors.append(f"orphan: path {p.id!r} names unknown actuator {p.actuator!r}")
                continue
            node = p.id
            while node in claimed:
                node = network.junction(claimed[node][0]).parent
            if node != p.id and node != p.actuator:
                rep.errors.append(f"path {p.id!r} is routed from {node!r} but names actuator {p.actuator!r}")
        for a in network.actuators:
            direct = [p.id for p in network.paths if p.actuator == a.id and p.id not in claimed]
            roots = [j.id for j in network.junctions if j.parent == a.id]
            if len(direct) + len(roots) > 1:
                rep.errors.append(f"actuator {a.id!r} drives several branches without a junction")

    # segments
    names = set(hand.dof_names) if hand is not None else None
    for p in network.paths:
        if not p.segments:
            rep.errors.append(f"path {p.id!r} has no segments")
        for s in p.segments:
            if s.moment_arm == 0:
                rep.errors.append(f"path {p.id!r} lists DOF {s.dof!r} with zero moment arm")
            if names is not None and s.dof not in names:
                rep.errors.append(f"dof: path {p.id!r} references unknown DOF {s.dof!r}")
            if s.free_span is not None and s.free_span <= 0:
                rep.errors.append(f"path {p.id!r} has non-positive free span on {s.dof!r}")

    for a in network.actuators:
        if a.role == "wrist" and any(p.actuator == a.id for p in network.paths):
            rep.warnings.append(f"wrist actuator {a.id!r} routes hand tendons")
    if network.rigidity_actuator in act:
        ra = network.actuator(network.rigidity_actuator)
        if ra.mode != "tension":
            rep.errors.append("rigidity actuator must be tension-commanded")
        if not rep.errors:
            reached = [network.path(pid) for pid in path_ratios(network)[ra.id]]
            dofs = {s.dof for p in reached for s in p.segments}
            if hand is not None and getattr(hand, "layout", "") == "five_finger":
                for finger in ("index", "middle", "ring", "little"):
                    abd = [d.name for d in hand.chain(finger).dofs if d.axis_label == "abduction"]
                    if not set(abd) <= dofs:
                        rep.errors.append(f"rigidity tendon does not reach {finger} MP abduction")
    return rep

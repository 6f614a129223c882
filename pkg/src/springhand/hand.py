"""Kinematic and elastic description of the hand.

The palm frame has x pointing distally (wrist to fingers), y toward the thumb
and z out of the palmar surface. Every finger is a serial chain of revolute
DOFs; each DOF is an elastic machined-spring joint with a linear
torque-deflection law about its rest angle.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationShapeError, InvalidModelError, RomViolationError
from .kinematics import axis_angle, unit
from .springs import Arrangement, composite_compliance, compliance_to_stiffness

FINGER_NAMES = ("thumb", "index", "middle", "ring", "little")
AXIS_LABELS = ("flexion", "opposition", "abduction")
LOADCELL_ORDER = (
    "palm1", "palm2", "palm3", "palm4",
    "thumbtip", "indextip", "middletip", "ringtip", "littletip",
)


@dataclass(frozen=True, eq=False)
class DOF:
    name: str
    axis_label: str
    axis: np.ndarray  # unit vector in the joint's parent frame
    arrangement: Arrangement
    rest_angle: float = 0.0  # rad
    rom: tuple[float, float] = (0.0, np.pi / 2)  # rad

    def __post_init__(self):
        if self.axis_label not in AXIS_LABELS:
            raise InvalidModelError(f"unknown axis label {self.axis_label!r}", where=self.name)
        object.__setattr__(self, "axis", unit(self.axis))
        lo, hi = (float(v) for v in self.rom)
        object.__setattr__(self, "rom", (lo, hi))
        if not lo <= self.rest_angle <= hi:
            raise InvalidModelError(
                f"rest angle {self.rest_angle:.6g} outside rom [{lo:.6g}, {hi:.6g}]",
                where=self.name,
            )
        k = self.base_stiffness
        if not (np.isfinite(k) and k > 0):
            raise InvalidModelError("derived stiffness is not finite and positive", where=self.name)

    @property
    def compliance(self) -> float:
        """Composite compliance in deg/Nm."""
        return composite_compliance(self.arrangement)

    @property
    def base_stiffness(self) -> float:
        """Nm/rad."""
        return compliance_to_stiffness(self.compliance)


@dataclass(frozen=True, eq=False)
class JointSpec:
    name: str
    dofs: tuple[DOF, ...]

    def __post_init__(self):
        if not self.dofs:
            raise InvalidModelError("joint has no DOF", where=self.name)


def joint_torque(joint: JointSpec, dof: int, angle: float) -> float:
    """Elastic restoring torque (Nm) of one DOF at ``angle`` (rad)."""
    if not 0 <= dof < len(joint.dofs):
        raise InvalidModelError(f"joint has no DOF index {dof}", where=joint.name)
    d = joint.dofs[dof]
    lo, hi = d.rom
    if not lo <= angle <= hi:
        raise RomViolationError(d.name, angle, d.rom)
    return -d.base_stiffness * (angle - d.rest_angle)


@dataclass(frozen=True, eq=False)
class Link:
    length: float
    # contact sample points in the link frame (origin at the joint, x along the link)
    samples: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidModelError(f"link length must be > 0, got {self.length!r}")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float).reshape(-1, 3))


@dataclass(frozen=True, eq=False)
class FingerChain:
    name: str
    base_position: np.ndarray
    base_rotation: np.ndarray
    joints: tuple[JointSpec, ...]
    links: tuple[Link, ...]

    def __post_init__(self):
        object.__setattr__(self, "base_position", np.asarray(self.base_position, dtype=float))
        object.__setattr__(self, "base_rotation", np.asarray(self.base_rotation, dtype=float))
        if len(self.joints) != len(self.links):
            raise InvalidModelError("each joint must be followed by exactly one link", where=self.name)

    @property
    def dofs(self) -> list[DOF]:
        return [d for j in self.joints for d in j.dofs]


@dataclass(frozen=True, eq=False)
class Loadcell:
    name: str
    kind: str  # "palm" | "fingertip"
    owner: str  # "palm" or a chain name
    position: np.ndarray  # palm frame (palm cells) or distal-link frame (fingertip cells)

    def __post_init__(self):
        if self.kind not in ("palm", "fingertip"):
            raise InvalidModelError(f"unknown loadcell kind {self.kind!r}", where=self.name)
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))


@dataclass(frozen=True, eq=False)
class Palm:
    samples: np.ndarray  # contact sample points, palm frame
    outline: np.ndarray  # polygon in the palm plane, for drawing

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float).reshape(-1, 3))
        object.__setattr__(self, "outline", np.asarray(self.outline, dtype=float).reshape(-1, 2))


@dataclass(frozen=True, eq=False)
class HandModel:
    chains: tuple[FingerChain, ...]
    palm: Palm
    loadcells: tuple[Loadcell, ...]
    layout: str = "five_finger"

    def __post_init__(self):
        names = [c.name for c in self.chains]
        if len(set(names)) != len(names):
            raise InvalidModelError("chain names must be distinct", where="HandModel")
        dof_names = self.dof_names
        if len(set(dof_names)) != len(dof_names):
            raise InvalidModelError("DOF names must be distinct", where="HandModel")
        for cell in self.loadcells:
            if cell.kind == "fingertip" and cell.owner not in names:
                raise InvalidModelError(f"fingertip loadcell on unknown chain {cell.owner!r}", where=cell.name)
        if self.layout == "five_finger":
            check_five_finger_layout(self)

    @property
    def dofs(self) -> list[DOF]:
        return [d for c in self.chains for d in c.dofs]

    @property
    def dof_names(self) -> list[str]:
        return [d.name for d in self.dofs]

    @property
    def n_dof(self) -> int:
        return len(self.dofs)

    def dof_index(self, name: str) -> int:
        try:
            return self.dof_names.index(name)
        except ValueError:
            raise KeyError(name) from None

    def chain(self, name: str) -> FingerChain:
        for c in self.chains:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def rest(self) -> np.ndarray:
        return np.array([d.rest_angle for d in self.dofs])

    @property
    def rom_lower(self) -> np.ndarray:
        return np.array([d.rom[0] for d in self.dofs])

    @property
    def rom_upper(self) -> np.ndarray:
        return np.array([d.rom[1] for d in self.dofs])

    @property
    def base_stiffness(self) -> np.ndarray:
        return np.array([d.base_stiffness for d in self.dofs])

    def chain_dof_slices(self) -> list[slice]:
        out, i = [], 0
        for c in self.chains:
            n = len(c.dofs)
            out.append(slice(i, i + n))
            i += n
        return out

    def check_configuration(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.n_dof,):
            raise ConfigurationShapeError(
                f"configuration has shape {q.shape}, hand has {self.n_dof} DOFs"
            )
        return q

    def check_rom(self, q, tol: float = 1e-12) -> None:
        q = self.check_configuration(q)
        for d, a in zip(self.dofs, q):
            lo, hi = d.rom
            if a < lo - tol or a > hi + tol:
                raise RomViolationError(d.name, float(a), d.rom)


def check_five_finger_layout(hand: HandModel) -> None:
    """Joint/DOF/loadcell census of the five-fingered hand."""
    names = [c.name for c in hand.chains]
    if sorted(names) != sorted(FINGER_NAMES):
        raise InvalidModelError(f"expected chains {FINGER_NAMES}, got {names}", where="HandModel")
    for c in hand.chains:
        if len(c.joints) != 3:
            raise InvalidModelError("every finger has exactly 3 joints", where=c.name)
        labels = [sorted(d.axis_label for d in j.dofs) for j in c.joints]
        if c.name == "thumb":
            want = [["abduction", "opposition"], ["flexion"], ["flexion"]]
        else:
            want = [["abduction", "flexion"], ["flexion"], ["flexion"]]
        if labels != want:
            raise InvalidModelError(f"DOF layout {labels} differs from {want}", where=c.name)
    kinds = [cell.kind for cell in hand.loadcells]
    if len(hand.loadcells) != 9 or kinds.count("palm") != 4 or kinds.count("fingertip") != 5:
        raise InvalidModelError("expected 9 loadcells: 4 palm and 5 fingertip", where="HandModel")
    if tuple(cell.name for cell in hand.loadcells) != LOADCELL_ORDER:
        raise InvalidModelError(f"loadcell order must be {LOADCELL_ORDER}", where="HandModel")


@dataclass(frozen=True, eq=False)
class HandPose:
    """Result of forward kinematics for one configuration."""

    q: np.ndarray
    # per global DOF: owning chain index, joint index, origin and axis in the palm frame
    dof_chain: np.ndarray
    dof_joint: np.ndarray
    dof_origin: np.ndarray
    dof_axis: np.ndarray
    # per chain, per link: rotation and origin of the link frame
    link_rotations: tuple
    link_origins: tuple
    fingertips: np.ndarray
    loadcell_positions: np.ndarray

    def joint_positions(self, chain: int) -> np.ndarray:
        """Joint origins followed by the fingertip, shape (n_links + 1, 3)."""
        return np.vstack([*self.link_origins[chain], self.fingertips[chain]])

    def point(self, chain: int, link: int, local) -> np.ndarray:
        return self.link_origins[chain][link] + self.link_rotations[chain][link] @ np.asarray(local, float)

    def jacobian(self, chain: int, link: int, point) -> np.ndarray:
        """3 x n_dof translational Jacobian of a point rigidly attached to a link."""
        n = len(self.q)
        J = np.zeros((3, n))
        mask = (self.dof_chain == chain) & (self.dof_joint <= link)
        idx = np.nonzero(mask)[0]
        if idx.size:
            J[:, idx] = np.cross(self.dof_axis[idx], np.asarray(point, float) - self.dof_origin[idx]).T
        return J


    def point_curvature(self, chain: int, link: int, point, vec) -> np.ndarray:
        """n_dof x n_dof matrix of vec . d2p/dq_i dq_j for a point on a link."""
        n = len(self.q)
        Hm = np.zeros((n, n))
        idx = np.nonzero((self.dof_chain == chain) & (self.dof_joint <= link))[0]
        p = np.asarray(point, float)
        vec = np.asarray(vec, float)
        for a, i in enumerate(idx):
            for j in idx[a:]:
                # joint i precedes j along the chain
                v = vec @ np.cross(self.dof_axis[i], np.cross(self.dof_axis[j], p - self.dof_origin[j]))
                Hm[i, j] = Hm[j, i] = v
        return Hm


def forward_kinematics(hand: HandModel, q) -> HandPose:
    q = hand.check_configuration(q)
    n = hand.n_dof
    dof_chain = np.zeros(n, dtype=int)
    dof_joint = np.zeros(n, dtype=int)
    dof_origin = np.zeros((n, 3))
    dof_axis = np.zeros((n, 3))
    rots, origins, tips = [], [], []
    k = 0
    for ci, chain in enumerate(hand.chains):
        R = chain.base_rotation.copy()
        p = chain.base_position.copy()
        chain_rots, chain_origins = [], []
        for ji, (joint, link) in enumerate(zip(chain.joints, chain.links)):
            for dof in joint.dofs:
                dof_chain[k], dof_joint[k] = ci, ji
                dof_origin[k] = p
                dof_axis[k] = R @ dof.axis
                R = R @ axis_angle(dof.axis, q[k])
                k += 1
            chain_rots.append(R)
            chain_origins.append(p)
            p = p + R @ np.array([link.length, 0.0, 0.0])
        rots.append(tuple(chain_rots))
        origins.append(tuple(chain_origins))
        tips.append(p)
    names = [c.name for c in hand.chains]
    cells = []
    for cell in hand.loadcells:
        if cell.kind == "palm":
            cells.append(cell.position)
        else:
            ci = names.index(cell.owner)
            cells.append(origins[ci][-1] + rots[ci][-1] @ cell.position)
    return HandPose(
        q=q.copy(),
        dof_chain=dof_chain,
        dof_joint=dof_joint,
        dof_origin=dof_origin,
        dof_axis=dof_axis,
        link_rotations=tuple(rots),
        link_origins=tuple(origins),
        fingertips=np.array(tips),
        loadcell_positions=np.array(cells).reshape(-1, 3),
    )

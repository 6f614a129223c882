"""Rigid primitive objects and their signed distance fields."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidModelError
from .kinematics import euler_zyx_deg, unit

SHAPES = ("sphere", "cylinder", "bar", "box")
SUPPORTS = ("fixed", "slider", "hinge", "free")
DEFAULT_MU = 0.8


@dataclass(frozen=True, eq=False)
class RigidObject:
    """A primitive in the palm frame.

    Cylinders and bars have their axis along the local z axis and are
    centred on ``position``; boxes are given by full ``extents``.

    ``support`` says what holds the object besides the hand: ``fixed`` (the
    world), ``slider`` (a spring of ``stiffness`` N/m along ``axis``),
    ``hinge`` (free rotation about ``axis`` through ``position``) or ``free``.
    Only a slider moves while the posture settles; free and hinged objects
    are held by sticking contacts and their balance is checked afterwards.
    ``external_wrench`` is (force, torque about ``position``) in N and Nm.
    """

    name: str
    shape: str
    radius: float = 0.0
    length: float = 0.0
    extents: tuple = (0.0, 0.0, 0.0)
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    mu: float = DEFAULT_MU
    support: str = "fixed"
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    stiffness: float = 0.0
    external_wrench: np.ndarray = field(default_factory=lambda: np.zeros(6))

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise InvalidModelError(f"unknown shape {self.shape!r}", where=f"object {self.name!r}")
        if self.support not in SUPPORTS:
            raise InvalidModelError(f"unknown support {self.support!r}", where=f"object {self.name!r}")
        if self.shape == "box":
            ext = tuple(float(e) for e in self.extents)
            if len(ext) != 3 or min(ext) <= 0:
                raise InvalidModelError("box extents must be three positive lengths", where=f"object {self.name!r}")
            object.__setattr__(self, "extents", ext)
        else:
            if not self.radius > 0:
                raise InvalidModelError("radius must be > 0", where=f"object {self.name!r}")
            if self.shape != "sphere" and not self.length > 0:
                raise InvalidModelError("length must be > 0", where=f"object {self.name!r}")
        if not self.mu >= 0:
            raise InvalidModelError("friction coefficient must be >= 0", where=f"object {self.name!r}")
        if self.support == "slider" and not self.stiffness > 0:
            raise InvalidModelError("slider support needs a positive stiffness", where=f"object {self.name!r}")
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float).reshape(3, 3))
        object.__setattr__(self, "axis", unit(self.axis))
        object.__setattr__(self, "external_wrench", np.asarray(self.external_wrench, dtype=float).reshape(6))

    def moved(self, offset) -> "RigidObject":
        return replace(self, position=self.position + np.asarray(offset, dtype=float))

    def signed_distance(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Signed distance (m, negative inside) and outward unit normal for
        each row of ``points``."""
        P = np.asarray(points, dtype=float).reshape(-1, 3)
        L = (P - self.position) @ self.rotation
        if self.shape == "sphere":
            phi, nl = _sphere(L, self.radius)
        elif self.shape == "box":
            phi, nl = _box(L, 0.5 * np.asarray(self.extents))
        else:
            phi, nl = _cylinder(L, self.radius, 0.5 * self.length)
        return phi, nl @ self.rotation.T

    def distance_hessian(self, point) -> np.ndarray:
        """Second derivative of the signed distance at ``point`` (curved
        surfaces only; flat faces, edges and caps contribute none)."""
        L = self.rotation.T @ (np.asarray(point, dtype=float) - self.position)
        Hl = np.zeros((3, 3))
        if self.shape == "sphere":
            rho = np.linalg.norm(L)
            if rho > 0:
                n = L / rho
                Hl = (np.eye(3) - np.outer(n, n)) / rho
        elif self.shape in ("cylinder", "bar"):
            rho = np.hypot(L[0], L[1])
            dr, dz = rho - self.radius, abs(L[2]) - 0.5 * self.length
            if rho > 0 and dr >= dz and not (dr > 0 and dz > 0):
                er = np.array([L[0] / rho, L[1] / rho, 0.0])
                et = np.array([-er[1], er[0], 0.0])
                Hl = np.outer(et, et) / rho
        return self.rotation @ Hl @ self.rotation.T

    def to_dict(self) -> dict:
        d = {"name": self.name, "shape": self.shape}
        if self.shape == "box":
            d["extents"] = list(self.extents)
        else:
            d["radius"] = self.radius
            if self.shape != "sphere":
                d["length"] = self.length
        d.update({
            "position": self.position.tolist(),
            "rotation": self.rotation.tolist(),
            "mu": self.mu,
            "support": self.support,
            "axis": self.axis.tolist(),
            "stiffness": self.stiffness,
            "external_wrench": self.external_wrench.tolist(),
        })
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RigidObject":
        d = dict(d)
        if "rotation" in d:
            R = np.asarray(d.pop("rotation"), dtype=float)
        else:
            R = euler_zyx_deg(*d.pop("rotation_deg", (0.0, 0.0, 0.0)))
        known = {"name", "shape", "radius", "length", "extents", "position", "mu", "support", "axis",
                 "stiffness", "external_wrench"}
        extra = set(d) - known
        if extra:
            raise InvalidModelError(f"unknown object fields {sorted(extra)}", where=f"object {d.get('name')!r}")
        if "extents" in d:
            d["extents"] = tuple(d["extents"])
        return cls(rotation=R, **d)


def _sphere(L, r):
    rho = np.linalg.norm(L, axis=1)
    n = np.tile([0.0, 0.0, 1.0], (len(L), 1))
    ok = rho > 0
    n[ok] = L[ok] / rho[ok, None]
    return rho - r, n


def _cylinder(L, r, half):
    rho = np.hypot(L[:, 0], L[:, 1])
    er = np.zeros_like(L)
    ok = rho > 0
    er[ok, 0] = L[ok, 0] / rho[ok]
    er[ok, 1] = L[ok, 1] / rho[ok]
    er[~ok, 0] = 1.0
    ez = np.zeros_like(L)
    ez[:, 2] = np.where(L[:, 2] >= 0, 1.0, -1.0)
    dr, dz = rho - r, np.abs(L[:, 2]) - half
    phi = np.where(dr >= dz, dr, dz)
    n = np.where((dr >= dz)[:, None], er, ez)
    corner = (dr > 0) & (dz > 0)
    if np.any(corner):
        d = np.hypot(dr[corner], dz[corner])
        phi[corner] = d
        n[corner] = (dr[corner, None] * er[corner] + dz[corner, None] * ez[corner]) / d[:, None]
    return phi, n


def _box(L, half):
    qv = np.abs(L) - half
    sgn = np.where(L >= 0, 1.0, -1.0)
    out = np.maximum(qv, 0.0)
    dist = np.linalg.norm(out, axis=1)
    phi = np.empty(len(L))
    n = np.zeros_like(L)
    outside = dist > 0
    phi[outside] = dist[outside]
    n[outside] = sgn[outside] * out[outside] / dist[outside, None]
    inside = ~outside
    if np.any(inside):
        i = np.argmax(qv[inside], axis=1)
        rows = np.nonzero(inside)[0]
        phi[inside] = qv[inside, i]
        n[rows, i] = sgn[rows, i]
    return phi, n


def objects_from_list(items) -> list[RigidObject]:
    objs = [RigidObject.from_dict(d) for d in items]
    names = [o.name for o in objs]
    if len(set(names)) != len(names):
        raise InvalidModelError("object names must be distinct")
    return objs

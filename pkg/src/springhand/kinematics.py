"""Small rotation helpers."""
from __future__ import annotations

import numpy as np


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("zero vector has no direction")
    return v / n


def skew(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def axis_angle(axis, angle: float) -> np.ndarray:
    """Rotation matrix for a right-handed turn of ``angle`` about unit ``axis``."""
    k = skew(axis)
    s, c = np.sin(angle), np.cos(angle)
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


def rotvec(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    theta = float(np.linalg.norm(w))
    if theta == 0.0:
        return np.eye(3)
    return axis_angle(w / theta, theta)


def euler_zyx_deg(yaw, pitch, roll) -> np.ndarray:
    """R = Rz(yaw) Ry(pitch) Rx(roll), angles in degrees."""
    d = np.pi / 180.0
    return (
        axis_angle((0, 0, 1), yaw * d)
        @ axis_angle((0, 1, 0), pitch * d)
        @ axis_angle((1, 0, 0), roll * d)
    )


def tangent_basis(n) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal pair spanning the plane normal to ``n``."""
    n = unit(n)
    helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    t1 = unit(np.cross(n, helper))
    t2 = np.cross(n, t1)
    return t1, t2

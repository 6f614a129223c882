"""Grasp evaluation: force closure and the largest load a grasp sustains."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .equilibrium import SolverOptions, cone_edges, solve_equilibrium
from .errors import DivergedError, InvalidModelError
from .qp import checked_nnls


@dataclass(frozen=True)
class GraspQuality:
    force_closure: bool
    margin: float  # distance from the origin to the hull boundary, negative outside
    resists_external: bool | None = None


PATCH_RADIUS = 0.005  # m, rubber pad contact patch for torsional friction


def primitive_wrenches(contacts, *, n_edges: int = 8, planar: bool = False, reference=None,
                       char_length: float | None = None, soft: bool = True,
                       patch_radius: float = PATCH_RADIUS) -> np.ndarray:
    """Unit-normal-force wrenches the hand can exert on the object through
    each edge of each contact's friction cone.

    Torques are divided by ``char_length`` (default: the largest distance from
    ``reference`` to a contact) so that forces and torques are commensurate.
    ``planar`` restricts to the x-y plane: wrenches are (fx, fy, tz).
    ``soft`` contacts (3-D only) also resist a twist about the normal of up
    to mu * patch_radius per newton of normal force.
    """
    pos = np.array([c.position for c in contacts], dtype=float).reshape(-1, 3)
    ref = pos.mean(axis=0) if reference is None else np.asarray(reference, dtype=float)
    rho = char_length
    if rho is None:
        rho = float(np.max(np.linalg.norm(pos - ref, axis=1), initial=0.0)) or 1.0
    out = []
    for c in contacts:
        n = np.asarray(c.normal, dtype=float)
        r = np.asarray(c.position, dtype=float) - ref
        if planar:
            n2 = np.array([n[0], n[1], 0.0])
            n2 /= np.linalg.norm(n2)
            t = np.array([-n2[1], n2[0], 0.0])
            edges = [n2 + c.mu * t, n2 - c.mu * t] if c.mu > 0 else [n2]
        else:
            edges = cone_edges(n, c.mu, n_edges) if c.mu > 0 else [n]
        for e in edges:
            f = -np.asarray(e)  # the hand pushes into the object
            tau = np.cross(r, f) / rho
            out.append([f[0], f[1], tau[2]] if planar else [*f, *tau])
        if soft and not planar and c.mu > 0:
            f = -n
            for sign in (1.0, -1.0):
                tau = (np.cross(r, f) + sign * c.mu * patch_radius * n) / rho
                out.append([*f, *tau])
    return np.array(out, dtype=float)


def _hull_distance(W: np.ndarray) -> float:
    """Euclidean distance from the origin to conv(W)."""
    m = W.shape[0]
    big = 1e3 * max(1.0, float(np.max(np.abs(W))))
    A = np.vstack([W.T, big * np.ones((1, m))])
    b = np.concatenate([np.zeros(W.shape[1]), [big]])
    alpha, _ = checked_nnls(A, b, maxiter=100 * m)
    alpha /= alpha.sum()
    return float(np.linalg.norm(W.T @ alpha))


def wrench_hull_margin(W: np.ndarray) -> float:
    """Signed distance from the origin to the boundary of conv(W): positive
    when the origin is strictly inside."""
    dim = W.shape[1]
    if W.shape[0] <= dim or np.linalg.matrix_rank(W - W.mean(axis=0), tol=1e-10) < dim:
        return -_hull_distance(W)
    try:
        hull = ConvexHull(W)
    except QhullError:
        return -_hull_distance(W)
    offsets = hull.equations[:, -1]  # n.x + offset <= 0 inside
    if np.all(offsets < 0):
        return float(np.min(-offsets))
    return -_hull_distance(W)


def grasp_quality(contacts, external_wrench=None, *, n_edges: int = 8, planar: bool = False,
                  reference=None, char_length: float | None = None, soft: bool = True) -> GraspQuality:
    """Force closure by the origin-in-hull test on discretized friction cones."""
    contacts = list(contacts)
    if not contacts:
        raise InvalidModelError("grasp quality needs at least one contact")
    W = primitive_wrenches(contacts, n_edges=n_edges, planar=planar, reference=reference,
                           char_length=char_length, soft=soft)
    margin = wrench_hull_margin(W)
    resists = None
    if external_wrench is not None:
        w = np.asarray(external_wrench, dtype=float)
        if planar and w.size == 6:
            w = w[[0, 1, 5]]
        if w.size == 6:
            pos = np.array([c.position for c in contacts]).reshape(-1, 3)
            rho = char_length or (float(np.max(np.linalg.norm(pos - pos.mean(0), axis=1))) or 1.0)
            w = np.concatenate([w[:3], w[3:] / rho])
        _, res = checked_nnls(W.T, -w, maxiter=100 * W.shape[0])
        resists = bool(res <= 1e-9 * max(1.0, float(np.linalg.norm(w))))
    return GraspQuality(force_closure=bool(margin > 0), margin=margin, resists_external=resists)


@dataclass
class LoadResult:
    max_load: float
    failure_mode: str
    levels: list = field(default_factory=list)  # (load N, held, failure_mode, actuator tensions)


def max_supported_load(hand, network, commands, objects, object_name: str, direction, *,
                       step: float = 50.0, limit: float = 5000.0, resolution: float = 1.0,
                       options=None) -> LoadResult:
    """Ramp, then bisect, the magnitude of a force on ``object_name`` along
    ``direction`` until the grasp fails. Loads are probed on the grid of
    ``resolution`` newtons, so the answer is the largest sustained grid
    level; the failure mode is that of the smallest failing level found."""
    opts = options if isinstance(options, SolverOptions) else SolverOptions.from_dict(options)
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    names = [o.name for o in objects]
    if object_name not in names:
        raise InvalidModelError(f"no object named {object_name!r}")
    k = names.index(object_name)
    if objects[k].support not in ("free", "hinge"):
        raise InvalidModelError("the loaded object must have a free or hinge support", where=object_name)
    base = objects[k].external_wrench.copy()
    if step % resolution or limit % resolution:
        raise InvalidModelError("step and limit must be multiples of the resolution")
    levels = []
    q_warm = [None]

    def probe(units: int):
        load = units * resolution
        objs = list(objects)
        w = base.copy()
        w[:3] += load * direction
        objs[k] = replace(objs[k], external_wrench=w)
        try:
            res = solve_equilibrium(hand, network, commands, objs, opts, q0=q_warm[0])
        except DivergedError:
            levels.append((load, False, "diverged", {}))
            return False, "diverged"
        q_warm[0] = res.q
        ok = res.held and res.failure_mode not in ("tension_capacity", "slip")
        mode = "none" if ok else res.failure_mode
        levels.append((load, ok, mode, dict(res.actuator_tensions)))
        return ok, mode

    ok, mode = probe(0)
    if not ok:
        return LoadResult(0.0, mode, levels)
    per = int(round(step / resolution))
    top = int(round(limit / resolution))
    good, bad, bad_mode = 0, None, "none"
    u = per
    while u <= top:
        ok, mode = probe(u)
        if not ok:
            bad, bad_mode = u, mode
            break
        good = u
        u += per
    if bad is None:
        return LoadResult(good * resolution, "none", levels)
    while bad - good > 1:
        mid = (good + bad) // 2
        ok, mode = probe(mid)
        if ok:
            good = mid
        else:
            bad, bad_mode = mid, mode
    return LoadResult(good * resolution, bad_mode, levels)

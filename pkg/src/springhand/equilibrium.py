"""Quasi-static equilibrium of the hand under actuator commands and contacts.

The posture minimizes the elastic energy of the joints minus the work of
tension-commanded tendons, subject to the range of motion, to the
length-commanded tendons (inextensible, so a tendon reeled in by l forces
an excursion of at least l) and to non-penetration of every surface sample.
A length servo that would need more than its tension capacity yields: its
shortfall s is priced at capacity * s, so the tendon force never exceeds
capacity and the servo slips instead.

The non-penetration constraint is linearized at each iterate, giving a
sequence of convex QPs (damped steps, full step once the step is small).

Contact forces at the solved posture are then recovered with friction: the
minimum-norm set of friction-cone forces, tendon tensions (up to capacity)
and range-of-motion reactions that balances every DOF exactly and balances
every object that is not fixed to the world. If no such set exists the
grasp is not held, and the failure is attributed to tendon capacity when
removing the capacity bound would make it feasible, and to slip otherwise.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .contact import PALM, ContactPoint, sample_sites, site_owner, site_positions
from .errors import ContactInfeasibleError, DivergedError, InvalidModelError
from .hand import HandModel, forward_kinematics
from .kinematics import tangent_basis
from .qp import QPInfeasible, solve_qp
from .tendons import TendonNetwork, actuator_arm_matrix, distribute_tension, tension_stiffening

FAILURE_MODES = ("none", "tension_capacity", "slip", "rom_limit")


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-8  # Nm, stationarity residual
    max_iter: int = 5000
    damping: float = 0.5  # backtracking factor of the line search
    cone_edges: int = 8
    penetration_tol: float = 1e-5  # m
    contact_margin: float = 0.03  # m, samples this close are linearized
    max_step: float = 0.15  # rad, longest step taken per iteration

    @classmethod
    def from_dict(cls, d: dict | None) -> "SolverOptions":
        d = dict(d or {})
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise InvalidModelError(f"unknown solver options {sorted(extra)}", where="options")
        opts = cls(**d)
        if not (opts.tolerance > 0 and opts.max_iter >= 1 and 0 < opts.damping < 1
                and opts.cone_edges >= 3 and opts.penetration_tol >= 0):
            raise InvalidModelError("solver options out of range", where="options")
        return opts

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class EquilibriumResult:
    q: np.ndarray
    converged: bool
    residual: float
    iterations: int
    failure_mode: str
    held: bool
    actuator_tensions: dict[str, float]
    branch_tensions: dict[str, float]
    slack: dict[str, float]
    contacts: list[ContactPoint]
    object_offsets: dict[str, float]  # m, slider objects
    rom_reactions: np.ndarray
    stiffness: np.ndarray
    dof_names: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "residual": self.residual,
            "iterations": self.iterations,
            "failure_mode": self.failure_mode,
            "held": self.held,
            "q_deg": {n: math.degrees(v) for n, v in zip(self.dof_names, self.q)},
            "actuator_tensions": self.actuator_tensions,
            "branch_tensions": self.branch_tensions,
            "slack": self.slack,
            "object_offsets": self.object_offsets,
            "contacts": [c.to_dict() for c in self.contacts],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def check_commands(network: TendonNetwork, commands: dict | None) -> dict[str, float]:
    commands = dict(commands or {})
    ids = network.actuator_ids
    for k in commands:
        if k not in ids:
            raise InvalidModelError(f"command for unknown actuator {k!r}", where="commands")
    out = {}
    for a in network.actuators:
        v = float(commands.get(a.id, 0.0))
        if not math.isfinite(v):
            raise InvalidModelError(f"command {v!r} is not finite", where=a.id)
        if a.mode == "tension" and not 0.0 <= v <= a.tension_capacity:
            raise InvalidModelError(f"tension command {v} N outside [0, {a.tension_capacity}]", where=a.id)
        if a.mode == "length" and not a.excursion_limits[0] <= v <= a.excursion_limits[1]:
            raise InvalidModelError(f"length command {v} m outside {list(a.excursion_limits)}", where=a.id)
        out[a.id] = v
    return out


def effective_stiffness(hand: HandModel, network: TendonNetwork, commands: dict[str, float]) -> np.ndarray:
    tensions = {a.id: commands[a.id] for a in network.actuators if a.mode == "tension"}
    return hand.base_stiffness + tension_stiffening(network, hand, distribute_tension(network, tensions))


def cone_edges(normal, mu: float, n_edges: int) -> np.ndarray:
    """Edges of the polyhedral cone inscribed in the friction cone, (n_edges, 3)."""
    t1, t2 = tangent_basis(normal)
    ang = 2.0 * np.pi * np.arange(n_edges) / n_edges
    return normal[None, :] + mu * (np.cos(ang)[:, None] * t1 + np.sin(ang)[:, None] * t2)


class _Problem:
    """Variables z = [q (n), slider offsets u (one per slider object)].

    ``saturated`` holds the length actuators whose servo has reached its
    capacity; they pull with exactly that capacity and drop their length
    constraint.
    """

    def __init__(self, hand, network, commands, objects, opts):
        self.hand, self.network, self.objects, self.opts = hand, network, list(objects), opts
        self.commands = commands
        n = hand.n_dof
        self.n = n
        M = actuator_arm_matrix(network, hand)
        self.M = M
        self.len_idx = [i for i, a in enumerate(network.actuators) if a.mode == "length"]
        self.ten_idx = [i for i, a in enumerate(network.actuators) if a.mode == "tension"]
        self.movers = [k for k, o in enumerate(self.objects) if o.support == "slider"]
        self.K = effective_stiffness(hand, network, commands)
        self.nz = n + len(self.movers)
        self.caps = np.array([network.actuators[i].tension_capacity for i in self.len_idx])
        T = np.array([commands[network.actuators[i].id] for i in self.ten_idx])
        self.tau_t = M[self.ten_idx].T @ T if self.ten_idx else np.zeros(n)
        self.ell = np.array([commands[network.actuators[i].id] for i in self.len_idx])
        self.Ml = M[self.len_idx] if self.len_idx else np.zeros((0, n))
        kobj = np.array([self.objects[k].stiffness for k in self.movers])
        fobj = np.array([_axial_load(self.objects[k]) for k in self.movers])
        self.Hd = np.concatenate([self.K, kobj])
        self.rest = hand.rest
        self.a_base = np.concatenate([self.K * self.rest + self.tau_t, fobj])
        self.sites = sample_sites(hand)
        self.on_hand = np.array([s.chain != PALM for s in self.sites], dtype=bool)
        self.lo, self.hi = hand.rom_lower, hand.rom_upper
        self.saturated: set[int] = set()
        self.local = False
        self.nu = 1.0  # N, penalty weight of the merit function
        self._contact_mult: dict = {}

    def gradient(self, z):
        return self.Hd * z - self.linear_term()

    def merit_parts(self, z):
        """Energy (saturated servos as dead loads) and total violation of
        servo lengths and contacts."""
        energy = 0.5 * float(z @ (self.Hd * z)) - float(self.linear_term() @ z)
        q, u = self.split(z)
        held = [j for j in range(len(self.len_idx)) if j not in self.saturated]
        short = float(np.sum(np.maximum(self.ell[held] - self.excursions(q)[held], 0.0)))
        if not self.sites or not self.objects:
            return energy, short
        pts = site_positions(forward_kinematics(self.hand, q), self.sites)
        pen = short
        for k, o in enumerate(self.placed_objects(u)):
            d = np.maximum(-o.signed_distance(pts)[0], 0.0)
            if k not in self.movers:
                d = d[self.on_hand]  # palm against an immovable object: nothing can change it
            pen += float(np.sum(d))
        return energy, pen

    def linear_term(self):
        a = self.a_base.copy()
        for j in self.saturated:
            a[:self.n] += self.caps[j] * self.Ml[j]
        return a

    def split(self, z):
        return z[:self.n], z[self.n:]

    def excursions(self, q):
        return self.Ml @ (q - self.rest)

    def placed_objects(self, u):
        objs = list(self.objects)
        for j, k in enumerate(self.movers):
            objs[k] = objs[k].moved(u[j] * objs[k].axis)
        return objs

    def min_separation(self, z) -> float:
        if not self.sites or not self.objects:
            return math.inf
        q, u = self.split(z)
        pts = site_positions(forward_kinematics(self.hand, q), self.sites)
        return min(float(np.min(o.signed_distance(pts)[0])) for o in self.placed_objects(u))

    def contact_rows(self, z, margin):
        """Linearized separation of every sample within ``margin`` of an object."""
        q, u = self.split(z)
        pose = forward_kinematics(self.hand, q)
        pts = site_positions(pose, self.sites) if self.sites else np.zeros((0, 3))
        objs = self.placed_objects(u)
        rows, phis, meta = [], [], []
        for k, obj in enumerate(objs):
            if not len(pts):
                break
            phi, nrm = obj.signed_distance(pts)
            for si in np.nonzero(phi <= margin)[0]:
                s = self.sites[si]
                g = np.zeros(self.nz)
                J = None
                if s.chain != PALM:
                    J = pose.jacobian(s.chain, s.link, pts[si])
                    g[:self.n] = nrm[si] @ J
                if k in self.movers:
                    g[self.n + self.movers.index(k)] = -float(nrm[si] @ obj.axis)
                rows.append(g)
                phis.append(phi[si])
                meta.append((int(si), k, pts[si], nrm[si], J, obj))
        self._pose = pose
        return np.array(rows).reshape(-1, self.nz), np.array(phis), meta

    def hessian(self, G, phi, meta, mult):
        """Hessian of the Lagrangian with the previous contact multipliers.

        Contact curvature can make it indefinite. Motion across the pressing
        contacts is then damped by rho*|P dz|^2, P the projector onto their
        normals; it vanishes at a fixed point and so leaves the solution
        alone. Whatever indefiniteness is left is clipped."""
        H = np.diag(self.Hd)
        pressing = []
        for r, ((si, k, p, nrm, J, obj), lam) in enumerate(zip(meta, mult)):
            if lam <= 0.0:
                continue
            pressing.append(r)
            s = self.sites[si]
            # d2(phi)/dz2 = T' D T + kinematic curvature, T = d(point - object)/dz
            D = obj.distance_hessian(p)
            T = np.zeros((3, self.nz))
            if J is not None:
                T[:, :self.n] = J
            if k in self.movers:
                T[:, self.n + self.movers.index(k)] = -obj.axis
            Hc = T.T @ D @ T
            if s.chain != PALM:
                Hc[:self.n, :self.n] += self._pose.point_curvature(s.chain, s.link, p, nrm)
            H -= lam * Hc
        H = 0.5 * (H + H.T)
        floor = 0.1 * float(np.min(self.Hd))
        w = np.linalg.eigvalsh(H)
        if w[0] < floor and pressing:
            # penalty on the row space of the pressing contacts, orthonormalized
            _, sv, Vt = np.linalg.svd(G[pressing], full_matrices=False)
            r = sv > 1e-8 * sv[0]
            P = Vt[r].T @ Vt[r]
            base = H.copy()
            rho = 2.0 * (floor - w[0])
            for _ in range(4):
                H = base + rho * P
                if np.linalg.eigvalsh(H)[0] >= floor:
                    break
                rho *= 10.0
        w, V = np.linalg.eigh(H)
        if w[0] < floor:
            H = (V * np.maximum(w, floor)) @ V.T
            H = 0.5 * (H + H.T)
        return H

    def _qp(self, z, G, phi, H):
        n = self.n
        q, _ = self.split(z)
        grad = self.gradient(z)
        C, b, kinds = [], [], []
        I = np.eye(self.nz)
        C.append(I[:n]); b.append(self.lo - q); kinds += [("rom_lo", i) for i in range(n)]
        C.append(-I[:n]); b.append(q - self.hi); kinds += [("rom_hi", i) for i in range(n)]
        held = [j for j in range(len(self.len_idx)) if j not in self.saturated]
        if held:
            rows = np.zeros((len(held), self.nz))
            rows[:, :n] = self.Ml[held]
            C.append(rows)
            b.append(self.ell[held] - self.excursions(q)[held])
            kinds += [("length", j) for j in held]
        if len(phi):
            C.append(G); b.append(-phi); kinds += [("contact", j) for j in range(len(phi))]
        C = np.vstack(C)
        b = np.concatenate(b)
        # rows with no direction (palm against a fixed object) must hold as they are
        flat = np.linalg.norm(C, axis=1) == 0.0
        if np.any(b[flat] > self.opts.penetration_tol):
            raise ContactInfeasibleError("an object penetrates the palm and nothing lets it move")
        keep = ~flat
        try:
            res = solve_qp(H, -grad, C[keep], b[keep], tol=1e-9)
        except QPInfeasible as exc:
            raise ContactInfeasibleError(f"contact constraints admit no configuration: {exc}") from None
        mult = np.zeros(len(b))
        mult[keep] = res.ineq_multipliers
        return res.x, mult, kinds

    def _needs_saturation(self, z, G, phi, Hq) -> set[int]:
        """Held servos that cannot reach their length: re-solve with each
        length constraint relaxed by a shortfall priced at its capacity."""
        n = self.n
        q, _ = self.split(z)
        held = [j for j in range(len(self.len_idx)) if j not in self.saturated]
        nh = len(held)
        caps = self.caps[held]
        eps = caps  # N/m: keeps the shortfall bounded without ill-conditioning
        H = np.zeros((self.nz + nh, self.nz + nh))
        H[:self.nz, :self.nz] = Hq
        H[self.nz:, self.nz:] = np.diag(eps)
        grad = np.concatenate([self.gradient(z), caps])
        I = np.eye(self.nz + nh)
        C = [I[:n], -I[:n], I[self.nz:]]
        b = [self.lo - q, q - self.hi, np.zeros(nh)]
        rows = np.zeros((nh, self.nz + nh))
        rows[:, :n] = self.Ml[held]
        rows[:, self.nz:] = np.eye(nh)
        C.append(rows)
        b.append(self.ell[held] - self.excursions(q)[held])
        if len(phi):
            C.append(np.hstack([G, np.zeros((len(phi), nh))]))
            b.append(-phi)
        C = np.vstack(C)
        b = np.concatenate(b)
        keep = np.linalg.norm(C, axis=1) > 0.0
        try:
            res = solve_qp(H, -grad, C[keep], b[keep], tol=1e-9)
        except QPInfeasible as exc:
            raise ContactInfeasibleError(f"contact constraints admit no configuration: {exc}") from None
        short = res.x[self.nz:]
        return {j for j, v in zip(held, short) if v > 1e-12}

    def corrected_step(self, z, dz):
        """Step whose linearized contacts are shifted by the curvature error
        seen at ``z + dz`` (None when that QP has no solution)."""
        G, phi, meta, H = self._last
        if not len(phi):
            return None
        q, u = self.split(z + dz)
        pts = site_positions(forward_kinematics(self.hand, q), self.sites)
        objs = self.placed_objects(u)
        trial = np.array([objs[k].signed_distance(pts[si])[0][0] for si, k, *_ in meta])
        try:
            fix, _, _ = self._qp(z, G, phi + (trial - phi - G @ dz), H)
        except ContactInfeasibleError:
            return None
        return fix

    def step_qp(self, z, margin):
        G, phi, meta = self.contact_rows(z, margin)
        # curvature only near a solution, where the multipliers mean something
        prev = self._contact_mult if self.local else {}
        lam = [prev.get((m[0], m[1]), 0.0) for m in meta]
        H = self.hessian(G, phi, meta, lam)
        for _ in range(4 * len(self.len_idx) + 2):
            try:
                dz, mult, kinds = self._qp(z, G, phi, H)
            except ContactInfeasibleError:
                more = self._needs_saturation(z, G, phi, H)
                if not more:
                    raise
                self.saturated |= more
                continue
            changed = False
            for (kind, j), m in zip(kinds, mult):
                if kind == "length" and m > self.caps[j] * (1.0 + 1e-12):
                    self.saturated.add(j)
                    changed = True
            e_new = self.excursions(z[:self.n] + dz[:self.n])
            for j in sorted(self.saturated):
                if e_new[j] > self.ell[j] + 1e-12:
                    self.saturated.discard(j)
                    changed = True
            if not changed:
                break
        self._last = (G, phi, meta, H)
        cm = mult[[i for i, kd in enumerate(kinds) if kd[0] == "contact"]]
        self._contact_mult = {(m[0], m[1]): float(v) for m, v in zip(meta, cm)}
        # what the step leaves of the true stationarity condition
        self.kkt_residual = float(np.max(np.abs(H @ dz), initial=0.0))
        return dz, mult, kinds


CURVATURE_BELOW = 1e-2  # rad; step size under which contact curvature is used
STEP_TOL = 1e-8  # rad; converged steps are at most this long


def _axial_load(obj) -> float:
    """External load along the support's free direction (N, or Nm for a hinge)."""
    w = obj.external_wrench
    return float(obj.axis @ (w[3:] if obj.support == "hinge" else w[:3]))


def _rom_rows(kinds, mult, n):
    rho = np.zeros(n)
    for (kind, i), m in zip(kinds, mult):
        if kind == "rom_lo":
            rho[i] += m
        elif kind == "rom_hi":
            rho[i] -= m
    return rho


def solve_equilibrium(hand: HandModel, network: TendonNetwork, commands=None, objects=(), options=None,
                      q0=None) -> EquilibriumResult:
    opts = options if isinstance(options, SolverOptions) else SolverOptions.from_dict(options)
    cmds = check_commands(network, commands)
    prob = _Problem(hand, network, cmds, objects, opts)
    n, nl = prob.n, len(prob.len_idx)

    z = np.zeros(prob.nz)
    start = hand.rest if q0 is None else hand.check_configuration(q0)
    z[:n] = np.clip(start, prob.lo, prob.hi)

    residual = math.inf
    for it in range(1, opts.max_iter + 1):
        dz, mult, kinds = prob.step_qp(z, opts.contact_margin)
        residual = prob.kkt_residual
        size = float(np.max(np.abs(dz), initial=0.0))
        if size <= STEP_TOL and residual <= opts.tolerance:
            z = z + dz
            break
        # backtracking on energy + nu * penetration keeps the iterate going
        # downhill, so unstable balance points are left rather than polished
        prob.nu = max(prob.nu, 2.0 * float(np.max(mult, initial=0.0)))
        e0, v0 = prob.merit_parts(z)
        phi0 = e0 + prob.nu * v0
        slope = float(prob.gradient(z) @ dz) - prob.nu * v0
        slack = 1e-11 * (1.0 + abs(phi0))  # round-off in the merit itself
        alpha = min(1.0, opts.max_step / size)
        if alpha == 1.0:
            e1, v1 = prob.merit_parts(z + dz)
            if e1 + prob.nu * v1 > phi0 + 1e-4 * min(slope, 0.0) + slack:
                # second-order correction: contact curvature, not a bad
                # direction, is what makes a short full step look worse
                fix = prob.corrected_step(z, dz)
                if fix is not None:
                    e2, v2 = prob.merit_parts(z + fix)
                    if e2 + prob.nu * v2 <= phi0 + 1e-4 * min(slope, 0.0) + slack:
                        dz = fix
        while alpha > 1e-12:
            e1, v1 = prob.merit_parts(z + alpha * dz)
            if e1 + prob.nu * v1 <= phi0 + 1e-4 * alpha * min(slope, 0.0) + slack:
                break
            alpha *= opts.damping
        prob.local = alpha == 1.0 and size <= CURVATURE_BELOW
        z = z + alpha * dz
    else:
        raise DivergedError(f"no equilibrium after {opts.max_iter} iterations", residual)

    q, u = prob.split(z)
    q = np.clip(q, prob.lo, prob.hi)  # remove round-off outside the stops
    s = np.maximum(prob.ell - prob.excursions(q), 0.0)
    rom_qp = _rom_rows(kinds, mult, n)
    length_mult = np.zeros(nl)
    for (kind, j), m in zip(kinds, mult):
        if kind == "length":
            length_mult[j] = m

    placed = prob.placed_objects(u)
    contacts = _contacts_at(prob, q, placed, opts.penetration_tol)
    saturated = sorted(prob.saturated)
    for j in range(nl):
        if j not in prob.saturated:
            s[j] = 0.0
    rec = _recover_forces(prob, q, u, s, placed, contacts, saturated, caps=True)
    held = rec is not None
    failure = "none"
    if saturated:
        failure = "tension_capacity"
    if rec is None:
        relaxed = _recover_forces(prob, q, u, s, placed, contacts, saturated, caps=False)
        failure = "tension_capacity" if relaxed is not None else "slip"
        rec = relaxed if relaxed is not None else _frictionless_fallback(prob, contacts, length_mult, rom_qp)
    forces, lam, rho = rec
    for c, f in zip(contacts, forces):
        c.normal_force = float(max(f @ c.normal, 0.0))
        c.tangential_force = f - (f @ c.normal) * c.normal
    if failure == "none" and np.any(np.abs(rom_qp) > 1e-9):
        failure = "rom_limit"

    act_t = {}
    for i, a in enumerate(network.actuators):
        if a.mode == "tension":
            act_t[a.id] = cmds[a.id]
    for j, i in enumerate(prob.len_idx):
        act_t[network.actuators[i].id] = float(lam[j])
    act_t = {a.id: act_t[a.id] for a in network.actuators}
    return EquilibriumResult(
        q=q,
        converged=True,
        residual=residual,
        iterations=it,
        failure_mode=failure,
        held=held,
        actuator_tensions=act_t,
        branch_tensions=distribute_tension(network, act_t),
        slack={network.actuators[i].id: float(s[j]) for j, i in enumerate(prob.len_idx)},
        contacts=contacts,
        object_offsets={prob.objects[k].name: float(u[j]) for j, k in enumerate(prob.movers)},
        rom_reactions=rho,
        stiffness=prob.K.copy(),
        dof_names=hand.dof_names,
    )


def _contacts_at(prob, q, placed, tol):
    pose = forward_kinematics(prob.hand, q)
    pts = site_positions(pose, prob.sites) if prob.sites else np.zeros((0, 3))
    fields_ = [o.signed_distance(pts) for o in placed]
    out = []
    for si, s in enumerate(prob.sites):
        for obj, (phi, nrm) in zip(placed, fields_):
            if phi[si] <= tol:
                out.append(ContactPoint(
                    owner=site_owner(prob.hand, s), chain=s.chain, link=s.link, sample=s.index,
                    object=obj.name, position=pts[si].copy(), normal=nrm[si].copy(),
                    separation=float(phi[si]), mu=obj.mu,
                ))
    return out


ACTIVE_GAP = 1e-12  # m; only samples this close may carry force


def _recover_forces(prob, q, u, s, placed, contacts, saturated, *, caps):
    """Minimum-norm admissible forces at the fixed posture, or None."""
    hand, n, nl = prob.hand, prob.n, len(prob.len_idx)
    pose = forward_kinematics(hand, q)
    E = prob.opts.cone_edges
    active = [k for k, c in enumerate(contacts) if c.separation <= ACTIVE_GAP]
    objs = {o.name: (k, o) for k, o in enumerate(placed)}

    # columns: cone weights per active contact, tendon tensions, rom reactions
    cols_hand, cols_obj, kinds = [], [], []
    edges_of = {}
    for k in active:
        c = contacts[k]
        edges = cone_edges(c.normal, c.mu, E)
        edges_of[k] = edges
        J = np.zeros((3, n)) if c.chain == PALM else pose.jacobian(c.chain, c.link, c.position)
        for e in edges:
            cols_hand.append(J.T @ e)
            kinds.append(("contact", k, e))
    taut = []
    for j in range(nl):
        gap = prob.Ml[j] @ (q - prob.rest) - prob.ell[j]
        if gap <= 1e-12 or j in saturated:
            taut.append(j)
    for j in taut:
        cols_hand.append(prob.Ml[j].copy())
        kinds.append(("tendon", j, None))
    for i in range(n):
        if q[i] <= prob.lo[i] + 1e-12:
            col = np.zeros(n); col[i] = 1.0
            cols_hand.append(col); kinds.append(("rom", i, 1.0))
        if q[i] >= prob.hi[i] - 1e-12:
            col = np.zeros(n); col[i] = -1.0
            cols_hand.append(col); kinds.append(("rom", i, -1.0))
    m = len(kinds)

    # equalities: hand stationarity, then balance of each supported-but-movable object
    rows, rhs = [], []
    A_hand = np.array(cols_hand).T.reshape(n, m)
    rows.append(A_hand)
    rhs.append(prob.K * (q - prob.rest) - prob.tau_t)
    for name, (k, obj) in objs.items():
        if obj.support == "fixed":
            continue
        W = np.zeros((6, m))
        for col, (kind, idx, e) in enumerate(kinds):
            if kind == "contact" and contacts[idx].object == name:
                r = contacts[idx].position - obj.position
                W[:3, col] = -e
                W[3:, col] = np.cross(r, -e)
        w = obj.external_wrench.copy()
        if obj.support == "free":
            rows.append(W); rhs.append(-w)
        elif obj.support == "hinge":
            rows.append((obj.axis @ W[3:]).reshape(1, m))
            rhs.append(np.array([-_axial_load(obj)]))
        else:  # slider: spring holds the axial balance
            j = prob.movers.index(k)
            spring = -obj.stiffness * u[j]
            rows.append((obj.axis @ W[:3]).reshape(1, m))
            rhs.append(np.array([-_axial_load(obj) - spring]))
    A = np.vstack(rows)
    c = np.concatenate(rhs)

    lo_rows, lo_b = [np.eye(m)], [np.zeros(m)]
    for col, (kind, j, _) in enumerate(kinds):
        if kind == "tendon":
            cap = prob.caps[j]
            if j in saturated:
                # a slipping servo pulls with exactly its capacity
                row = np.zeros(m); row[col] = 1.0
                lo_rows.append(row[None, :]); lo_b.append(np.array([cap]))
                if caps:
                    lo_rows.append(-row[None, :]); lo_b.append(np.array([-cap]))
            elif caps:
                row = np.zeros(m); row[col] = -1.0
                lo_rows.append(row[None, :]); lo_b.append(np.array([-cap]))
    Cin = np.vstack(lo_rows) if m else np.zeros((0, 0))
    bin_ = np.concatenate(lo_b) if m else np.zeros(0)
    if m == 0:
        return ([np.zeros(3) for _ in contacts], np.zeros(nl), np.zeros(n)) if np.max(np.abs(c), initial=0.0) <= 1e-9 else None
    scale = max(1.0, float(np.max(np.abs(c), initial=0.0)))
    try:
        res = solve_qp(np.eye(m), np.zeros(m), Cin, bin_, A, c, tol=1e-10 * scale)
    except QPInfeasible:
        return None
    x = res.x
    forces = [np.zeros(3) for _ in contacts]
    lam = np.zeros(nl)
    rho = np.zeros(n)
    for col, (kind, idx, e) in enumerate(kinds):
        v = max(x[col], 0.0)
        if kind == "contact":
            forces[idx] = forces[idx] + v * e
        elif kind == "tendon":
            lam[idx] = v
        else:
            rho[idx] += e * v
    return forces, lam, rho


def _frictionless_fallback(prob, contacts, length_mult, rom_qp):
    forces = [np.zeros(3) for _ in contacts]
    return forces, length_mult, rom_qp


def stationarity_residual(result: EquilibriumResult, hand, network, commands) -> float:
    """Largest DOF torque imbalance (Nm) of a result, from its reported forces."""
    cmds = check_commands(network, commands)
    K = effective_stiffness(hand, network, cmds)
    M = actuator_arm_matrix(network, hand)
    T = np.array([result.actuator_tensions[a.id] for a in network.actuators])
    pose = forward_kinematics(hand, result.q)
    gen = M.T @ T + result.rom_reactions
    for c in result.contacts:
        if c.chain != PALM:
            gen = gen + pose.jacobian(c.chain, c.link, c.position).T @ c.force
    return float(np.max(np.abs(K * (result.q - hand.rest) - gen), initial=0.0))


def object_balance_residual(result: EquilibriumResult, objects) -> dict[str, float]:
    """Net force/torque (N, Nm) on each non-fixed object along its free directions."""
    out = {}
    for obj in objects:
        if obj.support == "fixed":
            continue
        pos = obj.position
        if obj.support == "slider":
            pos = pos + result.object_offsets.get(obj.name, 0.0) * obj.axis
        F = obj.external_wrench[:3].copy()
        Tq = obj.external_wrench[3:].copy()
        for c in result.contacts:
            if c.object == obj.name:
                F -= c.force
                Tq += np.cross(c.position - pos, -c.force)
        if obj.support == "free":
            out[obj.name] = float(max(np.max(np.abs(F)), np.max(np.abs(Tq))))
        elif obj.support == "hinge":
            out[obj.name] = float(abs(obj.axis @ Tq))
        else:
            spring = -obj.stiffness * result.object_offsets.get(obj.name, 0.0)
            out[obj.name] = float(abs(obj.axis @ F + spring))
    return out

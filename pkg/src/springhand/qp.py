"""Small dense convex QPs via least-distance programming.

    minimize    1/2 x'Hx - a'x
    subject to  C x >= b,   A x = c

with H symmetric positive definite. Equalities are eliminated on a null-space
basis; the remaining least-distance problem is solved through the
non-negative least-squares dual (Lawson and Hanson, ch. 23), which scipy
provides as ``scipy.optimize.nnls``. Its answer is checked against the
NNLS optimality conditions and recomputed by bounded-variable least squares
when it fails them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, null_space, solve_triangular
from scipy.optimize import lsq_linear, nnls


class QPInfeasible(Exception):
    pass


def _nnls_optimal(A, b, w, tol) -> bool:
    r = A @ w - b
    g = A.T @ r  # gradient of |Aw - b|^2 / 2
    scale = (1.0 + float(np.max(np.abs(A), initial=0.0))) * (1.0 + float(np.linalg.norm(b)))
    return bool(np.all(w >= 0) and np.all(g >= -tol * scale) and abs(float(g @ w)) <= tol * scale
                and np.all(np.isfinite(w)))


def checked_nnls(A, b, maxiter=None, tol: float = 1e-9) -> tuple[np.ndarray, float]:
    """min |Aw - b| over w >= 0, verified: scipy's nnls can stop at a
    non-optimal point, in which case BVLS recomputes the answer."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    w, _ = nnls(A, b, maxiter=maxiter)
    if not _nnls_optimal(A, b, w, tol):
        w = lsq_linear(A, b, bounds=(0.0, np.inf), method="bvls", tol=1e-15).x
        w = np.maximum(w, 0.0)
    return w, float(np.linalg.norm(A @ w - b))


@dataclass
class QPResult:
    x: np.ndarray
    ineq_multipliers: np.ndarray  # >= 0, one per row of C
    eq_multipliers: np.ndarray  # one per row of A
    violation: float  # largest constraint violation


def _ldp(G: np.ndarray, h: np.ndarray, tol: float):
    """min |u| s.t. G u >= h. Returns (u, multipliers)."""
    m, n = G.shape
    if m == 0:
        return np.zeros(n), np.zeros(0)
    norms = np.linalg.norm(G, axis=1)
    flat = norms <= 1e-12 * max(float(norms.max()), 1.0)
    # rows with no direction hold or fail on their own
    if np.any(h[flat] > tol):
        raise QPInfeasible("constant constraint violated")
    live = np.nonzero(~flat)[0]
    mult = np.zeros(m)
    if live.size == 0:
        return np.zeros(n), mult
    scale = norms[live]
    Gs, hs = G[live] / scale[:, None], h[live] / scale
    E = np.vstack([Gs.T, hs[None, :]])
    f = np.zeros(n + 1)
    f[-1] = 1.0
    w, _ = checked_nnls(E, f, maxiter=50 * (live.size + n + 1))
    r = E @ w - f
    if abs(r[-1]) < 1e-13 or not np.all(np.isfinite(r)):
        raise QPInfeasible("constraints admit no point")
    u = -r[:n] / r[-1]
    mult[live] = -w / r[-1] / scale
    return u, mult


def _polish(H, a, C, b, mult, y):
    """Re-solve the KKT system on the rows the dual marked active.

    The nnls dual can leave a small primal violation on badly scaled sets;
    an exact solve on the active rows removes it when the set is right.
    """
    act = np.nonzero(mult > 0)[0]
    k, m = H.shape[0], act.size
    K = np.zeros((k + m, k + m))
    K[:k, :k] = H
    K[:k, k:] = -C[act].T
    K[k:, :k] = C[act]
    sol, *_ = np.linalg.lstsq(K, np.concatenate([a, b[act]]), rcond=None)
    lam = sol[k:]
    if np.any(lam < -1e-9 * max(1.0, float(np.max(np.abs(lam), initial=0.0)))):
        return y, mult
    out = np.zeros_like(mult)
    out[act] = np.maximum(lam, 0.0)
    return sol[:k], out


def solve_qp(H, a, C=None, b=None, A=None, c=None, *, tol: float = 1e-9, relax: float = 1e-13,
             _scaled: bool = False) -> QPResult:
    H = np.atleast_2d(np.asarray(H, dtype=float))
    a = np.asarray(a, dtype=float)
    n = a.size
    C = np.zeros((0, n)) if C is None else np.asarray(C, dtype=float).reshape(-1, n)
    b = np.zeros(0) if b is None else np.asarray(b, dtype=float).reshape(-1)
    A = np.zeros((0, n)) if A is None else np.asarray(A, dtype=float).reshape(-1, n)
    c = np.zeros(0) if c is None else np.asarray(c, dtype=float).reshape(-1)

    # Jacobi scaling keeps the Cholesky factor well conditioned
    d = np.sqrt(np.maximum(np.abs(np.diag(H)), 1e-300))
    if not _scaled and not np.allclose(d, 1.0, rtol=0, atol=1e-15):
        res = solve_qp(H / np.outer(d, d), a / d, C / d[None, :], b, A / d[None, :], c, tol=tol, relax=relax, _scaled=True)
        return QPResult(x=res.x / d, ineq_multipliers=res.ineq_multipliers,
                        eq_multipliers=res.eq_multipliers, violation=res.violation)

    # equality elimination: x = x0 + Z y
    if A.shape[0]:
        x0, *_ = np.linalg.lstsq(A, c, rcond=None)
        eq_err = float(np.max(np.abs(A @ x0 - c)))
        if eq_err > tol * max(1.0, float(np.max(np.abs(c)))):
            raise QPInfeasible(f"equality constraints inconsistent (residual {eq_err:.3e})")
        Z = null_space(A)
    else:
        x0 = np.zeros(n)
        Z = np.eye(n)

    k = Z.shape[1]
    if k == 0:
        x = x0
        viol = float(np.max(b - C @ x, initial=0.0))
        if viol > tol:
            raise QPInfeasible("equalities fix the point and it violates an inequality")
        mult = np.zeros(C.shape[0])
    else:
        Hr = Z.T @ H @ Z
        ar = Z.T @ (a - H @ x0)
        Cr = C @ Z
        br = b - C @ x0
        L = np.linalg.cholesky(0.5 * (Hr + Hr.T))
        # u = L'y - L^{-1} ar ;  y = L'^{-1}(u + L^{-1} ar)
        Linv_ar = solve_triangular(L, ar, lower=True)
        G = solve_triangular(L, Cr.T, lower=True).T  # Cr L'^{-1}
        # relax by the tolerance so that round-off in the elimination cannot
        # turn a feasible but degenerate set into an empty one
        h = br - G @ Linv_ar - relax
        u, mult = _ldp(G, h, tol)
        y = solve_triangular(L.T, u + Linv_ar, lower=False)
        x = x0 + Z @ y
        viol = float(np.max(b - C @ x, initial=0.0))
        lim = tol * max(1.0, float(np.max(np.abs(b), initial=0.0)))
        if viol > lim:
            y, mult = _polish(Hr, ar, Cr, br, mult, y)
            x = x0 + Z @ y
            viol = float(np.max(b - C @ x, initial=0.0))
        if viol > lim:
            raise QPInfeasible(f"inequality violation {viol:.3e} after solve")

    if A.shape[0]:
        grad = H @ x - a - C.T @ mult
        eq_mult, *_ = np.linalg.lstsq(A.T, grad, rcond=None)
    else:
        eq_mult = np.zeros(0)
    viol = max(float(np.max(b - C @ x, initial=0.0)), float(np.max(np.abs(A @ x - c), initial=0.0)))
    return QPResult(x=x, ineq_multipliers=mult, eq_multipliers=eq_mult, violation=viol)


def solve_diagonal_qp(kdiag, a, C=None, b=None, **kw) -> QPResult:
    return solve_qp(np.diag(np.asarray(kdiag, dtype=float)), a, C, b, **kw)

"""Independent reference computations used by the tests."""
import math

import numpy as np


def series_compliance_by_energy(compliances, torque=1.0):
    # the same torque passes through every element; each stores c t^2 / 2
    energy = math.fsum(0.5 * c * torque**2 for c in compliances)
    return 2.0 * energy / torque**2


def parallel_compliance_by_energy(compliances, deflection=1.0):
    # every element turns by the same angle; each stores theta^2 / (2 c)
    energy = math.fsum(0.5 * deflection**2 / c for c in compliances)
    return deflection**2 / (2.0 * energy)


def planar_two_link_grid(L1, L2, K, tau, obj, h=1e-3, hi=math.radians(100)):
    """Posture of a planar two-link finger (fingertip sample only) pressed
    against ``obj``, by exhaustive search on an ``h`` grid of the joint
    angles: the grid point with the smallest equilibrium residual, where a
    point within one grid step of the surface may carry a normal force."""
    g = np.arange(0.0, hi + h / 2, h)
    a, b = np.meshgrid(g, g, indexing="ij")
    x = L1 * np.cos(a) + L2 * np.cos(a + b)
    z = L1 * np.sin(a) + L2 * np.sin(a + b)
    P = np.stack([x, np.zeros_like(x), z], -1).reshape(-1, 3)
    phi, nrm = obj.signed_distance(P)
    phi = phi.reshape(a.shape)
    nrm = nrm.reshape(a.shape + (3,))
    g1 = K[0] * a - tau[0]
    g2 = K[1] * b - tau[1]
    # generalized normal force per newton
    n1 = nrm[..., 0] * (-z) + nrm[..., 2] * x
    n2 = nrm[..., 0] * (-L2 * np.sin(a + b)) + nrm[..., 2] * (L2 * np.cos(a + b))
    free = np.maximum(abs(g1), abs(g2))
    lam = np.maximum((g1 * n1 + g2 * n2) / np.maximum(n1 * n1 + n2 * n2, 1e-300), 0.0)
    touching = np.maximum(abs(g1 - lam * n1), abs(g2 - lam * n2))
    band = np.abs(phi) <= np.sqrt(n1**2 + n2**2) * h
    res = np.where(band, np.minimum(touching, free), np.where(phi > 0, free, np.inf))
    i = np.unravel_index(np.argmin(res), res.shape)
    return np.array([g[i[0]], g[i[1]]])


def finite_difference_jacobian(f, q, eps=1e-7):
    q = np.asarray(q, dtype=float)
    f0 = np.asarray(f(q))
    J = np.zeros((f0.size, q.size))
    for i in range(q.size):
        dq = np.zeros_like(q)
        dq[i] = eps
        J[:, i] = (np.asarray(f(q + dq)) - np.asarray(f(q - dq))).ravel() / (2 * eps)
    return J

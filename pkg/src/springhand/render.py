"""Static SVG of a hand posture: top (x-y) and side (x-z) orthographic views.

Links are drawn joint to joint, joints as circles, loadcell sites as squares,
objects as projected outlines and every loaded contact as an arrow of the
force the hand applies (``force_scale`` metres per newton, capped at
``max_arrow``). Output bytes depend only on the inputs.
"""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .hand import forward_kinematics

PX_PER_M = 2000.0
VIEW = {  # palm-frame window of each panel, m
    "x": (-0.02, 0.22),
    "y": (-0.09, 0.11),
    "z": (-0.07, 0.13),
}
MARGIN = 30.0
COLORS = {"thumb": "#c0392b", "index": "#2471a3", "middle": "#229954", "ring": "#b9770e", "little": "#7d3c98"}


def _fmt(v: float) -> str:
    s = "%.2f" % v
    return "0.00" if s == "-0.00" else s


class _Panel:
    def __init__(self, vert: str, left: float, top: float):
        self.vert = vert
        self.left, self.top = left, top
        self.w = (VIEW["x"][1] - VIEW["x"][0]) * PX_PER_M
        self.h = (VIEW[vert][1] - VIEW[vert][0]) * PX_PER_M

    def xy(self, p) -> tuple[float, float]:
        i = 1 if self.vert == "y" else 2
        u = self.left + (p[0] - VIEW["x"][0]) * PX_PER_M
        v = self.top + (VIEW[self.vert][1] - p[i]) * PX_PER_M
        return u, v

    def pts(self, P) -> str:
        return " ".join(f"{_fmt(u)},{_fmt(v)}" for u, v in (self.xy(p) for p in P))


def _outline(obj, panel: _Panel) -> list[np.ndarray] | None:
    """Projected outline points of an object (palm frame)."""
    if obj.shape == "sphere":
        return None
    R, c = obj.rotation, obj.position
    if obj.shape == "box":
        h = 0.5 * np.asarray(obj.extents)
        corners = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]) * h
        return [c + R @ k for k in corners]
    ang = np.linspace(0.0, 2.0 * np.pi, 24, endpoint=False)
    ring = np.stack([obj.radius * np.cos(ang), obj.radius * np.sin(ang), np.zeros_like(ang)], axis=1)
    out = []
    for z in (-0.5 * obj.length, 0.5 * obj.length):
        out += [c + R @ (p + [0.0, 0.0, z]) for p in ring]
    return out


def _hull(points2d: np.ndarray) -> np.ndarray:
    try:
        return points2d[ConvexHull(points2d).vertices]
    except (QhullError, ValueError):
        return points2d


def render_scene(result, hand, objects=(), *, title: str = "", force_scale: float = 0.0005,
                 max_arrow: float = 0.05) -> str:
    pose = forward_kinematics(hand, result.q)
    top = _Panel("y", MARGIN, MARGIN + 20.0)
    side = _Panel("z", 2 * MARGIN + top.w, MARGIN + 20.0)
    width = 3 * MARGIN + top.w + side.w
    height = 2 * MARGIN + 20.0 + max(top.h, side.h)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}" font-family="sans-serif" font-size="11">',
        '<rect width="100%" height="100%" fill="white"/>',
        '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" '
        'orient="auto-start-reverse"><path d="M0,0 L10,5 L0,10 z" fill="#d35400"/></marker></defs>',
    ]
    if title:
        out.append(f'<text x="{_fmt(MARGIN)}" y="{_fmt(MARGIN)}" font-size="13">{escape(title)}</text>')
    for panel, label in ((top, "top view (x right, y up)"), (side, "side view (x right, z up)")):
        out.append(f'<g class="panel-{panel.vert}">')
        out.append(f'<rect x="{_fmt(panel.left)}" y="{_fmt(panel.top)}" width="{_fmt(panel.w)}" '
                   f'height="{_fmt(panel.h)}" fill="none" stroke="#bbb"/>')
        out.append(f'<text x="{_fmt(panel.left + 4)}" y="{_fmt(panel.top + 14)}" fill="#666">{label}</text>')
        # palm
        if panel.vert == "y":
            poly = [[x, y, 0.0] for x, y in hand.palm.outline]
            out.append(f'<polygon points="{panel.pts(poly)}" fill="#f2f3f4" stroke="#888"/>')
        else:
            xs = hand.palm.outline[:, 0]
            zt = float(np.max(hand.palm.samples[:, 2])) if len(hand.palm.samples) else 0.0
            (u0, v0), (u1, v1) = panel.xy([xs.min(), 0, zt]), panel.xy([xs.max(), 0, 0.0])
            out.append(f'<rect x="{_fmt(u0)}" y="{_fmt(v0)}" width="{_fmt(u1 - u0)}" height="{_fmt(v1 - v0)}" '
                       f'fill="#f2f3f4" stroke="#888"/>')
        # objects
        for obj in objects:
            if obj.shape == "sphere":
                u, v = panel.xy(obj.position)
                out.append(f'<circle class="object" cx="{_fmt(u)}" cy="{_fmt(v)}" '
                           f'r="{_fmt(obj.radius * PX_PER_M)}" fill="#d6eaf8" fill-opacity="0.6" stroke="#5d6d7e"/>')
            else:
                P = np.array([panel.xy(p) for p in _outline(obj, panel)])
                H = _hull(P)
                pts = " ".join(f"{_fmt(u)},{_fmt(v)}" for u, v in H)
                out.append(f'<polygon class="object" points="{pts}" fill="#d6eaf8" fill-opacity="0.6" stroke="#5d6d7e"/>')
        # chains
        for ci, chain in enumerate(hand.chains):
            J = pose.joint_positions(ci)
            color = COLORS.get(chain.name, "#333")
            out.append(f'<polyline class="chain" points="{panel.pts(J)}" fill="none" stroke="{color}" '
                       f'stroke-width="4" stroke-linecap="round" stroke-linejoin="round"/>')
            for p in J[:-1]:
                u, v = panel.xy(p)
                out.append(f'<circle class="joint" cx="{_fmt(u)}" cy="{_fmt(v)}" r="3" fill="white" stroke="{color}"/>')
        # loadcells
        for p in pose.loadcell_positions:
            u, v = panel.xy(p)
            out.append(f'<rect class="loadcell" x="{_fmt(u - 3)}" y="{_fmt(v - 3)}" width="6" height="6" '
                       f'fill="none" stroke="#17202a"/>')
        # contacts
        for c in result.contacts:
            u, v = panel.xy(c.position)
            out.append(f'<circle class="contact" cx="{_fmt(u)}" cy="{_fmt(v)}" r="2" fill="#d35400"/>')
            f = -c.force  # what the hand applies to the object
            mag = float(np.linalg.norm(f))
            if mag <= 1e-9:
                continue
            tip = c.position + f / mag * min(mag * force_scale, max_arrow)
            u1, v1 = panel.xy(tip)
            out.append(f'<line class="force" x1="{_fmt(u)}" y1="{_fmt(v)}" x2="{_fmt(u1)}" y2="{_fmt(v1)}" '
                       f'stroke="#d35400" stroke-width="1.5" marker-end="url(#arrow)"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"

"""Point contacts between hand surface samples and rigid objects."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hand import HandModel, HandPose, forward_kinematics

PALM = -1


@dataclass(frozen=True)
class SampleSite:
    chain: int  # PALM for the palm
    link: int
    index: int
    local: np.ndarray  # link frame, or palm frame for the palm


@dataclass
class ContactPoint:
    """A sample point touching an object.

    ``normal`` is the object's outward normal, so the normal force pushes the
    hand along it; ``tangential_force`` is the friction force on the hand.
    """

    owner: str  # "<chain>.<link index>" or "palm"
    chain: int
    link: int
    sample: int
    object: str
    position: np.ndarray
    normal: np.ndarray
    separation: float
    mu: float
    normal_force: float = 0.0
    tangential_force: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @property
    def force(self) -> np.ndarray:
        """Force of the object on the hand (N)."""
        return self.normal_force * self.normal + self.tangential_force

    def to_dict(self) -> dict:
        return {
            "owner": self.owner,
            "object": self.object,
            "sample": self.sample,
            "position": self.position.tolist(),
            "normal": self.normal.tolist(),
            "separation": self.separation,
            "mu": self.mu,
            "normal_force": self.normal_force,
            "tangential_force": self.tangential_force.tolist(),
        }


def sample_sites(hand: HandModel) -> list[SampleSite]:
    """All contact sample sites in (finger, link, sample) order, palm last."""
    sites = []
    for ci, chain in enumerate(hand.chains):
        for li, link in enumerate(chain.links):
            for si, p in enumerate(link.samples):
                sites.append(SampleSite(ci, li, si, p))
    for si, p in enumerate(hand.palm.samples):
        sites.append(SampleSite(PALM, PALM, si, p))
    return sites


def site_positions(pose: HandPose, sites) -> np.ndarray:
    pts = np.empty((len(sites), 3))
    for k, s in enumerate(sites):
        pts[k] = s.local if s.chain == PALM else pose.point(s.chain, s.link, s.local)
    return pts


def site_owner(hand: HandModel, site: SampleSite) -> str:
    return "palm" if site.chain == PALM else f"{hand.chains[site.chain].name}.{site.link}"


def detect_contacts(hand: HandModel, q, objects, penetration_tol: float = 1e-5) -> list[ContactPoint]:
    """Samples within ``penetration_tol`` of (or inside) any object, ordered
    by finger, link, sample index and then object order."""
    pose = forward_kinematics(hand, q)
    sites = sample_sites(hand)
    if not sites or not objects:
        return []
    pts = site_positions(pose, sites)
    fields = [obj.signed_distance(pts) for obj in objects]
    out = []
    for k, s in enumerate(sites):
        for obj, (phi, nrm) in zip(objects, fields):
            if phi[k] <= penetration_tol:
                out.append(ContactPoint(
                    owner=site_owner(hand, s), chain=s.chain, link=s.link, sample=s.index,
                    object=obj.name, position=pts[k].copy(), normal=nrm[k].copy(),
                    separation=float(phi[k]), mu=obj.mu,
                ))
    return out

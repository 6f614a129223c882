import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from springhand.contact import PALM, ContactPoint
from springhand.equilibrium import EquilibriumResult
from springhand.errors import InvalidModelError
from springhand.grasp import grasp_quality, wrench_hull_margin
from springhand.objects import RigidObject
from springhand.sensors import LoadcellFrame, assign_contacts, contact_event, loadcell_readout


def contact(owner, chain, link, pos, normal, f, mu=0.5):
    return ContactPoint(owner=owner, chain=chain, link=link, sample=0, object="o", position=np.array(pos, float),
                        normal=np.array(normal, float), separation=0.0, mu=mu, normal_force=f)


def result(hand, contacts):
    n = hand.n_dof
    return EquilibriumResult(q=hand.rest, converged=True, residual=0.0, iterations=0, failure_mode="none", held=True,
                             actuator_tensions={}, branch_tensions={}, slack={}, contacts=contacts,
                             object_offsets={}, rom_reactions=np.zeros(n), stiffness=np.ones(n))


def test_fingertip_and_palm_assignment(hand_models):
    hand, _ = hand_models
    cs = [
        contact("index.2", 1, 2, [0.17, 0.027, 0.01], [0, 0, -1], 2.0),
        contact("index.0", 1, 0, [0.11, 0.027, 0.01], [0, 0, -1], 5.0),  # proximal: not instrumented
        contact("palm", PALM, 0, hand.loadcells[0].position, [0, 0, 1], 3.0),
    ]
    idx = assign_contacts(cs, hand)
    assert idx == [hand.loadcells.index(next(c for c in hand.loadcells if c.name == "indextip")), None, 0]
    frame = loadcell_readout(result(hand, cs), hand)
    assert frame["indextip"] == 2.0 and frame["palm1"] == 3.0
    assert frame.channels.sum() == 5.0


@given(st.floats(0.01, 10.0), st.floats(0.0, 20.0))
def test_threshold_is_inclusive(threshold, value):
    frame = LoadcellFrame(names=("a", "b"), channels=np.array([0.0, value]))
    ev = contact_event(frame, threshold)
    assert ev.detected == (value >= threshold)
    assert ev.sites == (("b",) if value >= threshold else ())


def test_threshold_must_be_positive():
    with pytest.raises(InvalidModelError):
        contact_event(LoadcellFrame(names=("a",), channels=np.zeros(1)), 0.0)


def pinch(mu):
    return [contact("a", 0, 2, [0.0, 0.0, 0.01], [0, 0, 1], 1.0, mu),
            contact("b", 1, 2, [0.0, 0.0, -0.01], [0, 0, -1], 1.0, mu)]


def test_soft_finger_pinch_is_force_closed_with_friction():
    assert grasp_quality(pinch(0.8)).force_closure
    assert not grasp_quality(pinch(0.0)).force_closure
    assert not grasp_quality(pinch(0.8), soft=False).force_closure  # a twist about the pinch axis escapes


def test_margin_grows_with_friction():
    margins = [grasp_quality(pinch(mu)).margin for mu in (0.3, 0.6, 0.9)]
    assert margins[0] < margins[1] < margins[2]


def test_hull_margin_sign():
    square = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], float)
    assert wrench_hull_margin(square) == pytest.approx(1.0)
    assert wrench_hull_margin(square + 3.0) < 0


@given(st.floats(-0.05, 0.05), st.floats(-0.05, 0.05), st.floats(-0.05, 0.05))
def test_sphere_distance(x, y, z):
    s = RigidObject("s", "sphere", radius=0.02, position=[0.01, 0.0, 0.0])
    phi, n = s.signed_distance([[x, y, z]])
    d = np.linalg.norm([x - 0.01, y, z])
    assert phi[0] == pytest.approx(d - 0.02, abs=1e-12)
    if d > 1e-9:
        assert np.allclose(n[0], np.array([x - 0.01, y, z]) / d)


@given(st.floats(-0.05, 0.05), st.floats(-0.05, 0.05), st.floats(-0.05, 0.05))
def test_box_distance_outside_matches_clamp(x, y, z):
    b = RigidObject("b", "box", extents=(0.02, 0.04, 0.06))
    p = np.array([x, y, z])
    half = np.array([0.01, 0.02, 0.03])
    outside = np.linalg.norm(np.maximum(np.abs(p) - half, 0.0))
    phi, _ = b.signed_distance(p)
    if outside > 0:
        assert phi[0] == pytest.approx(outside, abs=1e-12)
    else:
        assert phi[0] == pytest.approx(-np.min(half - np.abs(p)), abs=1e-12)


def test_object_dict_round_trip():
    o = RigidObject("k", "box", extents=(0.01, 0.02, 0.03), position=[0.1, 0.0, 0.05], support="hinge",
                    axis=[0, 1, 0], mu=0.7)
    o2 = RigidObject.from_dict(o.to_dict())
    assert o2.extents == o.extents and np.allclose(o2.position, o.position) and o2.support == "hinge"
    with pytest.raises(InvalidModelError):
        RigidObject("bad", "torus")
    with pytest.raises(InvalidModelError):
        RigidObject("s", "box", extents=(1, 1, 1), support="slider")

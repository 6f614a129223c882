import copy

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import finite_difference_jacobian
from springhand.errors import ConfigurationShapeError, InvalidModelError, RomViolationError, SchemaError
from springhand.hand import FINGER_NAMES, LOADCELL_ORDER, forward_kinematics
from springhand.handfile import document_from_models, models_from_document
from springhand.presets import five_finger_document


def test_five_finger_layout_census(hand_models):
    hand, net = hand_models
    assert hand.n_dof == 20
    assert [c.name for c in hand.chains] == list(FINGER_NAMES)
    assert tuple(c.name for c in hand.loadcells) == LOADCELL_ORDER
    assert len(net.actuators) == 8
    modes = {a.id: a.mode for a in net.actuators}
    assert sorted(k for k, m in modes.items() if m == "length") == [
        "index_middle_flexor", "ring_little_flexor", "thumb_flexor", "thumb_opposition"]


def test_rest_pose_fingers_point_distally(hand_models):
    hand, _ = hand_models
    pose = forward_kinematics(hand, hand.rest)
    for ci, chain in enumerate(hand.chains):
        if chain.name == "thumb":
            continue
        length = sum(link.length for link in chain.links)
        assert np.allclose(pose.fingertips[ci], chain.base_position + [length, 0.0, 0.0], atol=1e-12)


def test_flexion_moves_toward_palmar_side(hand_models):
    hand, _ = hand_models
    q = hand.rest.copy()
    q[hand.dof_index("index.MP.flexion")] = np.radians(30.0)
    ci = [c.name for c in hand.chains].index("index")
    assert forward_kinematics(hand, q).fingertips[ci][2] > 0.0


def test_opposition_base_stiffness_is_series_composition(hand_models):
    hand, _ = hand_models
    dof = hand.dofs[hand.dof_index("thumb.CM.opposition")]
    assert dof.compliance == pytest.approx(1346.0, rel=1e-15)


def test_configuration_checks(hand_models):
    hand, _ = hand_models
    with pytest.raises(ConfigurationShapeError):
        forward_kinematics(hand, np.zeros(3))
    q = hand.rest.copy()
    q[hand.dof_index("index.PIP.flexion")] = np.radians(120.0)
    with pytest.raises(RomViolationError):
        hand.check_rom(q)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, 20, elements=st.floats(0.0, 1.0)), st.integers(0, 4), st.integers(0, 2))
def test_point_jacobian_matches_finite_differences(hand_models, frac, chain, link):
    hand, _ = hand_models
    q = hand.rom_lower + frac * (hand.rom_upper - hand.rom_lower)
    local = np.array([0.01, 0.002, 0.008])
    J = forward_kinematics(hand, q).jacobian(chain, link, forward_kinematics(hand, q).point(chain, link, local))
    fd = finite_difference_jacobian(lambda x: forward_kinematics(hand, x).point(chain, link, local), q)
    assert np.allclose(J, fd, atol=1e-7)


def test_document_round_trip(hand_models):
    hand, net = hand_models
    doc = document_from_models(hand, net, name="copy")
    hand2, net2 = models_from_document(doc)
    assert hand2.dof_names == hand.dof_names
    assert np.allclose(hand2.base_stiffness, hand.base_stiffness, rtol=1e-12)
    assert np.allclose(hand2.rom_upper, hand.rom_upper, rtol=1e-12)
    assert net2.actuator_ids == net.actuator_ids
    assert net2.path_ids == net.path_ids


def test_per_spring_reading_of_thumb_pair():
    hand, _ = models_from_document(five_finger_document(cm_pair="per_spring"))
    dof = hand.dofs[hand.dof_index("thumb.CM.opposition")]
    assert dof.compliance == pytest.approx(903.0 / 2 + 443.0, rel=1e-15)


def test_stiffness_units_mode_reads_nm_per_deg():
    doc = five_finger_document()
    doc["units_mode"] = "stiffness"
    doc["springs"] = {k: 1.0 / v for k, v in doc["springs"].items()}
    hand, _ = models_from_document(doc)
    ref, _ = models_from_document(five_finger_document())
    assert np.allclose(hand.base_stiffness, ref.base_stiffness, rtol=1e-12)


def test_schema_errors_name_the_field():
    doc = five_finger_document()
    del doc["springs"]
    with pytest.raises(SchemaError, match="springs"):
        models_from_document(doc)
    doc = five_finger_document()
    doc["schema_version"] = 99
    with pytest.raises(SchemaError, match="schema_version"):
        models_from_document(doc)


def test_five_finger_layout_rejects_missing_finger():
    doc = copy.deepcopy(five_finger_document())
    doc["chains"] = [c for c in doc["chains"] if c["name"] != "little"]
    with pytest.raises((InvalidModelError, SchemaError)):
        models_from_document(doc)


def test_bad_spring_value_names_the_spring():
    doc = five_finger_document()
    doc["springs"]["finger_pip"] = -5.0
    with pytest.raises(InvalidModelError, match="finger_pip"):
        models_from_document(doc)

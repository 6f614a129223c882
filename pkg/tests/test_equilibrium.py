import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from springhand.equilibrium import (
    SolverOptions,
    object_balance_residual,
    solve_equilibrium,
    stationarity_residual,
)
from springhand.errors import InvalidModelError
from springhand.handfile import models_from_document
from springhand.objects import RigidObject
from springhand.presets import planar_finger_document


def finger(c=(500.0,), r=(0.008,), L=(0.04,), **kw):
    return models_from_document(planar_finger_document(list(L), list(c), list(r), **kw))


def test_length_mode_tracks_the_excursion():
    hand, net = finger(mode="length", tension_capacity=1e3, rom_deg=(-90.0, 90.0))
    res = solve_equilibrium(hand, net, {"flexor": 0.004})
    assert res.q[0] == pytest.approx(0.004 / 0.008, abs=1e-9)
    K = hand.base_stiffness[0]
    assert res.actuator_tensions["flexor"] == pytest.approx(K * res.q[0] / 0.008, rel=1e-8)
    assert res.failure_mode == "none" and res.converged


def test_length_mode_saturates_at_capacity():
    hand, net = finger(mode="length", tension_capacity=5.0, rom_deg=(-90.0, 90.0))
    res = solve_equilibrium(hand, net, {"flexor": 0.01})
    K = hand.base_stiffness[0]
    assert res.failure_mode == "tension_capacity"
    assert res.actuator_tensions["flexor"] == pytest.approx(5.0, rel=1e-9)
    assert res.q[0] == pytest.approx(0.008 * 5.0 / K, abs=1e-8)
    assert res.slack["flexor"] > 0


def test_joint_stop_carries_the_excess_torque():
    hand, net = finger(rom_deg=(0.0, 45.0))
    K = hand.base_stiffness[0]
    T = 2.0 * K * math.radians(45.0) / 0.008
    res = solve_equilibrium(hand, net, {"flexor": T})
    assert res.q[0] == pytest.approx(math.radians(45.0), abs=1e-12)
    assert res.failure_mode == "rom_limit"
    assert res.rom_reactions[0] == pytest.approx(-(T * 0.008 - K * math.radians(45.0)), rel=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(300.0, 900.0), min_size=3, max_size=3),
       st.lists(st.floats(0.004, 0.01), min_size=3, max_size=3), st.floats(0.0, 8.0))
def test_free_chain_is_decoupled(c, r, T):
    hand, net = finger(c, r, (0.04, 0.03, 0.02))
    res = solve_equilibrium(hand, net, {"flexor": T})
    assert np.allclose(res.q, np.array(r) * T / hand.base_stiffness, atol=1e-9)


def test_commands_are_checked(hand_models):
    hand, net = hand_models
    with pytest.raises(InvalidModelError):
        solve_equilibrium(hand, net, {"nosuch": 1.0})
    with pytest.raises(InvalidModelError):
        solve_equilibrium(hand, net, {"rigidity": -1.0})
    with pytest.raises(InvalidModelError):
        solve_equilibrium(hand, net, {"index_middle_flexor": 1.0})
    with pytest.raises(InvalidModelError):
        SolverOptions.from_dict({"tolerance": 0.0})
    with pytest.raises(InvalidModelError):
        SolverOptions.from_dict({"bogus": 1})


def test_full_hand_posture_is_stationary(hand_models):
    hand, net = hand_models
    cmds = {"thumb_flexor": 0.01, "thumb_opposition": 0.01, "index_middle_flexor": 0.02,
            "ring_little_flexor": 0.015, "rigidity": 300.0}
    res = solve_equilibrium(hand, net, cmds)
    assert res.converged
    assert stationarity_residual(res, hand, net, cmds) <= 1e-7
    hand.check_rom(res.q)
    again = solve_equilibrium(hand, net, cmds, q0=res.q)
    assert np.allclose(again.q, res.q, atol=1e-9)


def test_wall_contact_is_complementary():
    hand, net = finger((500.0, 500.0), (0.008, 0.006), (0.04, 0.03), rom_deg=(0.0, 100.0))
    wall = RigidObject("wall", "box", extents=(0.4, 0.4, 0.2), position=[0.0, 0.0, 0.11])
    res = solve_equilibrium(hand, net, {"flexor": 20.0}, [wall])
    assert res.converged
    loaded = [c for c in res.contacts if c.normal_force > 0]
    assert loaded
    for c in res.contacts:
        assert abs(c.normal_force * c.separation) <= 1e-9
        assert c.separation >= -SolverOptions().penetration_tol
    assert stationarity_residual(res, hand, net, {"flexor": 20.0}) <= 1e-7


def test_slider_settles_where_the_spring_balances_the_push():
    hand, net = finger((500.0,), (0.008,), (0.04,), rom_deg=(0.0, 100.0))
    plate = RigidObject("plate", "box", extents=(0.2, 0.2, 0.02), position=[0.0, 0.0, 0.02],
                        support="slider", axis=[0, 0, 1], stiffness=200.0, mu=0.0)
    res = solve_equilibrium(hand, net, {"flexor": 20.0}, [plate])
    u = res.object_offsets["plate"]
    assert u > 0
    assert object_balance_residual(res, [plate])["plate"] <= 1e-6
    push = math.fsum(c.normal_force for c in res.contacts)
    assert push == pytest.approx(200.0 * u, rel=1e-6)


def test_result_serializes_in_degrees(hand_models):
    hand, net = hand_models
    res = solve_equilibrium(hand, net, {"rigidity": 100.0})
    doc = json.loads(res.to_json())
    assert set(doc["q_deg"]) == set(hand.dof_names)
    assert doc["converged"] is True

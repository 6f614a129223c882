import xml.etree.ElementTree as ET

from springhand.equilibrium import solve_equilibrium
from springhand.render import render_scene
from springhand.scenarios import load_builtin_scenario, run_schedule

NS = "{http://www.w3.org/2000/svg}"


def lever_scene():
    spec = load_builtin_scenario("lever")
    hand, net = spec.load_models()
    objs = spec.build_objects()
    _, results = run_schedule(hand, net, spec.schedule, objs, rigidity=spec.rigidity)
    return hand, net, objs, results[-1]


def test_svg_is_well_formed_and_complete():
    hand, net, objs, res = lever_scene()
    svg = render_scene(res, hand, objs, title="pin <&> finger")
    root = ET.fromstring(svg)
    assert root.tag == NS + "svg"
    groups = root.findall(NS + "g")
    assert len(groups) == 2
    for g in groups:
        chains = [e for e in g if e.get("class") == "chain"]
        cells = [e for e in g if e.get("class") == "loadcell"]
        assert len(chains) == len(hand.chains)
        assert len(cells) == len(hand.loadcells)
        assert len([e for e in g if e.get("class") == "object"]) == len(objs)
        assert len([e for e in g if e.get("class") == "contact"]) == len(res.contacts)


def test_force_arrows_only_for_loaded_contacts():
    hand, net, objs, res = lever_scene()
    root = ET.fromstring(render_scene(res, hand, objs))
    loaded = sum(1 for c in res.contacts if c.normal_force > 1e-9)
    arrows = [e for e in root.iter() if e.get("class") == "force"]
    assert len(arrows) == 2 * loaded


def test_output_is_byte_stable(hand_models):
    hand, net = hand_models
    res = solve_equilibrium(hand, net, {"index_middle_flexor": 0.02})
    a = render_scene(res, hand, title="x")
    b = render_scene(solve_equilibrium(hand, net, {"index_middle_flexor": 0.02}), hand, title="x")
    assert a == b
    assert "-0.00" not in a

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import parallel_compliance_by_energy, series_compliance_by_energy
from springhand.errors import InvalidModelError
from springhand.springs import (
    Parallel,
    Series,
    Single,
    SpringElement,
    arrangement_from_data,
    arrangement_to_data,
    composite_compliance,
    compliance_to_stiffness,
    leaves,
)

compliance = st.floats(min_value=1.0, max_value=5000.0, allow_nan=False)


def springs(values):
    return tuple(Single(SpringElement(f"s{i}", c)) for i, c in enumerate(values))


def test_published_constants_compose():
    assert composite_compliance(Series(springs([903.0, 443.0]))) == 1346.0
    assert composite_compliance(Parallel(springs([903.0, 903.0]))) == pytest.approx(451.5, rel=1e-15)


def test_stiffness_is_inverse_compliance_in_radians():
    s = SpringElement("a", 443.0)
    assert s.stiffness == pytest.approx(1.0 / math.radians(443.0), rel=1e-15)
    assert compliance_to_stiffness(443.0) == pytest.approx(s.stiffness, rel=1e-15)


@given(st.lists(compliance, min_size=1, max_size=6))
def test_series_matches_energy_oracle(values):
    got = composite_compliance(Series(springs(values)))
    assert got == pytest.approx(series_compliance_by_energy(values), rel=1e-12)
    assert got >= max(values)


@given(st.lists(compliance, min_size=1, max_size=6))
def test_parallel_matches_energy_oracle(values):
    got = composite_compliance(Parallel(springs(values)))
    assert got == pytest.approx(parallel_compliance_by_energy(values), rel=1e-12)
    assert got <= min(values) * (1 + 1e-12)


@given(compliance)
def test_parallel_pair_halves(c):
    assert composite_compliance(Parallel(springs([c, c]))) == pytest.approx(c / 2, rel=1e-12)


@given(st.lists(compliance, min_size=2, max_size=5), st.integers(min_value=1, max_value=4))
def test_series_nesting_is_associative(values, cut):
    cut = min(cut, len(values) - 1)
    flat = composite_compliance(Series(springs(values)))
    nested = composite_compliance(Series((Series(springs(values[:cut])), Series(springs(values[cut:])))))
    assert nested == pytest.approx(flat, rel=1e-12)


def test_serialization_round_trip():
    lib = {n: SpringElement(n, c) for n, c in (("a", 903.0), ("b", 443.0))}
    data = {"series": [{"parallel": ["a", "a"]}, "b"]}
    tree = arrangement_from_data(data, lib)
    assert arrangement_to_data(tree) == data
    assert [s.name for s in leaves(tree)] == ["a", "a", "b"]
    assert composite_compliance(tree) == pytest.approx(451.5 + 443.0, rel=1e-15)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_invalid_compliance_rejected(bad):
    with pytest.raises(InvalidModelError):
        SpringElement("x", bad)


@pytest.mark.parametrize("data", ["missing", {"series": []}, {"loop": ["a"]}, 3])
def test_invalid_arrangement_rejected(data):
    with pytest.raises(InvalidModelError):
        arrangement_from_data(data, {"a": SpringElement("a", 1.0)})

import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parex import oracles
from parex.geometry import (
    AlignmentError, EmptyFamilyWarning, ParabolicRectangle, TimeLag, admissible_half_widths,
    backward_region_contains, enumerate_rectangles, forward_region_contains, lower_part, parabolic_distance,
    reflect_box, upper_part,
)
from parex.lattice import CellBox, GridSpec


def test_parts_of_a_small_rectangle():
    R = ParabolicRectangle((32, 32), 2, 2)
    assert upper_part(R, "1/2") == CellBox(((30, 34), (34, 36)))
    assert lower_part(R, "1/2") == CellBox(((30, 34), (28, 30)))
    assert upper_part(R, 0).ranges[-1] == (32, 36)
    assert lower_part(R, 0).ranges[-1] == (28, 32)


@given(p=st.integers(2, 3), n=st.integers(1, 2), e=st.integers(0, 3), data=st.data())
def test_part_cell_counts(p, n, e, data):
    m = 2**e
    P = m**p
    lag = TimeLag(Fraction(data.draw(st.integers(0, P - 1)), P))
    R = ParabolicRectangle((0,) * (n + 1), m, p)
    up, lo = upper_part(R, lag), lower_part(R, lag)
    assert up.size == lo.size == (2 * m) ** n * (1 - lag.value) * P == R.part_volume(lag)
    assert up.issubset(R.box()) and lo.issubset(R.box())
    assert lo.hi[-1] <= up.lo[-1]


def test_time_lag_validation():
    with pytest.raises(ValueError):
        TimeLag(1)
    with pytest.raises(ValueError):
        TimeLag(Fraction(1, 3))
    assert TimeLag(0.25).value == Fraction(1, 4)
    assert TimeLag("1/2").dilated(2).value == Fraction(3, 8)
    with pytest.raises(AlignmentError):
        upper_part(ParabolicRectangle((0, 0), 1, 2), "1/2")


def test_half_width_must_be_power_of_two():
    with pytest.raises(ValueError):
        ParabolicRectangle((0, 0), 3, 2)


def test_admissible_half_widths():
    assert admissible_half_widths(GridSpec(1, 2, 16, 16), "1/2") == [2]
    assert admissible_half_widths(GridSpec(1, 2, 16, 16), 0) == [1, 2]
    assert admissible_half_widths(GridSpec(1, 2, 64, 64), "1/2") == [2, 4]


def test_clipped_count_by_hand():
    # m=1: 7 x 7 centres, m=2: 5 x 1 centres
    assert len(enumerate_rectangles(GridSpec(1, 2, 8, 8, "clipped"), 0)) == 54


def test_periodic_count():
    spec = GridSpec(1, 2, 16, 16)
    assert len(enumerate_rectangles(spec, "1/2")) == 256
    assert len(enumerate_rectangles(spec, 0)) == 512


def test_distance_examples():
    assert parabolic_distance((0, 0), (1, 1), 2) == 1.0
    assert parabolic_distance((0, 0), (2, 9), 2) == 3.0
    assert parabolic_distance((0, 0, 0), (-5, 1, 4), 2) == 5.0


points = st.tuples(*[st.floats(-8, 8, allow_nan=False)] * 3)


@given(points, points, st.sampled_from(["0", "1/4", "1/2", "3/4"]), st.sampled_from([2, 3]))
@settings(max_examples=400)
def test_forward_region_closed_form(o, q, lag, p):
    assert forward_region_contains(o, q, lag, p) == oracles.forward_region_by_search(o, q, lag, p)


@given(points, points, st.sampled_from(["0", "1/2"]))
def test_backward_region_is_mirror(o, q, lag):
    mirrored = q[:-1] + (2 * o[-1] - q[-1],)
    assert backward_region_contains(o, q, lag, 2) == forward_region_contains(o, mirrored, lag, 2)


def test_breakpoint_search_catches_non_dyadic_scale():
    # the only valid scales lie in (1.5, 2) which no power of 2 reaches
    assert oracles.forward_region_by_search((0, 0), (1.5, 2.0), "1/2", 2)
    assert forward_region_contains((0, 0), (1.5, 2.0), "1/2", 2)


@pytest.mark.parametrize("spec", [GridSpec(1, 2, 16, 16), GridSpec(2, 2, 8, 8, "clipped")])
@pytest.mark.parametrize("lag", ["0", "1/2"])
def test_reflection_swaps_parts(spec, lag):
    T = spec.extent_time
    for R in enumerate_rectangles(spec, lag):
        assert upper_part(R.reflect(T), lag) == reflect_box(lower_part(R, lag), T)
        assert R.reflect(T).reflect(T) == R


def test_upper_part_shrinks_with_lag():
    for R in enumerate_rectangles(GridSpec(1, 2, 16, 16), "1/2"):
        assert upper_part(R, "1/2").issubset(upper_part(R, "1/4"))
        assert upper_part(R, "1/4").issubset(upper_part(R, 0))


def test_constraint_filters_match_scans():
    spec = GridSpec(1, 2, 16, 16, "clipped")
    cell = (7, 9)
    lower = enumerate_rectangles(spec, "1/2", "lower_part_contains", cell)
    assert set(lower) == {R for R in enumerate_rectangles(spec, "1/2") if lower_part(R, "1/2").contains(cell)}
    R0 = ParabolicRectangle((8, 8), 2, 2)
    assert set(enumerate_rectangles(spec, 0, "inside", R0)) == set(oracles.restricted_family(spec, 0, R0))
    with pytest.raises(ValueError):
        enumerate_rectangles(spec, 0, "overlaps", R0)


def test_empty_family_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = enumerate_rectangles(GridSpec(1, 2, 1, 1), 0)
    assert out == []
    assert any(issubclass(w.category, EmptyFamilyWarning) for w in caught)


def test_forward_region_is_proper_subset():
    rng = np.random.default_rng(0)
    o = rng.uniform(-4, 4, size=(500, 2))
    q = o + rng.uniform(-4, 4, size=(500, 2))
    hits = [forward_region_contains(a, b, "1/2", 2) for a, b in zip(o, q)]
    assert 0 < sum(hits) < len(hits)

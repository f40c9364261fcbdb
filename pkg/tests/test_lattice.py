import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parex import oracles
from parex.lattice import (
    BoxOutOfRangeError, CellBox, GridFunction, GridSpec, NonFiniteError, average, box_sum, build_prefix,
    from_bytes, from_csv, reflect_time, shift, to_bytes, to_csv, window_reduce, window_sums,
)


@st.composite
def grid_and_box(draw):
    n = draw(st.integers(1, 2))
    es = draw(st.integers(1, 6))
    et = draw(st.integers(1, 8))
    boundary = draw(st.sampled_from(["periodic", "clipped"]))
    spec = GridSpec(n, 2, es, et, boundary)
    ranges = []
    for e in spec.shape:
        if spec.periodic:
            a = draw(st.integers(-e, 2 * e))
            b = a + draw(st.integers(0, e))
        else:
            a = draw(st.integers(0, e))
            b = draw(st.integers(a, e))
        ranges.append((a, b))
    seed = draw(st.integers(0, 2**16))
    values = np.random.default_rng(seed).standard_normal(spec.shape)
    return spec, CellBox(tuple(ranges)), values


@given(grid_and_box())
@settings(max_examples=150, deadline=None)
def test_box_sum_matches_cell_loop(case):
    spec, box, values = case
    table = build_prefix(GridFunction(spec, values))
    expected = oracles.box_sum(values, spec, box)
    assert box_sum(table, box) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@given(grid_and_box(), st.integers(-3, 3))
@settings(max_examples=60, deadline=None)
def test_box_sum_additive_in_time(case, cut):
    spec, box, values = case
    (a, b) = box.ranges[-1]
    mid = min(max(a, a + (b - a) // 2 + cut), b)
    left = CellBox(box.ranges[:-1] + ((a, mid),))
    right = CellBox(box.ranges[:-1] + ((mid, b),))
    table = build_prefix(GridFunction(spec, values))
    assert box_sum(table, left) + box_sum(table, right) == pytest.approx(box_sum(table, box), abs=1e-10)


def test_average_of_constant():
    spec = GridSpec(1, 2, 8, 8, "clipped")
    f = GridFunction.constant(spec, 2.5)
    assert average(f, CellBox(((1, 4), (2, 7)))) == 2.5
    with pytest.raises(ValueError):
        average(f, CellBox(((1, 1), (2, 7))))


def test_clipped_box_out_of_range():
    spec = GridSpec(1, 2, 8, 8, "clipped")
    table = build_prefix(GridFunction.constant(spec, 1.0))
    with pytest.raises(BoxOutOfRangeError):
        box_sum(table, CellBox(((-1, 3), (0, 2))))


def test_periodic_box_wraps():
    spec = GridSpec(1, 2, 4, 4, "periodic")
    values = np.arange(16, dtype=float).reshape(4, 4)
    table = build_prefix(GridFunction(spec, values))
    box = CellBox(((3, 5), (0, 1)))
    assert box_sum(table, box) == values[3, 0] + values[0, 0]


def test_non_finite_rejected_with_index():
    spec = GridSpec(1, 2, 4, 4)
    values = np.zeros((4, 4))
    values[2, 1] = np.nan
    with pytest.raises(NonFiniteError, match=r"\(2, 1\)"):
        GridFunction(spec, values)


@pytest.mark.parametrize("kwargs", [dict(n=3), dict(p=1), dict(extent_space=0), dict(boundary="mirror")])
def test_gridspec_validation(kwargs):
    base = dict(n=1, p=2, extent_space=4, extent_time=4, boundary="periodic")
    with pytest.raises(ValueError):
        GridSpec(**(base | kwargs))


def test_translation_invariance_periodic():
    spec = GridSpec(2, 2, 4, 6, "periodic")
    f = GridFunction(spec, np.random.default_rng(0).standard_normal(spec.shape))
    v = (1, -2, 3)
    ta, tb = build_prefix(f), build_prefix(shift(f, v))
    box = CellBox(((0, 2), (1, 3), (2, 5)))
    back = CellBox(tuple((a - o, b - o) for (a, b), o in zip(box.ranges, v)))
    assert box_sum(tb, box) == pytest.approx(box_sum(ta, back), abs=1e-12)


def test_reflect_time_is_involution():
    spec = GridSpec(1, 2, 5, 7, "clipped")
    f = GridFunction(spec, np.random.default_rng(1).standard_normal(spec.shape))
    assert np.array_equal(reflect_time(reflect_time(f)).values, f.values)
    assert np.array_equal(reflect_time(f).values[:, 0], f.values[:, -1])


@pytest.mark.parametrize("boundary", ["periodic", "clipped"])
def test_window_sums_and_max_match_loops(boundary):
    spec = GridSpec(1, 2, 7, 9, boundary)
    values = np.random.default_rng(2).standard_normal(spec.shape)
    lo, hi = (-2, 1), (1, 4)
    sums, inside = window_sums(values, lo, hi, spec.periodic)
    maxes = window_reduce(values, lo, hi, spec.periodic)
    for c in spec.cells():
        box = CellBox(tuple((ci + a, ci + b) for ci, a, b in zip(c, lo, hi)))
        try:
            cells = list(box.cells(spec))
        except BoxOutOfRangeError:
            assert not inside[c]
            continue
        assert inside[c]
        assert sums[c] == pytest.approx(sum(values[x] for x in cells), abs=1e-12)
        assert maxes[c] == max(values[x] for x in cells)


@pytest.mark.parametrize("spec", [GridSpec(1, 2, 3, 5), GridSpec(2, 3, 2, 4, "clipped")])
def test_csv_and_bytes_round_trip(spec):
    f = GridFunction(spec, np.random.default_rng(3).standard_normal(spec.shape))
    assert np.array_equal(from_csv(to_csv(f), spec).values, f.values)
    assert np.array_equal(from_bytes(to_bytes(f), spec).values, f.values)


def test_bytes_layout_time_slowest():
    spec = GridSpec(1, 2, 2, 3)
    f = GridFunction(spec, np.arange(6, dtype=float).reshape(2, 3))
    assert np.frombuffer(to_bytes(f), "<f8").tolist() == [0, 3, 1, 4, 2, 5]
    assert to_csv(f).splitlines()[:3] == ["x1,t,value", "0,0,0.0", "1,0,3.0"]

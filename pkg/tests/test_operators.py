import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parex import oracles
from parex.geometry import ParabolicRectangle, enumerate_rectangles, parabolic_distance
from parex.lattice import GridFunction, GridSpec, reflect_time
from parex.operators import (
    DegenerateGridError, Direction, commutator_bracket, fractional_integral, fractional_maximal, identity_operator,
    integral_commutator, integral_operator, maximal_commutator, maximal_operator, positive_commutator,
    restricted_maximal,
)

FWD, BWD = Direction.FORWARD, Direction.BACKWARD
SPECS = [GridSpec(1, 2, 16, 16), GridSpec(1, 2, 16, 16, "clipped"), GridSpec(2, 2, 8, 8, "clipped"),
         GridSpec(1, 3, 4, 16)]


def rel(a, b):
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
    return 0.0 if scale == 0 else float(np.max(np.abs(a - b)) / scale)


def noise(spec, seed, signed=True):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(spec.shape) if signed else rng.uniform(size=spec.shape)
    return GridFunction(spec, v)


cases = st.tuples(st.sampled_from(SPECS), st.sampled_from(["0", "1/2"]), st.sampled_from([FWD, BWD]),
                  st.sampled_from([0.0, 0.25, 0.5]), st.integers(0, 2**16))


@given(cases)
@settings(max_examples=25, deadline=None)
def test_maximal_fast_equals_naive(case):
    spec, lag, d, alpha, seed = case
    f = noise(spec, seed)
    fast, naive = fractional_maximal(f, lag, alpha, d), fractional_maximal(f, lag, alpha, d, "naive")
    assert rel(fast.values, naive.values) <= 1e-12
    assert np.array_equal(fast.mask, naive.mask)


@pytest.mark.parametrize("spec", SPECS[:3])
def test_maximal_matches_rectangle_loop(spec):
    f = noise(spec, 1)
    ref = oracles.maximal(np.abs(f.values), spec, "1/2", 0.25)
    out = fractional_maximal(f, "1/2", 0.25)
    assert rel(out.values, np.where(np.isfinite(ref), ref, 0.0)) <= 1e-12


def test_maximal_of_one_periodic():
    spec = GridSpec(1, 2, 16, 16)
    out = fractional_maximal(GridFunction.constant(spec, 1.0), "1/2", 0.5)
    # only m = 2 fits: the part holds 4 x 2 cells
    assert np.allclose(out.values, 8**0.5, rtol=1e-14, atol=0)
    assert np.array_equal(fractional_maximal(GridFunction.constant(spec, 1.0), "1/2").values, np.ones(spec.shape))


def test_backward_is_reflected_forward():
    spec = GridSpec(1, 2, 16, 16, "clipped")
    f = noise(spec, 2)
    back = fractional_maximal(f, "1/2", 0.25, BWD, "naive")
    mirrored = reflect_time(fractional_maximal(reflect_time(f), "1/2", 0.25, FWD, "naive"))
    assert rel(back.values, mirrored.values) <= 1e-12


@given(st.integers(0, 2**16), st.floats(-8, 8).filter(lambda c: abs(c) > 1e-3))
@settings(max_examples=20, deadline=None)
def test_maximal_sublinear_and_homogeneous(seed, c):
    spec = GridSpec(1, 2, 16, 16)
    f, g = noise(spec, seed), noise(spec, seed + 1)
    Mf, Mg = fractional_maximal(f, "1/2"), fractional_maximal(g, "1/2")
    Mfg = fractional_maximal(GridFunction(spec, f.values + g.values), "1/2")
    assert np.all(Mfg.values <= (Mf.values + Mg.values) * (1 + 1e-12))
    Mc = fractional_maximal(GridFunction(spec, c * f.values), "1/2")
    assert rel(Mc.values, abs(c) * Mf.values) <= 1e-12


def test_clipped_edges_flagged_invalid():
    spec = GridSpec(1, 2, 16, 16, "clipped")
    out = fractional_maximal(noise(spec, 3), "1/2")
    # lower parts never reach the last time slices
    assert not out.mask[:, -1].any()
    assert out.mask.any()
    assert np.all(out.values[~out.mask] == 0)


def test_degenerate_grid_refused():
    with pytest.raises(DegenerateGridError):
        fractional_maximal(GridFunction.constant(GridSpec(1, 2, 1, 1), 1.0), 0)


def test_bad_arguments():
    f = noise(GridSpec(1, 2, 8, 8), 0)
    with pytest.raises(ValueError):
        fractional_maximal(f, 0, 1.0)
    with pytest.raises(ValueError):
        fractional_maximal(f, 0, 0.0, FWD, "gpu")
    with pytest.raises(ValueError):
        maximal_commutator(f, f, 0, 0.0, 0)
    with pytest.raises(ValueError):
        Direction.parse("sideways")


@pytest.mark.parametrize("d", [FWD, BWD])
@pytest.mark.parametrize("lag", ["0", "1/2"])
def test_restricted_matches_family_loop(d, lag):
    spec = GridSpec(1, 2, 16, 16, "clipped")
    f = noise(spec, 4)
    R0 = ParabolicRectangle((8, 8), 2, 2)
    fast, naive = restricted_maximal(f, lag, d, R0), restricted_maximal(f, lag, d, R0, "naive")
    assert rel(fast.values, naive.values) <= 1e-12
    ref = oracles.maximal(np.abs(f.values), spec, lag, 0.0, d is FWD, oracles.restricted_family(spec, lag, R0))
    assert rel(fast.values, np.where(np.isfinite(ref), ref, 0.0)) <= 1e-12
    full = fractional_maximal(f, lag, 0.0, d)
    assert np.all(fast.values[fast.mask] <= full.values[fast.mask] * (1 + 1e-12))


def test_restricted_rectangle_must_fit():
    spec = GridSpec(1, 2, 8, 8, "clipped")
    with pytest.raises(ValueError):
        restricted_maximal(noise(spec, 0), 0, FWD, ParabolicRectangle((1, 4), 2, 2))


@given(cases, st.integers(1, 3))
@settings(max_examples=25, deadline=None)
def test_maximal_commutator_fast_equals_naive(case, k):
    spec, lag, d, alpha, seed = case
    f, b = noise(spec, seed), noise(spec, seed + 7)
    fast = maximal_commutator(f, b, lag, alpha, k, d)
    naive = maximal_commutator(f, b, lag, alpha, k, d, "naive")
    assert rel(fast.values, naive.values) <= 1e-12


@pytest.mark.parametrize("k", [1, 2, 3])
def test_maximal_commutator_matches_loop(k):
    spec = GridSpec(1, 2, 8, 8, "clipped")
    f, b = noise(spec, 5), noise(spec, 6)
    ref = oracles.maximal_commutator(f.values, b.values, spec, "1/2", 0.25, k)
    out = maximal_commutator(f, b, "1/2", 0.25, k)
    assert rel(out.values, np.where(np.isfinite(ref), ref, 0.0)) <= 1e-12


def test_maximal_commutator_constant_symbol_is_zero():
    spec = GridSpec(1, 2, 16, 16)
    out = maximal_commutator(noise(spec, 0), GridFunction.constant(spec, 1.5), "1/2", 0.25, 2)
    assert not np.any(out.values)


def test_integral_single_cell_kernel():
    spec = GridSpec(1, 2, 16, 16)
    ind = np.zeros(spec.shape)
    ind[8, 11] = 1.0
    out = fractional_integral(GridFunction(spec, ind), "1/4", 0.5)
    assert out.values[8, 8] == pytest.approx(parabolic_distance((8, 8), (8, 11), 2) ** -1.5, rel=1e-14)
    # the source cell lies in the past of (8, 12), so nothing lands there
    assert out.values[8, 12] == 0.0


@pytest.mark.parametrize("boundary", ["periodic", "clipped"])
def test_integral_matches_double_loop(boundary):
    spec = GridSpec(1, 2, 8, 8, boundary)
    f = noise(spec, 8)
    out = fractional_integral(f, "1/4", 0.5)
    ref = oracles.fractional_integral(f.values, spec, "1/4", 0.5)
    assert rel(out.values, ref) <= 1e-12


def test_integral_refusals_and_truncation():
    f = noise(GridSpec(1, 2, 8, 8), 0)
    with pytest.raises(ValueError, match="truncated"):
        fractional_integral(f, 0, 0.5)
    with pytest.raises(ValueError):
        fractional_integral(f, "1/2", 0.0)
    assert np.all(np.isfinite(fractional_integral(f, 0, 0.5, truncated=True).values))


def test_integral_linear_and_reflected():
    spec = GridSpec(1, 2, 16, 16)
    f, g = noise(spec, 1), noise(spec, 2)
    T = integral_operator("1/2", 0.25)
    assert rel(T(GridFunction(spec, 2 * f.values - 3 * g.values)).values, 2 * T(f).values - 3 * T(g).values) <= 1e-12
    back = fractional_integral(f, "1/2", 0.25, BWD)
    assert rel(back.values, reflect_time(fractional_integral(reflect_time(f), "1/2", 0.25)).values) <= 1e-12


@pytest.mark.parametrize("k", [1, 2, 3])
def test_integral_commutator_matches_loop(k):
    spec = GridSpec(1, 2, 8, 8, "clipped")
    f, b = noise(spec, 3), noise(spec, 4)
    out = integral_commutator(f, b, "1/2", 0.5, k)
    assert rel(out.values, oracles.integral_commutator(f.values, b.values, spec, "1/2", 0.5, k)) <= 1e-12
    if k % 2 == 0:
        bracket = commutator_bracket(integral_operator("1/2", 0.5), b, GridFunction(spec, np.abs(f.values)), k)
        assert np.all(np.abs(bracket.values) <= out.values + 1e-10 * np.max(out.values))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_bracket_forms_agree(k):
    spec = GridSpec(1, 2, 16, 16)
    f, b = noise(spec, 9), noise(spec, 10)
    T = integral_operator("1/2", 0.5)
    assert rel(commutator_bracket(T, b, f, k).values, commutator_bracket(T, b, f, k, "recursive").values) <= 1e-9
    assert not np.any(commutator_bracket(identity_operator(), b, f, k, "recursive").values)
    scaled = commutator_bracket(T, GridFunction(spec, 2 * b.values), f, k)
    assert rel(scaled.values, 2**k * commutator_bracket(T, b, f, k).values) <= 1e-12


def test_bracket_first_order_definition():
    spec = GridSpec(1, 2, 8, 8)
    f, b = noise(spec, 1), noise(spec, 2)
    T = integral_operator("1/2", 0.5)
    expected = b.values * T(f).values - T(GridFunction(spec, b.values * f.values)).values
    assert np.array_equal(commutator_bracket(T, b, f, 1, "recursive").values, expected)
    with pytest.raises(ValueError):
        commutator_bracket(T, b, f, 1, "spectral")


@pytest.mark.parametrize("spec", SPECS[:2])
def test_positive_commutator_bound(spec):
    f, b = noise(spec, 11), noise(spec, 12)
    Tq = maximal_operator("1/2", 0.25)
    lhs = np.abs(positive_commutator(Tq, b, f).values)
    rhs = maximal_commutator(f, b, "1/2", 0.25, 1).values + 2 * np.maximum(-b.values, 0) * Tq(f).values
    assert np.all(lhs <= rhs + 1e-12 * np.max(rhs))
    assert not np.any(positive_commutator(Tq, GridFunction.constant(spec, 2.0), f).values)


def test_rectangle_loop_sees_every_rectangle_once():
    spec = GridSpec(1, 2, 8, 8, "clipped")
    rects = enumerate_rectangles(spec, 0)
    assert len(set(rects)) == len(rects)

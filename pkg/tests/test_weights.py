import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parex import oracles
from parex.lattice import GridFunction, GridSpec, reflect_time
from parex.operators import Direction
from parex.weights import (
    ExponentPair, Weight, a1_constant, ainfty_profile, aq_constant, conjugate, make_weight, one_weight_constant,
    parse_exponent, two_weight_constant,
)

INF = math.inf
FWD, BWD = Direction.FORWARD, Direction.BACKWARD
SPEC = GridSpec(1, 2, 16, 16)
PAIRS = [ExponentPair(2, 2), ExponentPair(2, 4), ExponentPair(1.5, 3)]


def close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b))


def test_exponent_pair_basics():
    pair = ExponentPair(2, 4)
    assert pair.r_conj == 2 and pair.q_conj == pytest.approx(4 / 3)
    assert pair.gap == 0.25 and pair.s == pytest.approx(4 / 3)
    assert ExponentPair(3, 3).s == 1.0
    assert pair.companion(4 / 3).q == pytest.approx(2.0)
    assert ExponentPair(1, 2).companion(2).q == INF
    assert conjugate(1) == INF and conjugate(INF) == 1.0
    assert parse_exponent("inf") == INF and parse_exponent("3/2") == 1.5
    with pytest.raises(ValueError):
        ExponentPair(3, 2)
    with pytest.raises(ValueError):
        ExponentPair(0.5, 2)


def test_weight_must_be_positive():
    with pytest.raises(ValueError):
        Weight(SPEC, np.zeros(SPEC.shape))


@pytest.mark.parametrize("lag", ["0", "1/2"])
@pytest.mark.parametrize("pair", PAIRS + [ExponentPair(1, 1), ExponentPair(2, INF), ExponentPair(1, INF)])
def test_unit_weight_constants_are_one(lag, pair):
    w = make_weight("constant", SPEC)
    for d in (FWD, BWD):
        assert one_weight_constant(w, pair, lag, d) == 1.0
    assert aq_constant(w, 2.5, lag) == 1.0
    assert a1_constant(w, lag) == (1.0, 1.0)


def test_scaled_constant_weight_close_to_one():
    w = make_weight("constant", SPEC, c=3.7)
    for pair in PAIRS:
        assert close(one_weight_constant(w, pair, "1/2"), 1.0, 1e-12)


@given(st.integers(0, 500), st.sampled_from(PAIRS), st.sampled_from(["0", "1/2"]))
@settings(max_examples=30, deadline=None)
def test_duality_identities(seed, pair, lag):
    w = make_weight("log_lipschitz", SPEC, seed=seed, amplitude=1.5)
    base = one_weight_constant(w, pair, lag)
    Q, Qd = 1 + pair.q / pair.r_conj, 1 + pair.r_conj / pair.q
    assert close(aq_constant(GridFunction(SPEC, w.values**pair.q), Q, lag), base**pair.q, 1e-9)
    assert close(aq_constant(GridFunction(SPEC, w.values ** -pair.r_conj), Qd, lag, BWD), base**pair.r_conj, 1e-9)


@given(st.integers(0, 500), st.sampled_from([1.25, 2.0, 3.0, 6.0]))
@settings(max_examples=30, deadline=None)
def test_aq_forms_agree(seed, q):
    w = make_weight("log_lipschitz", SPEC, seed=seed, amplitude=2.0)
    assert close(aq_constant(w, q, "1/2"), aq_constant(w, q, "1/2", form="classical"), 1e-10)


@given(st.integers(0, 500))
@settings(max_examples=20, deadline=None)
def test_aq_nonincreasing_in_q(seed):
    w = make_weight("log_lipschitz", SPEC, seed=seed, amplitude=2.0)
    values = [v for _, v in ainfty_profile(w, "1/2", [1.5, 2, 3, 4, 8, 16])]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(values, values[1:]))
    assert all(v >= 1 - 1e-12 for v in values)


def test_two_weight_diagonal_and_time_reversal():
    w = make_weight("log_lipschitz", SPEC, seed=4)
    for pair in PAIRS:
        assert two_weight_constant(w, w, pair, "1/2") == one_weight_constant(w, pair, "1/2")
        back = one_weight_constant(w, pair, "1/2", BWD)
        assert close(back, one_weight_constant(reflect_time(w), pair, "1/2", FWD), 1e-12)
        if pair.r == pair.q:
            assert one_weight_constant(w, pair, "1/2") * back >= 1 - 1e-12


@pytest.mark.parametrize("pair", [ExponentPair(2, 2), ExponentPair(2, 4), ExponentPair(1, 2), ExponentPair(2, INF)])
@pytest.mark.parametrize("d", [FWD, BWD])
def test_two_weight_matches_rectangle_loop(pair, d):
    spec = GridSpec(1, 2, 8, 8, "clipped")
    u = make_weight("log_lipschitz", spec, seed=1)
    v = make_weight("power_time", spec, a=0.7)
    ref = oracles.two_weight_constant(u.values, v.values, spec, pair.r, pair.q, "1/2", d is FWD)
    assert close(two_weight_constant(u, v, pair, "1/2", d), ref, 1e-10)


def test_a1_forms_on_power_weight():
    w = make_weight("power_time", GridSpec(1, 2, 16, 16, "clipped"), a=-0.5)
    maximal, rectangle = a1_constant(w, "1/2")
    assert maximal >= 1 and rectangle >= 1


@pytest.mark.parametrize("lam", [0.1, 0.3])
def test_increasing_exponential_is_forward_only(lam):
    w = make_weight("time_shift_exp", GridSpec(1, 2, 16, 16, "clipped"), lam=lam)
    for pair in PAIRS:
        assert one_weight_constant(w, pair, "1/2") < one_weight_constant(w, pair, "1/2", BWD)


def test_recipes():
    t = np.arange(16.0)
    assert np.allclose(make_weight("time_shift_exp", SPEC, lam=0.3, t0=2).values, np.exp(0.3 * (t - 2)), rtol=1e-14)
    assert np.array_equal(make_weight("power_time", SPEC, a=1).values[0], t + 1)
    b = GridFunction(SPEC, np.random.default_rng(0).standard_normal(SPEC.shape))
    assert np.array_equal(make_weight("exp_symbol", SPEC, b=b, c=0.0).values, np.ones(SPEC.shape))
    prod = make_weight("product", SPEC, factors=[("constant", {"c": 2.0}), ("power_time", {"a": 1})])
    assert np.array_equal(prod.values[0], 2 * (t + 1))
    with pytest.raises(ValueError):
        make_weight("gaussian", SPEC)
    with pytest.raises(ValueError):
        make_weight("power_time", SPEC, a=1, offset=0)


def test_log_lipschitz_is_seeded():
    a = make_weight("log_lipschitz", SPEC, seed=9)
    assert np.array_equal(a.values, make_weight("log_lipschitz", SPEC, seed=9).values)
    assert not np.array_equal(a.values, make_weight("log_lipschitz", SPEC, seed=10).values)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parex import oracles
from parex.contour import ContourConfig, contour_commutator, truncated_exponential
from parex.experiments import (
    CharacterizationScenario, TransferScenario, characterization_experiment, make_symbol, ratio_series,
    resolve_kind, transfer_experiment,
)
from parex.extrapolation import (
    IterationConfig, build_h1, build_h2, estimate_operator_norm, probe_functions, rdf_backward, rdf_forward,
    rdf_series, two_weight_sup_estimate,
)
from parex.harness import iteration_normalizer
from parex.lattice import GridFunction, GridSpec
from parex.norms import weighted_norm
from parex.operators import (
    Direction, commutator_bracket, fractional_maximal, identity_operator, integral_operator, maximal_operator,
)
from parex.report import json_text
from parex.weights import ExponentPair, make_weight

INF = math.inf
FWD, BWD = Direction.FORWARD, Direction.BACKWARD
SPEC = GridSpec(1, 2, 16, 16)


def test_iteration_config_validation():
    pair = ExponentPair(2, 4)
    cfg = IterationConfig("1/2", pair, 2, 3.0)
    assert cfg.big_exponent == 3.0 and cfg.dual_exponent == 1.5
    assert 1 / cfg.big_exponent + 1 / cfg.dual_exponent == 1
    assert cfg.with_K(5).K == 5
    for bad in (dict(K=-1), dict(B=0.0), dict(pair=ExponentPair(1, 2)), dict(pair=ExponentPair(2, INF))):
        args = dict(gamma="1/2", pair=pair, K=1, B=1.0) | bad
        with pytest.raises(ValueError):
            IterationConfig(**args)


@pytest.mark.parametrize("K", [0, 2, 6])
def test_constant_input_sums_geometric_series(K):
    pair = ExponentPair(2, 2)
    out = rdf_forward(GridFunction.constant(SPEC, 1.0), IterationConfig("1/2", pair, K, 2.0))
    assert np.allclose(out.values, sum(4.0**-k for k in range(K + 1)), rtol=1e-12, atol=0)


def test_zero_truncation_is_identity():
    h = GridFunction(SPEC, np.random.default_rng(0).uniform(size=SPEC.shape))
    assert np.array_equal(rdf_forward(h, IterationConfig("1/2", ExponentPair(2, 4), 0, 5.0)).values, h.values)


@given(st.integers(0, 1000), st.sampled_from([0, 1, 3]), st.floats(1.0, 6.0))
@settings(max_examples=20, deadline=None)
def test_series_one_step_bound(seed, K, B):
    h = np.random.default_rng(seed).uniform(size=SPEC.shape) ** 3
    for d in (FWD, BWD):
        series = rdf_series(h, SPEC, "1/2", K, B, d)
        M = fractional_maximal(GridFunction(SPEC, series[K]), "1/2", 0.0, d).values
        assert np.all(M <= 2 * B * series[K + 1])
        assert np.all(series[K] >= h)


def test_backward_series_is_reflected_forward():
    h = np.random.default_rng(1).uniform(size=SPEC.shape)
    back = rdf_series(h, SPEC, "1/2", 3, 2.0, BWD)[3]
    forward = rdf_series(h[..., ::-1], SPEC, "1/2", 3, 2.0, FWD)[3]
    assert np.allclose(back, forward[..., ::-1], rtol=1e-12, atol=0)


def test_negative_inputs_refused():
    cfg = IterationConfig("1/2", ExponentPair(2, 2), 1, 2.0)
    with pytest.raises(ValueError):
        rdf_forward(GridFunction.constant(SPEC, -1.0), cfg)
    with pytest.raises(ValueError):
        rdf_backward(GridFunction.constant(SPEC, -1.0), make_weight("constant", SPEC), cfg)


@pytest.mark.parametrize("pair", [ExponentPair(2, 2), ExponentPair(2, 4), ExponentPair(1.5, 3)])
def test_iteration_properties_with_harness_normalizer(pair):
    w = make_weight("log_lipschitz", SPEC, seed=2, amplitude=0.5)
    rng = np.random.default_rng(3)
    f = GridFunction(SPEC, rng.standard_normal(SPEC.shape))
    g = GridFunction(SPEC, rng.uniform(size=SPEC.shape))
    B = iteration_normalizer(SPEC, w, pair, "1/2", 32, 0)
    h1, h2 = build_h1(f, g, w, pair), build_h2(f, w, pair)
    wq = GridFunction(SPEC, w.values**pair.q)
    Qd = 1 + pair.r_conj / pair.q
    assert weighted_norm(h2, Qd, wq) == pytest.approx(1.0, rel=1e-12)
    for K in (0, 2, 6):
        cfg = IterationConfig("1/2", pair, K, B)
        H1, H2 = rdf_forward(h1, cfg), rdf_backward(h2, w, cfg)
        assert np.all(h1.values <= H1.values) and np.all(h2.values <= H2.values)
        assert weighted_norm(H1, pair.q, wq) <= 2 ** (1 / pair.s + 1)
        assert weighted_norm(H2, Qd, wq) <= 2.0


def test_build_h_refuses_zero():
    w = make_weight("constant", SPEC)
    zero = GridFunction.constant(SPEC, 0.0)
    with pytest.raises(ValueError):
        build_h1(zero, GridFunction.constant(SPEC, 1.0), w, ExponentPair(2, 2))
    with pytest.raises(ValueError):
        build_h2(zero, w, ExponentPair(2, 2))


def test_probe_stream_is_prefix_stable():
    unit = make_weight("constant", SPEC)
    small = probe_functions(SPEC, unit, ExponentPair(2, 2), "1/2", 10, 4)
    large = probe_functions(SPEC, unit, ExponentPair(2, 2), "1/2", 30, 4)
    assert [n for n, _ in small] == [n for n, _ in large[:10]]
    assert all(np.array_equal(a, b) for (_, a), (_, b) in zip(small, large))


@pytest.mark.parametrize("pair", [ExponentPair(1, 1), ExponentPair(2, 2), ExponentPair(3, 3)])
def test_identity_estimates(pair):
    unit = make_weight("constant", SPEC)
    assert estimate_operator_norm(identity_operator(), pair, unit, 16)[0] == pytest.approx(1.0, rel=1e-12)
    double = lambda f: GridFunction(SPEC, 2 * f.values)
    assert estimate_operator_norm(double, pair, unit, 16)[0] == pytest.approx(2.0, rel=1e-12)


def test_estimates_below_exhaustive_boolean_norm():
    spec = GridSpec(1, 2, 3, 3)
    T = maximal_operator(0)
    exact = oracles.boolean_norm(T, spec, 2, 2)
    est, log = estimate_operator_norm(T, ExponentPair(2, 2), make_weight("constant", spec), 64, 0, 0,
                                      families=("adapted", "part_indicator", "cell"))
    assert 0 < est <= exact * (1 + 1e-12)
    assert log.best[1] == est


def test_estimator_options():
    unit = make_weight("constant", SPEC)
    T = maximal_operator("1/2")
    weak, _ = estimate_operator_norm(T, ExponentPair(2, 2), unit, 16, output="weak")
    strong, _ = estimate_operator_norm(T, ExponentPair(2, 2), unit, 16)
    assert weak <= strong * (1 + 1e-12)
    with pytest.raises(ValueError):
        estimate_operator_norm(T, ExponentPair(2, 2), unit, 4, output="median")
    assert two_weight_sup_estimate(T, unit, unit, 2.0, "1/2", 8) > 0


def test_truncated_exponential_series():
    b = np.linspace(-1, 1, 5)
    assert np.allclose(truncated_exponential(0.3, b, 30), np.exp(0.3 * b), rtol=1e-14)
    assert np.array_equal(truncated_exponential(0.3, b, 0), np.ones(5))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_contour_recovers_bracket(k):
    spec = GridSpec(1, 2, 12, 12)
    rng = np.random.default_rng(k)
    b = GridFunction(spec, rng.uniform(-1, 1, size=spec.shape))
    f = GridFunction(spec, rng.standard_normal(spec.shape))
    T = integral_operator("1/2", 0.5)
    got = contour_commutator(T, b, f, ContourConfig.for_order(k)).values
    ref = commutator_bracket(T, b, f, k).values
    assert np.max(np.abs(got - ref)) <= 1e-8 * np.max(np.abs(ref))
    ident = contour_commutator(identity_operator(), b, f, ContourConfig.for_order(k)).values
    assert np.max(np.abs(ident)) <= 1e-10 * np.max(np.abs(b.values**k * f.values))


def test_contour_config_guards():
    assert ContourConfig.for_order(2) == ContourConfig(2, 4, 12)
    for args in ((2, 4, 8), (3, 2, 12), (0, 2, 8)):
        with pytest.raises(ValueError):
            ContourConfig(*args)
    with pytest.raises(ValueError):
        ContourConfig(1, 3, 10, radius=-1.0)


def test_symbols():
    assert np.array_equal(make_symbol("x", SPEC).values[:, 0], np.arange(16.0))
    assert np.array_equal(make_symbol("t", SPEC).values[0], np.arange(16.0))
    assert make_symbol("indicator", SPEC, cell=[2, 3]).values.sum() == 1.0
    assert np.array_equal(make_symbol("smooth", SPEC, seed=1).values, make_symbol("smooth", SPEC, seed=1).values)
    with pytest.raises(ValueError):
        make_symbol("spiral", SPEC)


def test_transfer_identical_pair_ratio_is_one():
    sc = TransferScenario(sizes=(16,), targets=((2.0, 2.0), (3.0, 3.0)), budget=16)
    rep = transfer_experiment("strong", sc)
    assert rep.ok
    assert ratio_series(rep, "unit", "(2,2)") == [pytest.approx(1.0, rel=1e-12)]


@pytest.mark.parametrize("mode", ["weak", "vector_valued", "a_infinity", "at_infinity"])
def test_transfer_modes_run(mode):
    targets = {"at_infinity": ((1.0, 2.0),), "a_infinity": ((2.0, 2.0), (4.0, 4.0))}.get(mode, ((3.0, 3.0),))
    sc = TransferScenario(sizes=(16,), targets=targets, budget=8, source=(2.0, 2.0),
                          weights=(("w", "power_time", {"a": 0.5}),))
    rep = transfer_experiment(mode, sc)
    assert rep.ok and rep.table
    assert all(np.isfinite(row["ratio"]) for row in rep.table)


def test_transfer_refusals():
    with pytest.raises(ValueError, match="gap"):
        transfer_experiment("strong", TransferScenario(targets=((2.0, 4.0),)))
    with pytest.raises(ValueError):
        transfer_experiment("sideways", TransferScenario())


def test_characterization_is_deterministic_and_homogeneous():
    sc = CharacterizationScenario(sizes=(16,), lambdas=(1.0, 2.0, 0.5), budget=8)
    a = characterization_experiment("thm_1_7", sc)
    b = characterization_experiment("integral_bracket_bmo", sc)
    assert a.ok and json_text(a) == json_text(b)
    assert sum(r.check.startswith("homogeneity") for r in a.asserted) == 2


def test_characterization_refusals():
    with pytest.raises(ValueError):
        resolve_kind("thm_9_9")
    with pytest.raises(ValueError):
        characterization_experiment("thm_1_7", CharacterizationScenario(lambdas=()))
    with pytest.raises(ValueError, match="gap"):
        characterization_experiment("thm_1_9", CharacterizationScenario(beta=0.2, k=2, pair=(2.0, 4.0)))

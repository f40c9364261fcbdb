"""Verification suite, coverage table and engine benchmark.

Each verify group takes a scenario config and returns a :class:`Report`
whose asserted checks name their tolerance.  Pointwise inequalities are
reported as the largest violation ``max(lhs - rhs)`` against ``0``; array
equalities as the sup-norm error against the sup-norm scale.
"""

from __future__ import annotations

import json
import math
import tempfile
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import oracles
from .config import ScenarioConfig
from .contour import ContourConfig, contour_commutator
from .experiments import CHARACTERIZATION_KINDS, KIND_ALIASES, TRANSFER_MODES, make_symbol
from .extrapolation import (
    IterationConfig, build_h1, build_h2, estimate_operator_norm, probe_functions, rdf_backward,
    rdf_forward, rdf_series, two_weight_sup_estimate,
)
from .geometry import (
    EmptyFamilyWarning, ParabolicRectangle, TimeLag, admissible_half_widths, as_lag,
    backward_region_contains, enumerate_rectangles, forward_region_contains, lower_part,
    parabolic_distance, reflect_box, upper_part,
)
from .lattice import (
    BoxOutOfRangeError, CellBox, GridFunction, GridSpec, NonFiniteError, average, box_sum,
    build_prefix, from_bytes, from_csv, reflect_time, shift, to_bytes, to_csv,
)
from .norms import (
    lorentz_norm, oscillation_norm, plip_estimate, plip_norm, rearrangement, weak_norm, weighted_norm,
)
from .operators import (
    Direction, commutator_bracket, fractional_integral, fractional_maximal, identity_operator,
    integral_commutator, integral_operator, maximal_commutator, maximal_operator, positive_commutator,
    restricted_maximal,
)
from .report import CSV_COLUMNS, Report, csv_text, emit_report, json_text
from .weights import (
    ExponentPair, a1_constant, ainfty_profile, aq_constant, make_weight, one_weight_constant,
    two_weight_constant,
)

INF = math.inf
FWD, BWD = Direction.FORWARD, Direction.BACKWARD
EXACT = 1e-12


def _sup(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def close_arrays(rep: Report, check: str, a, b, tol: float, mask=None):
    """Sup-norm relative closeness; identical arrays pass at any tolerance."""
    a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
    if mask is not None:
        a, b = a[mask], b[mask]
    err, scale = _sup(a - b), max(_sup(a), _sup(b))
    return rep.add(check, err, scale, tol, err <= tol * scale)


def below(rep: Report, check: str, lhs, rhs, slack: float = 0.0, mask=None):
    """Pointwise ``lhs <= rhs`` with ``slack`` relative to the sup of ``rhs``."""
    lhs, rhs = np.broadcast_arrays(np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float))
    if mask is not None:
        lhs, rhs = lhs[mask], rhs[mask]
    worst = float(np.max(lhs - rhs)) if lhs.size else 0.0
    return rep.add(check, worst, 0.0, slack, worst <= slack * max(_sup(rhs), _sup(lhs)))


def raises(rep: Report, check: str, exc, func, *args, needle: str | None = None, **kwargs):
    try:
        func(*args, **kwargs)
    except exc as err:
        return rep.check_true(check, needle is None or needle in str(err))
    return rep.check_true(check, False, 0.0)


def functions_for(cfg: ScenarioConfig, spec: GridSpec) -> list[GridFunction]:
    out = []
    for kind, params in cfg.functions:
        params = dict(params)
        if kind == "indicator":
            params["cell"] = [min(int(c), e - 1) for c, e in zip(params["cell"], spec.shape)]
        out.append(make_symbol(kind, spec, **params))
    return out


def weights_for(cfg: ScenarioConfig, spec: GridSpec):
    return [(name, make_weight(kind, spec, **params)) for name, kind, params in cfg.weights]


def _lags(cfg: ScenarioConfig) -> list[TimeLag]:
    return sorted({TimeLag(0), cfg.gamma}, key=lambda g: g.value)


def _specs(cfg: ScenarioConfig) -> list[GridSpec]:
    return [cfg.grid.with_boundary("periodic"), cfg.grid.with_boundary("clipped")]


def _tag(spec: GridSpec, *parts) -> str:
    return ",".join([f"{spec.boundary[0]}{spec.extent_space}x{spec.extent_time}"] + [str(p) for p in parts])


# ---------------------------------------------------------------------------
# verify groups

def verify_lattice(cfg: ScenarioConfig) -> Report:
    rep = Report("lattice")
    rng = np.random.default_rng(cfg.seed)
    spec8 = GridSpec(cfg.grid.n, cfg.grid.p, 8, 8, "clipped")
    zero, one = build_prefix(np.zeros(spec8.shape), spec8), build_prefix(np.ones(spec8.shape), spec8)
    whole = CellBox(tuple((0, e) for e in spec8.shape))
    rep.check_true("prefix_zero_function", box_sum(zero, whole) == 0.0, box_sum(zero, whole))
    half = CellBox(((0, 4),) * spec8.n + ((0, 8),))
    rep.check_close("prefix_ones_count", box_sum(one, half), 4**spec8.n * 8, 0.0)

    for spec in _specs(cfg):
        f = GridFunction(spec, rng.uniform(size=spec.shape))
        g = GridFunction(spec, rng.standard_normal(spec.shape))
        table = build_prefix(f)
        for i in range(12):
            lo = [int(rng.integers(-e // 2 if spec.periodic else 0, e)) for e in spec.shape]
            box = CellBox(tuple((a, min(a + int(rng.integers(1, e + 1)), a + e if spec.periodic else e))
                                for a, e in zip(lo, spec.shape)))
            naive = oracles.box_sum(f.values, spec, box)
            rep.check_close(f"box_sum_vs_loop[{_tag(spec, i)}]", box_sum(table, box), naive, EXACT)
            avg = average(f, box, table)
            rep.check_close(f"average_vs_loop[{_tag(spec, i)}]", avg, naive / box.size, EXACT)
            a, b = rng.standard_normal(2)
            lin = GridFunction(spec, a * f.values + b * g.values)
            rep.check_close(f"average_linear[{_tag(spec, i)}]", average(lin, box),
                            a * avg + b * average(g, box), 1e-10)
            # split along time into two adjacent boxes
            (t0, t1) = box.ranges[-1]
            if t1 - t0 > 1:
                cut = (t0 + t1) // 2
                left = CellBox(box.ranges[:-1] + ((t0, cut),))
                right = CellBox(box.ranges[:-1] + ((cut, t1),))
                rep.check_close(f"box_sum_additive[{_tag(spec, i)}]", box_sum(table, left) + box_sum(table, right),
                                box_sum(table, box), EXACT)
            if spec.periodic:
                v = [int(x) for x in rng.integers(-5, 6, size=spec.ndim)]
                moved = CellBox(tuple((a + d, b + d) for (a, b), d in zip(box.ranges, v)))
                rep.check_close(f"average_translation[{_tag(spec, i)}]", average(shift(f, v), moved), avg, EXACT)
        full = CellBox(tuple((0, e) for e in spec.shape))
        rep.check_close(f"average_constant[{_tag(spec)}]", average(GridFunction.constant(spec, 5.0), full), 5.0, 0.0)
        ind = np.zeros(spec.shape)
        ind[..., : spec.extent_time // 2] = 1.0
        rep.check_close(f"average_half_indicator[{_tag(spec)}]", average(GridFunction(spec, ind), full), 0.5, 0.0)
        back = from_csv(to_csv(f), spec)
        rep.check_true(f"csv_round_trip[{_tag(spec)}]", np.array_equal(back.values, f.values))
        back = from_bytes(to_bytes(f), spec)
        rep.check_true(f"bytes_round_trip[{_tag(spec)}]", np.array_equal(back.values, f.values))

    bad = np.zeros(spec8.shape)
    bad[1, 2] = np.nan
    raises(rep, "non_finite_rejected_with_index", NonFiniteError, GridFunction, spec8, bad, needle="(1, 2)")
    raises(rep, "clipped_escape_names_axis", BoxOutOfRangeError, box_sum, one,
           CellBox(((0, 4),) * spec8.n + ((6, 10),)), needle=f"axis {spec8.n}")
    raises(rep, "empty_average_refused", ValueError, average, GridFunction.constant(spec8, 1.0),
           CellBox(((0, 0),) * spec8.ndim))
    return rep


def verify_geometry(cfg: ScenarioConfig) -> Report:
    rep = Report("geometry")
    rng = np.random.default_rng(cfg.seed + 1)
    R = ParabolicRectangle((32, 32), 2, 2)
    rep.check_true("upper_part_example", upper_part(R, "1/2") == CellBox(((30, 34), (34, 36))))
    rep.check_true("lower_part_example", lower_part(R, "1/2") == CellBox(((30, 34), (28, 30))))
    rep.check_true("lag_zero_halves", upper_part(R, 0).ranges[-1] == (32, 36) and lower_part(R, 0).ranges[-1] == (28, 32))

    for i in range(20):
        p, n = int(rng.integers(2, 4)), int(rng.integers(1, 3))
        m = 2 ** int(rng.integers(0, 4))
        P = m**p
        d = int(rng.integers(0, max(1, P.bit_length())))
        lag = TimeLag(Fraction(int(rng.integers(0, 2**d)), 2**d))
        Ri = ParabolicRectangle((0,) * (n + 1), m, p)
        expected = (2 * m) ** n * (1 - lag.value) * P
        up, lo = upper_part(Ri, lag), lower_part(Ri, lag)
        rep.check_true(f"part_counts[{i}:m={m},p={p},n={n},gamma={lag}]",
                       up.size == lo.size == expected == Ri.part_volume(lag), up.size)
        rep.check_true(f"parts_disjoint_inside[{i}]",
                       up.issubset(Ri.box()) and lo.issubset(Ri.box()) and up.lo[-1] >= lo.hi[-1])

    spec = cfg.grid
    for lag in _lags(cfg):
        rects = enumerate_rectangles(spec, lag)
        T = spec.extent_time
        ok = all(upper_part(Rr.reflect(T), lag) == reflect_box(lower_part(Rr, lag), T) for Rr in rects)
        rep.check_true(f"reflection_swaps_parts[gamma={lag}]", ok, len(rects))
        finer = [g for g in (Fraction(0), Fraction(1, 4)) if g <= lag.value]
        for g in finer:
            ok = all(upper_part(Rr, lag).issubset(upper_part(Rr, g)) for Rr in rects if TimeLag(g).aligned(Rr.temporal_half))
            rep.check_true(f"upper_part_monotone_in_lag[{g}<={lag}]", ok)

    rep.check_close("distance_example_unit", parabolic_distance((0, 0), (1, 1), 2), 1.0, 0.0)
    rep.check_close("distance_example_three", parabolic_distance((0, 0), (2, 9), 2), 3.0, 0.0)
    pts = rng.uniform(-10, 10, size=(1000, 3, 3))
    worst = max(parabolic_distance(a, c, 2) - parabolic_distance(a, b, 2) - parabolic_distance(b, c, 2)
                for a, b, c in pts)
    rep.add("distance_triangle_1000", worst, 0.0, EXACT, worst <= EXACT * 20)

    rep.check_true("forward_region_example", forward_region_contains((0, 0), (1, 0.5), "1/4", 2))
    rep.check_true("forward_region_past_excluded", not forward_region_contains((0, 0), (0, 0), "1/4", 2))
    for lag in ("0", "1/4", "1/2", "3/4"):
        mism = dual = 0
        for _ in range(500):
            o = rng.uniform(-4, 4, size=2)
            q = o + rng.uniform(-4, 4, size=2)
            closed = forward_region_contains(o, q, lag, 2)
            mism += closed != oracles.forward_region_by_search(o, q, lag, 2)
            dual += closed != backward_region_contains(o, (q[0], 2 * o[1] - q[1]), lag, 2)
        rep.check_true(f"forward_region_vs_scale_search[gamma={lag}]", mism == 0, mism)
        rep.check_true(f"forward_backward_reflection[gamma={lag}]", dual == 0, dual)

    spec8 = GridSpec(1, 2, 8, 8, "clipped")
    count = len(enumerate_rectangles(spec8, 0))
    rep.check_true("clipped_8x8_lag0_count", count == 54, count)
    for lag in _lags(cfg):
        per, clip = (len(enumerate_rectangles(spec.with_boundary(b), lag)) for b in ("periodic", "clipped"))
        rep.check_true(f"periodic_count_ge_clipped[gamma={lag}]", per >= clip, per - clip)
        cell = tuple(e // 2 for e in spec.shape)
        for constraint, part in (("lower_part_contains", lower_part), ("upper_part_contains", upper_part)):
            rs = enumerate_rectangles(spec, lag, constraint, cell)
            rep.check_true(f"{constraint}_postcondition[gamma={lag}]",
                           bool(rs) and all(part(Rr, lag).contains(cell, spec) for Rr in rs), len(rs))
        R0 = ParabolicRectangle(cell, max(admissible_half_widths(spec, lag)), spec.p)
        inside = enumerate_rectangles(spec.with_boundary("clipped"), lag, "inside", R0)
        brute = oracles.restricted_family(spec.with_boundary("clipped"), lag, R0)
        rep.check_true(f"inside_family_vs_scan[gamma={lag}]", set(inside) == set(brute), len(inside))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        empty = enumerate_rectangles(GridSpec(1, 2, 2, 1, "clipped"), 0)
    rep.check_true("empty_family_warns", not empty and any(issubclass(w.category, EmptyFamilyWarning) for w in caught))
    return rep


def verify_operators(cfg: ScenarioConfig) -> Report:
    rep = Report("operators")
    alpha = cfg.alpha
    for spec in _specs(cfg):
        funcs = functions_for(cfg, spec)
        for lag in _lags(cfg):
            rects = enumerate_rectangles(spec, lag)
            for a in sorted({0.0, alpha}):
                ones = fractional_maximal(GridFunction.constant(spec, 1.0), lag, a)
                expect = max(((2 * m) ** spec.n * (m**spec.p - lag.cells(m, spec.p))) ** a
                             for m in admissible_half_widths(spec, lag))
                if spec.periodic or a == 0:
                    close_arrays(rep, f"maximal_of_one[{_tag(spec, lag, a)}]", ones.values, expect, EXACT, ones.mask)
                for d in (FWD, BWD):
                    for i, f in enumerate(funcs):
                        fast = fractional_maximal(f, lag, a, d, "fast")
                        naive = fractional_maximal(f, lag, a, d, "naive")
                        close_arrays(rep, f"maximal_fast_vs_naive[{_tag(spec, lag, a, d.value, i)}]",
                                     fast.values, naive.values, EXACT)
                        rep.check_true(f"maximal_masks_agree[{_tag(spec, lag, a, d.value, i)}]",
                                       np.array_equal(fast.mask, naive.mask))
                f, g = funcs[0], funcs[1]
                ref = oracles.maximal(np.abs(f.values), spec, lag, a, True, rects)
                fast = fractional_maximal(f, lag, a, FWD)
                close_arrays(rep, f"maximal_vs_oracle[{_tag(spec, lag, a)}]", fast.values,
                             np.where(np.isfinite(ref), ref, 0.0), EXACT)
                # backward naive computed natively, compared with the reflection of forward
                back = fractional_maximal(f, lag, a, BWD, "naive")
                mirrored = reflect_time(fractional_maximal(reflect_time(f), lag, a, FWD, "naive"))
                close_arrays(rep, f"direction_duality[{_tag(spec, lag, a)}]", back.values, mirrored.values, EXACT)
                both = fractional_maximal(GridFunction(spec, f.values + g.values), lag, a)
                mg = fractional_maximal(g, lag, a)
                below(rep, f"maximal_subadditive[{_tag(spec, lag, a)}]", both.values, fast.values + mg.values, EXACT)
                scaled = fractional_maximal(GridFunction(spec, -3.0 * f.values), lag, a)
                close_arrays(rep, f"maximal_homogeneous[{_tag(spec, lag, a)}]", scaled.values, 3.0 * fast.values, EXACT)

            clipped = spec.with_boundary("clipped")
            cf = functions_for(cfg, clipped)[0]
            m0 = max(admissible_half_widths(clipped, lag))
            mid = tuple(e // 2 for e in clipped.shape)
            R0 = ParabolicRectangle(mid, m0, spec.p)
            if spec.periodic:
                continue
            for d in (FWD, BWD):
                fast = restricted_maximal(cf, lag, d, R0, "fast")
                naive = restricted_maximal(cf, lag, d, R0, "naive")
                close_arrays(rep, f"restricted_fast_vs_naive[{_tag(clipped, lag, d.value)}]", fast.values,
                             naive.values, EXACT)
                full = fractional_maximal(cf, lag, 0.0, d)
                below(rep, f"restricted_le_unrestricted[{_tag(clipped, lag, d.value)}]", fast.values, full.values,
                      EXACT, fast.mask)
                c = restricted_maximal(GridFunction.constant(clipped, 2.5), lag, d, R0)
                close_arrays(rep, f"restricted_of_constant[{_tag(clipped, lag, d.value)}]", c.values, 2.5, 0.0, c.mask)
            fam = oracles.restricted_family(clipped, lag, R0)
            ref = oracles.maximal(np.abs(cf.values), clipped, lag, 0.0, True, fam)
            fast = restricted_maximal(cf, lag, FWD, R0)
            close_arrays(rep, f"restricted_vs_oracle[{_tag(clipped, lag)}]", fast.values,
                         np.where(np.isfinite(ref), ref, 0.0), EXACT)

    # fractional integral
    spec = cfg.grid
    ia = alpha if alpha > 0 else 0.5
    lag = cfg.gamma if cfg.gamma.value > 0 else TimeLag("1/4")
    zero = fractional_integral(GridFunction.constant(spec, 0.0), lag, ia)
    rep.check_true("integral_of_zero", not np.any(zero.values))
    cell = tuple(e // 2 for e in spec.shape)
    target = cell[:-1] + (cell[-1] + 3,)
    ind = np.zeros(spec.shape)
    ind[target] = 1.0
    out = fractional_integral(GridFunction(spec, ind), lag, ia)
    kern = parabolic_distance(cell, target, spec.p) ** (-(spec.n + spec.p) * (1 - ia))
    rep.check_close("integral_single_cell", out.values[cell], kern, EXACT)
    ones = GridFunction.constant(GridSpec(1, 2, 16, 16, spec.boundary), 1.0)
    val = fractional_integral(ones, "1/4", 0.5).values[8, 8]
    rep.check_close("integral_of_one_center_vs_loop", val, oracles.fractional_integral(ones.values, ones.spec, "1/4", 0.5, (8, 8)), EXACT)
    f = functions_for(cfg, spec)[0]
    fi = fractional_integral(f, lag, ia)
    for j, c in enumerate([(1, 2), (7, 7), (spec.extent_space - 1, 0), (3, spec.extent_time - 1)]):
        c = tuple(min(x, e - 1) for x, e in zip(c + (0,) * (spec.ndim - 2), spec.shape))
        rep.check_close(f"integral_vs_loop[{j}]", fi.values[c],
                        oracles.fractional_integral(f.values, spec, lag, ia, c), 1e-10)
    back = fractional_integral(f, lag, ia, BWD)
    close_arrays(rep, "integral_direction_duality", back.values,
                 reflect_time(fractional_integral(reflect_time(f), lag, ia)).values, EXACT)
    g = functions_for(cfg, spec)[1]
    T = integral_operator(lag, ia)
    close_arrays(rep, "integral_linear", T(GridFunction(spec, 2.5 * f.values - 1.5 * g.values)).values,
                 2.5 * T(f).values - 1.5 * T(g).values, 1e-10)
    raises(rep, "integral_lag_zero_refused", ValueError, fractional_integral, f, 0, ia)
    trunc = fractional_integral(f, 0, ia, truncated=True)
    rep.check_true("integral_lag_zero_truncated_runs", bool(np.all(np.isfinite(trunc.values))))
    raises(rep, "integral_alpha_zero_refused", ValueError, fractional_integral, f, lag, 0.0)
    rep.merge(verify_domination(cfg))
    return rep


def verify_commutators(cfg: ScenarioConfig) -> Report:
    rep = Report("commutators")
    spec = cfg.grid
    alpha = cfg.alpha
    ia = alpha if alpha > 0 else 0.5
    lag = cfg.gamma if cfg.gamma.value > 0 else TimeLag("1/4")
    b = make_symbol(cfg.symbol[0], spec, **cfg.symbol[1])
    funcs = functions_for(cfg, spec)
    ops = [identity_operator(), integral_operator(lag, ia)]
    for T in ops:
        for i, f in enumerate(funcs):
            for k in (1, 2, 3):
                kern = commutator_bracket(T, b, f, k, "kernel")
                rec = commutator_bracket(T, b, f, k, "recursive")
                if T.name == "identity":
                    rep.check_true(f"identity_bracket_zero[k={k},{i}]", not np.any(rec.values), _sup(rec.values))
                    rep.check_le(f"identity_bracket_kernel_small[k={k},{i}]", _sup(kern.values),
                                 EXACT * _sup(b.values**k * f.values))
                else:
                    close_arrays(rep, f"kernel_vs_recursive[k={k},{i}]", kern.values, rec.values, 1e-9)
                for lam in (2.0, 0.5, -4.0) if T.name != "identity" else ():
                    scaled = commutator_bracket(T, GridFunction(spec, lam * b.values), f, k, "kernel")
                    close_arrays(rep, f"bracket_homogeneous[{T.name.split('[')[0]},k={k},lam={lam},{i}]",
                                 scaled.values, lam**k * kern.values, EXACT)
                const = commutator_bracket(T, GridFunction.constant(spec, 4.0), f, k, "recursive")
                rep.check_true(f"bracket_constant_symbol[{T.name[:8]},k={k},{i}]", not np.any(const.values))
    raises(rep, "bracket_order_zero_refused", ValueError, commutator_bracket, ops[0], b, funcs[0], 0)

    for sp in _specs(cfg):
        bs = make_symbol(cfg.symbol[0], sp, **cfg.symbol[1])
        fs = functions_for(cfg, sp)
        for lg in _lags(cfg):
            for d in (FWD, BWD):
                for k in (1, 2, 3):
                    f = fs[k % len(fs)]
                    fast = maximal_commutator(f, bs, lg, alpha, k, d, "fast")
                    naive = maximal_commutator(f, bs, lg, alpha, k, d, "naive")
                    close_arrays(rep, f"maximal_commutator_fast_vs_naive[{_tag(sp, lg, d.value, k)}]",
                                 fast.values, naive.values, EXACT)
                    scaled = maximal_commutator(f, GridFunction(sp, -2.0 * bs.values), lg, alpha, k, d)
                    close_arrays(rep, f"maximal_commutator_homogeneous[{_tag(sp, lg, d.value, k)}]",
                                 scaled.values, 2.0**k * fast.values, EXACT)
            zero = maximal_commutator(fs[0], GridFunction.constant(sp, 1.5), lg, alpha, 2)
            rep.check_true(f"maximal_commutator_constant_symbol[{_tag(sp, lg)}]", not np.any(zero.values))
            # positive commutator bound
            Tq = maximal_operator(lg, alpha)
            for i, f in enumerate(fs):
                lhs = np.abs(positive_commutator(Tq, bs, f).values)
                M1 = maximal_commutator(f, bs, lg, alpha, 1).values
                rhs = M1 + 2 * np.maximum(-bs.values, 0.0) * Tq(f).values
                below(rep, f"positive_commutator_bound[{_tag(sp, lg, i)}]", lhs, rhs, EXACT)
                zero = positive_commutator(Tq, GridFunction.constant(sp, 2.0), f)
                rep.check_true(f"positive_commutator_constant[{_tag(sp, lg, i)}]", not np.any(zero.values))
                pos = GridFunction(sp, np.abs(f.values))
                babs = GridFunction(sp, np.abs(bs.values))
                rep.check_true(f"positive_commutator_definition[{_tag(sp, lg, i)}]", np.array_equal(
                    positive_commutator(Tq, babs, pos).values, babs.values * Tq(pos).values - Tq(
                        GridFunction(sp, babs.values * pos.values)).values))

    small = GridSpec(spec.n, spec.p, 8, 8, spec.boundary)
    bsm = make_symbol("noise", small, seed=cfg.seed + 5)
    fsm = make_symbol("uniform", small, seed=cfg.seed + 6)
    for k in (1, 2, 3):
        ic = integral_commutator(fsm, bsm, lag, ia, k)
        close_arrays(rep, f"integral_commutator_vs_loop[k={k}]", ic.values,
                     oracles.integral_commutator(fsm.values, bsm.values, small, lag, ia, k), 1e-10)
        if k % 2 == 0:
            br = commutator_bracket(integral_operator(lag, ia), bsm, fsm, k)
            below(rep, f"bracket_le_integral_commutator[k={k}]", np.abs(br.values), ic.values, 1e-10)
        mc = maximal_commutator(fsm, bsm, lag, alpha, k)
        close_arrays(rep, f"maximal_commutator_vs_oracle[k={k}]", mc.values,
                     np.nan_to_num(oracles.maximal_commutator(fsm.values, bsm.values, small, lag, alpha, k),
                                   neginf=0.0), EXACT)
    zero = integral_commutator(funcs[0], GridFunction.constant(spec, 3.0), lag, ia, 2)
    rep.check_true("integral_commutator_constant_symbol", not np.any(zero.values))
    return rep


def verify_contour(cfg: ScenarioConfig) -> Report:
    rep = Report("contour")
    extent = int(cfg.contour.get("extent", 12))
    spec = GridSpec(cfg.grid.n, cfg.grid.p, extent, extent, cfg.grid.boundary)
    lag = cfg.gamma if cfg.gamma.value > 0 else TimeLag("1/4")
    ia = cfg.alpha if cfg.alpha > 0 else 0.5
    rng = np.random.default_rng(cfg.seed + 2)
    ops = [identity_operator(), integral_operator(lag, ia)]
    for trial in range(2):
        b = GridFunction(spec, rng.uniform(-1, 1, size=spec.shape))
        f = GridFunction(spec, rng.standard_normal(spec.shape))
        for k in cfg.contour.get("orders", [1, 2, 3]):
            cc = ContourConfig.for_order(k, cfg.contour.get("radius"))
            for T in ops:
                got = contour_commutator(T, b, f, cc)
                ref = commutator_bracket(T, b, f, k)
                if T.name == "identity":
                    rep.check_le(f"contour_identity_zero[k={k},{trial}]", _sup(got.values),
                                 1e-10 * _sup(b.values**k * f.values))
                else:
                    close_arrays(rep, f"contour_vs_bracket[k={k},{trial}]", got.values, ref.values, 1e-8)
            got = contour_commutator(ops[1], GridFunction.constant(spec, 0.7), f, cc)
            rep.check_le(f"contour_constant_symbol[k={k},{trial}]", _sup(got.values),
                         1e-10 * _sup(ops[1](f).values))
    raises(rep, "contour_aliasing_refused", ValueError, ContourConfig, 2, 4, 8)
    raises(rep, "contour_truncation_refused", ValueError, ContourConfig, 3, 2, 12)
    return rep


def verify_weights(cfg: ScenarioConfig) -> Report:
    rep = Report("weights")
    spec = cfg.grid
    lags = _lags(cfg)
    # unit weights give 1 bit for bit; other constants up to rounding
    for c, tol in ((1.0, 0.0), (3.7, EXACT)):
        w = make_weight("constant", spec, c=c)
        for lag in lags:
            for pair in cfg.pairs + [ExponentPair(1, 1), ExponentPair(2, INF), ExponentPair(1, INF)]:
                for d in (FWD, BWD):
                        rep.check_close(f"constant_weight_constant[c={c},{pair},{lag},{d.value}]",
                                    one_weight_constant(w, pair, lag, d), 1.0, tol)
            rep.check_close(f"constant_weight_aq[c={c},{lag}]", aq_constant(w, 3.0, lag), 1.0, tol)
            for form, value in zip(("maximal", "rectangle"), a1_constant(w, lag)):
                rep.check_close(f"constant_weight_a1_{form}[c={c},{lag}]", value, 1.0, tol)

    weights = weights_for(cfg, spec) + [(f"loglip{s}", make_weight("log_lipschitz", spec, seed=s)) for s in range(4)]
    for name, w in weights:
        for lag in lags:
            for pair in cfg.pairs:
                fw = one_weight_constant(w, pair, lag, FWD)
                rep.check_close(f"two_weight_diagonal[{name},{pair},{lag}]",
                                two_weight_constant(w, w, pair, lag, FWD), fw, 0.0)
                bw = one_weight_constant(w, pair, lag, BWD)
                rw = one_weight_constant(reflect_time(w), pair, lag, FWD)
                if spec.periodic:
                    rep.check_close(f"time_reversal[{name},{pair},{lag}]", bw, rw, EXACT)
                if pair.r == pair.q:
                    rep.check_le(f"forward_backward_product_ge_one[{name},{pair},{lag}]", 1.0, fw * bw, EXACT)
                if 1 < pair.r and pair.q < INF:
                    Q, Qd = 1 + pair.q / pair.r_conj, 1 + pair.r_conj / pair.q
                    wq = GridFunction(spec, w.values**pair.q)
                    rep.check_close(f"duality_power_q[{name},{pair},{lag}]", aq_constant(wq, Q, lag, FWD),
                                    fw**pair.q, 1e-9)
                    wr = GridFunction(spec, w.values ** (-pair.r_conj))
                    rep.check_close(f"duality_power_r_conj[{name},{pair},{lag}]", aq_constant(wr, Qd, lag, BWD),
                                    fw**pair.r_conj, 1e-9)
            for q in (1.5, 2.0, 4.0):
                rep.check_close(f"aq_two_forms[{name},q={q},{lag}]", aq_constant(w, q, lag, form="power"),
                                aq_constant(w, q, lag, form="classical"), 1e-10)
            prof = ainfty_profile(w, lag, [1.5, 2, 3, 4, 8, 16])
            worst = max((b - a) / a for (_, a), (_, b) in zip(prof, prof[1:]))
            rep.add(f"aq_nonincreasing_in_q[{name},{lag}]", worst, 0.0, EXACT, worst <= EXACT)
            a1 = a1_constant(w, lag)
            rep.record(f"a1_forms[{name},{lag}]", a1[0], a1[1])

    small = GridSpec(spec.n, spec.p, 8, 8, spec.boundary)
    u = make_weight("log_lipschitz", small, seed=cfg.seed + 10)
    v = make_weight("log_lipschitz", small, seed=cfg.seed + 11)
    for pair in (ExponentPair(2, 2), ExponentPair(2, 4), ExponentPair(1, 2), ExponentPair(2, INF)):
        for lag in lags:
            for d in (FWD, BWD):
                rep.check_close(f"two_weight_vs_oracle[{pair},{lag},{d.value}]",
                                two_weight_constant(u, v, pair, lag, d),
                                oracles.two_weight_constant(u.values, v.values, small, pair.r, pair.q, lag, d is FWD),
                                1e-10)

    # the periodic seam would break monotonicity in time, so this runs clipped
    w = make_weight("time_shift_exp", spec.with_boundary("clipped"), lam=0.25)
    for lag in lags:
        for pair in cfg.pairs:
            fw, bw = (one_weight_constant(w, pair, lag, d) for d in (FWD, BWD))
            rep.add(f"exp_weight_one_sided[{pair},{lag}]", fw, bw, 0.0, fw < bw)
    rep.check_true("exp_symbol_zero_is_unit",
                   np.array_equal(make_weight("exp_symbol", spec, b=make_symbol("noise", spec, seed=1), c=0.0).values,
                                  np.ones(spec.shape)))
    t = np.arange(spec.extent_time, dtype=float)
    close_arrays(rep, "time_shift_exp_formula", make_weight("time_shift_exp", spec, lam=0.3, t0=2.0).values,
                 np.broadcast_to(np.exp(0.3 * (t - 2.0)), spec.shape), EXACT)
    return rep


def verify_norms(cfg: ScenarioConfig) -> Report:
    rep = Report("norms")
    spec = cfg.grid
    rng = np.random.default_rng(cfg.seed + 3)
    for i in range(20):
        f = GridFunction(spec, rng.standard_normal(spec.shape) * (rng.uniform(size=spec.shape) < 0.7))
        w = GridFunction(spec, rng.uniform(0.2, 3.0, size=spec.shape))
        q, r = float(rng.choice([1.0, 1.5, 2.0, 3.0])), float(rng.choice([1.5, 2.0, 4.0]))
        rep.check_close(f"lorentz_diagonal_is_lebesgue[{i}]", lorentz_norm(f, q, q, w), weighted_norm(f, q, w), 1e-10)
        rep.check_close(f"lorentz_weak_is_weak[{i}]", lorentz_norm(f, r, INF, w), weak_norm(f, r, w), 1e-10)
        rep.check_le(f"chebyshev[{i}]", weak_norm(f, q, w), weighted_norm(f, q, w), EXACT)
        E = rng.uniform(size=spec.shape) < 0.3
        ind = GridFunction(spec, E.astype(float))
        mass = float(np.sum(w.values[E]))
        rep.check_close(f"indicator_norms[{i}]", weak_norm(ind, q, w), mass ** (1 / q), EXACT)
        rep.check_close(f"indicator_strong[{i}]", weighted_norm(ind, q, w), mass ** (1 / q), EXACT)
        rep.check_close(f"indicator_lorentz_weak[{i}]", lorentz_norm(ind, r, INF, w), mass ** (1 / r), EXACT)
    two = np.where(np.arange(spec.size).reshape(spec.shape) % 3 == 0, 3.0, 1.0)
    n3, n1 = int(np.sum(two == 3.0)), int(np.sum(two == 1.0))
    hand = max(3.0 * n3 ** 0.5, 1.0 * (n3 + n1) ** 0.5)
    rep.check_close("weak_two_levels_by_hand", weak_norm(GridFunction(spec, two), 2.0), hand, EXACT)
    ra = rearrangement(GridFunction(spec, two))
    rep.check_true("rearrangement_steps", ra(0.0) == 3.0 and ra(n3 + 0.5) == 1.0 and ra(spec.size + 1.0) == 0.0)

    b = make_symbol(cfg.symbol[0], spec, **cfg.symbol[1])
    n, p = spec.n, spec.p
    for sp in (GridSpec(n, p, 8, 8, "periodic"), GridSpec(n, p, 8, 8, "clipped"), spec.with_boundary("clipped")):
        bx = make_symbol("x", sp)
        for beta in (0.0, 1 / (4 * (n + p))):
            rep.check_close(f"oscillation_vs_oracle[{_tag(sp, round(beta, 4))}]", oscillation_norm(bx, beta),
                            oracles.oscillation(bx.values, sp, beta), EXACT)
    bs = b.values
    osc = oscillation_norm(b, 0.0)
    rep.check_true("oscillation_constant_zero", oscillation_norm(GridFunction.constant(spec, 2.0)) == 0.0)
    rep.check_close("oscillation_shift_invariant", oscillation_norm(GridFunction(spec, bs + 10.0)), osc, 1e-10)
    rep.check_close("oscillation_homogeneous", oscillation_norm(GridFunction(spec, -2.0 * bs)), 2.0 * osc, EXACT)

    for j in range(10):
        bj = make_symbol("smooth" if j % 2 else "noise", spec, seed=cfg.seed + 20 + j)
        for beta in (1 / (2 * (n + p)), 1 / (4 * (n + p))):
            lhs = oscillation_norm(bj, beta)
            rhs = 2 ** ((p - 1) * beta) * plip_norm(bj, (n + p) * beta)
            rep.check_le(f"campanato_le_lipschitz[{j},beta={beta:.4f}]", lhs, rhs, 0.0)
            rep.record(f"lipschitz_over_campanato[{j},beta={beta:.4f}]", rhs / lhs if lhs else INF)
    for sp in (GridSpec(1, 2, 8, 8, "clipped"), GridSpec(1, 2, 16, 16, "clipped")):
        rep.check_close(f"plip_of_x[{_tag(sp)}]", plip_norm(make_symbol("x", sp), 1.0), 1.0, EXACT)
    sp10 = GridSpec(1, 2, 10, 10, "clipped")
    for j in range(3):
        bj = make_symbol("noise", sp10, seed=cfg.seed + 40 + j)
        value, exact = plip_estimate(bj, 0.5)
        rep.check_close(f"plip_vs_oracle[{j}]", value, oracles.plip(bj.values, sp10, 0.5), EXACT)
        rep.check_true(f"plip_exact_flag[{j}]", exact)
    raises(rep, "oscillation_beta_range", ValueError, oscillation_norm, b, 1 / (n + p))
    return rep


def iteration_normalizer(spec: GridSpec, omega: GridFunction, pair: ExponentPair, lag, budget: int, seed: int) -> float:
    """1.5 times the larger probe estimate of the forward and backward maximal norms the iteration uses."""
    q = pair.q
    Q, Qd = 1 + q / pair.r_conj, 1 + pair.r_conj / q
    fwd, _ = estimate_operator_norm(maximal_operator(lag, 0.0, FWD), ExponentPair(Q, Q),
                                    GridFunction(spec, omega.values ** (q / Q)), budget, seed, lag)
    bwd, _ = estimate_operator_norm(maximal_operator(lag, 0.0, BWD), ExponentPair(Qd, Qd),
                                    GridFunction(spec, omega.values ** (q * (1 - Qd) / Qd)), budget, seed, lag)
    return 1.5 * max(fwd, bwd)


def verify_iteration(cfg: ScenarioConfig, engine: str | None = None) -> Report:
    rep = Report("iteration")
    engine = engine or ("fast" if cfg.engine == "both" else cfg.engine)
    spec = cfg.grid
    lag = cfg.gamma
    funcs = functions_for(cfg, spec)
    pairs = [pr for pr in cfg.pairs if pr.r > 1 and pr.q < INF]
    for wname, w in weights_for(cfg, spec)[:3]:
        for pair in pairs:
            B = iteration_normalizer(spec, w, pair, lag, cfg.probe_budget, cfg.seed)
            rep.record(f"normalizer[{wname},{pair}]", B)
            s, q = pair.s, pair.q
            Qd = 1 + pair.r_conj / q
            h1 = build_h1(funcs[0], funcs[1], w, pair)
            h2 = build_h2(funcs[0], w, pair)
            wq = GridFunction(spec, w.values**q)
            for K in cfg.iteration_K:
                tag = f"{wname},{pair},K={K}"
                icfg = IterationConfig(lag, pair, K, B)
                H1 = rdf_forward(h1, icfg, engine)
                below(rep, f"h1_le_H1[{tag}]", h1.values, H1.values)
                series = rdf_series(h1.values**s, spec, lag, K, B, FWD, engine)
                M = fractional_maximal(GridFunction(spec, series[K]), lag, 0.0, FWD, engine)
                below(rep, f"forward_one_step_a1[{tag}]", M.values, 2 * B * series[K + 1], 0.0, M.mask)
                inc = series[K + 1] - series[K]
                below(rep, f"forward_increment_geometric[{tag}]", inc, np.max(h1.values**s) / (2 * B) ** (K + 1), EXACT)
                rep.check_le(f"forward_norm_bound[{tag}]", weighted_norm(H1, q, wq), 2 ** (1 / s + 1), 0.0)
                if K == 0:
                    rep.check_true(f"forward_K0_identity[{tag}]", np.array_equal(H1.values, h1.values))

                H2 = rdf_backward(h2, w, icfg, engine)
                below(rep, f"h2_le_H2[{tag}]", h2.values, H2.values)
                bseries = rdf_series(h2.values * wq.values, spec, lag, K, B, BWD, engine)
                Mb = fractional_maximal(GridFunction(spec, bseries[K]), lag, 0.0, BWD, engine)
                below(rep, f"backward_one_step_a1[{tag}]", Mb.values, 2 * B * bseries[K + 1], 0.0, Mb.mask)
                rep.check_le(f"backward_norm_bound[{tag}]", weighted_norm(H2, Qd, wq), 2.0, 0.0)
                mirrored = rdf_series(reflect_time(GridFunction(spec, h2.values * wq.values)).values, spec, lag, K,
                                      B, FWD, engine)[K]
                close_arrays(rep, f"backward_reflection_oracle[{tag}]", bseries[K], mirrored[..., ::-1], EXACT)
    B = 2.0
    for K in cfg.iteration_K:
        one = rdf_forward(GridFunction.constant(spec, 1.0), IterationConfig(lag, pairs[0], K, B), engine)
        expect = sum((2 * B) ** -k for k in range(K + 1)) ** (1 / pairs[0].s)
        close_arrays(rep, f"constant_input_geometric[K={K}]", one.values, expect, EXACT, one.mask)
        ind = np.zeros(spec.shape)
        ind[tuple(e // 2 for e in spec.shape)] = 1.0
        series = rdf_series(ind, spec, lag, K, B, FWD, engine)
        M = fractional_maximal(GridFunction(spec, series[K]), lag, 0.0, FWD, engine)
        below(rep, f"indicator_one_step_a1[K={K}]", M.values, 2 * B * series[K + 1], 0.0, M.mask)
    raises(rep, "negative_input_refused", ValueError, rdf_forward,
           GridFunction.constant(spec, -1.0), IterationConfig(lag, pairs[0], 1, B))
    return rep


def verify_probes(cfg: ScenarioConfig) -> Report:
    rep = Report("probes")
    spec = cfg.grid
    lag = cfg.gamma
    unit = make_weight("constant", spec)
    ident = identity_operator()
    for pair in (ExponentPair(1, 1), ExponentPair(2, 2), ExponentPair(3, 3)):
        est, _ = estimate_operator_norm(ident, pair, unit, 16, cfg.seed, lag)
        rep.check_close(f"identity_estimate_one[{pair}]", est, 1.0, EXACT)
        est, _ = estimate_operator_norm(lambda f: GridFunction(spec, 2 * f.values), pair, unit, 16, cfg.seed, lag)
        rep.check_close(f"double_identity_estimate_two[{pair}]", est, 2.0, EXACT)
    T = maximal_operator(lag, cfg.alpha)
    for wname, w in weights_for(cfg, spec)[:2]:
        for pair in cfg.pairs:
            probes = probe_functions(spec, w, pair, lag, 64, cfg.seed)
            seq = []
            for budget in (4, 8, 16, 32, 64):
                est, _ = estimate_operator_norm(T, pair, w, probes=probes[:budget])
                seq.append(est)
            worst = max(a - b for a, b in zip(seq, seq[1:]))
            rep.check_le(f"estimate_monotone_in_budget[{wname},{pair}]", worst, 0.0, 0.0)
            again, _ = estimate_operator_norm(T, pair, w, 64, cfg.seed, lag)
            rep.check_true(f"estimate_deterministic[{wname},{pair}]", again == seq[-1])
            prefix = probe_functions(spec, w, pair, lag, 16, cfg.seed)
            rep.check_true(f"probe_budgets_nest[{wname},{pair}]",
                           all(a[0] == b[0] and np.array_equal(a[1], b[1]) for a, b in zip(prefix, probes)))
    boolean = ("adapted", "part_indicator", "cell")
    for boundary in ("periodic", "clipped"):
        sp = GridSpec(1, 2, 3, 3, boundary)
        M = maximal_operator(0, 0.0)
        for pair in (ExponentPair(1, 1), ExponentPair(2, 2), ExponentPair(3, 3), ExponentPair(2, 4)):
            exact = oracles.boolean_norm(M, sp, pair.r, pair.q)
            est, _ = estimate_operator_norm(M, pair, make_weight("constant", sp), 200, cfg.seed, 0, families=boolean)
            rep.check_le(f"boolean_probes_le_subset_oracle[{boundary},{pair}]", est, exact, EXACT)
            full, _ = estimate_operator_norm(M, pair, make_weight("constant", sp), 200, cfg.seed, 0)
            rep.record(f"all_probes_vs_subset_oracle[{boundary},{pair}]", full, exact)
    u = make_weight("log_lipschitz", spec, seed=cfg.seed + 1)
    val = two_weight_sup_estimate(maximal_operator(lag, 0.5), u, u, 2.0, lag, 32, cfg.seed)
    rep.record("two_weight_sup_estimate", val)
    return rep


def verify_reports(cfg: ScenarioConfig) -> Report:
    rep = Report("reports")
    empty = Report("empty")
    rep.check_true("empty_report_header_only", csv_text(empty) == ",".join(CSV_COLUMNS) + "\n")
    sample = Report("sample", environment={"seed": cfg.seed})
    sample.check_close("a", 1.0, 1.0 + 1e-14, EXACT, inputs="x")
    sample.check_le("b", 1.0, INF)
    sample.record("c", math.nan)
    text = json_text(sample)
    parsed = json.loads(text)
    rep.check_true("json_round_trip", json.dumps(parsed, sort_keys=True, indent=2) + "\n" == text)
    rep.check_true("json_names_tolerance", all(c["tolerance"] is not None for c in parsed["checks"] if c["pass"] is not None))
    rep.check_true("json_deterministic", json_text(sample) == text)
    with tempfile.TemporaryDirectory() as tmp:
        files = emit_report(sample, tmp, "both")
        rep.check_true("emit_writes_files", all(p.exists() for p in files), len(files))
    problems = coverage_self_test()
    rep.check_true("coverage_table_complete", not problems, len(problems), inputs="; ".join(problems))
    return rep


VERIFY_GROUPS = {
    "lattice": verify_lattice,
    "geometry": verify_geometry,
    "operators": verify_operators,
    "commutators": verify_commutators,
    "contour": verify_contour,
    "weights": verify_weights,
    "norms": verify_norms,
    "iteration": verify_iteration,
    "probes": verify_probes,
    "reports": verify_reports,
}


def run_verify(cfg: ScenarioConfig, groups=None, threads: int = 1) -> Report:
    """Run the verify groups (in parallel when ``threads > 1``) and merge in group order."""
    names = list(groups or VERIFY_GROUPS)
    unknown = [g for g in names if g not in VERIFY_GROUPS]
    if unknown:
        raise ValueError(f"unknown verify group(s) {unknown}; expected some of {list(VERIFY_GROUPS)}")

    def run(name):
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EmptyFamilyWarning)
            sub = VERIFY_GROUPS[name](cfg)
        sub.timings["total"] = time.perf_counter() - t0
        return sub

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, names))
    else:
        parts = [run(name) for name in names]
    rep = Report("verify", environment=environment(cfg))
    for sub in parts:
        rep.merge(sub)
    return rep


def environment(cfg: ScenarioConfig) -> dict:
    g = cfg.grid
    return {"seed": cfg.seed, "n": g.n, "p": g.p, "extent_space": g.extent_space, "extent_time": g.extent_time,
            "boundary": g.boundary, "gamma": str(cfg.gamma), "alpha": cfg.alpha, "engine": cfg.engine}


# ---------------------------------------------------------------------------
# coverage: each mathematical object and the one command that exercises it

CONSTANT_KINDS = ("two_weight", "one_weight", "aq", "a1", "ainfty")
OPERATOR_KINDS = ("maximal", "restricted", "integral", "maximal_commutator", "integral_commutator", "bracket",
                  "positive_commutator", "contour")

COVERAGE = {
    "parabolic rectangles and their lagged parts": ("verify", "geometry"),
    "two-weight lagged Muckenhoupt constants": ("constants", "two_weight"),
    "one-weight lagged Muckenhoupt constants": ("constants", "one_weight"),
    "A_q constants in power and classical form": ("constants", "aq"),
    "A_1 constants, maximal and rectangle forms": ("constants", "a1"),
    "A_infinity profile": ("constants", "ainfty"),
    "weighted Lebesgue and weak Lebesgue norms": ("verify", "norms"),
    "parabolic distance and integration regions": ("verify", "geometry"),
    "Campanato and bounded mean oscillation norms": ("verify", "norms"),
    "uncentred fractional maximal operators": ("operators", "maximal"),
    "restricted maximal operators": ("operators", "restricted"),
    "fractional integral operators": ("operators", "integral"),
    "iterated commutators, kernel and recursive forms": ("operators", "bracket"),
    "positive quasilinear commutators": ("operators", "positive_commutator"),
    "fractional maximal commutators": ("operators", "maximal_commutator"),
    "maximal commutators of fractional integrals": ("operators", "integral_commutator"),
    "Cauchy contour representation of commutators": ("operators", "contour"),
    "weighted boundedness characterizations of maximal operators": ("verify", "probes"),
    "extrapolation exponent and iteration majorants": ("verify", "iteration"),
    "weight duality identities": ("verify", "weights"),
    "strong type extrapolation": ("extrapolate", "strong"),
    "weak type extrapolation": ("extrapolate", "weak"),
    "A_infinity extrapolation": ("extrapolate", "a_infinity"),
    "vector-valued extrapolation and Fefferman-Stein inequality": ("extrapolate", "vector_valued"),
    "extrapolation at infinity": ("extrapolate", "at_infinity"),
    "weighted Lorentz norms and decreasing rearrangement": ("verify", "norms"),
    "Campanato equals Lipschitz, explicit direction": ("verify", "norms"),
    "parabolic Lipschitz norm": ("verify", "norms"),
    "domination of maximal by fractional integral with dilated lag": ("verify", "operators"),
    "integral commutator characterization by oscillation": ("characterize", "thm_1_7"),
    "maximal commutator characterization by Campanato norm": ("characterize", "thm_1_9"),
    "positive commutator characterization": ("characterize", "thm_3_4"),
    "even-order maximal commutator characterization": ("characterize", "cor_3_6"),
    "lattice prefix sums and averages": ("verify", "lattice"),
    "report serialisation": ("verify", "reports"),
    "commutator identities": ("verify", "commutators"),
    "contour identities": ("verify", "contour"),
}

REGISTERED = {
    "verify": tuple(VERIFY_GROUPS),
    "constants": CONSTANT_KINDS,
    "operators": OPERATOR_KINDS,
    "extrapolate": TRANSFER_MODES,
    "characterize": tuple(KIND_ALIASES) + tuple(CHARACTERIZATION_KINDS),
    "bench": ("maximal",),
}


def coverage_self_test() -> list[str]:
    """Every covered object points at a registered command; every registered kind is covered."""
    problems = []
    for obj, (cmd, kind) in COVERAGE.items():
        if kind not in REGISTERED.get(cmd, ()):
            problems.append(f"{obj!r} points at unregistered {cmd} {kind}")
    used = set(COVERAGE.values())
    for cmd in ("verify", "constants", "operators", "extrapolate"):
        for kind in REGISTERED[cmd]:
            if (cmd, kind) not in used:
                problems.append(f"{cmd} {kind} covers nothing")
    for alias in CHARACTERIZATION_KINDS.values():
        if ("characterize", alias) not in used:
            problems.append(f"characterize {alias} covers nothing")
    return problems


def coverage_table() -> str:
    rows = ["object,subcommand,kind"]
    rows += [f"\"{obj}\",{cmd},{kind}" for obj, (cmd, kind) in COVERAGE.items()]
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# benchmark

def run_bench(cfg: ScenarioConfig, engine: str = "both") -> Report:
    """Time fast and naive maximal engines on a large grid.  The speedup is recorded, not asserted."""
    bench = cfg.bench
    extent = int(bench.get("extent", 64))
    spec = GridSpec(cfg.grid.n, cfg.grid.p, extent, int(bench.get("extent_time", extent)), cfg.grid.boundary)
    lag = cfg.gamma
    rep = Report("bench", environment=environment(cfg) | {"extent_space": spec.extent_space,
                                                           "extent_time": spec.extent_time})
    widths = admissible_half_widths(spec, lag)
    rep.record("largest_half_width", max(widths, default=0), int(bench.get("max_width", 8)))
    f = make_symbol("uniform", spec, seed=cfg.seed)
    b = make_symbol("smooth", spec, seed=cfg.seed + 1)
    repeats = int(bench.get("repeats", 1))
    cases = [
        ("maximal", lambda e: fractional_maximal(f, lag, cfg.alpha, FWD, e)),
        ("maximal_backward", lambda e: fractional_maximal(f, lag, cfg.alpha, BWD, e)),
        ("maximal_commutator_k1", lambda e: maximal_commutator(f, b, lag, cfg.alpha, 1, FWD, e)),
    ]
    engines = ("fast", "naive") if engine == "both" else (engine,)
    for name, run in cases:
        outs, secs = {}, {}
        for e in engines:
            best = INF
            for _ in range(repeats):
                t0 = time.perf_counter()
                outs[e] = run(e)
                best = min(best, time.perf_counter() - t0)
            secs[e] = best
            rep.timings[f"{name}/{e}"] = best
        row = {"case": name, "extent": extent, "m_max": max(widths, default=0)}
        row.update({f"{e}_seconds": secs[e] for e in engines})
        if len(engines) == 2:
            close_arrays(rep, f"engines_agree[{name}]", outs["fast"].values, outs["naive"].values, EXACT)
            speed = secs["naive"] / secs["fast"]
            rep.record(f"speedup[{name}]", speed, 10.0)
            row["speedup"] = speed
        rep.table.append(row)
    return rep


# ---------------------------------------------------------------------------
# domination of the maximal operator by the dilated-lag fractional integral

def domination_constant(f: GridFunction, gamma, alpha: float) -> float:
    """Smallest ``C`` with ``M_alpha(f) <= C * I_alpha(|f|)`` on the cells where the maximal value is valid."""
    lag = as_lag(gamma)
    M = fractional_maximal(f, lag, alpha)
    integral = fractional_integral(GridFunction(f.spec, np.abs(f.values)), lag.dilated(f.spec.p), alpha)
    m, i = M.values[M.mask], integral.values[M.mask]
    if np.any((m > 0) & (i <= 0)):
        return INF
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(m > 0, m / np.where(i > 0, i, 1.0), 0.0)
    return float(np.max(ratio)) if ratio.size else 0.0


def domination_family(spec: GridSpec, count: int, seed: int) -> list[GridFunction]:
    """Nonnegative probes: cell indicators, uniform noise and smooth bumps."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        kind = i % 3
        if kind == 0:
            v = np.zeros(spec.shape)
            v[tuple(int(rng.integers(0, e)) for e in spec.shape)] = 1.0
        elif kind == 1:
            v = rng.uniform(size=spec.shape)
        else:
            v = np.abs(make_symbol("smooth", spec, seed=int(rng.integers(2**31))).values)
        out.append(GridFunction(spec, v))
    return out


def verify_domination(cfg: ScenarioConfig, sizes=(12, 24), count: int = 12) -> Report:
    rep = Report("domination")
    lag, alpha = TimeLag("1/2"), 0.5
    consts = {}
    for size in sizes:
        spec = GridSpec(1, 2, size, size, "clipped")
        vals = [domination_constant(f, lag, alpha) for f in domination_family(spec, count, cfg.seed)]
        consts[size] = max(vals)
        rep.record(f"domination_constant[{size}]", consts[size])
    small, large = consts[sizes[0]], consts[sizes[-1]]
    rep.check_le("domination_constant_stable", large, 2 * small, 0.0)
    return rep


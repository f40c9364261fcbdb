"""Maximal, fractional-integral and commutator operators with a time lag.

Two engines evaluate the maximal operators.  ``naive`` walks every admissible
rectangle, sums its upper part cell by cell and pushes the average onto the
cells of its lower part.  ``fast`` works one half-width at a time: window sums
from a prefix table give the upper-part average for every centre at once, and
a separable sliding maximum hands each cell the best centre among those whose
lower part contains it.  Backward operators are the forward ones conjugated
by time reflection.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import ndimage

from .geometry import (
    ParabolicRectangle,
    admissible_half_widths,
    as_lag,
    center_ranges,
    enumerate_rectangles,
    lower_part,
    upper_part,
)
from .lattice import GridFunction, GridSpec, combine_valid, reflect_time, shifted, window_reduce, window_sums


class Direction(enum.Enum):
    FORWARD = "+"
    BACKWARD = "-"

    @classmethod
    def parse(cls, value) -> "Direction":
        if isinstance(value, cls):
            return value
        aliases = {"+": cls.FORWARD, "forward": cls.FORWARD, "-": cls.BACKWARD, "backward": cls.BACKWARD}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown direction {value!r}") from None

    @property
    def opposite(self) -> "Direction":
        return Direction.BACKWARD if self is Direction.FORWARD else Direction.FORWARD


class DegenerateGridError(ValueError):
    pass


ENGINES = ("fast", "naive")


def _check_alpha(alpha: float, strict: bool = False):
    if not (0 <= alpha < 1) or (strict and alpha == 0):
        bound = "(0, 1)" if strict else "[0, 1)"
        raise ValueError(f"fractional order must lie in {bound}, got {alpha}")


def _widths_or_fail(spec: GridSpec, lag) -> list[int]:
    widths = admissible_half_widths(spec, lag)
    if not widths:
        raise DegenerateGridError(f"degenerate grid: no admissible rectangle on {spec.shape} with time lag {lag}")
    return widths


def _center_mask(spec: GridSpec, m: int) -> np.ndarray:
    if spec.periodic:
        return np.ones(spec.shape, dtype=bool)
    mask = np.zeros(spec.shape, dtype=bool)
    mask[tuple(slice(r.start, r.stop) for r in center_ranges(spec, m))] = True
    return mask


def _lower_window(m: int, P: int, g: int, n: int):
    """Centre offsets (relative to a cell) of rectangles whose lower part holds the cell."""
    return [-m + 1] * n + [g + 1], [m + 1] * n + [P + 1]


def _finish(spec: GridSpec, best: np.ndarray) -> GridFunction:
    valid = np.isfinite(best)
    if not valid.any():
        raise DegenerateGridError(f"degenerate grid: no cell of {spec.shape} lies in an admissible rectangle")
    values = np.where(valid, best, 0.0)
    return GridFunction(spec, values, None if valid.all() else valid)


# ---------------------------------------------------------------------------
# fractional maximal operators

def _forward_maximal_fast(spec: GridSpec, absf: np.ndarray, lag, alpha: float, widths) -> np.ndarray:
    n, p = spec.n, spec.p
    best = np.full(spec.shape, -np.inf)
    for m in widths:
        P = m**p
        g = lag.cells(m, p)
        vol = (2 * m) ** n * (P - g)
        sums, _ = window_sums(absf, [-m] * n + [g], [m] * n + [P], spec.periodic)
        A = np.where(_center_mask(spec, m), vol**alpha * sums / vol, -np.inf)
        lo, hi = _lower_window(m, P, g, n)
        best = np.maximum(best, window_reduce(A, lo, hi, spec.periodic))
    return best


def _maximal_naive(spec: GridSpec, absf: np.ndarray, lag, alpha: float, direction: Direction,
                   rectangles) -> np.ndarray:
    best = np.full(spec.shape, -np.inf)
    for R in rectangles:
        if direction is Direction.FORWARD:
            src, dst = upper_part(R, lag), lower_part(R, lag)
        else:
            src, dst = lower_part(R, lag), upper_part(R, lag)
        vol = src.size
        value = vol**alpha * np.sum(absf[np.ix_(*src.index_arrays(spec))]) / vol
        view = np.ix_(*dst.index_arrays(spec))
        best[view] = np.maximum(best[view], value)
    return best


def fractional_maximal(f: GridFunction, gamma, alpha: float = 0.0, direction=Direction.FORWARD,
                       engine: str = "fast") -> GridFunction:
    """Uncentred fractional maximal operator with time lag.

    At a cell, the supremum over admissible rectangles whose lower part (upper
    part for the backward operator) contains the cell of
    ``|part|**alpha * mean(|f|, opposite part)``.  Cells reached by no
    rectangle, which only happens on clipped grids, are zero and flagged
    invalid.
    """
    _check_alpha(alpha)
    direction = Direction.parse(direction)
    lag = as_lag(gamma)
    spec = f.spec
    widths = _widths_or_fail(spec, lag)
    absf = np.abs(f.values)
    if engine == "naive":
        rects = enumerate_rectangles(spec, lag, half_widths=widths)
        return _finish(spec, _maximal_naive(spec, absf, lag, alpha, direction, rects))
    if engine != "fast":
        raise ValueError(f"engine must be one of {ENGINES}, got {engine!r}")
    if direction is Direction.BACKWARD:
        return reflect_time(fractional_maximal(reflect_time(f), lag, alpha, Direction.FORWARD, engine))
    return _finish(spec, _forward_maximal_fast(spec, absf, lag, alpha, widths))


def _r0_block(spec: GridSpec, R0: ParabolicRectangle) -> tuple[slice, ...]:
    box = R0.box()
    for axis, ((a, b), e) in enumerate(zip(box.ranges, spec.shape)):
        if a < 0 or b > e:
            raise ValueError(f"restricting rectangle {R0} leaves the grid on axis {axis}")
    return tuple(slice(a, b) for a, b in box.ranges)


def restricted_maximal(f: GridFunction, gamma, direction, R0: ParabolicRectangle,
                       engine: str = "fast") -> GridFunction:
    """Maximal operator (order 0) whose supremum only sees rectangles inside ``R0``.

    The result lives on the whole grid; cells outside ``R0`` or reached by no
    contained rectangle are zero and flagged invalid.
    """
    direction = Direction.parse(direction)
    lag = as_lag(gamma)
    spec = f.spec
    block = _r0_block(spec, R0)
    absf = np.abs(f.values)
    widths = [m for m in admissible_half_widths(spec, lag) if m <= R0.m]
    if engine == "naive":
        rects = enumerate_rectangles(spec, lag, "inside", R0, half_widths=widths) if widths else []
        best = _maximal_naive(spec, absf, lag, 0.0, direction, rects)
    elif engine == "fast":
        local = GridSpec(spec.n, spec.p, 2 * R0.m, 2 * R0.temporal_half, "clipped")
        sub = absf[block]
        if direction is Direction.BACKWARD:
            sub = sub[..., ::-1]
        local_widths = [m for m in admissible_half_widths(local, lag) if m in widths]
        sub_best = _forward_maximal_fast(local, sub, lag, 0.0, local_widths)
        if direction is Direction.BACKWARD:
            sub_best = sub_best[..., ::-1]
        best = np.full(spec.shape, -np.inf)
        best[block] = sub_best
    else:
        raise ValueError(f"engine must be one of {ENGINES}, got {engine!r}")
    return _finish(spec, best)


# ---------------------------------------------------------------------------
# fractional maximal commutators

def _forward_maximal_commutator_fast(spec: GridSpec, absf, b, lag, alpha, k, widths) -> np.ndarray:
    n, p = spec.n, spec.p
    # centring at the midrange keeps the binomial expansion well conditioned
    b = b - 0.5 * (b.max() + b.min())
    best = np.full(spec.shape, -np.inf)
    for m in widths:
        P = m**p
        g = lag.cells(m, p)
        vol = (2 * m) ** n * (P - g)
        scale = vol**alpha / vol
        centers = _center_mask(spec, m)
        lo, hi = _lower_window(m, P, g, n)
        if k % 2 == 0:
            moments = [window_sums(b**j * absf, [-m] * n + [g], [m] * n + [P], spec.periodic)[0]
                       for j in range(k + 1)]
            coeffs = [math.comb(k, j) * (-1) ** j * b ** (k - j) for j in range(k + 1)]
            mask_val = np.where(centers, 0.0, -np.inf)
            for offset in np.ndindex(*[h - l for l, h in zip(lo, hi)]):
                d = [o + l for o, l in zip(offset, lo)]
                total = sum(c * shifted(U, d, spec.periodic) for c, U in zip(coeffs, moments))
                total = scale * total + shifted(mask_val, d, spec.periodic, fill=-np.inf)
                best = np.maximum(best, total)
        else:
            best = np.maximum(best, _odd_order_width(spec, absf, b, k, m, P, g, scale, centers))
    return best


def _odd_order_width(spec: GridSpec, absf, b, k, m, P, g, scale, centers) -> np.ndarray:
    """One half-width of the odd-order commutator, where no binomial expansion applies.

    ``G_u(c) = |b(c) - b(c + u)|**k |f(c + u)|`` is tabulated for every
    displacement ``u`` reachable through a centre window and an upper part;
    a prefix table over ``u`` then yields the upper-part sum for each window
    offset with ``2**(n+1)`` lookups.
    """
    n = spec.n
    part_lo, part_hi = [-m] * n + [g], [m] * n + [P]
    lo, hi = _lower_window(m, P, g, n)
    u_lo = [a + c for a, c in zip(lo, part_lo)]
    u_hi = [a + c - 1 for a, c in zip(hi, part_hi)]
    u_shape = [h - l for l, h in zip(u_lo, u_hi)]
    table = np.zeros([e + 1 for e in u_shape] + list(spec.shape))
    inner = table[tuple(slice(1, None) for _ in u_shape)]
    for idx in np.ndindex(*u_shape):
        u = [i + l for i, l in zip(idx, u_lo)]
        inner[idx] = np.abs(b - shifted(b, u, spec.periodic)) ** k * shifted(absf, u, spec.periodic)
    for axis in range(len(u_shape)):
        np.cumsum(table, axis=axis, out=table)
    mask_val = np.where(centers, 0.0, -np.inf)
    best = np.full(spec.shape, -np.inf)
    dims = len(u_shape)
    for offset in np.ndindex(*[h - l for l, h in zip(lo, hi)]):
        d = [o + l for o, l in zip(offset, lo)]
        a = [dd + pl - ul for dd, pl, ul in zip(d, part_lo, u_lo)]
        z = [dd + ph - ul for dd, ph, ul in zip(d, part_hi, u_lo)]
        total = 0.0
        for corner in itertools.product((0, 1), repeat=dims):
            sign = -1 if (dims - sum(corner)) % 2 else 1
            total = total + sign * table[tuple(z[i] if c else a[i] for i, c in enumerate(corner))]
        best = np.maximum(best, scale * total + shifted(mask_val, d, spec.periodic, fill=-np.inf))
    return best


def _maximal_commutator_naive(spec, absf, b, lag, alpha, k, direction, rectangles) -> np.ndarray:
    best = np.full(spec.shape, -np.inf)
    for R in rectangles:
        if direction is Direction.FORWARD:
            src, dst = upper_part(R, lag), lower_part(R, lag)
        else:
            src, dst = lower_part(R, lag), upper_part(R, lag)
        vol = src.size
        sview = np.ix_(*src.index_arrays(spec))
        bs, fs = b[sview], absf[sview]
        for cell in dst.cells(spec):
            value = vol**alpha * np.sum(np.abs(b[cell] - bs) ** k * fs) / vol
            if value > best[cell]:
                best[cell] = value
    return best


def maximal_commutator(f: GridFunction, b: GridFunction, gamma, alpha: float = 0.0, k: int = 1,
                       direction=Direction.FORWARD, engine: str = "fast") -> GridFunction:
    """Fractional maximal commutator of order ``k``.

    Like :func:`fractional_maximal` with the averaged quantity replaced by
    ``|b(cell) - b|**k * |f|``.  The fast engine expands the power binomially
    for even ``k`` (one moment table per power of ``b``); odd ``k`` tabulates
    the integrand per displacement instead.
    """
    if k < 1 or int(k) != k:
        raise ValueError(f"commutator order must be a positive integer, got {k}")
    _check_alpha(alpha)
    direction = Direction.parse(direction)
    lag = as_lag(gamma)
    spec = f.spec
    widths = _widths_or_fail(spec, lag)
    absf = np.abs(f.values)
    bv = np.asarray(b.values, dtype=float)
    if engine == "naive":
        rects = enumerate_rectangles(spec, lag, half_widths=widths)
        return _finish(spec, _maximal_commutator_naive(spec, absf, bv, lag, alpha, k, direction, rects))
    if engine != "fast":
        raise ValueError(f"engine must be one of {ENGINES}, got {engine!r}")
    if direction is Direction.BACKWARD:
        out = maximal_commutator(reflect_time(f), reflect_time(b), lag, alpha, k, Direction.FORWARD, engine)
        return reflect_time(out)
    return _finish(spec, _forward_maximal_commutator_fast(spec, absf, bv, lag, alpha, k, widths))


# ---------------------------------------------------------------------------
# fractional integrals

def kernel_offsets(spec: GridSpec, gamma, alpha: float):
    """Displacements ``(dx..., dt)`` of the forward region that fit the grid, with kernel values.

    The kernel is ``d_p**(-(n + p) * (1 - alpha))``.
    """
    lag = as_lag(gamma)
    gam = float(lag.value)
    n, p = spec.n, spec.p
    E, T = spec.extent_space, spec.extent_time
    dts = np.arange(1, T)
    dxs = np.arange(-(E - 1), E)
    grids = np.meshgrid(*([dxs] * n + [dts]), indexing="ij")
    dx_inf = np.max(np.abs(np.stack(grids[:-1])), axis=0)
    dt = grids[-1]
    inside = dt > gam * dx_inf.astype(float) ** p
    dist = np.maximum(dx_inf, dt ** (1.0 / p))
    kern = np.where(inside, dist ** (-(n + p) * (1.0 - alpha)), 0.0)
    return grids, kern


def _kernel_stencil(spec: GridSpec, gamma, alpha: float) -> np.ndarray:
    """Dense correlation weights indexed by ``offset + (extent - 1)``."""
    _, kern = kernel_offsets(spec, gamma, alpha)
    E, T = spec.extent_space, spec.extent_time
    stencil = np.zeros((2 * E - 1,) * spec.n + (2 * T - 1,))
    stencil[(slice(None),) * spec.n + (slice(T, 2 * T - 1),)] = kern
    return stencil


def _integral_guard(gamma, alpha, truncated):
    _check_alpha(alpha, strict=True)
    lag = as_lag(gamma)
    if lag.value == 0 and not truncated:
        raise ValueError("time lag 0 makes the forward region unbounded in space; pass truncated=True "
                         "to sum over the finite grid anyway")
    return lag


def fractional_integral(f: GridFunction, gamma, alpha: float, direction=Direction.FORWARD,
                        truncated: bool = False) -> GridFunction:
    """Fractional integral over the forward (or backward) region, with zero extension off the grid."""
    lag = _integral_guard(gamma, alpha, truncated)
    direction = Direction.parse(direction)
    if direction is Direction.BACKWARD:
        return reflect_time(fractional_integral(reflect_time(f), lag, alpha, Direction.FORWARD, truncated))
    stencil = _kernel_stencil(f.spec, lag, alpha)
    vals = f.values

    def apply(x):
        return ndimage.correlate(x, stencil, mode="constant", cval=0.0)

    out = apply(vals.real) + 1j * apply(vals.imag) if np.iscomplexobj(vals) else apply(vals)
    return GridFunction(f.spec, out)


def integral_commutator(f: GridFunction, b: GridFunction, gamma, alpha: float, k: int = 1,
                        direction=Direction.FORWARD, truncated: bool = False) -> GridFunction:
    """``sum K(d) |b(c) - b(c + d)|**k |f(c + d)|`` over the forward region."""
    if k < 1 or int(k) != k:
        raise ValueError(f"commutator order must be a positive integer, got {k}")
    lag = _integral_guard(gamma, alpha, truncated)
    direction = Direction.parse(direction)
    if direction is Direction.BACKWARD:
        out = integral_commutator(reflect_time(f), reflect_time(b), lag, alpha, k, Direction.FORWARD, truncated)
        return reflect_time(out)
    spec = f.spec
    grids, kern = kernel_offsets(spec, lag, alpha)
    absf = np.abs(f.values)
    bv = np.asarray(b.values, dtype=float)
    out = np.zeros(spec.shape)
    for idx in zip(*np.nonzero(kern)):
        d = [int(g[idx]) for g in grids]
        fs = shifted(absf, d, periodic=False)
        bs = shifted(bv, d, periodic=False)
        out += kern[idx] * np.abs(bv - bs) ** k * fs
    return GridFunction(spec, out)


# ---------------------------------------------------------------------------
# commutators of linear and positive operators

@dataclass(frozen=True)
class LinearOperator:
    """A linear map on grid functions, by name and evaluation callable."""

    name: str
    apply: Callable[[GridFunction], GridFunction]

    def __call__(self, f: GridFunction) -> GridFunction:
        return self.apply(f)


def identity_operator() -> LinearOperator:
    return LinearOperator("identity", lambda f: f)


def integral_operator(gamma, alpha: float, direction=Direction.FORWARD, truncated: bool = False) -> LinearOperator:
    lag = as_lag(gamma)
    return LinearOperator(f"I[alpha={alpha}, gamma={lag}, {Direction.parse(direction).value}]",
                          lambda f: fractional_integral(f, lag, alpha, direction, truncated))


def maximal_operator(gamma, alpha: float = 0.0, direction=Direction.FORWARD, engine: str = "fast"):
    """Sublinear maximal operator as a callable on grid functions."""
    lag = as_lag(gamma)
    return lambda f: fractional_maximal(f, lag, alpha, direction, engine)


def _times(b: GridFunction, f: GridFunction) -> GridFunction:
    return GridFunction(f.spec, b.values * f.values, f.valid)


def commutator_bracket(T, b: GridFunction, f: GridFunction, k: int, method: str = "kernel") -> GridFunction:
    """Iterated commutator ``[b, T]_k`` applied to ``f``.

    ``kernel`` sums ``C(k, j) (-1)**j b**(k - j) T(b**j f)`` with ``k + 1``
    calls to ``T``; ``recursive`` nests the first-order bracket and calls
    ``T`` ``2**k`` times.
    """
    if k < 1 or int(k) != k:
        raise ValueError(f"commutator order must be a positive integer, got {k}")
    bv = b.values
    if method == "kernel":
        out = 0.0
        for j in range(k + 1):
            Tj = T(GridFunction(f.spec, bv**j * f.values)).values
            out = out + math.comb(k, j) * (-1) ** j * bv ** (k - j) * Tj
        return GridFunction(f.spec, out)
    if method != "recursive":
        raise ValueError(f"method must be 'kernel' or 'recursive', got {method!r}")

    def bracket(order: int, g: GridFunction) -> np.ndarray:
        if order == 0:
            return T(g).values
        return bv * bracket(order - 1, g) - bracket(order - 1, _times(b, g))

    return GridFunction(f.spec, bracket(k, f))


def positive_commutator(Tq, b: GridFunction, f: GridFunction) -> GridFunction:
    """``b * Tq(f) - Tq(b f)`` for a positive quasilinear ``Tq``."""
    Tf = Tq(f)
    Tbf = Tq(_times(b, f))
    return GridFunction(f.spec, b.values * Tf.values - Tbf.values, combine_valid(Tf.valid, Tbf.valid))

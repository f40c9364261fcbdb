"""Brute-force reference implementations used to cross-check the fast paths.

Each oracle loops over rectangles, cell pairs or scales directly and shares
no summation code with the engines it checks.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .geometry import ParabolicRectangle, admissible_half_widths, as_lag, enumerate_rectangles, lower_part, upper_part
from .lattice import CellBox, GridFunction, GridSpec

INF = math.inf


def box_sum(values: np.ndarray, spec: GridSpec, box: CellBox) -> float:
    total = 0.0
    for cell in box.cells(spec):
        total += float(values[cell])
    return total


def part_mean(values: np.ndarray, spec: GridSpec, box: CellBox) -> float:
    cells = list(box.cells(spec))
    return sum(float(values[c]) for c in cells) / len(cells)


def part_max(values: np.ndarray, spec: GridSpec, box: CellBox) -> float:
    return max(float(values[c]) for c in box.cells(spec))


def two_weight_constant(u: np.ndarray, v: np.ndarray, spec: GridSpec, r: float, q: float, gamma,
                        forward: bool = True) -> float:
    lag = as_lag(gamma)
    rc = INF if r == 1 else (1.0 if r == INF else r / (r - 1))
    best = -INF
    for R in enumerate_rectangles(spec, lag):
        past, future = lower_part(R, lag), upper_part(R, lag)
        first_box, second_box = (past, future) if forward else (future, past)
        first = part_max(u, spec, first_box) if q == INF else part_mean(u**q, spec, first_box) ** (1 / q)
        if rc == INF:
            second = part_max(1.0 / v, spec, second_box)
        else:
            second = part_mean(v ** (-rc), spec, second_box) ** (1 / rc)
        best = max(best, first * second)
    return best


def maximal(f: np.ndarray, spec: GridSpec, gamma, alpha: float, forward: bool = True,
            rectangles=None) -> np.ndarray:
    """Pointwise sup over rectangles, visiting every (rectangle, cell) pair; -inf where none applies."""
    lag = as_lag(gamma)
    best = np.full(spec.shape, -INF)
    rects = enumerate_rectangles(spec, lag) if rectangles is None else rectangles
    for R in rects:
        src, dst = (upper_part(R, lag), lower_part(R, lag)) if forward else (lower_part(R, lag), upper_part(R, lag))
        cells = list(src.cells(spec))
        value = len(cells) ** alpha * sum(abs(float(f[c])) for c in cells) / len(cells)
        for c in dst.cells(spec):
            best[c] = max(best[c], value)
    return best


def fractional_integral(f: np.ndarray, spec: GridSpec, gamma, alpha: float, at=None) -> np.ndarray | float:
    """Double loop over (output cell, input cell) pairs; ``at`` restricts to one output cell."""
    gam = float(as_lag(gamma).value)
    n, p = spec.n, spec.p
    expo = -(n + p) * (1.0 - alpha)
    cells = list(itertools.product(*[range(e) for e in spec.shape]))

    def value(c):
        total = 0.0
        for y in cells:
            dt = y[-1] - c[-1]
            if dt <= 0:
                continue
            dx = max((abs(a - b) for a, b in zip(c[:-1], y[:-1])), default=0)
            if gam > 0 and not gam * dx**p < dt:
                continue
            total += float(f[y]) * max(dx, dt ** (1.0 / p)) ** expo
        return total

    if at is not None:
        return value(tuple(at))
    out = np.zeros(spec.shape)
    for c in cells:
        out[c] = value(c)
    return out


def integral_commutator(f: np.ndarray, b: np.ndarray, spec: GridSpec, gamma, alpha: float, k: int) -> np.ndarray:
    gam = float(as_lag(gamma).value)
    n, p = spec.n, spec.p
    expo = -(n + p) * (1.0 - alpha)
    cells = list(itertools.product(*[range(e) for e in spec.shape]))
    out = np.zeros(spec.shape)
    for c in cells:
        total = 0.0
        for y in cells:
            dt = y[-1] - c[-1]
            if dt <= 0:
                continue
            dx = max((abs(a - b_) for a, b_ in zip(c[:-1], y[:-1])), default=0)
            if gam > 0 and not gam * dx**p < dt:
                continue
            total += abs(float(b[c]) - float(b[y])) ** k * abs(float(f[y])) * max(dx, dt ** (1.0 / p)) ** expo
        out[c] = total
    return out


def maximal_commutator(f: np.ndarray, b: np.ndarray, spec: GridSpec, gamma, alpha: float, k: int) -> np.ndarray:
    lag = as_lag(gamma)
    best = np.full(spec.shape, -INF)
    for R in enumerate_rectangles(spec, lag):
        src = list(upper_part(R, lag).cells(spec))
        vol = len(src)
        for c in lower_part(R, lag).cells(spec):
            s = sum(abs(float(b[c]) - float(b[y])) ** k * abs(float(f[y])) for y in src)
            best[c] = max(best[c], vol**alpha * s / vol)
    return best


def oscillation(b: np.ndarray, spec: GridSpec, beta: float) -> float:
    best = 0.0
    for R in enumerate_rectangles(spec, 0):
        vals = np.array([float(b[c]) for c in R.box().cells(spec)])
        best = max(best, float(np.mean(np.abs(vals - vals.mean()))) / R.volume**beta)
    return best


def plip(b: np.ndarray, spec: GridSpec, beta: float) -> float:
    """All ordered cell pairs, with shortest wrapped displacements on periodic grids."""
    cells = list(itertools.product(*[range(e) for e in spec.shape]))
    best = 0.0
    for a, c in itertools.combinations(cells, 2):
        mags = []
        for x, y, e in zip(a, c, spec.shape):
            d = abs(x - y)
            mags.append(min(d, e - d) if spec.periodic else d)
        dist = max(max(mags[:-1], default=0), mags[-1] ** (1.0 / spec.p))
        best = max(best, abs(float(b[a]) - float(b[c])) / dist**beta)
    return best


def forward_region_by_search(origin, probe, gamma, p) -> bool:
    """Whether some scale ``L > 0`` puts ``probe`` in the upper part of ``R(origin, L)``.

    Each of the three conditions on ``L`` flips at most once, at ``dx``,
    ``dt**(1/p)`` or ``(dt/gamma)**(1/p)``, so testing one scale inside every
    interval between those breakpoints decides the existence exactly.
    """
    gam = float(as_lag(gamma).value)
    dx = max((abs(u - v) for u, v in zip(origin[:-1], probe[:-1])), default=0.0)
    dt = probe[-1] - origin[-1]
    marks = {0.0, dx}
    if dt > 0:
        marks.add(dt ** (1.0 / p))
        if gam > 0:
            marks.add((dt / gam) ** (1.0 / p))
    marks = sorted(marks)
    scales = [(a + b) / 2 for a, b in zip(marks, marks[1:])] + [2 * marks[-1] + 1]
    return any(dx < L and gam * L**p < dt < L**p for L in scales if L > 0)


def restricted_family(spec: GridSpec, gamma, R0: ParabolicRectangle) -> list[ParabolicRectangle]:
    """Rectangles inside ``R0``, found by scanning every centre and width directly."""
    lag = as_lag(gamma)
    outer = R0.box()
    out = []
    for m in admissible_half_widths(spec, lag):
        for c in itertools.product(*[range(e) for e in spec.shape]):
            R = ParabolicRectangle(c, m, spec.p)
            if all(a2 <= a and b <= b2 for (a, b), (a2, b2) in zip(R.box().ranges, outer.ranges)):
                out.append(R)
    return out


def boolean_norm(T, spec: GridSpec, r: float, q: float) -> float:
    """Best ``||T 1_E||_q / ||1_E||_r`` over every nonempty subset ``E`` of the grid."""
    best = 0.0
    for bits in itertools.product((0.0, 1.0), repeat=spec.size):
        if not any(bits):
            continue
        f = np.array(bits).reshape(spec.shape)
        Tf = T(GridFunction(spec, f))
        num = np.sum(np.abs(Tf.values[Tf.mask]) ** q) ** (1 / q)
        best = max(best, float(num / np.sum(f) ** (1 / r)))
    return best

"""Parabolic rectangles with a time lag and the admissible rectangle family.

A rectangle of spatial half-width ``m`` centred at cell ``(x, t)`` covers the
cells ``[x - m, x + m)`` on every spatial axis and ``[t - m**p, t + m**p)`` in
time.  Its upper part keeps the future time cells ``[t + g, t + m**p)`` and its
lower part the past cells ``[t - m**p, t - g)``, where ``g = gamma * m**p``.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .lattice import CellBox, GridSpec


class AlignmentError(ValueError):
    """The time lag does not split a rectangle on whole cells."""


class EmptyFamilyWarning(UserWarning):
    pass


def _is_power_of_two(k: int) -> bool:
    return k >= 1 and k & (k - 1) == 0


@dataclass(frozen=True)
class TimeLag:
    value: Fraction

    def __init__(self, value):
        if isinstance(value, TimeLag):
            value = value.value
        frac = Fraction(value) if not isinstance(value, float) else Fraction(value).limit_denominator(2**30)
        if not 0 <= frac < 1:
            raise ValueError(f"time lag must lie in [0, 1), got {frac}")
        if not _is_power_of_two(frac.denominator):
            raise ValueError(f"time lag must be dyadic, got {frac}")
        object.__setattr__(self, "value", frac)

    @property
    def denominator_exponent(self) -> int:
        return self.value.denominator.bit_length() - 1

    def aligned(self, temporal_half: int) -> bool:
        return (self.value * temporal_half).denominator == 1

    def cells(self, m: int, p: int) -> int:
        """Number of gap cells ``gamma * m**p``; raises if it is not an integer."""
        g = self.value * m**p
        if g.denominator != 1:
            raise AlignmentError(f"time lag {self.value} is not aligned with half-width m={m} (p={p})")
        return int(g)

    def dilated(self, p: int) -> "TimeLag":
        """The lag ``(gamma + 1) / 2**p`` used when dominating maximal by integral operators."""
        return TimeLag((self.value + 1) / 2**p)

    def __float__(self):
        return float(self.value)

    def __str__(self):
        return str(self.value)


def as_lag(gamma) -> TimeLag:
    return gamma if isinstance(gamma, TimeLag) else TimeLag(gamma)


@dataclass(frozen=True)
class ParabolicRectangle:
    center: tuple[int, ...]
    m: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(int(c) for c in self.center))
        if not _is_power_of_two(self.m):
            raise ValueError(f"half-width must be a power of 2, got {self.m}")

    @property
    def n(self) -> int:
        return len(self.center) - 1

    @property
    def temporal_half(self) -> int:
        return self.m**self.p

    @property
    def volume(self) -> int:
        return (2 * self.m) ** self.n * 2 * self.temporal_half

    def box(self) -> CellBox:
        P = self.temporal_half
        ranges = [(c - self.m, c + self.m) for c in self.center[:-1]]
        t = self.center[-1]
        return CellBox(tuple(ranges) + ((t - P, t + P),))

    def part_volume(self, gamma) -> int:
        g = as_lag(gamma).cells(self.m, self.p)
        return (2 * self.m) ** self.n * (self.temporal_half - g)

    def reflect(self, extent_time: int) -> "ParabolicRectangle":
        """Mirror image under the cell reflection ``t -> T - 1 - t``."""
        return ParabolicRectangle(self.center[:-1] + (extent_time - self.center[-1],), self.m, self.p)

    def __str__(self):
        return "(" + ",".join(str(c) for c in self.center) + f"; {self.m})"


def upper_part(R: ParabolicRectangle, gamma) -> CellBox:
    g = as_lag(gamma).cells(R.m, R.p)
    t = R.center[-1]
    return CellBox(R.box().ranges[:-1] + ((t + g, t + R.temporal_half),))


def lower_part(R: ParabolicRectangle, gamma) -> CellBox:
    g = as_lag(gamma).cells(R.m, R.p)
    t = R.center[-1]
    return CellBox(R.box().ranges[:-1] + ((t - R.temporal_half, t - g),))


def reflect_box(box: CellBox, extent_time: int) -> CellBox:
    a, b = box.ranges[-1]
    return CellBox(box.ranges[:-1] + ((extent_time - b, extent_time - a),))


def parabolic_distance(a: Sequence[float], b: Sequence[float], p: float) -> float:
    """``max(|x - y|_inf, |t - s|**(1/p))`` for points ``(x..., t)``."""
    dx = max((abs(u - v) for u, v in zip(a[:-1], b[:-1])), default=0.0)
    return max(float(dx), abs(a[-1] - b[-1]) ** (1.0 / p))


def forward_region_contains(origin: Sequence[float], probe: Sequence[float], gamma, p: float) -> bool:
    """Whether ``probe`` lies in the union over all scales of the upper parts at ``origin``."""
    gam = float(as_lag(gamma).value)
    dt = probe[-1] - origin[-1]
    if dt <= 0:
        return False
    if gam == 0:
        return True
    dx = max((abs(u - v) for u, v in zip(origin[:-1], probe[:-1])), default=0.0)
    return gam * dx**p < dt


def backward_region_contains(origin: Sequence[float], probe: Sequence[float], gamma, p: float) -> bool:
    mirrored = tuple(probe[:-1]) + (2 * origin[-1] - probe[-1],)
    return forward_region_contains(origin, mirrored, gamma, p)


def admissible_half_widths(spec: GridSpec, gamma) -> list[int]:
    """Powers of 2 whose rectangles fit the grid and split on whole cells."""
    lag = as_lag(gamma)
    out = []
    m = 1
    while 2 * m <= spec.extent_space and 2 * m**spec.p <= spec.extent_time:
        if lag.aligned(m**spec.p):
            out.append(m)
        m *= 2
    return out


def center_ranges(spec: GridSpec, m: int) -> list[range]:
    """Centres per axis (time last) whose rectangle of half-width ``m`` is admissible."""
    P = m**spec.p
    if spec.periodic:
        return [range(e) for e in spec.shape]
    return [range(m, spec.extent_space - m + 1)] * spec.n + [range(P, spec.extent_time - P + 1)]


def _rectangles_for(spec: GridSpec, m: int) -> Iterator[ParabolicRectangle]:
    for c in itertools.product(*center_ranges(spec, m)):
        yield ParabolicRectangle(c, m, spec.p)


def enumerate_rectangles(spec: GridSpec, gamma, constraint: str = "all", target=None,
                         half_widths: Sequence[int] | None = None) -> list[ParabolicRectangle]:
    """All admissible rectangles satisfying ``constraint``, ordered by ``(m, center)``.

    ``constraint`` is one of ``all``, ``lower_part_contains`` and
    ``upper_part_contains`` (``target`` a cell) or ``inside`` (``target`` a
    :class:`ParabolicRectangle` or :class:`CellBox`; containment is literal,
    without wrapping).
    """
    lag = as_lag(gamma)
    widths = admissible_half_widths(spec, lag) if half_widths is None else list(half_widths)
    if constraint == "inside":
        outer = target.box() if isinstance(target, ParabolicRectangle) else target
    elif constraint in ("lower_part_contains", "upper_part_contains"):
        cell = tuple(int(c) for c in target)
    elif constraint != "all":
        raise ValueError(f"unknown constraint {constraint!r}")

    out = []
    for m in widths:
        for R in _rectangles_for(spec, m):
            if constraint == "all":
                out.append(R)
            elif constraint == "inside":
                if R.box().issubset(outer):
                    out.append(R)
            else:
                part = lower_part(R, lag) if constraint == "lower_part_contains" else upper_part(R, lag)
                if part.contains(cell, spec):
                    out.append(R)
    if not out:
        warnings.warn(f"no admissible rectangle for grid {spec.shape} and time lag {lag}", EmptyFamilyWarning)
    return out


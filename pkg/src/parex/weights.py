"""Exponent pairs, weights and the parabolic Muckenhoupt constants with time lag."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import admissible_half_widths, as_lag
from .lattice import GridFunction, GridSpec, window_reduce, window_sums
from .operators import DegenerateGridError, Direction, fractional_maximal

INF = math.inf


def conjugate(r: float) -> float:
    if r == 1:
        return INF
    if r == INF:
        return 1.0
    return r / (r - 1)


def _recip(r: float) -> float:
    return 0.0 if r == INF else 1.0 / r


@dataclass(frozen=True)
class ExponentPair:
    r: float
    q: float

    def __post_init__(self):
        for name in ("r", "q"):
            v = getattr(self, name)
            if not (v >= 1):
                raise ValueError(f"exponent {name} must lie in [1, inf], got {v}")
        if self.r > self.q:
            raise ValueError(f"need r <= q, got r={self.r}, q={self.q}")

    @property
    def r_conj(self) -> float:
        return conjugate(self.r)

    @property
    def q_conj(self) -> float:
        return conjugate(self.q)

    @property
    def gap(self) -> float:
        """``1/r - 1/q``, the order of the operators this pair belongs to."""
        return _recip(self.r) - _recip(self.q)

    @property
    def alpha(self) -> float:
        return self.gap

    @property
    def s(self) -> float:
        """Iteration exponent with ``1/s' = 1/r - 1/q``; equals 1 on the diagonal."""
        return 1.0 / (1.0 - self.gap)

    def same_gap(self, other: "ExponentPair", tol: float = 1e-12) -> bool:
        return abs(self.gap - other.gap) <= tol

    def companion(self, r: float) -> "ExponentPair":
        """The pair with first exponent ``r`` and the same gap."""
        inv_q = _recip(r) - self.gap
        if inv_q < -1e-15:
            raise ValueError(f"no companion with r={r} for gap {self.gap}")
        return ExponentPair(r, INF if inv_q <= 1e-15 else 1.0 / inv_q)

    def __str__(self):
        return f"({self.r:g},{self.q:g})"


def parse_exponent(value) -> float:
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "∞"):
            return INF
        return float(Fraction(value))
    return float(value)


class Weight(GridFunction):
    """A strictly positive grid function."""

    def __post_init__(self):
        super().__post_init__()
        if np.iscomplexobj(self.values) or self.values.min() <= 0:
            raise ValueError("a weight must be real and strictly positive")

    @classmethod
    def of(cls, f: GridFunction | np.ndarray, spec: GridSpec | None = None) -> "Weight":
        if isinstance(f, GridFunction):
            return cls(f.spec, f.values)
        return cls(spec, f)

    def power(self, a: float) -> "Weight":
        return Weight(self.spec, self.values**a)


# ---------------------------------------------------------------------------
# rectangle-part statistics for every centre at once

def _part_bounds(m: int, P: int, g: int, n: int, upper: bool):
    if upper:
        return [-m] * n + [g], [m] * n + [P]
    return [-m] * n + [-P], [m] * n + [-g]


def _part_mean(values: np.ndarray, spec: GridSpec, m, P, g, upper: bool) -> np.ndarray:
    lo, hi = _part_bounds(m, P, g, spec.n, upper)
    sums, _ = window_sums(values, lo, hi, spec.periodic)
    return sums / ((2 * m) ** spec.n * (P - g))


def _part_max(values: np.ndarray, spec: GridSpec, m, P, g, upper: bool) -> np.ndarray:
    lo, hi = _part_bounds(m, P, g, spec.n, upper)
    return window_reduce(values, lo, hi, spec.periodic)


def _centre_mask(spec: GridSpec, m: int, P: int) -> np.ndarray:
    if spec.periodic:
        return np.ones(spec.shape, dtype=bool)
    mask = np.zeros(spec.shape, dtype=bool)
    mask[(slice(m, spec.extent_space - m + 1),) * spec.n + (slice(P, spec.extent_time - P + 1),)] = True
    return mask


def _sup_over_rectangles(spec: GridSpec, gamma, per_width) -> float:
    lag = as_lag(gamma)
    widths = admissible_half_widths(spec, lag)
    if not widths:
        raise DegenerateGridError(f"degenerate grid: no admissible rectangle on {spec.shape} with time lag {lag}")
    best = -INF
    for m in widths:
        P = m**spec.p
        g = lag.cells(m, spec.p)
        vals = per_width(m, P, g)
        best = max(best, float(np.max(vals[_centre_mask(spec, m, P)])))
    return best


def two_weight_constant(u: GridFunction, v: GridFunction, pair: ExponentPair, gamma,
                        direction=Direction.FORWARD) -> float:
    """Supremum over rectangles of the past ``q``-mean of ``u`` times the future ``(-r')``-mean of ``v``.

    For the backward class the roles of the two parts swap.  ``r = 1`` uses
    ``max 1/v`` for the second factor and ``q = inf`` uses ``max u`` for the
    first.
    """
    direction = Direction.parse(direction)
    spec = u.spec
    uv, vv = u.values, v.values
    forward = direction is Direction.FORWARD
    q, rc = pair.q, pair.r_conj

    def per_width(m, P, g):
        if q == INF:
            first = _part_max(uv, spec, m, P, g, upper=not forward)
        else:
            first = _part_mean(uv**q, spec, m, P, g, upper=not forward) ** (1.0 / q)
        if rc == INF:
            second = _part_max(1.0 / vv, spec, m, P, g, upper=forward)
        else:
            second = _part_mean(vv ** (-rc), spec, m, P, g, upper=forward) ** (1.0 / rc)
        return first * second

    return _sup_over_rectangles(spec, gamma, per_width)


def one_weight_constant(omega: GridFunction, pair: ExponentPair, gamma, direction=Direction.FORWARD) -> float:
    return two_weight_constant(omega, omega, pair, gamma, direction)


def aq_constant(omega: GridFunction, q: float, gamma, direction=Direction.FORWARD, form: str = "power") -> float:
    """The ``A_q`` constant with time lag.

    ``form="power"`` raises the ``(q, q)`` constant of ``omega**(1/q)`` to the
    power ``q``; ``form="classical"`` evaluates
    ``sup mean(omega, past) * mean(omega**(1/(1-q)), future)**(q-1)``.
    """
    if not 1 < q < INF:
        raise ValueError(f"q must lie in (1, inf), got {q}")
    direction = Direction.parse(direction)
    if form == "power":
        root = GridFunction(omega.spec, omega.values ** (1.0 / q))
        return one_weight_constant(root, ExponentPair(q, q), gamma, direction) ** q
    if form != "classical":
        raise ValueError(f"unknown form {form!r}")
    spec, w = omega.spec, omega.values
    forward = direction is Direction.FORWARD

    def per_width(m, P, g):
        first = _part_mean(w, spec, m, P, g, upper=not forward)
        second = _part_mean(w ** (1.0 / (1.0 - q)), spec, m, P, g, upper=forward)
        return first * second ** (q - 1)

    return _sup_over_rectangles(spec, gamma, per_width)


def a1_constant(omega: GridFunction, gamma, direction=Direction.FORWARD) -> tuple[float, float]:
    """``(maximal form, rectangle form)`` of the ``A_1`` constant.

    The maximal form is ``max M(omega)/omega`` with the maximal operator of the
    opposite direction; the rectangle form is the ``(1, 1)`` constant.
    """
    direction = Direction.parse(direction)
    Mw = fractional_maximal(omega, gamma, 0.0, direction.opposite)
    ratio = Mw.values / omega.values
    maximal = float(ratio[Mw.mask].max())
    rectangle = one_weight_constant(omega, ExponentPair(1, 1), gamma, direction)
    return maximal, rectangle


def ainfty_profile(omega: GridFunction, gamma, q_list, direction=Direction.FORWARD) -> list[tuple[float, float]]:
    """``(q, A_q constant)`` over increasing ``q``; the last entry stands in for ``A_inf``."""
    return [(float(q), aq_constant(omega, q, gamma, direction)) for q in sorted(q_list)]


# ---------------------------------------------------------------------------
# weight recipes

WEIGHT_KINDS = ("constant", "power_time", "exp_symbol", "time_shift_exp", "product", "log_lipschitz")


def _time(spec: GridSpec) -> np.ndarray:
    return np.broadcast_to(np.arange(spec.extent_time, dtype=float), spec.shape)


def _space(spec: GridSpec, axis: int) -> np.ndarray:
    shape = [1] * spec.ndim
    shape[axis] = spec.extent_space
    return np.broadcast_to(np.arange(spec.extent_space, dtype=float).reshape(shape), spec.shape)


def make_weight(kind: str, spec: GridSpec, **params) -> Weight:
    """Build a weight from a named recipe.

    - ``constant(c=1)``: ``c``
    - ``power_time(a, offset=1)``: ``(t + offset)**a``
    - ``exp_symbol(b, c, base=None)``: ``base * exp(c * b)`` with ``b`` a grid function
    - ``time_shift_exp(lam, t0=0)``: ``exp(lam * (t - t0))``
    - ``product(factors)``: product of weights or ``(kind, params)`` recipes
    - ``log_lipschitz(seed, amplitude=1, modes=3)``: ``exp`` of a random
      trigonometric polynomial of low degree, periodic in every axis
    """
    if kind == "constant":
        return Weight(spec, np.full(spec.shape, float(params.get("c", 1.0))))
    if kind == "power_time":
        offset = float(params.get("offset", 1.0))
        if offset <= 0:
            raise ValueError("power_time needs offset > 0")
        return Weight(spec, (_time(spec) + offset) ** float(params["a"]))
    if kind == "exp_symbol":
        b = params["b"]
        bv = b.values if isinstance(b, GridFunction) else np.asarray(b, dtype=float)
        base = params.get("base")
        bw = np.ones(spec.shape) if base is None else (base.values if isinstance(base, GridFunction) else base)
        return Weight(spec, bw * np.exp(float(params.get("c", 1.0)) * bv))
    if kind == "time_shift_exp":
        lam = float(params["lam"])
        return Weight(spec, np.exp(lam * (_time(spec) - float(params.get("t0", 0.0)))))
    if kind == "product":
        out = np.ones(spec.shape)
        for factor in params["factors"]:
            if isinstance(factor, GridFunction):
                out = out * factor.values
            else:
                sub_kind, sub_params = factor
                out = out * make_weight(sub_kind, spec, **sub_params).values
        return Weight(spec, out)
    if kind == "log_lipschitz":
        rng = np.random.default_rng(params["seed"])
        amplitude = float(params.get("amplitude", 1.0))
        modes = int(params.get("modes", 3))
        logw = np.zeros(spec.shape)
        coords = [_space(spec, a) / spec.extent_space for a in range(spec.n)] + [_time(spec) / spec.extent_time]
        for _ in range(modes):
            freq = rng.integers(-2, 3, size=spec.ndim)
            phase = rng.uniform(0, 2 * np.pi)
            logw += rng.uniform(-1, 1) * np.cos(2 * np.pi * sum(k * c for k, c in zip(freq, coords)) + phase)
        return Weight(spec, np.exp(amplitude * logw / max(modes, 1)))
    raise ValueError(f"unknown weight kind {kind!r}; expected one of {WEIGHT_KINDS}")

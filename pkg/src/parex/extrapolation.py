"""Rubio de Francia iteration and probe-based operator-norm estimates."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .geometry import as_lag, enumerate_rectangles, lower_part, upper_part
from .lattice import GridFunction, GridSpec
from .norms import weak_norm, weighted_norm
from .operators import Direction, fractional_maximal
from .weights import ExponentPair

INF = math.inf


@dataclass(frozen=True)
class IterationConfig:
    """Parameters of a truncated iteration ``sum_{k<=K} M^k(.) / (2B)^k``."""

    gamma: object
    pair: ExponentPair
    K: int
    B: float

    def __post_init__(self):
        if self.K < 0 or int(self.K) != self.K:
            raise ValueError(f"truncation K must be a nonnegative integer, got {self.K}")
        if not self.B > 0:
            raise ValueError(f"normalizer B must be positive, got {self.B}")
        if not (self.pair.r > 1 and self.pair.q < INF):
            raise ValueError("the iteration needs 1 < r <= q < inf")

    @property
    def s(self) -> float:
        return self.pair.s

    @property
    def big_exponent(self) -> float:
        """``1 + q/r'``, the Lebesgue exponent on which the forward maximal operator must be bounded."""
        return 1.0 + self.pair.q / self.pair.r_conj

    @property
    def dual_exponent(self) -> float:
        """``1 + r'/q``, conjugate to :attr:`big_exponent`."""
        return 1.0 + self.pair.r_conj / self.pair.q

    def with_K(self, K: int) -> "IterationConfig":
        return IterationConfig(self.gamma, self.pair, K, self.B)


def rdf_series(h: np.ndarray, spec: GridSpec, gamma, K: int, B: float, direction=Direction.FORWARD,
               engine: str = "fast") -> list[np.ndarray]:
    """Partial sums ``S_0, ..., S_{K+1}`` of ``sum M^k(h) / (2B)^k``.

    One extra term is returned so callers can check the one-step bound
    ``M(S_K) <= 2B S_{K+1}``.
    """
    if np.any(h < 0):
        raise ValueError("the iteration needs a nonnegative input")
    term = np.asarray(h, dtype=float)
    partial = term.copy()
    sums = [partial.copy()]
    for k in range(1, K + 2):
        term = fractional_maximal(GridFunction(spec, term), gamma, 0.0, direction, engine).values
        partial = partial + term / (2 * B) ** k
        sums.append(partial.copy())
    return sums


def _root_above(h: np.ndarray, total: np.ndarray, s: float) -> np.ndarray:
    """``total**(1/s)`` written as ``h * (total / h**s)**(1/s)`` so that the result is never below ``h``."""
    rest = total - h**s
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = h * (1.0 + np.maximum(rest, 0.0) / h**s) ** (1.0 / s)
    return np.where(h > 0, scaled, np.maximum(rest, 0.0) ** (1.0 / s))


def rdf_forward(h: GridFunction, cfg: IterationConfig, engine: str = "fast") -> GridFunction:
    """``(sum_{k<=K} M_+^k(h**s) / (2B)**k)**(1/s)``."""
    hv = np.asarray(h.values, dtype=float)
    if np.any(hv < 0):
        raise ValueError("rdf_forward needs h >= 0")
    s = cfg.s
    total = rdf_series(hv**s, h.spec, cfg.gamma, cfg.K, cfg.B, Direction.FORWARD, engine)[cfg.K]
    return GridFunction(h.spec, _root_above(hv, total, s))


def rdf_backward(h2: GridFunction, omega: GridFunction, cfg: IterationConfig, engine: str = "fast") -> GridFunction:
    """``sum_{k<=K} M_-^k(h2 * omega**q) / (2B)**k * omega**(-q)``."""
    hv = np.asarray(h2.values, dtype=float)
    if np.any(hv < 0):
        raise ValueError("rdf_backward needs h2 >= 0")
    wq = omega.values**cfg.pair.q
    total = rdf_series(hv * wq, h2.spec, cfg.gamma, cfg.K, cfg.B, Direction.BACKWARD, engine)[cfg.K]
    rest = np.maximum(total - hv * wq, 0.0)
    return GridFunction(h2.spec, hv + rest / wq)


def build_h1(f: GridFunction, g: GridFunction, omega: GridFunction, pair: ExponentPair) -> GridFunction:
    """``|f|/||f||_{L^q(w^q)} + |g|^{r/q} w^{r/q - 1} / ||g||_{L^r(w^r)}^{r/q}``."""
    r, q = pair.r, pair.q
    w = omega.values
    nf = weighted_norm(f, q, GridFunction(f.spec, w**q))
    ng = weighted_norm(g, r, GridFunction(g.spec, w**r))
    if nf == 0 or ng == 0:
        raise ValueError("build_h1 needs nonzero f and g")
    return GridFunction(f.spec, np.abs(f.values) / nf + np.abs(g.values) ** (r / q) * w ** (r / q - 1) / ng ** (r / q))


def build_h2(f: GridFunction, omega: GridFunction, pair: ExponentPair) -> GridFunction:
    """Unit vector of ``L^{(1+q/r')'}(w^q)`` norming ``|f|^s`` in ``L^{1+q/r'}(w^q)``."""
    s = pair.s
    Q = 1.0 + pair.q / pair.r_conj
    wq = GridFunction(f.spec, omega.values**pair.q)
    fs = GridFunction(f.spec, np.abs(f.values) ** s)
    norm = weighted_norm(fs, Q, wq)
    if norm == 0:
        raise ValueError("build_h2 needs nonzero f")
    return GridFunction(f.spec, (fs.values / norm) ** (Q - 1))


# ---------------------------------------------------------------------------
# operator-norm estimation

PROBE_FAMILIES = ("adapted", "part_indicator", "cell", "noise")


@dataclass
class ProbeLog:
    entries: list[tuple[str, float]] = field(default_factory=list)

    @property
    def best(self) -> tuple[str, float]:
        return max(self.entries, key=lambda e: e[1]) if self.entries else ("", 0.0)


def _probe_stream(spec: GridSpec, omega: np.ndarray, pair: ExponentPair, gamma, seed: int,
                  families=PROBE_FAMILIES) -> Iterator[tuple[str, np.ndarray]]:
    """Round-robin over the requested probe families, deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    lag = as_lag(gamma)
    rects = enumerate_rectangles(spec, lag)
    rect_order = rng.permutation(len(rects)) if rects else np.zeros(0, dtype=int)
    cell_order = rng.permutation(spec.size)
    noise_seed = int(rng.integers(2**31))
    rc = pair.r_conj

    def adapted():
        for i in rect_order:
            R = rects[i]
            f = np.zeros(spec.shape)
            box = upper_part(R, lag)
            view = np.ix_(*box.index_arrays(spec))
            f[view] = 1.0 if rc == INF else omega[view] ** (-rc)
            yield f"adapted{R}", f

    def part_indicator():
        for i in rect_order:
            R = rects[i]
            for tag, box in (("upper", upper_part(R, lag)), ("lower", lower_part(R, lag))):
                f = np.zeros(spec.shape)
                f[np.ix_(*box.index_arrays(spec))] = 1.0
                yield f"{tag}{R}", f

    def cell():
        for i in cell_order:
            f = np.zeros(spec.size)
            f[i] = 1.0
            yield f"cell{tuple(int(c) for c in np.unravel_index(i, spec.shape))}", f.reshape(spec.shape)

    def noise():
        noise_rng = np.random.default_rng(noise_seed)
        for j in itertools.count():
            yield f"noise{j}", noise_rng.standard_normal(spec.shape)

    makers = {"adapted": adapted, "part_indicator": part_indicator, "cell": cell, "noise": noise}
    streams = [makers[name]() for name in families]
    while streams:
        alive = []
        for s in streams:
            item = next(s, None)
            if item is not None:
                yield item
                alive.append(s)
        streams = alive


def probe_functions(spec: GridSpec, omega: GridFunction | None, pair: ExponentPair, gamma, budget: int,
                    seed: int, families=PROBE_FAMILIES) -> list[tuple[str, np.ndarray]]:
    """The first ``budget`` probes; larger budgets extend smaller ones."""
    w = np.ones(spec.shape) if omega is None else np.asarray(omega.values, dtype=float)
    return list(itertools.islice(_probe_stream(spec, w, pair, gamma, seed, families), budget))


def _ratio(Tf: GridFunction, f: np.ndarray, spec, pair, w, output) -> float:
    if pair.r == INF:
        source = float(np.max(np.abs(f * w)))
    else:
        source = weighted_norm(GridFunction(spec, f), pair.r, GridFunction(spec, w**pair.r))
    if source == 0:
        return -1.0
    target_w = GridFunction(spec, w**pair.q) if pair.q < INF else None
    if pair.q == INF:
        # weighted sup norm ||T(f) w||_inf
        num = float(np.max(np.abs(Tf.values * w)[Tf.mask]))
    elif output == "weak":
        num = weak_norm(Tf, pair.q, target_w)
    else:
        num = weighted_norm(Tf, pair.q, target_w)
    return num / source


def estimate_operator_norm(T: Callable[[GridFunction], GridFunction], pair: ExponentPair,
                           omega: GridFunction, budget: int = 64, seed: int = 0, gamma=0,
                           output: str = "strong", families=PROBE_FAMILIES,
                           probes: list | None = None) -> tuple[float, ProbeLog]:
    """Largest observed ``||T f||_{L^q(w^q)} / ||f||_{L^r(w^r)}`` over a probe family.

    A lower bound for the operator norm.  ``output="weak"`` measures the
    image in the weak space; ``q = inf`` measures ``max |T(f) w|`` and
    ``r = inf`` measures ``max |f w|``.  Probes with zero norm are skipped.
    An explicit ``probes`` list of ``(name, array)`` replaces the family.
    """
    if output not in ("strong", "weak"):
        raise ValueError(f"output must be 'strong' or 'weak', got {output!r}")
    spec = omega.spec
    if probes is None:
        probes = probe_functions(spec, omega, pair, gamma, budget, seed, families)
    w = np.asarray(omega.values, dtype=float)
    log = ProbeLog()
    best = 0.0
    for name, f in probes:
        ratio = _ratio(T(GridFunction(spec, f)), f, spec, pair, w, output)
        if ratio < 0:
            continue
        log.entries.append((name, ratio))
        best = max(best, ratio)
    return best, log


def two_weight_sup_estimate(T, u: GridFunction, v: GridFunction, r: float, gamma, budget: int = 64,
                            seed: int = 0) -> float:
    """Largest observed ``max |T(f) u| / ||f v||_{L^r}``, the two-weight ``L^r -> L^inf`` ratio."""
    pair = ExponentPair(r, INF)
    best = 0.0
    for _, f in probe_functions(u.spec, v, pair, gamma, budget, seed):
        fv = GridFunction(u.spec, f * v.values)
        den = weighted_norm(fv, r)
        if den == 0:
            continue
        Tf = T(GridFunction(u.spec, f))
        best = max(best, float(np.max(np.abs(Tf.values * u.values)[Tf.mask])) / den)
    return best

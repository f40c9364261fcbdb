"""Weighted Lebesgue, weak and Lorentz norms, and oscillation norms of symbols."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import admissible_half_widths
from .lattice import GridFunction, GridSpec, shifted, window_sums

INF = math.inf
PLIP_EXACT_LIMIT = 4096


def _data(f: GridFunction, omega: GridFunction | None):
    mask = f.mask
    absf = np.abs(f.values)[mask]
    w = np.ones_like(absf) if omega is None else np.asarray(omega.values, dtype=float)[mask]
    return absf, w


def weighted_norm(f: GridFunction, q: float, omega: GridFunction | None = None) -> float:
    """``(sum |f|**q * omega)**(1/q)`` over valid cells; ``max |f|`` when ``q`` is infinite."""
    absf, w = _data(f, omega)
    if absf.size == 0:
        return 0.0
    if q == INF:
        return float(absf.max())
    return float(np.sum(absf**q * w) ** (1.0 / q))


@dataclass(frozen=True)
class Rearrangement:
    """Right-continuous decreasing step function.

    Takes ``levels[k]`` on ``[breaks[k-1], breaks[k])`` with ``breaks[-1] = 0``
    implicitly, and zero from ``breaks[-1]`` on.
    """

    levels: np.ndarray
    breaks: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breaks, t, side="right")
        padded = np.append(self.levels, 0.0)
        return padded[idx]


def rearrangement(f: GridFunction, omega: GridFunction | None = None) -> Rearrangement:
    absf, w = _data(f, omega)
    order = np.argsort(-absf, kind="stable")
    vals, wts = absf[order], w[order]
    keep = vals > 0
    vals, wts = vals[keep], wts[keep]
    if vals.size == 0:
        return Rearrangement(np.zeros(0), np.zeros(0))
    cum = np.cumsum(wts)
    # last index of each run of equal values
    ends = np.flatnonzero(np.append(vals[1:] != vals[:-1], True))
    return Rearrangement(vals[ends], cum[ends])


def lorentz_norm(f: GridFunction, r: float, q: float, omega: GridFunction | None = None) -> float:
    """Lorentz ``(r, q)`` norm from the weighted rearrangement, integrated exactly per step."""
    ra = rearrangement(f, omega)
    if ra.levels.size == 0:
        return 0.0
    v, W = ra.levels, ra.breaks
    if q == INF:
        if r == INF:
            return float(v[0])
        return float(np.max(v * W ** (1.0 / r)))
    if r == INF:
        raise ValueError("the Lorentz (inf, q) quasinorm with finite q is not supported")
    Wprev = np.concatenate(([0.0], W[:-1]))
    total = np.sum(v**q * (r / q) * (W ** (q / r) - Wprev ** (q / r)))
    return float(total ** (1.0 / q))


def weak_norm(f: GridFunction, q: float, omega: GridFunction | None = None) -> float:
    """``max lambda * omega(|f| >= lambda)**(1/q)`` over the values ``lambda`` taken by ``|f|``."""
    absf, w = _data(f, omega)
    if absf.size == 0:
        return 0.0
    if q == INF:
        return float(absf.max())
    best = 0.0
    for lam in np.unique(absf):
        if lam > 0:
            best = max(best, float(lam * np.sum(w[absf >= lam]) ** (1.0 / q)))
    return best


# ---------------------------------------------------------------------------
# oscillation norms

def _midrange_centred(b: GridFunction) -> np.ndarray:
    v = np.asarray(b.values, dtype=float)
    return v - 0.5 * (v.max() + v.min())


def oscillation_norm(b: GridFunction, beta: float = 0.0) -> float:
    """``sup |R|**(-beta) * mean(|b - mean(b, R)|, R)`` over full admissible rectangles.

    ``beta = 0`` gives the parabolic BMO norm.
    """
    spec = b.spec
    if not 0 <= beta < 1.0 / (spec.n + spec.p):
        raise ValueError(f"beta must lie in [0, 1/(n+p)), got {beta}")
    widths = admissible_half_widths(spec, 0)
    if not widths:
        raise ValueError(f"no admissible rectangle on grid {spec.shape}")
    v = _midrange_centred(b)
    best = 0.0
    for m in widths:
        P = m**spec.p
        lo, hi = [-m] * spec.n + [-P], [m] * spec.n + [P]
        vol = (2 * m) ** spec.n * 2 * P
        mean = window_sums(v, lo, hi, spec.periodic)[0] / vol
        dev = np.zeros(spec.shape)
        for d in itertools.product(*[range(a, c) for a, c in zip(lo, hi)]):
            dev += np.abs(shifted(v, d, spec.periodic) - mean)
        if not spec.periodic:
            centres = (slice(m, spec.extent_space - m + 1),) * spec.n + (slice(P, spec.extent_time - P + 1),)
            dev = dev[centres]
        best = max(best, float(dev.max()) / vol / vol**beta)
    return best


def _displacements(spec: GridSpec):
    """Displacements covering every unordered pair of distinct cells once or twice."""
    if spec.periodic:
        ranges = [range(e) for e in spec.shape]
    else:
        ranges = [range(-(e - 1), e) for e in spec.shape[:-1]] + [range(0, spec.extent_time)]
    for d in itertools.product(*ranges):
        if any(d):
            yield d


def _pair_distance(spec: GridSpec, d) -> float:
    mags = []
    for o, e in zip(d, spec.shape):
        o = abs(o)
        mags.append(min(o, e - o) if spec.periodic else o)
    return max(max(mags[:-1], default=0), mags[-1] ** (1.0 / spec.p))


def plip_estimate(b: GridFunction, beta: float, seed: int = 0, sample: int = 2048) -> tuple[float, bool]:
    """Parabolic Lipschitz seminorm of order ``beta`` and whether every pair was visited.

    Periodic grids use the shortest wrapped displacement.  Grids above
    ``PLIP_EXACT_LIMIT`` cells visit all nearest-neighbour displacements plus
    ``sample`` seeded random ones.
    """
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    spec = b.spec
    v = _midrange_centred(b)
    displacements = list(_displacements(spec))
    exact = spec.size <= PLIP_EXACT_LIMIT
    if not exact:
        near = [d for d in displacements if max(abs(o) for o in d) == 1]
        rng = np.random.default_rng(seed)
        picks = rng.choice(len(displacements), size=min(sample, len(displacements)), replace=False)
        chosen = {tuple(d) for d in near} | {displacements[i] for i in sorted(picks)}
        displacements = sorted(chosen)
    best = 0.0
    for d in displacements:
        dist = _pair_distance(spec, d)
        if spec.periodic:
            diff = np.abs(shifted(v, d, True) - v)
        else:
            diff = np.abs(shifted(v, d, False) - v)
            ok = np.ones(spec.shape, dtype=bool)
            for axis, (o, e) in enumerate(zip(d, spec.shape)):
                idx = np.arange(e) + o
                shape = [1] * spec.ndim
                shape[axis] = e
                ok = ok & ((idx >= 0) & (idx < e)).reshape(shape)
            diff = np.where(ok, diff, 0.0)
        best = max(best, float(diff.max()) / dist**beta)
    return best, exact


def plip_norm(b: GridFunction, beta: float, seed: int = 0) -> float:
    return plip_estimate(b, beta, seed)[0]

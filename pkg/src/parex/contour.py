"""Higher-order commutators recovered from a contour integral of conjugated operators.

For a linear ``T`` and symbol ``b`` the map
``z -> S_z T(S_{-z} f)``, with ``S_z`` the degree-``N`` Taylor polynomial of
``exp(z b)``, has the ``k``-th commutator as ``k!`` times its ``z**k``
coefficient.  The coefficient is read off with the trapezoid rule on a
circle, which is exact for Laurent polynomials once the node count exceeds
the degree span.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import GridFunction


@dataclass(frozen=True)
class ContourConfig:
    k: int
    N: int
    nodes: int
    radius: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"commutator order must be positive, got {self.k}")
        if self.N < self.k:
            raise ValueError(f"truncation N={self.N} must be at least the order k={self.k}")
        if self.nodes <= 2 * self.N:
            raise ValueError(f"{self.nodes} nodes alias a degree-{2 * self.N} polynomial; need more than {2 * self.N}")
        if self.radius is not None and not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @classmethod
    def for_order(cls, k: int, radius: float | None = None) -> "ContourConfig":
        """``N = k + 2`` with ``2N + 4`` nodes."""
        return cls(k, k + 2, 2 * (k + 2) + 4, radius)


def truncated_exponential(z: complex, b: np.ndarray, N: int) -> np.ndarray:
    """``sum_{j<=N} (z b)**j / j!``."""
    zb = z * b
    term = np.ones_like(zb, dtype=complex)
    total = term.copy()
    for j in range(1, N + 1):
        term = term * zb / j
        total = total + term
    return total


def phi_z(T, b: GridFunction, f: GridFunction, z: complex, N: int) -> np.ndarray:
    """``S_z T(S_{-z} f)`` as a complex array."""
    bv = np.asarray(b.values, dtype=float)
    inner = GridFunction(f.spec, truncated_exponential(-z, bv, N) * f.values)
    return truncated_exponential(z, bv, N) * np.asarray(T(inner).values, dtype=complex)


def default_radius(b: GridFunction) -> float:
    return 0.5 / (1.0 + float(np.max(np.abs(b.values))))


def contour_commutator(T, b: GridFunction, f: GridFunction, cfg: ContourConfig) -> GridFunction:
    """``(k!/M) sum_j phi_{z_j}(f) z_j**(-k)`` over ``M`` equispaced nodes on a circle; real part."""
    eta = default_radius(b) if cfg.radius is None else cfg.radius
    total = np.zeros(f.spec.shape, dtype=complex)
    for j in range(cfg.nodes):
        z = eta * np.exp(2j * np.pi * j / cfg.nodes)
        total += phi_z(T, b, f, z, cfg.N) * z ** (-cfg.k)
    return GridFunction(f.spec, (math.factorial(cfg.k) / cfg.nodes * total).real)

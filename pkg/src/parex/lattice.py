"""Space-time lattices, sampled functions and prefix-sum box queries.

Arrays are stored with the spatial axes first and time last, i.e. a grid
with ``n`` spatial dimensions has shape ``(X,) * n + (T,)``.  Cells have unit
volume, so the measure of a box is its cell count.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

BOUNDARIES = ("periodic", "clipped")


class NonFiniteError(ValueError):
    """Raised when a grid function holds NaN or infinite values."""


class BoxOutOfRangeError(ValueError):
    """Raised when a box escapes a clipped grid."""


@dataclass(frozen=True)
class GridSpec:
    n: int
    p: int
    extent_space: int
    extent_time: int
    boundary: str = "periodic"

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"spatial dimension n must be 1 or 2, got {self.n}")
        if int(self.p) != self.p or self.p < 2:
            raise ValueError(f"parabolic exponent p must be an integer >= 2, got {self.p}")
        for name in ("extent_space", "extent_time"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.extent_space,) * self.n + (self.extent_time,)

    @property
    def ndim(self) -> int:
        return self.n + 1

    @property
    def size(self) -> int:
        return self.extent_space ** self.n * self.extent_time

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    def with_boundary(self, boundary: str) -> "GridSpec":
        return GridSpec(self.n, self.p, self.extent_space, self.extent_time, boundary)

    def with_extents(self, extent_space: int, extent_time: int | None = None) -> "GridSpec":
        if extent_time is None:
            extent_time = extent_space
        return GridSpec(self.n, self.p, extent_space, extent_time, self.boundary)

    def coordinates(self) -> list[np.ndarray]:
        """Broadcastable integer coordinate arrays, one per axis (time last)."""
        return list(np.meshgrid(*[np.arange(e) for e in self.shape], indexing="ij"))

    def cells(self) -> Iterable[tuple[int, ...]]:
        return itertools.product(*[range(e) for e in self.shape])


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A real (or complex) sample of a function on every cell of a grid.

    ``valid`` marks the cells that carry meaningful values; operators on a
    clipped grid leave cells without an admissible rectangle invalid, and
    downstream norms and suprema skip them.
    """

    spec: GridSpec
    values: np.ndarray
    valid: np.ndarray | None = field(default=None)

    def __post_init__(self):
        vals = np.array(self.values, copy=True)
        if not np.issubdtype(vals.dtype, np.complexfloating):
            vals = vals.astype(float)
        if vals.shape != self.spec.shape:
            raise ValueError(f"values have shape {vals.shape}, grid expects {self.spec.shape}")
        bad = ~np.isfinite(vals)
        if bad.any():
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise NonFiniteError(f"non-finite value {vals[idx]!r} at index {idx}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.valid is not None:
            mask = np.array(self.valid, dtype=bool, copy=True)
            if mask.shape != self.spec.shape:
                raise ValueError("valid mask shape does not match grid")
            mask.setflags(write=False)
            object.__setattr__(self, "valid", mask)

    @classmethod
    def constant(cls, spec: GridSpec, c: float) -> "GridFunction":
        return cls(spec, np.full(spec.shape, float(c)))

    @classmethod
    def from_callable(cls, spec: GridSpec, func) -> "GridFunction":
        """Sample ``func(*coords)`` on integer cell coordinates (time last)."""
        return cls(spec, np.broadcast_to(func(*spec.coordinates()), spec.shape))

    @property
    def mask(self) -> np.ndarray:
        if self.valid is None:
            return np.ones(self.spec.shape, dtype=bool)
        return self.valid

    def replace(self, values: np.ndarray, valid: np.ndarray | None = None) -> "GridFunction":
        return GridFunction(self.spec, values, valid)

    def __repr__(self):
        return f"GridFunction(shape={self.spec.shape}, boundary={self.spec.boundary!r})"


def combine_valid(*masks: np.ndarray | None) -> np.ndarray | None:
    out = None
    for m in masks:
        if m is None:
            continue
        out = m.copy() if out is None else (out & m)
    return out


def reflect_time(f: GridFunction) -> GridFunction:
    """Reverse the time axis: cell ``t`` goes to ``T - 1 - t``."""
    valid = None if f.valid is None else f.valid[..., ::-1]
    return GridFunction(f.spec, f.values[..., ::-1], valid)


def shift(f: GridFunction, v: Sequence[int]) -> GridFunction:
    """Periodic translation: ``shift(f, v)(c) = f(c - v)``."""
    axes = tuple(range(f.spec.ndim))
    valid = None if f.valid is None else np.roll(f.valid, tuple(v), axis=axes)
    return GridFunction(f.spec, np.roll(f.values, tuple(v), axis=axes), valid)


# ---------------------------------------------------------------------------
# boxes and prefix sums

@dataclass(frozen=True)
class CellBox:
    """Per-axis half-open integer ranges ``[lo, hi)``.

    Coordinates are unwrapped: on a periodic grid a range may start below 0
    or end past the extent and is wrapped when cells are addressed.
    """

    ranges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "ranges", tuple((int(a), int(b)) for a, b in self.ranges))
        for a, b in self.ranges:
            if b < a:
                raise ValueError(f"inverted range [{a}, {b})")

    @property
    def lo(self) -> tuple[int, ...]:
        return tuple(a for a, _ in self.ranges)

    @property
    def hi(self) -> tuple[int, ...]:
        return tuple(b for _, b in self.ranges)

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in self.ranges)

    @property
    def size(self) -> int:
        return int(np.prod(self.lengths))

    @property
    def empty(self) -> bool:
        return self.size == 0

    def contains(self, cell: Sequence[int], spec: GridSpec | None = None) -> bool:
        """Membership; with a periodic ``spec`` coordinates are compared mod extent."""
        for (a, b), c, e in zip(self.ranges, cell, spec.shape if spec else [None] * len(cell)):
            if spec is not None and spec.periodic:
                if b - a >= e:
                    continue
                if (c - a) % e >= b - a:
                    return False
            elif not (a <= c < b):
                return False
        return True

    def issubset(self, other: "CellBox") -> bool:
        return all(a2 <= a and b <= b2 for (a, b), (a2, b2) in zip(self.ranges, other.ranges))

    def index_arrays(self, spec: GridSpec) -> list[np.ndarray]:
        """Per-axis cell indices, wrapped on periodic grids."""
        check_box(spec, self)
        out = []
        for (a, b), e in zip(self.ranges, spec.shape):
            idx = np.arange(a, b)
            out.append(idx % e if spec.periodic else idx)
        return out

    def cells(self, spec: GridSpec) -> Iterable[tuple[int, ...]]:
        return itertools.product(*[ix.tolist() for ix in self.index_arrays(spec)])

    def __str__(self):
        return " x ".join(f"[{a},{b})" for a, b in self.ranges)


def check_box(spec: GridSpec, box: CellBox) -> None:
    if len(box.ranges) != spec.ndim:
        raise ValueError(f"box has {len(box.ranges)} axes, grid has {spec.ndim}")
    for axis, ((a, b), e) in enumerate(zip(box.ranges, spec.shape)):
        if spec.periodic:
            if b - a > e:
                raise BoxOutOfRangeError(f"box longer than the grid on axis {axis}")
        elif a < 0 or b > e:
            raise BoxOutOfRangeError(f"box [{a},{b}) escapes the clipped grid on axis {axis} (extent {e})")


@dataclass(frozen=True, eq=False)
class PrefixSumTable:
    """Cumulative sums with one ghost layer of zeros in front of every axis."""

    spec: GridSpec
    cumulative: np.ndarray


def _cumulate(values: np.ndarray) -> np.ndarray:
    c = np.zeros(tuple(s + 1 for s in values.shape), dtype=values.dtype)
    inner = values
    for axis in range(values.ndim):
        inner = np.cumsum(inner, axis=axis)
    c[tuple(slice(1, None) for _ in range(values.ndim))] = inner
    return c


def build_prefix(f: GridFunction | np.ndarray, spec: GridSpec | None = None) -> PrefixSumTable:
    if isinstance(f, GridFunction):
        spec, values = f.spec, f.values
    else:
        values = np.asarray(f)
        if spec is None:
            raise ValueError("a GridSpec is required when building from a raw array")
        bad = ~np.isfinite(values)
        if bad.any():
            raise NonFiniteError(f"non-finite value at index {tuple(np.argwhere(bad)[0])}")
    return PrefixSumTable(spec, _cumulate(values))


def _corner_sum(cum: np.ndarray, lo: Sequence[int], hi: Sequence[int]):
    total = 0.0
    d = len(lo)
    for corner in itertools.product((0, 1), repeat=d):
        idx = tuple(hi[a] if c else lo[a] for a, c in enumerate(corner))
        sign = -1 if (d - sum(corner)) % 2 else 1
        total = total + sign * cum[idx]
    return total


def box_sum(table: PrefixSumTable, box: CellBox) -> float:
    spec = table.spec
    check_box(spec, box)
    pieces_per_axis = []
    for (a, b), e in zip(box.ranges, spec.shape):
        if not spec.periodic:
            pieces_per_axis.append([(a, b)])
            continue
        if b - a == e:
            pieces_per_axis.append([(0, e)])
            continue
        a0 = a % e
        b0 = a0 + (b - a)
        pieces_per_axis.append([(a0, b0)] if b0 <= e else [(a0, e), (0, b0 - e)])
    total = 0.0
    for combo in itertools.product(*pieces_per_axis):
        total += _corner_sum(table.cumulative, [c[0] for c in combo], [c[1] for c in combo])
    return float(total) if not np.iscomplexobj(total) else complex(total)


def average(f: GridFunction, region: CellBox, table: PrefixSumTable | None = None) -> float:
    if region.empty:
        raise ValueError("average over an empty region")
    if table is None:
        table = build_prefix(f)
    return box_sum(table, region) / region.size


# ---------------------------------------------------------------------------
# vectorised window queries used by the operator engines

def _pad(values: np.ndarray, widths, periodic: bool, fill) -> np.ndarray:
    if periodic:
        return np.pad(values, widths, mode="wrap")
    return np.pad(values, widths, mode="constant", constant_values=fill)


def window_valid(shape: Sequence[int], lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
    """Centres ``c`` whose window ``[c+lo, c+hi)`` lies inside a clipped grid."""
    ok = np.ones(tuple(shape), dtype=bool)
    for axis, (e, a, b) in enumerate(zip(shape, lo, hi)):
        c = np.arange(e)
        line = (c + a >= 0) & (c + b <= e)
        sh = [1] * len(shape)
        sh[axis] = e
        ok &= line.reshape(sh)
    return ok


def window_sums(values: np.ndarray, lo: Sequence[int], hi: Sequence[int], periodic: bool):
    """Sum of ``values`` over ``[c+lo, c+hi)`` for every centre ``c``.

    Built from one prefix table of the (wrap- or zero-) padded array, so each
    window costs ``2**ndim`` lookups.  Returns ``(sums, inside)`` where
    ``inside`` marks windows fully contained in the grid (all True when
    periodic).
    """
    shape = values.shape
    widths = [(max(0, -a), max(0, b - 1)) for a, b in zip(lo, hi)]
    padded = _pad(values, widths, periodic, 0)
    cum = _cumulate(padded)
    out = np.zeros(shape, dtype=np.result_type(values.dtype, float))
    d = len(shape)
    for corner in itertools.product((0, 1), repeat=d):
        sl = []
        for axis, c in enumerate(corner):
            off = widths[axis][0] + (hi[axis] if c else lo[axis])
            sl.append(slice(off, off + shape[axis]))
        sign = -1 if (d - sum(corner)) % 2 else 1
        out += sign * cum[tuple(sl)]
    inside = np.ones(shape, dtype=bool) if periodic else window_valid(shape, lo, hi)
    return out, inside


def window_reduce(values: np.ndarray, lo: Sequence[int], hi: Sequence[int], periodic: bool,
                  func=np.max, fill=-np.inf) -> np.ndarray:
    """Separable sliding reduction (max or min) over ``[c+lo, c+hi)``.

    Out-of-grid positions on clipped grids take ``fill``.
    """
    out = values
    for axis, (a, b) in enumerate(zip(lo, hi)):
        e = out.shape[axis]
        widths = [(0, 0)] * out.ndim
        widths[axis] = (max(0, -a), max(0, b - 1))
        padded = _pad(out, widths, periodic, fill)
        win = np.lib.stride_tricks.sliding_window_view(padded, b - a, axis=axis)
        start = widths[axis][0] + a
        sl = [slice(None)] * out.ndim
        sl[axis] = slice(start, start + e)
        out = func(win[tuple(sl)], axis=-1)
    return out


def shifted(values: np.ndarray, offset: Sequence[int], periodic: bool, fill=0.0) -> np.ndarray:
    """``out[c] = values[c + offset]`` with wrap or ``fill`` outside the grid."""
    if periodic:
        return np.roll(values, tuple(-o for o in offset), axis=tuple(range(values.ndim)))
    out = np.full_like(values, fill)
    src, dst = [], []
    for o, e in zip(offset, values.shape):
        if abs(o) >= e:
            return out
        if o >= 0:
            src.append(slice(o, e))
            dst.append(slice(0, e - o))
        else:
            src.append(slice(0, e + o))
            dst.append(slice(-o, e))
    out[tuple(dst)] = values[tuple(src)]
    return out


# ---------------------------------------------------------------------------
# serialisation: rows in row-major order with time slowest

def to_csv(f: GridFunction) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(f.spec.n)] + ["t", "value"])
    vals = np.moveaxis(f.values, -1, 0)
    for idx in itertools.product(*[range(e) for e in vals.shape]):
        t, xs = idx[0], idx[1:]
        w.writerow(list(xs) + [t, repr(float(vals[idx]))])
    return buf.getvalue()


def from_csv(text: str, spec: GridSpec) -> GridFunction:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    if len(header) != spec.ndim + 1 or len(body) != spec.size:
        raise ValueError("CSV does not match the grid layout")
    values = np.zeros(spec.shape)
    for row in body:
        xs = [int(v) for v in row[: spec.n]]
        t = int(row[spec.n])
        values[tuple(xs) + (t,)] = float(row[-1])
    return GridFunction(spec, values)


def to_bytes(f: GridFunction) -> bytes:
    """Little-endian float64, time slowest then x1, ..., xn."""
    return np.ascontiguousarray(np.moveaxis(f.values, -1, 0), dtype="<f8").tobytes()


def from_bytes(data: bytes, spec: GridSpec) -> GridFunction:
    shape = (spec.extent_time,) + (spec.extent_space,) * spec.n
    arr = np.frombuffer(data, dtype="<f8").reshape(shape)
    return GridFunction(spec, np.moveaxis(arr, 0, -1))

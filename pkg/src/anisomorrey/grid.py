"""Cell-centered grid functions and n-dimensional summed tables.

A cell is *inside* a parallelepiped when its center is (snap-to-center
rule). Every module resolves boxes to index ranges through
:func:`snap_bounds`, so discrete Hoelder/Jensen-type inequalities hold
exactly on the sampled data.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Parallelepiped

__all__ = [
    "Box",
    "GridFunction",
    "SummedTable",
    "EmptyBoxError",
    "SNAP_EPS",
    "snap_bounds",
    "build_prefix",
    "box_sum",
    "box_average",
    "cell_averages",
]

# centers within this many cell widths of a box face count as inside
SNAP_EPS = 1e-9


class EmptyBoxError(ValueError):
    """No cell center lies inside the requested box."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned computational domain ``[lo, hi]``."""

    lo: tuple
    hi: tuple

    def __init__(self, lo, hi):
        lo = tuple(float(v) for v in np.atleast_1d(lo))
        hi = tuple(float(v) for v in np.atleast_1d(hi))
        if len(lo) != len(hi):
            raise ValueError("lo and hi must have the same dimension")
        if not all(l < h for l, h in zip(lo, hi)):
            raise ValueError(f"need lo < hi on every axis, got {lo}, {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_intervals(cls, intervals) -> "Box":
        intervals = list(intervals)
        return cls([i[0] for i in intervals], [i[1] for i in intervals])

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def lengths(self) -> np.ndarray:
        return np.asarray(self.hi) - np.asarray(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def intersect_lengths(self, lo, hi) -> np.ndarray:
        lo = np.maximum(np.asarray(lo, dtype=float), self.lo)
        hi = np.minimum(np.asarray(hi, dtype=float), self.hi)
        return np.clip(hi - lo, 0.0, None)

    def contains_box(self, E: Parallelepiped) -> bool:
        return bool(np.all(E.lo >= np.asarray(self.lo)) and np.all(E.hi <= np.asarray(self.hi)))

    def contains_origin(self) -> bool:
        return all(l <= 0.0 <= h for l, h in zip(self.lo, self.hi))

    def __str__(self):
        return ",".join(f"{l!r}:{h!r}" for l, h in zip(self.lo, self.hi))


class GridFunction:
    """A function sampled at the cell centers of a uniform grid.

    ``values[i]`` is the sample at ``lo + (i + 1/2) * cell_size``. When the
    samples come from an expression, ``source`` keeps it so that quadrature
    near the origin can be refined.
    """

    def __init__(self, domain: Box, values, source=None):
        values = np.array(values, dtype=float)
        if values.ndim != domain.n:
            raise ValueError(f"values have {values.ndim} axes, domain has {domain.n}")
        if values.size == 0:
            raise ValueError("empty grid")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        values.setflags(write=False)
        self.domain = domain
        self.values = values
        self.source = source

    @classmethod
    def zeros(cls, domain: Box, shape) -> "GridFunction":
        return cls(domain, np.zeros(tuple(int(s) for s in np.atleast_1d(shape))))

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def cell_size(self) -> np.ndarray:
        return self.domain.lengths / np.asarray(self.shape)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.cell_size))

    def axis_centers(self, axis: int) -> np.ndarray:
        return self.domain.lo[axis] + (np.arange(self.shape[axis]) + 0.5) * self.cell_size[axis]

    def centers(self) -> np.ndarray:
        """Cell centers as an array of shape ``shape + (n,)``."""
        grids = np.meshgrid(*[self.axis_centers(i) for i in range(self.n)], indexing="ij")
        return np.stack(grids, axis=-1)

    def point(self, index) -> np.ndarray:
        index = np.asarray(index)
        return np.asarray(self.domain.lo) + (index + 0.5) * self.cell_size

    def nearest_index(self, x) -> tuple:
        x = np.asarray(x, dtype=float)
        j = np.floor((x - np.asarray(self.domain.lo)) / self.cell_size).astype(int)
        return tuple(np.clip(j, 0, np.asarray(self.shape) - 1))

    def origin_is_center(self) -> bool:
        u = -np.asarray(self.domain.lo) / self.cell_size - 0.5
        return bool(self.domain.contains_origin() and np.all(np.abs(u - np.round(u)) < SNAP_EPS))

    def with_values(self, values, source=None) -> "GridFunction":
        return GridFunction(self.domain, values, source=source)

    def __repr__(self):
        return f"GridFunction(domain={self.domain}, shape={self.shape})"


def snap_bounds(gf: GridFunction, centers, half_widths):
    """Inclusive cell index ranges ``(lo, hi)`` of the cells whose centers lie in boxes.

    ``centers`` and ``half_widths`` broadcast to ``(..., n)``. Ranges are
    clipped to the grid; a box with no included cell has ``lo > hi`` on some
    axis.
    """
    centers = np.asarray(centers, dtype=float)
    half_widths = np.asarray(half_widths, dtype=float)
    dx = gf.cell_size
    u = (centers - np.asarray(gf.domain.lo)) / dx - 0.5
    r = half_widths / dx
    lo = np.ceil(u - r - SNAP_EPS)
    hi = np.floor(u + r + SNAP_EPS)
    upper = np.asarray(gf.shape) - 1
    lo = np.clip(lo, 0, None)
    hi = np.clip(hi, None, upper)
    # boxes far outside the grid would clip to inverted but in-range bounds
    lo = np.minimum(lo, upper + 1).astype(np.int64)
    hi = np.maximum(hi, -1).astype(np.int64)
    return lo, hi


def _is_empty(lo, hi) -> np.ndarray:
    return np.any(lo > hi, axis=-1)


class SummedTable:
    """Zero-padded n-dimensional prefix sums of a grid array.

    ``table[i_1 + 1, ..., i_n + 1]`` is the sum of ``values[:i_1+1, ..., :i_n+1]``.
    Accumulation is in ``numpy.longdouble``. ``lookups`` counts table reads.
    """

    def __init__(self, values, cell_volume: float = 1.0):
        values = np.asarray(values)
        acc = values.astype(np.longdouble)
        for axis in range(acc.ndim):
            acc = np.cumsum(acc, axis=axis)
        table = np.zeros(tuple(s + 1 for s in values.shape), dtype=np.longdouble)
        table[tuple(slice(1, None) for _ in values.shape)] = acc
        table.setflags(write=False)
        self.table = table
        self.shape = values.shape
        self.cell_volume = float(cell_volume)
        self.lookups = 0

    @property
    def ndim(self) -> int:
        return len(self.shape)

    def range_sum(self, lo, hi) -> np.ndarray:
        """Sum of values over inclusive index ranges; empty ranges sum to 0."""
        lo = np.asarray(lo, dtype=np.int64)
        hi = np.asarray(hi, dtype=np.int64)
        empty = _is_empty(lo, hi)
        n = self.ndim
        total = np.zeros(lo.shape[:-1], dtype=np.longdouble)
        for corner in itertools.product((0, 1), repeat=n):
            idx = tuple(np.where(empty, 0, hi[..., k] + 1) if c else np.where(empty, 0, lo[..., k])
                        for k, c in enumerate(corner))
            sign = -1 if (n - sum(corner)) % 2 else 1
            total = total + sign * self.table[idx]
        self.lookups += int(np.prod(lo.shape[:-1], dtype=np.int64)) * (1 << n)
        return np.where(empty, 0.0, total.astype(float))

    def axis_range_sum(self, los, his) -> np.ndarray:
        """Outer-product query: per-axis 1-D index arrays, result on their product grid."""
        n = self.ndim
        out = None
        for corner in itertools.product((0, 1), repeat=n):
            idx = np.ix_(*[(his[k] + 1) if c else los[k] for k, c in enumerate(corner)])
            sign = -1 if (n - sum(corner)) % 2 else 1
            term = sign * self.table[idx]
            out = term if out is None else out + term
        self.lookups += int(np.prod([len(l) for l in los])) * (1 << n)
        return out.astype(float)


def build_prefix(gf: GridFunction | np.ndarray, weights=None) -> SummedTable:
    """Summed table of ``gf`` values, or of the product ``values * weights``."""
    if isinstance(gf, GridFunction):
        values, vol = gf.values, gf.cell_volume
    else:
        values, vol = np.asarray(gf, dtype=float), 1.0
    if weights is not None:
        values = values * np.asarray(weights, dtype=float)
    return SummedTable(values, vol)


def _box_bounds(E: Parallelepiped, gf: GridFunction):
    lo, hi = snap_bounds(gf, E.center, E.half_widths)
    if _is_empty(lo, hi):
        raise EmptyBoxError(f"no cell center inside box {E.to_dict()}")
    return lo, hi


def box_sum(table: SummedTable, E: Parallelepiped, gf: GridFunction) -> float:
    """``sum(included values) * cell_volume`` for the box ``E``."""
    lo, hi = _box_bounds(E, gf)
    return float(table.range_sum(lo, hi)) * table.cell_volume


def box_count(gf: GridFunction, E: Parallelepiped) -> int:
    lo, hi = _box_bounds(E, gf)
    return int(np.prod(hi - lo + 1))


def box_average(table: SummedTable, E: Parallelepiped, gf: GridFunction) -> float:
    """Mean of the included samples of the tabulated values."""
    lo, hi = _box_bounds(E, gf)
    return float(table.range_sum(lo, hi)) / float(np.prod(hi - lo + 1))


def _origin_cells(gf: GridFunction) -> list:
    """Indices of cells whose closure contains the origin."""
    if not gf.domain.contains_origin():
        return []
    dx = gf.cell_size
    s = -np.asarray(gf.domain.lo) / dx  # origin in edge coordinates
    per_axis = []
    for k in range(gf.n):
        cand = {int(math.floor(s[k])), int(math.ceil(s[k])) - 1}
        if abs(s[k] - round(s[k])) < SNAP_EPS:
            cand = {int(round(s[k])) - 1, int(round(s[k]))}
        per_axis.append(sorted(c for c in cand if 0 <= c < gf.shape[k]))
    return list(itertools.product(*per_axis))


def _subdivided_average(fn, lo, size, depth: int) -> float:
    """Average of ``fn`` over a cell, recursively splitting the sub-cell at the origin."""
    n = len(lo)
    total = 0.0
    weight = 1.0
    lo = np.asarray(lo, dtype=float)
    size = np.asarray(size, dtype=float)
    offsets = np.array(list(itertools.product(range(3), repeat=n)), dtype=float)
    for _ in range(depth):
        sub = size / 3.0
        sub_lo = lo + offsets * sub
        sub_hi = sub_lo + sub
        # sub-cell edges carry rounding error, so contact is judged relative to the size
        eps = SNAP_EPS * sub
        touch = np.all((sub_lo <= eps) & (-eps <= sub_hi), axis=1)
        centers = sub_lo + 0.5 * sub
        keep = ~touch
        share = weight / offsets.shape[0]
        if keep.any():
            total += share * float(np.sum(fn(centers[keep])))
        if not touch.any():
            return total
        k = int(np.flatnonzero(touch)[0])
        # a corner-touching origin is shared by several sub-cells; recurse into
        # each of them with its own share
        if touch.sum() > 1:
            for kk in np.flatnonzero(touch):
                total += share * _subdivided_average(fn, sub_lo[kk], sub, depth - 1)
            return total
        lo, size = sub_lo[k], sub
        weight = share
    center = lo + 0.5 * size
    return total + weight * float(fn(center[None, :])[0])


def cell_averages(gf: GridFunction, fn, depth: int = 12) -> np.ndarray:
    """Samples of ``fn`` at cell centers, with cells touching the origin replaced
    by subdivided averages (``3**n`` split per level, ``depth`` levels)."""
    values = np.asarray(fn(gf.centers().reshape(-1, gf.n)), dtype=float).reshape(gf.shape)
    values = np.array(values)
    if depth > 0:
        dx = gf.cell_size
        for idx in _origin_cells(gf):
            lo = np.asarray(gf.domain.lo) + np.asarray(idx) * dx
            values[idx] = _subdivided_average(fn, lo, dx, depth)
    return values

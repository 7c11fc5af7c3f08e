"""Finite families of parallelepipeds that stand in for "sup over all E".

A :class:`ScaleLadder` discretizes ``sup_{t > 0}`` for the centered maximal
function. A :class:`BoxFamily` is a set of parallelepipeds, usually a
sub-lattice of cell centers times a geometric ladder of scales, and is used
for every uncentered supremum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Anisotropy, Parallelepiped
from .grid import SNAP_EPS, GridFunction, snap_bounds

__all__ = ["ScaleLadder", "BoxFamily", "range_max", "resolving_scale", "covering_scale"]


def resolving_scale(gf: GridFunction, a: Anisotropy) -> float:
    """Smallest ``t`` whose box reaches half a cell on every axis."""
    half = gf.cell_size / 2.0
    return float(max(h ** (1.0 / ai) for h, ai in zip(half, a.a)))


def covering_scale(gf: GridFunction, a: Anisotropy) -> float:
    """Smallest ``t`` whose box, centered anywhere in the domain, covers it."""
    L = gf.domain.lengths
    return float(max(l ** (1.0 / ai) for l, ai in zip(L, a.a)))


@dataclass(frozen=True)
class ScaleLadder:
    """Scales ``t_min * q**k`` for ``k = 0..count-1``."""

    t_min: float
    q: float
    count: int

    def __post_init__(self):
        if not (self.t_min > 0 and self.q > 1 and self.count >= 1):
            raise ValueError(f"invalid ladder {self}")

    @classmethod
    def for_grid(cls, gf: GridFunction, a: Anisotropy, q: float = 2.0) -> "ScaleLadder":
        """From one-cell resolution up to a domain-spanning box."""
        t0 = resolving_scale(gf, a)
        t1 = covering_scale(gf, a)
        count = int(math.ceil(math.log(t1 / t0) / math.log(q) - 1e-12)) + 1
        return cls(t0, q, max(count, 1))

    @property
    def scales(self) -> np.ndarray:
        return self.t_min * self.q ** np.arange(self.count)

    def extended(self, extra: int) -> "ScaleLadder":
        return ScaleLadder(self.t_min, self.q, self.count + extra)

    def to_dict(self) -> dict:
        return {"t_min": self.t_min, "q": self.q, "count": self.count}


def range_max(values: np.ndarray, lo: np.ndarray, hi: np.ndarray, axis: int) -> np.ndarray:
    """``out[..., j, ...] = max(values[..., lo[j]:hi[j]+1, ...])`` along ``axis``.

    Sparse-table range maximum; empty ranges (``lo > hi``) give ``-inf``.
    """
    v = np.moveaxis(values, axis, 0)
    L = v.shape[0]
    levels = [v]
    k = 1
    while (1 << k) <= L:
        prev = levels[-1]
        half = 1 << (k - 1)
        levels.append(np.maximum(prev[:-half], prev[half:]))
        k += 1
    lo = np.asarray(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    empty = lo > hi
    length = np.where(empty, 1, hi - lo + 1)
    level = np.floor(np.log2(length)).astype(np.int64)
    # guard log2 rounding at exact powers of two
    level = np.where((1 << (level + 1)) <= length, level + 1, level)
    level = np.where((1 << level) > length, level - 1, level)
    out = np.empty((len(lo),) + v.shape[1:], dtype=float)
    for lv in np.unique(level):
        sel = np.flatnonzero(level == lv)
        tab = levels[lv]
        a_idx = np.where(empty[sel], 0, lo[sel])
        b_idx = np.where(empty[sel], 0, hi[sel] - (1 << lv) + 1)
        out[sel] = np.maximum(tab[a_idx], tab[b_idx])
    out[empty] = -np.inf
    return np.moveaxis(out, 0, axis)


class BoxFamily:
    """A finite family of parallelepipeds.

    Lattice families (the default) place a box of every ladder scale at every
    ``stride``-th cell center; explicit families hold an arbitrary list.

    Parameters
    ----------
    anisotropy : Anisotropy
    centers : ndarray, shape (B, n)
    scales : ndarray, shape (B,)
    lattice : dict or None
        ``{"offset", "stride", "scales"}`` when the family is a lattice
        product; enables the fast uncentered supremum.
    """

    def __init__(self, anisotropy, centers, scales, lattice=None, grid_shape=None):
        self.anisotropy = anisotropy if isinstance(anisotropy, Anisotropy) else Anisotropy(anisotropy)
        self.centers = np.atleast_2d(np.asarray(centers, dtype=float))
        self.scales = np.atleast_1d(np.asarray(scales, dtype=float))
        if self.centers.shape != (self.scales.shape[0], self.anisotropy.n):
            raise ValueError("centers must be (B, n) with one scale per box")
        if np.any(self.scales <= 0):
            raise ValueError("scales must be positive")
        self.lattice = lattice
        self.grid_shape = grid_shape

    @classmethod
    def lattice_family(cls, gf: GridFunction, a: Anisotropy, stride=4, t_min=None, q: float = 2.0,
                       count=None, offset=None) -> "BoxFamily":
        """Centers on every ``stride``-th cell center, scales ``t_min * q**k``.

        Defaults: ``t_min`` resolves one cell, ``count`` reaches a box covering
        the domain from any center.
        """
        n = gf.n
        stride = np.broadcast_to(np.asarray(stride, dtype=np.int64), (n,)).copy()
        if np.any(stride < 1):
            raise ValueError("stride must be >= 1")
        if offset is None:
            offset = (stride - 1) // 2
        offset = np.broadcast_to(np.asarray(offset, dtype=np.int64), (n,)).copy()
        if t_min is None:
            t_min = resolving_scale(gf, a)
        if count is None:
            t1 = covering_scale(gf, a)
            count = int(math.ceil(math.log(max(t1 / t_min, 1.0)) / math.log(q) - 1e-12)) + 1
        ladder = ScaleLadder(t_min, q, count)
        idx_axes = [np.arange(offset[k], gf.shape[k], stride[k]) for k in range(n)]
        if any(len(ix) == 0 for ix in idx_axes):
            raise ValueError("stride/offset leave no centers on some axis")
        mesh = np.stack(np.meshgrid(*idx_axes, indexing="ij"), axis=-1).reshape(-1, n)
        pts = np.asarray(gf.domain.lo) + (mesh + 0.5) * gf.cell_size
        scales = ladder.scales
        centers = np.repeat(pts[None, :, :], len(scales), axis=0).reshape(-1, n)
        sc = np.repeat(scales, len(pts))
        lattice = {
            "offset": offset,
            "stride": stride,
            "axis_index": idx_axes,
            "ladder": ladder,
            "n_centers": len(pts),
        }
        return cls(a, centers, sc, lattice=lattice, grid_shape=gf.shape)

    @classmethod
    def explicit(cls, boxes) -> "BoxFamily":
        boxes = list(boxes)
        if not boxes:
            raise ValueError("empty family")
        a = boxes[0].anisotropy
        return cls(a, [b.center for b in boxes], [b.t for b in boxes])

    def __len__(self):
        return self.scales.shape[0]

    def __iter__(self):
        for c, t in zip(self.centers, self.scales):
            yield Parallelepiped(c, t, self.anisotropy)

    def box(self, i: int) -> Parallelepiped:
        return Parallelepiped(self.centers[i], self.scales[i], self.anisotropy)

    @property
    def half_widths(self) -> np.ndarray:
        return self.scales[:, None] ** self.anisotropy.array[None, :]

    def bounds(self, gf: GridFunction):
        """Snap-rule index ranges of every member on ``gf``."""
        return snap_bounds(gf, self.centers, self.half_widths)

    def dilated(self, lam: float) -> "BoxFamily":
        return BoxFamily(self.anisotropy, self.centers, self.scales * lam)

    def union(self, other: "BoxFamily") -> "BoxFamily":
        return BoxFamily(self.anisotropy, np.vstack([self.centers, other.centers]),
                         np.concatenate([self.scales, other.scales]))

    def subset(self, mask) -> "BoxFamily":
        mask = np.asarray(mask)
        return BoxFamily(self.anisotropy, self.centers[mask], self.scales[mask])

    def refined(self, gf: GridFunction) -> "BoxFamily":
        """Lattice family on the (finer) grid ``gf`` with the same stride in cells."""
        if self.lattice is None:
            raise ValueError("only lattice families can be refined")
        lad = self.lattice["ladder"]
        return BoxFamily.lattice_family(gf, self.anisotropy, stride=self.lattice["stride"], q=lad.q)

    def to_dict(self) -> dict:
        d = {"size": len(self), "anisotropy": list(self.anisotropy.a)}
        if self.lattice is not None:
            d.update(
                stride=[int(s) for s in self.lattice["stride"]],
                offset=[int(s) for s in self.lattice["offset"]],
                ladder=self.lattice["ladder"].to_dict(),
                n_centers=int(self.lattice["n_centers"]),
            )
        return d

    def lattice_compatible(self, gf: GridFunction) -> bool:
        return self.lattice is not None and tuple(self.grid_shape) == tuple(gf.shape)

    def containing_max(self, gf: GridFunction, box_values: np.ndarray) -> np.ndarray:
        """For every cell, the max of ``box_values`` over members whose snap set holds it.

        Cells in no member get ``-inf``.
        """
        box_values = np.asarray(box_values, dtype=float)
        if self.lattice_compatible(gf):
            return self._lattice_containing_max(gf, box_values)
        out = np.full(gf.shape, -np.inf)
        lo, hi = self.bounds(gf)
        for b in range(len(self)):
            if np.any(lo[b] > hi[b]):
                continue
            sl = tuple(slice(l, h + 1) for l, h in zip(lo[b], hi[b]))
            np.maximum(out[sl], box_values[b], out=out[sl])
        return out

    def _lattice_containing_max(self, gf, box_values):
        lat = self.lattice
        n = gf.n
        n_c = lat["n_centers"]
        dims = [len(ix) for ix in lat["axis_index"]]
        per_scale = box_values.reshape(len(lat["ladder"].scales), *dims)
        out = np.full(gf.shape, -np.inf)
        dx = gf.cell_size
        for s, t in enumerate(lat["ladder"].scales):
            # centers sit on cell centers, so membership reduces to integer radii
            radius = np.floor(t ** self.anisotropy.array / dx + SNAP_EPS).astype(np.int64)
            v = per_scale[s]
            for k in range(n):
                j = np.arange(gf.shape[k])
                off, st = lat["offset"][k], lat["stride"][k]
                m_lo = -((off - j + radius[k]) // st)  # ceil((j - r - off) / st)
                m_hi = (j + radius[k] - off) // st
                m_lo = np.clip(m_lo, 0, None)
                m_hi = np.clip(m_hi, None, dims[k] - 1)
                v = range_max(v, m_lo, m_hi, axis=k)
            np.maximum(out, v, out=out)
        assert n_c == int(np.prod(dims))
        return out


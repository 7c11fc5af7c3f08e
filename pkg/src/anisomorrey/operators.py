"""Anisotropic maximal operators on grid functions.

``maximal`` is centered: the sup over ``t`` in a ladder of averages of
``|f|`` on ``E(x, t)``. ``family_maximal`` and ``weighted_maximal`` are
uncentered: the sup over family members that contain ``x``.
"""
from __future__ import annotations

import numpy as np

from .families import BoxFamily, ScaleLadder
from .geometry import Anisotropy
from .grid import SNAP_EPS, GridFunction, SummedTable
from .weights import SUBDIVISION_DEPTH, Weight

__all__ = [
    "maximal",
    "family_maximal",
    "weighted_maximal",
    "sharp_maximal",
    "maximal_r",
    "centered_radii",
    "UncoveredCellError",
]


class UncoveredCellError(ValueError):
    """Some grid cell lies in no member of the family."""


def _anisotropy(a) -> Anisotropy:
    return a if isinstance(a, Anisotropy) else Anisotropy(a)


def centered_radii(gf: GridFunction, a: Anisotropy, t: float) -> np.ndarray:
    """Integer cell radii of ``E(x, t)`` for ``x`` a cell center."""
    return np.floor(t ** a.array / gf.cell_size + SNAP_EPS).astype(np.int64)


def _axis_bounds(gf, radii):
    los, his = [], []
    for k, r in enumerate(radii):
        j = np.arange(gf.shape[k])
        los.append(np.clip(j - r, 0, None))
        his.append(np.clip(j + r, None, gf.shape[k] - 1))
    return los, his


def _counts(los, his):
    out = None
    for k, (lo, hi) in enumerate(zip(los, his)):
        c = (hi - lo + 1).astype(float)
        shape = [1] * len(los)
        shape[k] = -1
        c = c.reshape(shape)
        out = c if out is None else out * c
    return out


def _centered_scan(table: SummedTable, gf: GridFunction, a: Anisotropy, ladder: ScaleLadder):
    """Yield ``(t, average field)`` for every ladder scale."""
    seen = set()
    for t in ladder.scales:
        radii = centered_radii(gf, a, t)
        key = tuple(radii)
        los, his = _axis_bounds(gf, radii)
        if key in seen:
            continue
        seen.add(key)
        yield t, table.axis_range_sum(los, his) / _counts(los, his)


def maximal(f: GridFunction, a, ladder: ScaleLadder | None = None, family: BoxFamily | None = None) -> GridFunction:
    """Anisotropic maximal function of ``f`` sampled at the cell centers.

    With ``family`` the uncentered variant over the family is returned
    instead (sup over members containing the cell).
    """
    a = _anisotropy(a)
    if family is not None:
        return family_maximal(f, family)
    ladder = ladder or ScaleLadder.for_grid(f, a)
    table = SummedTable(np.abs(f.values))
    out = np.full(f.shape, -np.inf)
    for _, avg in _centered_scan(table, f, a, ladder):
        np.maximum(out, avg, out=out)
    return f.with_values(out)


def _family_box_averages(vals, F: BoxFamily, gf: GridFunction, wvals=None):
    lo, hi = F.bounds(gf)
    empty = np.any(lo > hi, axis=-1)
    num = SummedTable(vals if wvals is None else vals * wvals).range_sum(lo, hi)
    if wvals is None:
        den = np.prod(hi - lo + 1, axis=-1).astype(float)
    else:
        den = SummedTable(wvals).range_sum(lo, hi)
    with np.errstate(invalid="ignore", divide="ignore"):
        avg = np.where(empty, -np.inf, num / np.where(empty, 1.0, den))
    return avg


def family_maximal(f: GridFunction, F: BoxFamily, w: Weight | None = None, containing: bool = True,
                   depth: int = SUBDIVISION_DEPTH) -> GridFunction:
    """``sup_{E in F, x in E} (1/w(E)) int_E |f| w`` at every cell (``w = 1`` if omitted).

    ``w(E)`` and ``int_E |f| w`` are evaluated on the same snap set. With
    ``containing=False`` the sup runs over all of ``F`` regardless of ``x``
    and the result is constant.

    Raises
    ------
    UncoveredCellError
        If some cell lies in no member of ``F``.
    """
    wvals = None if w is None else w.cell_values(f, 1.0, depth)
    avg = _family_box_averages(np.abs(f.values), F, f, wvals)
    if not containing:
        return f.with_values(np.full(f.shape, float(np.max(avg))))
    out = F.containing_max(f, avg)
    if not np.all(np.isfinite(out)):
        bad = np.unravel_index(int(np.argmin(np.isfinite(out))), out.shape)
        raise UncoveredCellError(f"cell {tuple(int(i) for i in bad)} is in no family member")
    return f.with_values(out)


def weighted_maximal(f: GridFunction, w: Weight, F: BoxFamily, containing: bool = True,
                     depth: int = SUBDIVISION_DEPTH) -> GridFunction:
    """Maximal operator with respect to the measure ``w(x) dx`` over ``F``."""
    return family_maximal(f, F, w=w, containing=containing, depth=depth)


def _window_dev(values, center_vals, radii, chunk_budget=2 ** 24):
    """``out[x] = mean over the clipped window of |values - center_vals[x]|``."""
    n = values.ndim
    pad = [(int(r), int(r)) for r in radii]
    padded = np.pad(values, pad, constant_values=np.nan)
    win = tuple(2 * int(r) + 1 for r in radii)
    view = np.lib.stride_tricks.sliding_window_view(padded, win)
    out = np.empty(values.shape)
    per_row = int(np.prod(values.shape[1:])) * int(np.prod(win))
    step = max(1, chunk_budget // max(per_row, 1))
    for s in range(0, values.shape[0], step):
        blk = view[s:s + step]
        c = center_vals[s:s + step].reshape(center_vals[s:s + step].shape + (1,) * n)
        out[s:s + step] = np.nanmean(np.abs(blk - c), axis=tuple(range(n, 2 * n)))
    return out


def sharp_maximal(f: GridFunction, a, ladder: ScaleLadder | None = None, mode: str = "mean") -> GridFunction:
    """Sharp maximal function: sup over ``t`` of the mean oscillation on ``E(x, t)``.

    ``mode="mean"`` measures deviation from the signed average of ``f``;
    ``mode="literal"`` from the average of ``|f|``.
    """
    if mode not in ("mean", "literal"):
        raise ValueError(f"unknown sharp maximal mode {mode!r}")
    a = _anisotropy(a)
    ladder = ladder or ScaleLadder.for_grid(f, a)
    base = f.values if mode == "mean" else np.abs(f.values)
    table = SummedTable(base)
    out = np.full(f.shape, -np.inf)
    seen = set()
    for t in ladder.scales:
        radii = centered_radii(f, a, t)
        radii = np.minimum(radii, np.asarray(f.shape) - 1)
        if tuple(radii) in seen:
            continue
        seen.add(tuple(radii))
        los, his = _axis_bounds(f, radii)
        c = table.axis_range_sum(los, his) / _counts(los, his)
        np.maximum(out, _window_dev(f.values, c, radii), out=out)
    return f.with_values(out)


def maximal_r(f: GridFunction, r: float, a, ladder: ScaleLadder | None = None,
              family: BoxFamily | None = None) -> GridFunction:
    """``M_r f = (M |f|**r) ** (1/r)``."""
    if r <= 0:
        raise ValueError("r must be positive")
    if r == 1:
        return maximal(f, a, ladder, family=family)
    g = f.with_values(np.abs(f.values) ** r)
    m = maximal(g, a, ladder, family=family)
    return f.with_values(m.values ** (1.0 / r))

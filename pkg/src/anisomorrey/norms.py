"""Weighted Lebesgue, weak Lebesgue and weighted anisotropic Morrey norms."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .families import BoxFamily
from .geometry import Parallelepiped
from .grid import GridFunction, SummedTable, _origin_cells, _subdivided_average
from .weights import SUBDIVISION_DEPTH, ConstantWeight, GridWeight, Weight

__all__ = ["MorreyParams", "MorreyResult", "lp_norm", "weak_lp_norm", "morrey_norm", "cell_mass"]


@dataclass(frozen=True)
class MorreyParams:
    p: float
    kappa: float = 0.0

    def __post_init__(self):
        if not (1 <= self.p < np.inf):
            raise ValueError(f"Morrey exponent p must satisfy 1 <= p < inf, got {self.p}")
        if not (0 <= self.kappa < 1):
            raise ValueError(f"Morrey parameter kappa must lie in [0, 1), got {self.kappa}")


@dataclass
class MorreyResult:
    value: float
    argmax: Parallelepiped
    local: np.ndarray = field(repr=False)

    def __float__(self):
        return float(self.value)

    def to_dict(self) -> dict:
        return {"value": float(self.value), "argmax": self.argmax.to_dict(), "n_boxes": int(len(self.local))}


def _weight(w):
    return ConstantWeight(1.0) if w is None else w


def cell_mass(f: GridFunction, w: Weight | None, p: float, refine: bool | str = "auto",
              depth: int = SUBDIVISION_DEPTH) -> np.ndarray:
    """Per-cell average of ``|f|**p w``.

    Regular cells use center samples. With ``refine`` and an expression
    source on ``f``, cells touching the origin integrate ``|f|**p w`` by
    recursive subdivision instead.
    """
    w = _weight(w)
    wv = w.cell_values(f, 1.0, depth)
    mass = np.abs(f.values) ** p * wv
    if refine == "auto":
        refine = f.source is not None and not isinstance(w, GridWeight)
    if refine and f.source is not None:
        expr, aniso = f.source

        def integrand(pts):
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.abs(expr.evaluate(pts, aniso)) ** p * w.pointwise(pts)

        mass = np.array(mass)
        dx = f.cell_size
        for idx in _origin_cells(f):
            lo = np.asarray(f.domain.lo) + np.asarray(idx) * dx
            mass[idx] = _subdivided_average(integrand, lo, dx, depth)
    return mass


def lp_norm(f: GridFunction, w: Weight | None = None, p: float = 2.0, refine: bool | str = "auto") -> float:
    """``(int |f|**p w)**(1/p)`` by snap-rule quadrature; ``p = inf`` gives ``max |f| w``."""
    w = _weight(w)
    if np.isinf(p):
        return float(np.max(np.abs(f.values) * w.cell_values(f)))
    if p < 1:
        raise ValueError("p must be >= 1")
    total = float(SummedTable(cell_mass(f, w, p, refine)).table[(-1,) * f.n]) * f.cell_volume
    return total ** (1.0 / p)


def weak_lp_norm(f: GridFunction, w: Weight | None = None, p: float = 1.0, t_ladder=None) -> float:
    """``sup_t t * w({|f| > t})**(1/p)`` over a ladder of levels.

    The default ladder puts a level just below every distinct value of
    ``|f|``, which attains the discrete supremum.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    w = _weight(w)
    absf = np.abs(f.values).ravel()
    wv = w.cell_values(f).ravel() * f.cell_volume
    if t_ladder is None:
        order = np.argsort(-absf, kind="stable")
        sorted_f = absf[order]
        # w({|f| >= v}) for each distinct v, largest first
        cum = np.cumsum(wv[order].astype(np.longdouble)).astype(float)
        last = np.r_[np.flatnonzero(np.diff(sorted_f) != 0), len(sorted_f) - 1]
        levels = sorted_f[last]
        keep = levels > 0
        if not keep.any():
            return 0.0
        t = np.nextafter(levels[keep], 0.0)
        return float(np.max(t * cum[last][keep] ** (1.0 / p)))
    t = np.atleast_1d(np.asarray(t_ladder, dtype=float))
    if np.any(t <= 0):
        raise ValueError("levels must be positive")
    best = 0.0
    for level in t:
        meas = float(np.sum(wv[absf > level], dtype=np.longdouble))
        best = max(best, level * meas ** (1.0 / p))
    return best


def morrey_norm(f: GridFunction, w: Weight | None, params: MorreyParams, F: BoxFamily,
                refine: bool | str = "auto", mass: np.ndarray | None = None) -> MorreyResult:
    """``max_{E in F} (w(E)**(-kappa) int_E |f|**p w)**(1/p)`` with the maximizing box.

    Both factors are evaluated on the snap set of each box.
    """
    w = _weight(w)
    p, kappa = params.p, params.kappa
    if mass is None:
        mass = cell_mass(f, w, p, refine)
    lo, hi = F.bounds(f)
    empty = np.any(lo > hi, axis=-1)
    vol = f.cell_volume
    num = SummedTable(mass).range_sum(lo, hi) * vol
    wE = SummedTable(w.cell_values(f)).range_sum(lo, hi) * vol
    with np.errstate(divide="ignore", invalid="ignore"):
        local = np.where(empty, 0.0, num / np.where(empty, 1.0, wE) ** kappa) ** (1.0 / p)
    i = int(np.argmax(local))
    return MorreyResult(float(local[i]), F.box(i), local)

"""Weights, weighted measures, Muckenhoupt characteristics and doubling constants.

Two integration backends exist:

* ``"quadrature"``: snap-to-center sums of per-cell weight values. Cells whose
  closure contains the origin get a subdivided cell average instead of the
  center sample, so integrable power singularities are resolved. Both factors
  of the A_p product use the same cell sets.
* ``"exact"``: closed forms, available for constant weights in any dimension
  and for ``|x|**alpha`` in one dimension.

``"auto"`` picks ``"exact"`` when it is available.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .families import BoxFamily
from .geometry import Anisotropy, Parallelepiped, rho_quasi_norm, scale_parallelepiped
from .grid import Box, EmptyBoxError, GridFunction, SummedTable, cell_averages, snap_bounds

__all__ = [
    "Weight",
    "ConstantWeight",
    "PowerRhoWeight",
    "PowerAbsWeight",
    "GridWeight",
    "NonIntegrableWeight",
    "ApReport",
    "DoublingResult",
    "parse_weight",
    "weight_measure",
    "ap_characteristic",
    "a1_characteristic",
    "doubling_constants",
    "power_ap_predicate",
    "dual_exponent",
    "SUBDIVISION_DEPTH",
]

SUBDIVISION_DEPTH = 12


class NonIntegrableWeight(ValueError):
    """A weight (or a power of it) is not integrable on the requested box."""


def dual_exponent(p: float) -> float:
    """``1 - p'`` with ``1/p + 1/p' = 1``, i.e. ``-1/(p - 1)``."""
    if p <= 1:
        raise ValueError("the dual exponent needs p > 1")
    return -1.0 / (p - 1.0)


class Weight:
    """Base class; subclasses provide :meth:`pointwise` and :attr:`spec`."""

    spec = "weight"

    def __init__(self):
        self._cache = {}

    def pointwise(self, points, power: float = 1.0) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def has_exact(self, n: int) -> bool:
        return False

    def exact_integral(self, lo, hi, power: float = 1.0) -> float:
        raise NotImplementedError(f"no closed form for {self.spec}")

    def cell_values(self, gf: GridFunction, power: float = 1.0, depth: int = SUBDIVISION_DEPTH) -> np.ndarray:
        """Per-cell values of ``w**power`` used by the quadrature backend."""
        key = (gf.domain, gf.shape, float(power), depth)
        if key not in self._cache:
            vals = self._cell_values(gf, power, depth)
            if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
                raise NonIntegrableWeight(f"{self.spec}**{power} is not finite and positive on the grid")
            vals.setflags(write=False)
            self._cache[key] = vals
        return self._cache[key]

    def _cell_values(self, gf, power, depth):
        return cell_averages(gf, lambda pts: self.pointwise(pts, power), depth=depth)

    def __repr__(self):
        return f"{type(self).__name__}({self.spec!r})"


class ConstantWeight(Weight):
    def __init__(self, c: float = 1.0):
        super().__init__()
        if not c > 0:
            raise ValueError("a constant weight must be positive")
        self.c = float(c)
        self.spec = f"const:{self.c!r}"

    def pointwise(self, points, power=1.0):
        points = np.atleast_2d(points)
        return np.full(points.shape[0], self.c ** power)

    def has_exact(self, n):
        return True

    def exact_integral(self, lo, hi, power=1.0):
        return self.c ** power * float(np.prod(np.asarray(hi) - np.asarray(lo)))

    def _cell_values(self, gf, power, depth):
        return np.full(gf.shape, self.c ** power)


class PowerRhoWeight(Weight):
    """``[x]_a ** alpha`` for the anisotropic quasi-norm ``[.]_a``."""

    def __init__(self, alpha: float, anisotropy):
        super().__init__()
        self.alpha = float(alpha)
        self.anisotropy = anisotropy if isinstance(anisotropy, Anisotropy) else Anisotropy(anisotropy)
        self.spec = f"powrho:{self.alpha!r}"

    def pointwise(self, points, power=1.0):
        rho = rho_quasi_norm(np.atleast_2d(points), self.anisotropy)
        with np.errstate(divide="ignore"):
            return np.power(rho, self.alpha * power)

    def has_exact(self, n):
        # in one dimension with a = (a1,), [x]_a = |x|**(1/a1)
        return n == 1

    def exact_integral(self, lo, hi, power=1.0):
        if self.anisotropy.n != 1:
            raise NotImplementedError("no closed form for powrho in n > 1")
        beta = self.alpha * power / self.anisotropy.a[0]
        return _power_integral(float(np.ravel(lo)[0]), float(np.ravel(hi)[0]), beta)


class PowerAbsWeight(Weight):
    """``|x| ** alpha`` on the line."""

    def __init__(self, alpha: float):
        super().__init__()
        self.alpha = float(alpha)
        self.spec = f"powabs:{self.alpha!r}"

    def pointwise(self, points, power=1.0):
        points = np.atleast_2d(points)
        if points.shape[1] != 1:
            raise ValueError("powabs weights are one-dimensional")
        with np.errstate(divide="ignore"):
            return np.power(np.abs(points[:, 0]), self.alpha * power)

    def has_exact(self, n):
        return n == 1

    def exact_integral(self, lo, hi, power=1.0):
        return _power_integral(float(np.ravel(lo)[0]), float(np.ravel(hi)[0]), self.alpha * power)


class GridWeight(Weight):
    """A weight given by positive samples on a grid."""

    def __init__(self, gf: GridFunction, path: str | None = None):
        super().__init__()
        if np.any(gf.values <= 0):
            raise ValueError("grid weights must be strictly positive")
        self.gf = gf
        self.spec = f"grid:{path}" if path else "grid"

    def pointwise(self, points, power=1.0):
        points = np.atleast_2d(points)
        idx = np.floor((points - np.asarray(self.gf.domain.lo)) / self.gf.cell_size).astype(int)
        idx = np.clip(idx, 0, np.asarray(self.gf.shape) - 1)
        return self.gf.values[tuple(idx.T)] ** power

    def _cell_values(self, gf, power, depth):
        if gf.shape != self.gf.shape or gf.domain != self.gf.domain:
            raise ValueError("a grid weight must share domain and shape with the functions it weights")
        return np.array(self.gf.values ** power)


def _power_integral(lo: float, hi: float, beta: float) -> float:
    """``int_lo^hi |x|**beta dx``."""
    if hi < lo:
        raise ValueError("empty interval")
    if beta <= -1 and lo <= 0.0 <= hi:
        raise NonIntegrableWeight(f"|x|**{beta} is not integrable on [{lo}, {hi}]")
    if beta == -1:
        # both endpoints on the same side of 0
        return abs(math.log(abs(hi)) - math.log(abs(lo)))

    def F(x):
        return math.copysign(abs(x) ** (beta + 1) / (beta + 1), x)

    return F(hi) - F(lo)


def parse_weight(spec: str, anisotropy=None) -> Weight:
    """Parse ``const:<c>``, ``powrho:<alpha>``, ``powabs:<alpha>`` or ``grid:<path>``."""
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    if not arg:
        raise ValueError(f"weight spec {spec!r} needs an argument")
    if kind == "const":
        return ConstantWeight(float(arg))
    if kind == "powabs":
        return PowerAbsWeight(float(arg))
    if kind == "powrho":
        if anisotropy is None:
            raise ValueError("powrho weights need an anisotropy")
        return PowerRhoWeight(float(arg), anisotropy)
    if kind == "grid":
        from .gridio import read_grid

        return GridWeight(read_grid(arg), path=arg)
    raise ValueError(f"unknown weight kind {kind!r}")


def _resolve_backend(w: Weight, n: int, backend: str) -> str:
    if backend == "auto":
        return "exact" if w.has_exact(n) else "quadrature"
    if backend not in ("exact", "quadrature"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "exact" and not w.has_exact(n):
        raise ValueError(f"{w.spec} has no exact backend in dimension {n}")
    return backend


def _clip(E: Parallelepiped, domain: Box | None):
    lo, hi = E.lo, E.hi
    if domain is not None:
        lo = np.maximum(lo, domain.lo)
        hi = np.minimum(hi, domain.hi)
        if np.any(hi <= lo):
            raise EmptyBoxError(f"box {E.to_dict()} misses the domain")
    return lo, hi


class _Quadrature:
    """Summed tables of per-cell weight powers on one grid."""

    def __init__(self, w: Weight, gf: GridFunction, depth: int = SUBDIVISION_DEPTH):
        self.w = w
        self.gf = gf
        self.depth = depth
        self._tables = {}

    def table(self, power: float = 1.0) -> SummedTable:
        if power not in self._tables:
            vals = self.w.cell_values(self.gf, power, self.depth)
            self._tables[power] = SummedTable(vals, self.gf.cell_volume)
        return self._tables[power]

    def sums(self, lo, hi, power: float = 1.0) -> np.ndarray:
        return self.table(power).range_sum(lo, hi)


def weight_measure(w: Weight, E: Parallelepiped, gf: GridFunction | None = None, backend: str = "auto",
                   domain: Box | None = None) -> float:
    """``w(E)``, with ``E`` clipped to the domain.

    Parameters
    ----------
    gf : GridFunction, optional
        Grid for the quadrature backend; also supplies the domain.
    backend : {"auto", "exact", "quadrature"}
    """
    n = E.anisotropy.n
    backend = _resolve_backend(w, n, backend)
    domain = gf.domain if (domain is None and gf is not None) else domain
    if backend == "exact":
        lo, hi = _clip(E, domain)
        return w.exact_integral(lo, hi)
    if gf is None:
        raise ValueError("the quadrature backend needs a grid")
    lo, hi = _snap(gf, E)
    return float(_Quadrature(w, gf).sums(lo, hi)) * gf.cell_volume


def _snap(gf: GridFunction, E: Parallelepiped):
    lo, hi = snap_bounds(gf, E.center, E.half_widths)
    if np.any(lo > hi):
        raise EmptyBoxError(f"no cell center inside box {E.to_dict()}")
    return lo, hi


@dataclass
class ApReport:
    """Result of an A_p (or A_1) characteristic scan over a family."""

    characteristic: float
    argmax: Parallelepiped | None
    local: np.ndarray = field(repr=False)
    p: float = 2.0
    backend: str = "quadrature"

    def to_dict(self) -> dict:
        return {
            "characteristic": float(self.characteristic),
            "argmax": None if self.argmax is None else self.argmax.to_dict(),
            "p": self.p,
            "backend": self.backend,
            "n_boxes": int(len(self.local)),
        }


def _local_ap_exact(w: Weight, F: BoxFamily, p: float, domain: Box | None) -> np.ndarray:
    sigma = dual_exponent(p)
    out = np.empty(len(F))
    for i, E in enumerate(F):
        lo, hi = _clip(E, domain)
        vol = float(np.prod(hi - lo))
        avg_w = w.exact_integral(lo, hi) / vol
        avg_s = w.exact_integral(lo, hi, sigma) / vol
        out[i] = avg_w * avg_s ** (p - 1.0)
    return out


def local_ap_values(w: Weight, p: float, F: BoxFamily, gf: GridFunction, quad: _Quadrature | None = None):
    """Per-box ``(avg w)(avg w**(1-p'))**(p-1)`` on snap sets, plus the bounds used."""
    quad = quad or _Quadrature(w, gf)
    lo, hi = F.bounds(gf)
    empty = np.any(lo > hi, axis=-1)
    if empty.any():
        raise EmptyBoxError(f"{int(empty.sum())} family boxes hold no cell center")
    count = np.prod(hi - lo + 1, axis=-1).astype(float)
    avg_w = quad.sums(lo, hi, 1.0) / count
    avg_s = quad.sums(lo, hi, dual_exponent(p)) / count
    return avg_w * avg_s ** (p - 1.0), (lo, hi)


def ap_characteristic(w: Weight, p: float, F: BoxFamily, gf: GridFunction | None = None,
                      backend: str = "auto", domain: Box | None = None) -> ApReport:
    """Max over ``F`` of ``(avg_E w)(avg_E w**(1-p'))**(p-1)``.

    Raises
    ------
    NonIntegrableWeight
        If ``w**(1-p')`` is not integrable on some box (exact backend) or
        not finite on the grid.
    """
    if p <= 1:
        raise ValueError("ap_characteristic needs p > 1; use a1_characteristic for p = 1")
    backend = _resolve_backend(w, F.anisotropy.n, backend)
    if backend == "exact":
        domain = gf.domain if (domain is None and gf is not None) else domain
        local = _local_ap_exact(w, F, p, domain)
    else:
        if gf is None:
            raise ValueError("the quadrature backend needs a grid")
        local, _ = local_ap_values(w, p, F, gf)
    i = int(np.argmax(local))
    return ApReport(float(local[i]), F.box(i), local, p=p, backend=backend)


def a1_characteristic(w: Weight, F: BoxFamily, gf: GridFunction, return_report: bool = False):
    """Discrete A_1 constant ``max_{E in F} max_{x in E} (avg_E w) / w(x)``."""
    quad = _Quadrature(w, gf)
    lo, hi = F.bounds(gf)
    empty = np.any(lo > hi, axis=-1)
    if empty.any():
        raise EmptyBoxError(f"{int(empty.sum())} family boxes hold no cell center")
    count = np.prod(hi - lo + 1, axis=-1).astype(float)
    avg = quad.sums(lo, hi) / count
    best = F.containing_max(gf, avg)
    wv = w.cell_values(gf)
    covered = np.isfinite(best)
    ratio = np.where(covered, best / wv, -np.inf)
    value = float(ratio.max())
    if not return_report:
        return value
    return value, np.unravel_index(int(np.argmax(ratio)), ratio.shape)


class DoublingResult(NamedTuple):
    D: float
    D1: float
    tested: int
    skipped: int
    argmax: int
    argmin: int


def doubling_ratios(w: Weight, F: BoxFamily, gf: GridFunction | None = None, backend: str = "auto",
                    domain: Box | None = None, lam: float = 2.0):
    """Ratios ``w(lam^a E) / w(E)`` for members whose dilation stays inside the domain.

    Returns ``(ratios, kept_mask)``; ``ratios`` is NaN where skipped.
    """
    n = F.anisotropy.n
    backend = _resolve_backend(w, n, backend)
    domain = gf.domain if (domain is None and gf is not None) else domain
    if domain is None:
        raise ValueError("doubling ratios need a domain")
    hw2 = (lam * F.scales)[:, None] ** F.anisotropy.array[None, :]
    keep = np.all((F.centers - hw2 >= np.asarray(domain.lo) - 1e-12)
                  & (F.centers + hw2 <= np.asarray(domain.hi) + 1e-12), axis=1)
    ratios = np.full(len(F), np.nan)
    if not keep.any():
        return ratios, keep
    if backend == "exact":
        for i in np.flatnonzero(keep):
            E = F.box(i)
            E2 = scale_parallelepiped(E, lam)
            lo, hi = _clip(E, domain)
            lo2, hi2 = _clip(E2, domain)
            ratios[i] = w.exact_integral(lo2, hi2) / w.exact_integral(lo, hi)
    else:
        if gf is None:
            raise ValueError("the quadrature backend needs a grid")
        quad = _Quadrature(w, gf)
        sub = F.subset(keep)
        lo, hi = sub.bounds(gf)
        lo2, hi2 = sub.dilated(lam).bounds(gf)
        ratios[keep] = quad.sums(lo2, hi2) / quad.sums(lo, hi)
    return ratios, keep


def doubling_constants(w: Weight, F: BoxFamily, gf: GridFunction | None = None, backend: str = "auto",
                       domain: Box | None = None, max_skip_fraction: float = 0.5) -> DoublingResult:
    """Doubling constant ``D`` and reverse-doubling constant ``D1`` over ``F``.

    ``D = max w(2^a E)/w(E)`` and ``D1 = min`` of the same ratio. Members
    whose doubled box leaves the domain are skipped; more than
    ``max_skip_fraction`` skipped raises ``ValueError``.
    """
    ratios, keep = doubling_ratios(w, F, gf, backend, domain)
    skipped = int((~keep).sum())
    if keep.sum() == 0 or skipped > max_skip_fraction * len(F):
        raise ValueError(f"{skipped} of {len(F)} doubling pairs leave the domain; family too coarse")
    r = np.where(keep, ratios, np.nan)
    i_max = int(np.nanargmax(r))
    i_min = int(np.nanargmin(r))
    return DoublingResult(float(r[i_max]), float(r[i_min]), int(keep.sum()), skipped, i_max, i_min)


def power_ap_predicate(alpha: float, a, p: float) -> bool:
    """Whether ``rho(x)**alpha`` belongs to A_p.

    ``-|a| < alpha < |a|(p-1)`` for ``p > 1`` and ``-|a| < alpha <= 0`` for ``p = 1``.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    a = a if isinstance(a, Anisotropy) else Anisotropy(a)
    tr = a.trace
    if p == 1:
        return -tr < alpha <= 0
    return -tr < alpha < tr * (p - 1)

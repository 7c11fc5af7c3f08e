"""Anisotropic quasi-norms, dilations and parallelepipeds.

Everything here works with a diagonal dilation group: a point ``x`` is
dilated by ``t`` to ``(t**a_1 x_1, ..., t**a_n x_n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Anisotropy",
    "Parallelepiped",
    "BracketError",
    "box_quasi_norm",
    "rho_quasi_norm",
    "dilate_point",
    "scale_parallelepiped",
    "lebesgue_measure",
]


class BracketError(ArithmeticError):
    """Raised when the quasi-norm root cannot be bracketed."""


@dataclass(frozen=True)
class Anisotropy:
    """Exponent vector ``a`` with every component strictly positive."""

    a: tuple

    def __init__(self, a):
        vals = tuple(float(v) for v in np.atleast_1d(np.asarray(a, dtype=float)))
        if not vals:
            raise ValueError("anisotropy needs at least one exponent")
        for v in vals:
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"anisotropy exponents must be positive and finite, got {vals}")
        object.__setattr__(self, "a", vals)

    @classmethod
    def isotropic(cls, n: int) -> "Anisotropy":
        return cls((1.0,) * n)

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def trace(self) -> float:
        # math.fsum keeps the sum exact to the last ulp
        return math.fsum(self.a)

    @property
    def a_max(self) -> float:
        return max(self.a)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.a, dtype=float)

    def __iter__(self):
        return iter(self.a)

    def __len__(self):
        return len(self.a)


def _as_anisotropy(a) -> Anisotropy:
    return a if isinstance(a, Anisotropy) else Anisotropy(a)


@dataclass(frozen=True)
class Parallelepiped:
    """The box ``E(center, t) = {y : |y_i - center_i| <= t**a_i}``."""

    center: tuple
    t: float
    anisotropy: Anisotropy = field(repr=False)

    def __init__(self, center, t, anisotropy):
        anisotropy = _as_anisotropy(anisotropy)
        c = tuple(float(v) for v in np.atleast_1d(np.asarray(center, dtype=float)))
        if len(c) != anisotropy.n:
            raise ValueError(f"center has dimension {len(c)}, anisotropy has {anisotropy.n}")
        t = float(t)
        if not (math.isfinite(t) and t > 0):
            raise ValueError(f"scale must be positive, got {t}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "anisotropy", anisotropy)

    @property
    def half_widths(self) -> np.ndarray:
        return self.t ** self.anisotropy.array

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.center) - self.half_widths

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.center) + self.half_widths

    def contains(self, x) -> np.ndarray:
        """Membership test; ``x`` may be a single point or an array of points."""
        x = np.asarray(x, dtype=float)
        return np.all(np.abs(x - np.asarray(self.center)) <= self.half_widths, axis=-1)

    def contains_box(self, other: "Parallelepiped") -> bool:
        return bool(np.all(self.lo <= other.lo) and np.all(other.hi <= self.hi))

    def to_dict(self) -> dict:
        return {"center": list(self.center), "t": self.t, "half_widths": self.half_widths.tolist()}


def box_quasi_norm(x, a) -> np.ndarray | float:
    """``|x|_a = max_i |x_i|**(1/a_i)``; accepts a point or an ``(..., n)`` array."""
    a = _as_anisotropy(a)
    x = np.asarray(x, dtype=float)
    out = np.max(np.abs(x) ** (1.0 / a.array), axis=-1)
    return float(out) if out.ndim == 0 else out


def _rho_residual(logx, mask, a, u):
    # sum_i x_i^2 t^(-2 a_i) - 1 evaluated in log space, t = exp(u)
    with np.errstate(over="ignore"):
        terms = np.where(mask, np.exp(2.0 * (logx - a * u[..., None])), 0.0)
    return terms.sum(axis=-1) - 1.0


def rho_quasi_norm(x, a, tol: float = 1e-12, max_iter: int = 200):
    """Positive root ``t`` of ``sum_i x_i**2 * t**(-2 a_i) = 1``.

    The map ``t -> sum_i x_i**2 t**(-2 a_i)`` is strictly decreasing, so the
    root is bracketed by doubling/halving from ``t0 = |x|_a`` and refined by
    bisection in ``log t``. ``x = 0`` maps to 0.

    Parameters
    ----------
    x : array_like, shape (n,) or (..., n)
    a : Anisotropy or sequence of float
    tol : float
        Bound on ``|sum_i x_i**2 t**(-2 a_i) - 1|`` at the returned root.
    max_iter : int
        Cap on both the bracketing and the bisection loops.

    Raises
    ------
    BracketError
        If no bracket is found within ``max_iter`` or the root overflows.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = _as_anisotropy(a)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != a.n:
        raise ValueError(f"points have dimension {x.shape[-1]}, anisotropy has {a.n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("rho_quasi_norm needs finite input")
    scalar = x.ndim == 1
    x = np.atleast_2d(x)
    av = a.array
    absx = np.abs(x)
    mask = absx > 0
    nonzero = mask.any(axis=-1)
    with np.errstate(divide="ignore"):
        logx = np.where(mask, np.log(np.where(mask, absx, 1.0)), 0.0)
        # log |x|_a; the residual there is >= 0 since the largest term is 1
        u0 = np.where(mask, logx / av, -np.inf).max(axis=-1)
    u0 = np.where(nonzero, u0, 0.0)

    lo = u0.copy()
    hi = u0.copy()
    ln2 = math.log(2.0)
    r_lo = _rho_residual(logx, mask, av, lo)
    r_hi = r_lo.copy()
    for _ in range(max_iter):
        need = nonzero & (r_hi > 0)
        if not need.any():
            break
        hi = np.where(need, hi + ln2, hi)
        r_hi = _rho_residual(logx, mask, av, hi)
    else:
        raise BracketError("could not bracket the quasi-norm root")
    for _ in range(max_iter):
        need = nonzero & (r_lo < 0)
        if not need.any():
            break
        lo = np.where(need, lo - ln2, lo)
        r_lo = _rho_residual(logx, mask, av, lo)
    else:
        raise BracketError("could not bracket the quasi-norm root")
    if not (np.all(np.isfinite(r_lo[nonzero])) and np.all(np.isfinite(r_hi[nonzero]))):
        raise BracketError("quasi-norm residual overflowed while bracketing")

    # bisect to full precision; tol is the acceptance bound on the residual
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        active = nonzero & (mid != lo) & (mid != hi)
        if not active.any():
            break
        r = _rho_residual(logx, mask, av, mid)
        lo = np.where(active & (r > 0), mid, lo)
        hi = np.where(active & (r <= 0), mid, hi)
    r_lo = np.abs(_rho_residual(logx, mask, av, lo))
    r_hi = np.abs(_rho_residual(logx, mask, av, hi))
    root = np.where(r_lo <= r_hi, lo, hi)
    resid = np.minimum(r_lo, r_hi)
    if np.any(nonzero & ~(resid <= tol)):
        raise BracketError("bisection did not reach the residual tolerance")
    if np.any(nonzero & (root > math.log(np.finfo(float).max))):
        raise BracketError("the quasi-norm exceeds the floating-point range")
    out = np.where(nonzero, np.exp(root), 0.0)
    return float(out[0]) if scalar else out


def dilate_point(x, a, t: float) -> np.ndarray:
    """Apply the dilation ``A_t``: ``(t**a_1 x_1, ..., t**a_n x_n)``."""
    if t <= 0:
        raise ValueError("dilation parameter must be positive")
    a = _as_anisotropy(a)
    return np.asarray(x, dtype=float) * float(t) ** a.array


def scale_parallelepiped(E: Parallelepiped, lam: float) -> Parallelepiped:
    """``lam^a E``: same center, scale ``lam * t``."""
    if lam <= 0:
        raise ValueError("scale factor must be positive")
    return Parallelepiped(E.center, lam * E.t, E.anisotropy)


def lebesgue_measure(E: Parallelepiped, a=None) -> float:
    """``|E(x, t)| = 2**n * t**|a|``."""
    a = E.anisotropy if a is None else _as_anisotropy(a)
    return 2.0 ** a.n * E.t ** a.trace

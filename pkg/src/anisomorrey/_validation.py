"""Input checks shared by the estimator wrappers."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .geometry import Anisotropy
from .grid import Box


def check_domain(domain) -> Box:
    """Accept a :class:`Box`, ``"lo:hi[,lo:hi]"`` or a sequence of ``(lo, hi)`` pairs."""
    if isinstance(domain, Box):
        return domain
    if isinstance(domain, str):
        return Box.from_intervals([tuple(float(v) for v in part.split(":")) for part in domain.split(",")])
    return Box.from_intervals([tuple(float(v) for v in pair) for pair in domain])


def check_shape(shape, n: int) -> tuple:
    shape = tuple(int(s) for s in np.atleast_1d(shape))
    if len(shape) != n or any(s < 1 for s in shape):
        raise ValueError(f"grid shape {shape} does not fit a {n}-dimensional domain")
    return shape


def check_anisotropy(a, n: int) -> Anisotropy:
    a = Anisotropy.isotropic(n) if a is None else (a if isinstance(a, Anisotropy) else Anisotropy(a))
    if a.n != n:
        raise ValueError(f"anisotropy has {a.n} exponents for a {n}-dimensional domain")
    return a


def check_grid_rows(X, shape) -> np.ndarray:
    """Validate a 2-D array whose rows are flattened (row-major) grid functions."""
    X = check_array(X, dtype=np.float64, ensure_all_finite=True)
    size = int(np.prod(shape))
    if X.shape[1] != size:
        raise ValueError(f"rows hold {X.shape[1]} values; the grid {tuple(shape)} needs {size}")
    return X

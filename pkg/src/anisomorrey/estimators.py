"""scikit-learn style wrappers.

Each row of ``X`` is one grid function on a fixed domain and grid shape,
flattened in row-major order. ``fit`` only validates the configuration and
builds the scale ladder and box family; ``transform`` applies the operator
row by row.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_anisotropy, check_domain, check_grid_rows, check_shape
from .families import BoxFamily, ScaleLadder
from .grid import GridFunction
from .norms import MorreyParams, morrey_norm
from .operators import family_maximal, maximal, sharp_maximal
from .weights import parse_weight

__all__ = ["AnisotropicMaximal", "WeightedMaximal", "SharpMaximal", "MorreyNorm"]


class _GridTransformer(TransformerMixin, BaseEstimator):
    """Shared grid bookkeeping; subclasses implement ``_apply(gf)``."""

    def _setup(self, X):
        self.domain_ = check_domain(self.domain)
        self.shape_ = check_shape(self.shape, self.domain_.n)
        self.anisotropy_ = check_anisotropy(self.anisotropy, self.domain_.n)
        X = check_grid_rows(X, self.shape_)
        self.n_features_in_ = X.shape[1]
        self.grid_ = GridFunction.zeros(self.domain_, self.shape_)
        return X

    def fit(self, X, y=None):
        """Validate ``X`` against the grid and precompute ladder/family.

        Parameters
        ----------
        X : array-like of shape (n_samples, prod(shape))
        y : ignored
        """
        self._setup(X)
        self._prepare()
        return self

    def _prepare(self):
        pass

    def transform(self, X):
        check_is_fitted(self, "grid_")
        X = check_grid_rows(X, self.shape_)
        rows = [self._apply(self.grid_.with_values(x.reshape(self.shape_))) for x in X]
        return np.vstack(rows)


class AnisotropicMaximal(_GridTransformer):
    """Anisotropic maximal function of every row.

    Parameters
    ----------
    domain : str or sequence of (lo, hi)
    shape : int or tuple of int
    anisotropy : sequence of float, optional
        Defaults to all ones.
    ladder_q : float
        Ratio of the centered scale ladder.
    uncentered : bool
        Sup over lattice-family boxes containing each cell instead.
    stride, q : family parameters used when ``uncentered``.
    """

    def __init__(self, domain="-1:1", shape=1024, anisotropy=None, ladder_q=2.0 ** 0.25, uncentered=False,
                 stride=4, q=2.0):
        self.domain = domain
        self.shape = shape
        self.anisotropy = anisotropy
        self.ladder_q = ladder_q
        self.uncentered = uncentered
        self.stride = stride
        self.q = q

    def _prepare(self):
        self.ladder_ = ScaleLadder.for_grid(self.grid_, self.anisotropy_, q=self.ladder_q)
        self.family_ = (BoxFamily.lattice_family(self.grid_, self.anisotropy_, stride=self.stride, q=self.q)
                        if self.uncentered else None)

    def _apply(self, gf):
        if self.family_ is not None:
            return family_maximal(gf, self.family_).values.ravel()
        return maximal(gf, self.anisotropy_, self.ladder_).values.ravel()


class WeightedMaximal(_GridTransformer):
    """Uncentered maximal function in the measure ``w dx`` over a lattice family."""

    def __init__(self, domain="-1:1", shape=1024, anisotropy=None, weight="const:1", stride=4, q=2.0,
                 containing=True):
        self.domain = domain
        self.shape = shape
        self.anisotropy = anisotropy
        self.weight = weight
        self.stride = stride
        self.q = q
        self.containing = containing

    def _prepare(self):
        self.weight_ = parse_weight(self.weight, self.anisotropy_)
        self.family_ = BoxFamily.lattice_family(self.grid_, self.anisotropy_, stride=self.stride, q=self.q)

    def _apply(self, gf):
        return family_maximal(gf, self.family_, w=self.weight_, containing=self.containing).values.ravel()


class SharpMaximal(_GridTransformer):
    """Sharp maximal function; ``mode`` is ``"mean"`` or ``"literal"``."""

    def __init__(self, domain="-1:1", shape=1024, anisotropy=None, ladder_q=2.0 ** 0.25, mode="mean"):
        self.domain = domain
        self.shape = shape
        self.anisotropy = anisotropy
        self.ladder_q = ladder_q
        self.mode = mode

    def _prepare(self):
        if self.mode not in ("mean", "literal"):
            raise ValueError(f"unknown mode {self.mode!r}")
        self.ladder_ = ScaleLadder.for_grid(self.grid_, self.anisotropy_, q=self.ladder_q)

    def _apply(self, gf):
        return sharp_maximal(gf, self.anisotropy_, self.ladder_, mode=self.mode).values.ravel()


class MorreyNorm(_GridTransformer):
    """Weighted anisotropic Morrey norm of every row; ``transform`` returns shape ``(n, 1)``."""

    def __init__(self, domain="-1:1", shape=1024, anisotropy=None, weight="const:1", p=1.0, kappa=0.0,
                 stride=4, q=2.0):
        self.domain = domain
        self.shape = shape
        self.anisotropy = anisotropy
        self.weight = weight
        self.p = p
        self.kappa = kappa
        self.stride = stride
        self.q = q

    def _prepare(self):
        self.params_ = MorreyParams(float(self.p), float(self.kappa))
        self.weight_ = parse_weight(self.weight, self.anisotropy_)
        self.family_ = BoxFamily.lattice_family(self.grid_, self.anisotropy_, stride=self.stride, q=self.q)

    def _apply(self, gf):
        return np.array([morrey_norm(gf, self.weight_, self.params_, self.family_, refine=False).value])

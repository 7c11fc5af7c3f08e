"""A tiny closed term language for test functions, and grid sampling.

Terms evaluate on arrays of points of shape ``(m, n)``::

    Const(c) | PowRho(alpha) | PowAbs(alpha, axis) | Indicator(box)
    | Sum(terms) | Product(terms) | Scale(c, term) | RandomField(seed, modes)

The text form used on the command line is parsed by :func:`parse_expr`::

    const(3)  powabs(-0.5)  powrho(1.5)  ind(0:1)  ind(-1:1,0:2)  ind(0,1)
    scale(2, ind(0:1))  rand(7)  "ind(0,1)*powabs(-0.5) + const(1)"
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .geometry import Anisotropy, rho_quasi_norm
from .grid import Box, GridFunction

__all__ = [
    "Expr",
    "Const",
    "PowRho",
    "PowAbs",
    "Indicator",
    "Sum",
    "Product",
    "Scale",
    "RandomField",
    "parse_expr",
    "sample",
    "SingularSampleError",
]


class SingularSampleError(ValueError):
    """An expression evaluated to a non-finite value at a cell center."""

    def __init__(self, point):
        self.point = tuple(float(v) for v in point)
        super().__init__(f"expression is not finite at cell center {self.point}")


class Expr:
    def __call__(self, points, anisotropy: Anisotropy | None = None) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if anisotropy is None:
            anisotropy = Anisotropy.isotropic(points.shape[-1])
        return self.evaluate(points, anisotropy)

    def evaluate(self, points, anisotropy):  # pragma: no cover - abstract
        raise NotImplementedError

    def __add__(self, other):
        return Sum((self, other))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Scale(float(other), self)
        return Product((self, other))

    __rmul__ = __mul__

    @property
    def singular_at_origin(self) -> bool:
        return False


@dataclass(frozen=True)
class Const(Expr):
    c: float

    def evaluate(self, points, anisotropy):
        return np.full(points.shape[0], float(self.c))

    def __str__(self):
        return f"const({self.c!r})"


@dataclass(frozen=True)
class PowRho(Expr):
    """``[x]_a ** alpha``."""

    alpha: float

    def evaluate(self, points, anisotropy):
        rho = rho_quasi_norm(points, anisotropy)
        with np.errstate(divide="ignore"):
            return np.power(rho, self.alpha)

    @property
    def singular_at_origin(self):
        return self.alpha < 0

    def __str__(self):
        return f"powrho({self.alpha!r})"


@dataclass(frozen=True)
class PowAbs(Expr):
    """``|x_axis| ** alpha``."""

    alpha: float
    axis: int = 0

    def evaluate(self, points, anisotropy):
        with np.errstate(divide="ignore"):
            return np.power(np.abs(points[:, self.axis]), self.alpha)

    @property
    def singular_at_origin(self):
        return self.alpha < 0

    def __str__(self):
        return f"powabs({self.alpha!r})" if self.axis == 0 else f"powabs({self.alpha!r},{self.axis})"


@dataclass(frozen=True)
class Indicator(Expr):
    """Indicator of the closed box ``box``."""

    box: Box

    def evaluate(self, points, anisotropy):
        lo = np.asarray(self.box.lo)
        hi = np.asarray(self.box.hi)
        return np.all((points >= lo) & (points <= hi), axis=1).astype(float)

    def __str__(self):
        return f"ind({self.box})"


@dataclass(frozen=True)
class Sum(Expr):
    terms: tuple

    def evaluate(self, points, anisotropy):
        out = np.zeros(points.shape[0])
        for t in self.terms:
            out = out + t.evaluate(points, anisotropy)
        return out

    @property
    def singular_at_origin(self):
        return any(t.singular_at_origin for t in self.terms)

    def __str__(self):
        return " + ".join(str(t) for t in self.terms)


@dataclass(frozen=True)
class Product(Expr):
    terms: tuple

    def evaluate(self, points, anisotropy):
        out = np.ones(points.shape[0])
        for t in self.terms:
            out = out * t.evaluate(points, anisotropy)
        return out

    @property
    def singular_at_origin(self):
        return any(t.singular_at_origin for t in self.terms)

    def __str__(self):
        return "*".join(f"({t})" if isinstance(t, Sum) else str(t) for t in self.terms)


@dataclass(frozen=True)
class Scale(Expr):
    c: float
    term: Expr

    def evaluate(self, points, anisotropy):
        return float(self.c) * self.term.evaluate(points, anisotropy)

    @property
    def singular_at_origin(self):
        return self.term.singular_at_origin

    def __str__(self):
        return f"scale({self.c!r}, {self.term})"


@dataclass(frozen=True)
class RandomField(Expr):
    """Smooth random field ``sum_k c_k cos(omega_k . x + phi_k)``.

    The coefficients depend only on ``seed``, so the same field can be
    sampled at every resolution of a refinement study.
    """

    seed: int
    modes: int = 8
    bandwidth: float = 4.0

    def _params(self, n):
        rng = np.random.default_rng(self.seed)
        omega = rng.normal(0.0, self.bandwidth, size=(self.modes, n))
        phase = rng.uniform(0.0, 2 * np.pi, size=self.modes)
        coef = rng.normal(0.0, 1.0, size=self.modes) / np.sqrt(self.modes)
        return omega, phase, coef

    def evaluate(self, points, anisotropy):
        omega, phase, coef = self._params(points.shape[1])
        return np.cos(points @ omega.T + phase) @ coef

    def __str__(self):
        return f"rand({self.seed})" if self.modes == 8 else f"rand({self.seed},{self.modes})"


def sample(expr: Expr, domain: Box, shape, anisotropy=None) -> GridFunction:
    """Evaluate ``expr`` at every cell center; the grid keeps ``expr`` as its source.

    Raises
    ------
    SingularSampleError
        If a sample is not finite (typically a singular power at a center).
    """
    shape = tuple(int(s) for s in np.atleast_1d(shape))
    if len(shape) != domain.n or any(s <= 0 for s in shape):
        raise ValueError(f"bad grid shape {shape} for a {domain.n}-dimensional domain")
    anisotropy = Anisotropy.isotropic(domain.n) if anisotropy is None else anisotropy
    proto = GridFunction.zeros(domain, shape)
    pts = proto.centers().reshape(-1, domain.n)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.asarray(expr.evaluate(pts, anisotropy), dtype=float)
    bad = ~np.isfinite(vals)
    if bad.any():
        raise SingularSampleError(pts[int(np.flatnonzero(bad)[0])])
    return GridFunction(domain, vals.reshape(shape), source=(expr, anisotropy))


_TOKEN = re.compile(r"\s*(?:(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[()+*,:]))")


class _Parser:
    def __init__(self, text):
        self.tokens = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse function spec at {text[pos:]!r}")
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind)))
            pos = m.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise ValueError(f"expected {value!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def number(self):
        kind, val = self.take()
        if kind != "num":
            raise ValueError(f"expected a number, got {val!r}")
        return float(val)

    def expr(self):
        terms = [self.product()]
        while self.peek()[1] == "+":
            self.take("+")
            terms.append(self.product())
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def product(self):
        terms = [self.atom()]
        while self.peek()[1] == "*":
            self.take("*")
            terms.append(self.atom())
        return terms[0] if len(terms) == 1 else Product(tuple(terms))

    def atom(self):
        kind, val = self.peek()
        if val == "(":
            self.take("(")
            e = self.expr()
            self.take(")")
            return e
        if kind == "num":
            return Const(self.number())
        if kind != "name":
            raise ValueError(f"unexpected token {val!r}")
        self.take()
        name = val.lower()
        self.take("(")
        if name == "const":
            out = Const(self.number())
        elif name == "powabs":
            alpha = self.number()
            axis = 0
            if self.peek()[1] == ",":
                self.take(",")
                axis = int(self.number())
            out = PowAbs(alpha, axis)
        elif name == "powrho":
            out = PowRho(self.number())
        elif name == "ind":
            out = Indicator(self._intervals())
        elif name == "scale":
            c = self.number()
            if self.peek()[1] == ",":
                self.take(",")
                out = Scale(c, self.expr())
            else:
                out = Const(c)
        elif name == "rand":
            seed = int(self.number())
            modes = 8
            if self.peek()[1] == ",":
                self.take(",")
                modes = int(self.number())
            out = RandomField(seed, modes)
        else:
            raise ValueError(f"unknown function {val!r}")
        self.take(")")
        return out

    def _intervals(self):
        nums = [self.number()]
        seps = []
        while self.peek()[1] in (",", ":"):
            seps.append(self.take()[1])
            nums.append(self.number())
        if ":" not in seps:
            # ind(lo,hi) is the 1-D shorthand
            if len(nums) != 2:
                raise ValueError("ind() takes lo:hi pairs, or lo,hi in one dimension")
            return Box([nums[0]], [nums[1]])
        if len(nums) % 2 or seps[0::2] != [":"] * (len(nums) // 2) or any(s != "," for s in seps[1::2]):
            raise ValueError("ind() intervals must be written lo:hi[,lo:hi...]")
        return Box(nums[0::2], nums[1::2])


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    if p.peek()[0] is not None:
        raise ValueError(f"trailing input in function spec: {p.peek()[1]!r}")
    return e

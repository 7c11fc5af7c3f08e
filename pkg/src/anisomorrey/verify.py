"""Inequality harness.

Every check returns a :class:`~anisomorrey.report.CheckReport`. Discrete
inequalities that hold by construction on snap sets (Hölder, Jensen,
Chebyshev, sublinearity) are asserted and fail on any violation beyond
``1e-10``. Boundedness statements with unspecified constants are measured
on a sequence of refined grids and reported with their history.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expr import Expr, Indicator, PowAbs, Product, parse_expr, sample
from .families import BoxFamily, ScaleLadder
from .geometry import Anisotropy, Parallelepiped, box_quasi_norm, dilate_point, rho_quasi_norm, scale_parallelepiped
from .grid import Box, GridFunction, SummedTable
from .norms import MorreyParams, lp_norm, morrey_norm, weak_lp_norm
from .operators import family_maximal, maximal, maximal_r, weighted_maximal
from .report import ESTIMATED, EXACT_PASS, FAILED, CheckReport
from .weights import (
    ConstantWeight,
    PowerAbsWeight,
    PowerRhoWeight,
    Weight,
    _Quadrature,
    _clip,
    _resolve_backend,
    a1_characteristic,
    ap_characteristic,
    doubling_constants,
    doubling_ratios,
    local_ap_values,
    power_ap_predicate,
)

__all__ = [
    "TOL",
    "Discretization",
    "check_dilation_bound",
    "check_maximal_bound",
    "check_ap_jensen",
    "check_chebyshev",
    "check_sublinearity",
    "check_mr_monotone",
    "check_reverse_doubling",
    "estimate_operator_norm",
    "check_weak_morrey",
    "fefferman_stein_constant",
    "morrey_not_lebesgue",
    "rho_equivalence_scan",
    "ap_refinement_scan",
]

TOL = 1e-10


def _aniso(a) -> Anisotropy:
    return a if isinstance(a, Anisotropy) else Anisotropy(a)


@dataclass(frozen=True)
class Discretization:
    """A refinement sequence: one grid, box family and ladder per shape.

    The family keeps its stride in cells, so refining the grid also halves
    the center spacing and the smallest scale.
    """

    domain: Box
    shapes: tuple
    anisotropy: Anisotropy
    stride: int = 4
    q: float = 2.0
    ladder_q: float = 2.0 ** 0.25

    def __init__(self, domain, shapes, anisotropy, stride=4, q=2.0, ladder_q=2.0 ** 0.25):
        if isinstance(domain, str):
            domain = Box.from_intervals([tuple(float(v) for v in part.split(":")) for part in domain.split(",")])
        shapes = tuple(tuple(int(s) for s in np.atleast_1d(sh)) for sh in shapes)
        if not shapes:
            raise ValueError("at least one grid shape is required")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "shapes", shapes)
        object.__setattr__(self, "anisotropy", _aniso(anisotropy))
        object.__setattr__(self, "stride", int(stride))
        object.__setattr__(self, "q", float(q))
        object.__setattr__(self, "ladder_q", float(ladder_q))

    def grid(self, shape) -> GridFunction:
        return GridFunction.zeros(self.domain, shape)

    def family(self, gf: GridFunction) -> BoxFamily:
        return BoxFamily.lattice_family(gf, self.anisotropy, stride=self.stride, q=self.q)

    def ladder(self, gf: GridFunction) -> ScaleLadder:
        return ScaleLadder.for_grid(gf, self.anisotropy, q=self.ladder_q)

    def levels(self):
        for shape in self.shapes:
            gf = self.grid(shape)
            yield gf, self.family(gf), self.ladder(gf)

    def to_dict(self) -> dict:
        return {
            "domain": str(self.domain),
            "shapes": [list(s) for s in self.shapes],
            "anisotropy": list(self.anisotropy.a),
            "stride": self.stride,
            "q": self.q,
            "ladder_q": self.ladder_q,
        }


def _expr(f) -> Expr:
    return parse_expr(f) if isinstance(f, str) else f


def _cell_witness(gf: GridFunction, idx) -> dict:
    idx = tuple(int(i) for i in idx)
    return {"cell": list(idx), "x": gf.point(idx).tolist()}


# ---------------------------------------------------------------------------
# asserted inequalities


def check_dilation_bound(w: Weight, p: float, F: BoxFamily, lambdas, gf: GridFunction | None = None,
                   backend: str = "auto", domain: Box | None = None, tol: float = TOL) -> CheckReport:
    """Dilation bound ``w(lam^a E) <= lam**(n p) [w]_{A_p} w(E)``.

    The characteristic is taken over ``F`` together with the dilated boxes.
    The same ratio against ``lam**(|a| p)`` is reported alongside.
    """
    if p <= 1:
        raise ValueError("check_dilation_bound needs p > 1")
    a = F.anisotropy
    n = a.n
    backend = _resolve_backend(w, n, backend)
    domain = gf.domain if (domain is None and gf is not None) else domain
    lambdas = [float(v) for v in np.atleast_1d(lambdas)]
    if any(v <= 0 for v in lambdas):
        raise ValueError("dilation factors must be positive")

    def measures(fam):
        if backend == "exact":
            return np.array([w.exact_integral(*_clip(E, domain)) for E in fam])
        lo, hi = fam.bounds(gf)
        if np.any(lo > hi):
            raise ValueError("every box must hold a cell center")
        return _Quadrature(w, gf).sums(lo, hi) * gf.cell_volume

    fams, pairs = [F], []
    for lam in lambdas:
        Fl = F.dilated(lam)
        if domain is not None:
            hit = np.all((Fl.centers + Fl.half_widths > domain.lo) & (Fl.centers - Fl.half_widths < domain.hi), axis=1)
            Fl = Fl.subset(hit)
        else:
            hit = np.ones(len(F), bool)
        fams.append(Fl)
        pairs.append((lam, hit, Fl))
    union = fams[0]
    for extra in fams[1:]:
        union = union.union(extra)
    ap = ap_characteristic(w, p, union, gf=gf, backend=backend, domain=domain).characteristic

    wE = measures(F)
    worst, worst_aniso, witness, rows = 0.0, 0.0, {}, []
    for lam, hit, Fl in pairs:
        wl = measures(Fl)
        base = wE[hit]
        ratio = wl / (lam ** (n * p) * ap * base)
        ratio_aniso = wl / (lam ** (a.trace * p) * ap * base)
        i = int(np.argmax(ratio))
        rows.append({"lambda": lam, "worst_ratio": float(ratio[i]), "tested": int(hit.sum())})
        worst_aniso = max(worst_aniso, float(ratio_aniso.max()))
        if ratio[i] >= worst:
            worst = float(ratio[i])
            witness = {"E": F.box(int(np.flatnonzero(hit)[i])).to_dict(), "lambda": lam,
                       "w_lamE": float(wl[i]), "w_E": float(base[i])}
    status = EXACT_PASS if worst <= 1.0 + tol else FAILED
    return CheckReport(
        "dilation-bound", status, worst, witness,
        config={"weight": w.spec, "p": p, "lambdas": lambdas, "backend": backend, "family": F.to_dict()},
        details={"characteristic": ap, "per_lambda": rows, "worst_ratio_trace_form": worst_aniso},
    )


def check_maximal_bound(f: GridFunction, w: Weight, p: float, F: BoxFamily, tol: float = TOL) -> CheckReport:
    """Pointwise ``Mf <= [w]_{A_p}**(1/p) (M_w |f|**p)**(1/p)`` with matched families.

    ``p = 1`` uses the discrete A_1 constant, ``max_E (avg_E w) / min_E w``.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    lhs = family_maximal(f, F).values
    g = f.with_values(np.abs(f.values) ** p)
    mw = weighted_maximal(g, w, F).values
    if p == 1:
        const = a1_characteristic(w, F, f)
        rhs = const * mw
    else:
        const = ap_characteristic(w, p, F, gf=f, backend="quadrature").characteristic
        rhs = const ** (1.0 / p) * mw ** (1.0 / p)
    excess = lhs - rhs
    scale = np.maximum(np.abs(rhs), 1.0)
    worst_idx = np.unravel_index(int(np.argmax(excess / scale)), excess.shape)
    ok = bool(np.all(excess <= tol * scale))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
    witness = _cell_witness(f, worst_idx)
    witness.update(lhs=float(lhs[worst_idx]), rhs=float(rhs[worst_idx]))
    return CheckReport(
        "maximal-bound", EXACT_PASS if ok else FAILED, float(ratio.max()), witness,
        config={"weight": w.spec, "p": p, "shape": list(f.shape), "family": F.to_dict()},
        details={"characteristic": float(const)},
    )


def check_ap_jensen(w: Weight, p: float, F: BoxFamily, gf: GridFunction, tol: float = TOL) -> CheckReport:
    """Every local A_p quantity on the grid is at least 1."""
    local, _ = local_ap_values(w, p, F, gf)
    i = int(np.argmin(local))
    ok = bool(local[i] >= 1.0 - tol)
    return CheckReport(
        "jensen", EXACT_PASS if ok else FAILED, float(local[i]), {"E": F.box(i).to_dict(), "local": float(local[i])},
        config={"weight": w.spec, "p": p, "shape": list(gf.shape), "family": F.to_dict()},
    )


def check_chebyshev(f: GridFunction, w: Weight | None, p: float, tol: float = TOL) -> CheckReport:
    """``||f||_{L_{p,oo}(w)} <= ||f||_{L_p(w)}`` on the grid."""
    weak = weak_lp_norm(f, w, p)
    strong = lp_norm(f, w, p, refine=False)
    ok = weak <= strong * (1 + tol) + tol
    return CheckReport(
        "chebyshev", EXACT_PASS if ok else FAILED, weak / strong if strong > 0 else 0.0,
        {"weak": weak, "strong": strong},
        config={"weight": "const:1.0" if w is None else w.spec, "p": p, "shape": list(f.shape)},
    )


def check_sublinearity(f: GridFunction, g: GridFunction, a, ladder: ScaleLadder | None = None,
                       c: float = -2.5, tol: float = TOL) -> CheckReport:
    """``M(f + g) <= Mf + Mg`` and ``M(c f) = |c| Mf`` pointwise."""
    a = _aniso(a)
    mf, mg = maximal(f, a, ladder).values, maximal(g, a, ladder).values
    mfg = maximal(f.with_values(f.values + g.values), a, ladder).values
    mcf = maximal(f.with_values(c * f.values), a, ladder).values
    scale = np.maximum(mf + mg, 1.0)
    excess = (mfg - mf - mg) / scale
    homog = np.abs(mcf - abs(c) * mf) / np.maximum(abs(c) * mf, 1.0)
    i = np.unravel_index(int(np.argmax(excess)), excess.shape)
    ok = bool(excess.max() <= tol and homog.max() <= tol)
    witness = _cell_witness(f, i)
    witness.update(sum_excess=float(excess[i]), homogeneity_error=float(homog.max()))
    return CheckReport("sublinearity", EXACT_PASS if ok else FAILED, float(excess.max()), witness,
                       config={"anisotropy": list(a.a), "shape": list(f.shape), "c": c})


def check_mr_monotone(f: GridFunction, rs, a, ladder: ScaleLadder | None = None, tol: float = TOL) -> CheckReport:
    """``M_r f <= M_s f`` pointwise whenever ``r < s``."""
    a = _aniso(a)
    rs = sorted(float(r) for r in rs)
    fields = [maximal_r(f, r, a, ladder).values for r in rs]
    worst, witness = -np.inf, {}
    for (r, lo), (s, hi) in zip(zip(rs, fields), zip(rs[1:], fields[1:])):
        excess = (lo - hi) / np.maximum(hi, 1.0)
        i = np.unravel_index(int(np.argmax(excess)), excess.shape)
        if excess[i] > worst:
            worst = float(excess[i])
            witness = _cell_witness(f, i)
            witness.update(r=r, s=s, M_r=float(lo[i]), M_s=float(hi[i]))
    status = EXACT_PASS if worst <= tol else FAILED
    return CheckReport("mr-monotone", status, worst, witness,
                       config={"rs": rs, "anisotropy": list(a.a), "shape": list(f.shape)})


def _auxiliary_boxes(F: BoxFamily) -> BoxFamily:
    """A box ``R`` inside ``2^a E`` minus ``E`` for every member ``E``.

    ``R`` sits just beyond ``E`` along the first axis, with scale
    ``c t`` where ``c`` keeps ``R`` within ``2^a E`` on every axis.
    """
    a = F.anisotropy.array
    c = float(np.min(((2.0 ** a - 1.0) / 2.0) ** (1.0 / a)))
    s = c * F.scales
    hw = F.half_widths
    centers = F.centers.copy()
    centers[:, 0] += hw[:, 0] + s ** a[0]
    return BoxFamily(F.anisotropy, centers, s)


def check_reverse_doubling(w: Weight, F: BoxFamily, gf: GridFunction | None = None, backend: str = "auto",
                           domain: Box | None = None) -> CheckReport:
    """Reverse doubling ``min_E w(2^a E)/w(E) = 1 + delta`` with ``delta > 0``.

    ``D`` is measured over ``F`` plus the auxiliary boxes ``R`` and
    ``5^a R``; whether ``delta >= D**-3`` is reported, not asserted.

    Raises
    ------
    ValueError
        If more than half of the doubling pairs of ``F`` leave the domain.
    """
    domain = gf.domain if (domain is None and gf is not None) else domain
    base = doubling_constants(w, F, gf, backend, domain)
    R = _auxiliary_boxes(F)
    plus = F.union(R).union(R.dilated(5.0))
    ratios, keep = doubling_ratios(w, plus, gf, backend, domain)
    D = float(np.nanmax(np.where(keep, ratios, np.nan)))
    D = max(D, base.D)
    delta = base.D1 - 1.0

    # the covering step of the argument: E and R are disjoint inside 2^a E
    ok_r = []
    for i in range(len(F)):
        E = F.box(i)
        E2 = scale_parallelepiped(E, 2.0)
        if domain is not None and not domain.contains_box(E2):
            continue
        m = [_measure(w, B, gf, backend, domain) for B in (E, R.box(i), E2)]
        ok_r.append(m[0] + m[1] <= m[2] * (1 + TOL))
    status = EXACT_PASS if delta > 0 else FAILED
    witness = {"E": F.box(base.argmin).to_dict(), "ratio": base.D1}
    return CheckReport(
        "reverse-doubling", status, base.D1, witness,
        config={"weight": w.spec, "backend": _resolve_backend(w, F.anisotropy.n, backend), "family": F.to_dict()},
        details={
            "delta": delta,
            "D_family": base.D,
            "D_extended": D,
            "delta_ge_D_minus_3": bool(delta >= D ** -3),
            "disjoint_covering_ok": bool(all(ok_r)) if ok_r else None,
            "tested": base.tested,
            "skipped": base.skipped,
        },
    )


def _measure(w, E, gf, backend, domain):
    backend = _resolve_backend(w, E.anisotropy.n, backend)
    if backend == "exact":
        return w.exact_integral(*_clip(E, domain))
    lo, hi = BoxFamily.explicit([E]).bounds(gf)
    return float(_Quadrature(w, gf).sums(lo, hi)[0]) * gf.cell_volume


def rho_equivalence_scan(a, samples: int = 1000, seed: int = 0, tol: float = 1e-8) -> CheckReport:
    """Range of ``[x]_a / |x|_a`` on the shell ``|x|_a = 1`` plus dilation invariance."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    a = _aniso(a)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(samples, a.n))
    axis = rng.integers(0, a.n, size=samples)
    x[np.arange(samples), axis] = rng.choice([-1.0, 1.0], size=samples)
    ratio = rho_quasi_norm(x, a) / box_quasi_norm(x, a)
    lam = np.exp(rng.uniform(-3.0, 3.0, size=samples))
    xs = x * lam[:, None] ** a.array[None, :]
    ratio_s = rho_quasi_norm(xs, a) / box_quasi_norm(xs, a)
    dil_err = float(np.max(np.abs(ratio_s - ratio) / ratio))
    lo, hi = float(ratio.min()), float(ratio.max())
    ok = math.isfinite(lo) and math.isfinite(hi) and lo > 0 and dil_err <= tol
    i = int(np.argmax(np.abs(ratio_s - ratio)))
    return CheckReport(
        "rho-equivalence", EXACT_PASS if ok else FAILED, hi,
        {"x": x[i].tolist(), "lambda": float(lam[i]), "dilation_error": dil_err},
        config={"anisotropy": list(a.a), "samples": samples, "seed": seed},
        details={"min_ratio": lo, "max_ratio": hi, "dilation_error": dil_err},
    )


# ---------------------------------------------------------------------------
# measured constants


def _level_row(gf, F, **values):
    row = {"shape": list(gf.shape), "family_size": len(F)}
    row.update(values)
    return row


def estimate_operator_norm(op: str, f_suite, w: Weight | None, params: MorreyParams, disc: Discretization,
                           r: float | None = None, split: bool = False) -> CheckReport:
    """Largest ratio ``||op f|| / ||f||`` in the weighted Morrey norm over a suite.

    Parameters
    ----------
    op : {"M", "Mw"}
        ``M`` is the centered maximal function over the discretization's
        ladder; ``Mw`` is the uncentered weighted maximal function over the
        family.
    f_suite : list of Expr or str
    r : float, optional
        Exponent ``1 < r < p`` for which ``w`` is expected to be in ``A_r``;
        checked with the power-weight predicate when ``w`` is a power weight.
    split : bool
        Also report, for the worst box ``E`` on the finest level, the
        contributions of ``f 1_{3E}`` and of the remainder.

    Raises
    ------
    ValueError
        If some suite member has zero norm.
    """
    if op not in ("M", "Mw"):
        raise ValueError(f"unknown operator {op!r}")
    suite = [_expr(f) for f in f_suite]
    if not suite:
        raise ValueError("the function suite is empty")
    w = w or ConstantWeight(1.0)
    a = disc.anisotropy
    history, per_fn = [], {}
    for gf, F, L in disc.levels():
        ratios = []
        for expr in suite:
            f = _plain(expr, gf, a)
            nf = morrey_norm(f, w, params, F, refine=False)
            if nf.value == 0:
                raise ValueError(f"suite member {expr} has zero norm")
            of = maximal(f, a, L) if op == "M" else weighted_maximal(f, w, F)
            no = morrey_norm(of, w, params, F, refine=False)
            ratios.append(no.value / nf.value)
        k = int(np.argmax(ratios))
        history.append(_level_row(gf, F, constant=float(ratios[k]), ratios=[float(v) for v in ratios]))
        per_fn = {str(e): float(v) for e, v in zip(suite, ratios)}

    # rerun the worst function on the finest level for the witness
    gf = disc.grid(disc.shapes[-1])
    F, L = disc.family(gf), disc.ladder(gf)
    expr = suite[int(np.argmax(history[-1]["ratios"]))]
    f = _plain(expr, gf, a)
    of = maximal(f, a, L) if op == "M" else weighted_maximal(f, w, F)
    no = morrey_norm(of, w, params, F, refine=False)
    nf = morrey_norm(f, w, params, F, refine=False)
    witness = {"function": str(expr), "E": no.argmax.to_dict(), "op_norm": no.value, "norm": nf.value}

    details = {"per_function": per_fn}
    alpha = _power_alpha(w)
    if alpha is not None:
        details["weight_in_Ap"] = bool(power_ap_predicate(alpha, a, params.p)) if params.p >= 1 else None
        if r is not None:
            details["reverse_holder_r"] = r
            details["weight_in_Ar"] = bool(power_ap_predicate(alpha, a, r)) and 1 <= r < params.p
    if split:
        details["split"] = _split_terms(f, of, w, params, F, no.argmax, op, a, L)
    constant = history[-1]["constant"]
    status = ESTIMATED if math.isfinite(constant) else FAILED
    return CheckReport(
        f"operator-norm-{op}", status, constant, witness,
        config={"op": op, "weight": w.spec, "p": params.p, "kappa": params.kappa,
                "suite": [str(e) for e in suite], "discretization": disc.to_dict()},
        history=history, details=details,
    )


def _plain(expr, gf, a) -> GridFunction:
    # without the expression source, norms use plain samples on both sides
    s = sample(expr, gf.domain, gf.shape, a)
    return s.with_values(s.values)


def _power_alpha(w):
    if isinstance(w, ConstantWeight):
        return 0.0
    if isinstance(w, (PowerAbsWeight, PowerRhoWeight)):
        return w.alpha
    return None


def _split_terms(f, of, w, params, F, E, op, a, L):
    """The two pieces of ``int_E (op f)**p w`` from ``f = f 1_{3E} + rest``."""
    E3 = scale_parallelepiped(E, 3.0)
    inside = np.asarray(E3.contains(f.centers()))
    f1 = f.with_values(np.where(inside, f.values, 0.0))
    f2 = f.with_values(np.where(inside, 0.0, f.values))

    def piece(g):
        og = maximal(g, a, L) if op == "M" else weighted_maximal(g, w, F)
        single = BoxFamily.explicit([E])
        res = morrey_norm(og, w, MorreyParams(params.p, 0.0), single, refine=False)
        return res.value

    wE = morrey_norm(f.with_values(np.ones(f.shape)), w, MorreyParams(1.0, 0.0),
                     BoxFamily.explicit([E]), refine=False).value
    return {"E": E.to_dict(), "I": piece(f1), "II": piece(f2), "w_E": wE,
            "norm_f": morrey_norm(f, w, params, F, refine=False).value}


def _level_ladder(values: np.ndarray, count: int) -> np.ndarray:
    pos = values[values > 0]
    if pos.size == 0:
        return np.empty(0)
    lo, hi = float(pos.min()), float(pos.max())
    if lo == hi:
        return np.array([np.nextafter(hi, 0.0)])
    return np.geomspace(lo, np.nextafter(hi, 0.0), count)


def _as_levels(f, disc: Discretization):
    """Yield ``(grid function, family, ladder)`` per level for an Expr or a fixed grid."""
    if isinstance(f, GridFunction):
        gf = f
        yield gf, disc.family(gf), disc.ladder(gf)
        return
    expr = _expr(f)
    for gf, F, L in disc.levels():
        yield _plain(expr, gf, disc.anisotropy), F, L


def check_weak_morrey(f, w: Weight | None, kappa: float, disc: Discretization, t_levels: int = 48) -> CheckReport:
    """Weak-type constant ``max_{E, t} t w({x in E : Mf > t}) / (||f||_{1,kappa} w(E)**kappa)``.

    ``f`` is an expression (resampled on every level) or a fixed grid.

    Raises
    ------
    ValueError
        If ``Mf`` is nonzero but the Morrey norm of ``f`` vanishes.
    """
    w = w or ConstantWeight(1.0)
    params = MorreyParams(1.0, kappa)
    a = disc.anisotropy
    history, witness = [], {}
    for gf, F, L in _as_levels(f, disc):
        mf = maximal(gf, a, L).values
        levels = _level_ladder(mf, t_levels)
        if levels.size == 0:
            history.append(_level_row(gf, F, constant=0.0))
            continue
        norm = morrey_norm(gf, w, params, F, refine=False).value
        if norm == 0:
            raise ValueError("the Morrey norm of f vanishes")
        wv = w.cell_values(gf)
        lo, hi = F.bounds(gf)
        vol = gf.cell_volume
        wE = SummedTable(wv).range_sum(lo, hi) * vol
        empty = np.any(lo > hi, axis=-1) | (wE <= 0)
        denom = norm * np.where(empty, 1.0, wE) ** kappa
        best, arg = 0.0, None
        for t in levels:
            num = SummedTable(np.where(mf > t, wv, 0.0)).range_sum(lo, hi) * vol
            val = np.where(empty, 0.0, t * num / denom)
            i = int(np.argmax(val))
            if val[i] > best:
                best, arg = float(val[i]), (i, float(t))
        history.append(_level_row(gf, F, constant=best, norm=norm))
        if arg is not None:
            witness = {"E": F.box(arg[0]).to_dict(), "t": arg[1]}
    constant = history[-1]["constant"]
    alpha = _power_alpha(w)
    details = {}
    if alpha is not None:
        details["weight_in_A1"] = bool(power_ap_predicate(alpha, a, 1.0))
    return CheckReport("weak-morrey", ESTIMATED if math.isfinite(constant) else FAILED, constant, witness,
                       config={"weight": w.spec, "kappa": kappa, "t_levels": t_levels,
                               "function": str(f) if not isinstance(f, GridFunction) else "grid",
                               "discretization": disc.to_dict()},
                       history=history, details=details)


def fefferman_stein_constant(f, phi, disc: Discretization, t_ladder=None, t_levels: int = 48) -> CheckReport:
    """``max_t t int_{Mf > t} phi / int |f| M phi`` per level.

    ``f`` and ``phi`` are expressions (resampled per level) or grids on the
    same single level. Values at the explicit levels ``t_ladder`` are
    reported per level as ``spot``: ``t int_{Mf > t} phi``.

    Raises
    ------
    ValueError
        If ``phi`` takes negative values or ``int |f| M phi`` vanishes
        while ``f`` does not.
    """
    a = disc.anisotropy
    spots_t = [] if t_ladder is None else [float(t) for t in np.atleast_1d(t_ladder)]
    history, witness = [], {}
    phis = list(_as_levels(phi, disc))
    for (gf, F, L), (ph, _, _) in zip(_as_levels(f, disc), phis):
        if np.any(ph.values < 0):
            raise ValueError("phi must be nonnegative")
        mf = maximal(gf, a, L).values
        levels = _level_ladder(mf, t_levels)
        spot = {repr(t): float(t * np.sum(np.where(mf > t, ph.values, 0.0)) * gf.cell_volume) for t in spots_t}
        if levels.size == 0:
            history.append(_level_row(gf, F, constant=0.0, spot=spot))
            continue
        mphi = maximal(ph, a, L).values
        den = float(np.sum(np.abs(gf.values) * mphi, dtype=np.longdouble)) * gf.cell_volume
        if den == 0:
            raise ValueError("int |f| M phi vanishes")
        vals = np.array([t * np.sum(ph.values[mf > t]) * gf.cell_volume / den for t in levels])
        i = int(np.argmax(vals))
        history.append(_level_row(gf, F, constant=float(vals[i]), denominator=den, spot=spot))
        witness = {"t": float(levels[i])}
    constant = history[-1]["constant"]
    return CheckReport("fefferman-stein", ESTIMATED if math.isfinite(constant) else FAILED, constant, witness,
                       config={"function": str(f) if not isinstance(f, GridFunction) else "grid",
                               "phi": str(phi) if not isinstance(phi, GridFunction) else "grid",
                               "t_ladder": spots_t, "t_levels": t_levels, "discretization": disc.to_dict()},
                       history=history)


def anchored_interval_value(alpha: float) -> float:
    """Closed-form ratio on every anchored interval ``(0, r)``: ``(alpha+1)**kappa / (alpha+1/2)``."""
    kappa = (alpha + 0.5) / (alpha + 1.0)
    return (alpha + 1.0) ** kappa / (alpha + 0.5)


def morrey_not_lebesgue(alpha: float = -0.25, shapes=(4096, 8192, 16384), stride: int = 4,
                           q: float = 2.0, anchored: int = 8) -> CheckReport:
    """Morrey norm stays bounded while the ``L_{2(alpha+1)}(w)`` norm diverges.

    Uses ``f = x**-1/2`` on ``(0, 1)``, ``w = |x|**alpha``, ``p = 1`` and
    ``kappa = (alpha + 1/2)/(alpha + 1)``. The history records, per level,
    the family sup, the values on the anchored intervals ``(0, 2**-k)`` and
    the ``2(alpha+1)``-th power of the Lebesgue norm.
    """
    if not (-0.5 < alpha < 0):
        raise ValueError("alpha must lie in (-1/2, 0)")
    kappa = (alpha + 0.5) / (alpha + 1.0)
    params = MorreyParams(1.0, kappa)
    expr = Product((Indicator(Box([0.0], [1.0])), PowAbs(-0.5)))
    w = PowerAbsWeight(alpha)
    a = Anisotropy((1.0,))
    domain = Box([0.0], [1.0])
    p_leb = 2.0 * (alpha + 1.0)
    anchor = anchored_interval_value(alpha)
    history = []
    for shape in shapes:
        gf = sample(expr, domain, (int(np.atleast_1d(shape)[0]),), a)
        F = BoxFamily.lattice_family(gf, a, stride=stride, q=q)
        m = morrey_norm(gf, w, params, F)
        boxes = [Parallelepiped([2.0 ** -k / 2], 2.0 ** -k / 2, a) for k in range(anchored)]
        anch = morrey_norm(gf, w, params, BoxFamily.explicit(boxes)).local
        leb = lp_norm(gf, w, p_leb) ** p_leb
        history.append({"shape": list(gf.shape), "constant": m.value, "argmax": m.argmax.to_dict(),
                        "anchored": [float(v) for v in anch], "lebesgue_power": leb})
    increments = [b["lebesgue_power"] - a_["lebesgue_power"] for a_, b in zip(history, history[1:])]
    final = history[-1]["constant"]
    rel = abs(final - history[-2]["constant"]) / final if len(history) > 1 else 0.0
    return CheckReport(
        "morrey-not-lebesgue", ESTIMATED, final, {"E": history[-1]["argmax"]},
        config={"alpha": alpha, "kappa": kappa, "shapes": [int(np.atleast_1d(s)[0]) for s in shapes],
                "stride": stride, "q": q},
        history=history,
        details={"anchor": anchor, "relative_to_anchor": abs(final - anchor) / anchor,
                 "morrey_last_change": rel, "lebesgue_increments": increments,
                 "lebesgue_exponent": p_leb},
    )


def ap_refinement_scan(alphas, p: float, disc: Discretization, weight: str = "powrho") -> CheckReport:
    """Discrete A_p (or A_1 when ``p == 1``) characteristic of power weights per level.

    Each history row holds one characteristic per ``alpha``; ``details``
    records the predicate and the growth factor over the last refinement.
    """
    a = disc.anisotropy
    alphas = [float(v) for v in alphas]
    history = []
    for gf, F, _ in disc.levels():
        row = []
        for al in alphas:
            w = PowerAbsWeight(al) if weight == "powabs" else PowerRhoWeight(al, a)
            if p == 1:
                row.append(a1_characteristic(w, F, gf))
            else:
                row.append(ap_characteristic(w, p, F, gf=gf, backend="quadrature").characteristic)
        history.append(_level_row(gf, F, constant=float(max(row)), per_alpha=[float(v) for v in row]))
    growth = [history[-1]["per_alpha"][i] / history[-2]["per_alpha"][i] if len(history) > 1 else 1.0
              for i in range(len(alphas))]
    inside = [bool(power_ap_predicate(al, a, p)) for al in alphas]
    return CheckReport(
        "ap-refinement", ESTIMATED, history[-1]["constant"], {},
        config={"alphas": alphas, "p": p, "weight": weight, "discretization": disc.to_dict()},
        history=history, details={"inside": inside, "growth": growth},
    )

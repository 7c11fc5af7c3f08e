"""Acceptance criteria as runnable functions.

Each ``criterion_<k>`` returns a :class:`CriterionResult` with a pass flag, a
one-line summary and the measured numbers. The CLI ``suite`` command and
``tests/test_acceptance.py`` share these functions.
"""
from __future__ import annotations

import math
import re
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .expr import parse_expr, sample
from .families import BoxFamily, ScaleLadder
from .geometry import Anisotropy, Parallelepiped, lebesgue_measure, rho_quasi_norm, scale_parallelepiped
from .grid import Box, GridFunction
from .norms import MorreyParams
from .operators import maximal
from .report import to_jsonable
from .verify import (
    Discretization,
    ap_refinement_scan,
    check_ap_jensen,
    check_chebyshev,
    check_maximal_bound,
    check_mr_monotone,
    check_reverse_doubling,
    check_sublinearity,
    check_weak_morrey,
    morrey_not_lebesgue,
    estimate_operator_norm,
    fefferman_stein_constant,
)
from .weights import ConstantWeight, PowerAbsWeight, PowerRhoWeight, ap_characteristic, doubling_constants

__all__ = ["CriterionResult", "CRITERIA", "run_criteria"]

STABILITY = 0.20


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.title}: {self.summary}"

    def to_dict(self) -> dict:
        return to_jsonable({"number": self.number, "title": self.title, "passed": self.passed,
                            "summary": self.summary, "data": self.data})


def criterion_1(seed: int = 7, samples: int = 10_000) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst_res = worst_hom = 0.0
    for n in range(1, 5):
        a = Anisotropy(rng.uniform(0.5, 3.0, size=n))
        x = rng.normal(size=(samples // 4, n)) * np.exp(rng.uniform(-3, 3, size=(samples // 4, 1)))
        t = rho_quasi_norm(x, a)
        res = np.abs(np.sum(x ** 2 * t[:, None] ** (-2 * a.array), axis=1) - 1.0)
        lam = np.exp(rng.uniform(-2, 2, size=samples // 4))
        t_l = rho_quasi_norm(x * lam[:, None] ** a.array, a)
        hom = np.abs(t_l - lam * t) / (lam * t)
        worst_res, worst_hom = max(worst_res, res.max()), max(worst_hom, hom.max())
    x = rng.normal(size=(1000, 3))
    iso = float(np.max(np.abs(rho_quasi_norm(x, (1, 1, 1)) - np.linalg.norm(x, axis=1))))
    iso = max(iso, abs(rho_quasi_norm([3.0, 4.0], (1, 1)) - 5.0))
    ok = worst_res <= 1e-10 and worst_hom <= 1e-8 and iso <= 1e-10
    return CriterionResult(1, "quasi-norm solver", ok,
                           f"residual {worst_res:.2e}, homogeneity {worst_hom:.2e}, isotropic {iso:.2e}",
                           {"residual": worst_res, "homogeneity": worst_hom, "isotropic": iso})


def criterion_2(seed: int = 7) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 5))
        a = Anisotropy(rng.uniform(0.5, 3.0, size=n))
        E = Parallelepiped(rng.normal(size=n), float(np.exp(rng.uniform(-2, 2))), a)
        direct = float(np.prod(E.hi - E.lo))
        formula = lebesgue_measure(E)
        worst = max(worst, abs(direct - formula) / formula)
        for lam in (2.0, 3.0, 5.0):
            scaled = lebesgue_measure(scale_parallelepiped(E, lam))
            worst = max(worst, abs(scaled - lam ** a.trace * formula) / scaled)
    return CriterionResult(2, "parallelepiped measure", worst <= 1e-12, f"max relative error {worst:.2e}",
                           {"max_relative_error": worst})


def criterion_3(seed: int = 7, instances: int = 50, cells: int = 4096) -> CriterionResult:
    rng = np.random.default_rng(seed)
    a = Anisotropy((1.0,))
    domain = Box([-1.0], [1.0])
    weights = [ConstantWeight(1.0), PowerAbsWeight(0.5), PowerAbsWeight(-0.5)]
    ps = [1.0, 1.5, 2.0, 3.0]
    proto = GridFunction.zeros(domain, (cells,))
    F = BoxFamily.lattice_family(proto, a)
    failures, worst = [], 0.0
    for k in range(instances):
        f = proto.with_values(rng.normal(size=cells) * rng.uniform(0.1, 10.0))
        w = weights[k % len(weights)]
        p = ps[(k // len(weights)) % len(ps)]
        rep = check_maximal_bound(f, w, p, F)
        worst = max(worst, rep.constant)
        if not rep.passed:
            failures.append(rep.to_dict())
    extra = []
    f = proto.with_values(rng.normal(size=cells))
    g = proto.with_values(rng.normal(size=cells))
    for w in weights[1:]:
        for p in (1.5, 2.0, 3.0):
            extra.append(check_ap_jensen(w, p, F, proto))
        extra.append(check_chebyshev(f, w, 2.0))
    extra.append(check_sublinearity(f, g, a))
    extra.append(check_mr_monotone(f, [0.5, 1.0, 1.5, 2.0, 3.0], a))
    failures += [r.to_dict() for r in extra if not r.passed]
    ok = not failures
    return CriterionResult(3, "exact discrete inequalities", ok,
                           f"{instances} Hölder instances (max lhs/rhs {worst:.6f}) + {len(extra)} side checks, "
                           f"{len(failures)} failures",
                           {"max_ratio": worst, "failures": failures})


def criterion_4() -> CriterionResult:
    """Closed form 4/3 plus a convergence-ratio band for the snap-rule quadrature."""
    a = Anisotropy((1.0,))
    domain = Box([-1.0], [1.0])
    F = BoxFamily.explicit([Parallelepiped([0.0], 1.0, a)])
    w = PowerAbsWeight(0.5)
    exact = ap_characteristic(w, 2.0, F, domain=domain, backend="exact").characteristic
    errors, values = [], []
    for k in range(9, 14):
        gf = GridFunction.zeros(domain, (2 ** k,))
        v = ap_characteristic(PowerAbsWeight(0.5), 2.0, F, gf=gf, backend="quadrature").characteristic
        values.append(v)
        errors.append(abs(v - 4.0 / 3.0))
    ratios = [e0 / e1 for e0, e1 in zip(errors, errors[1:])]
    exact_ok = abs(exact - 4.0 / 3.0) <= 1e-12
    band_ok = all(1.7 <= r <= 2.3 for r in ratios)
    return CriterionResult(4, "A_p backend cross-check", exact_ok and band_ok,
                           f"exact {exact:.15f}; quadrature error ratios {', '.join(f'{r:.4f}' for r in ratios)} "
                           f"(band [1.7, 2.3])",
                           {"exact": exact, "quadrature": values, "errors": errors, "ratios": ratios})


_AP_CASES = [
    # (anisotropy, domain, shapes, p, alphas)
    ((1.0,), "-1:1", [(2048,), (4096,)], 2.0, [-1.75, -0.5, 0.5, 1.75]),
    ((1.0,), "-1:1", [(2048,), (4096,)], 3.0, [-1.75, -0.5, 1.5, 2.75]),
    ((1.0,), "-1:1", [(2048,), (4096,)], 1.0, [-1.75, -0.5, 0.0, 1.0]),
    # dilation-consistent refinement: axis i is refined by 2**a_i
    ((1.0, 2.0), "-1:1,-1:1", [(32, 32), (64, 128)], 2.0, [-4.5, -1.5, 1.5, 4.5]),
    ((1.0, 2.0), "-1:1,-1:1", [(32, 32), (64, 128)], 3.0, [-4.5, -1.5, 2.5, 7.5]),
    ((1.0, 2.0), "-1:1,-1:1", [(32, 32), (64, 128)], 1.0, [-4.5, -1.5, 0.0, 2.0]),
]


def criterion_5() -> CriterionResult:
    rows, ok = [], True
    for a, dom, shapes, p, alphas in _AP_CASES:
        rep = ap_refinement_scan(alphas, p, Discretization(dom, shapes, a))
        for al, inside, g in zip(alphas, rep.details["inside"], rep.details["growth"]):
            good = abs(g - 1.0) < 0.10 if inside else g >= 1.5
            ok &= good
            rows.append({"a": list(a), "p": p, "alpha": al, "inside": inside, "growth": g, "ok": good})
    bad = [r for r in rows if not r["ok"]]
    inside_max = max(abs(r["growth"] - 1) for r in rows if r["inside"])
    outside_min = min(r["growth"] for r in rows if not r["inside"])
    return CriterionResult(5, "power-weight criterion", ok,
                           f"{len(rows)} (a, p, alpha) cases; max inside change {inside_max:.3f}, "
                           f"min outside growth {outside_min:.3f}; {len(bad)} off",
                           {"cases": rows})


def criterion_6() -> CriterionResult:
    a2 = Anisotropy((1.0, 2.0))
    g2 = GridFunction.zeros(Box([-4.0, -16.0], [4.0, 16.0]), (32, 128))
    F2 = BoxFamily.lattice_family(g2, a2, stride=8, count=3)
    const = doubling_constants(ConstantWeight(1.0), F2, g2, backend="exact")
    const_err = max(abs(const.D - 8.0), abs(const.D1 - 8.0)) / 8.0

    a1 = Anisotropy((1.0,))
    dom = Box([-4.0], [4.0])
    centered = BoxFamily.explicit([Parallelepiped([0.0], r, a1) for r in (0.01, 0.1, 0.5, 1.0, 1.9)])
    rep = doubling_constants(PowerAbsWeight(-0.5), centered, domain=dom, backend="exact")
    sqrt2_err = max(abs(rep.D - math.sqrt(2)), abs(rep.D1 - math.sqrt(2))) / math.sqrt(2)

    gf = GridFunction.zeros(dom, (512,))
    F1 = BoxFamily.lattice_family(gf, a1, stride=4, count=4)
    d1 = {}
    for w in (ConstantWeight(1.0), PowerAbsWeight(0.5), PowerAbsWeight(-0.5), PowerAbsWeight(-0.25),
              PowerAbsWeight(1.0)):
        d1[w.spec] = check_reverse_doubling(w, F1, gf).constant
    rho = PowerRhoWeight(1.0, a2)
    d1[rho.spec + " (2-D quadrature)"] = check_reverse_doubling(rho, F2, g2, backend="quadrature").constant
    ok = const_err <= 1e-9 and sqrt2_err <= 1e-6 and all(v > 1 for v in d1.values())
    return CriterionResult(6, "doubling and reverse doubling", ok,
                           f"const D,D1 rel err {const_err:.1e}; |x|^-1/2 ratio err {sqrt2_err:.1e}; "
                           f"min D1 {min(d1.values()):.4f}",
                           {"const": [const.D, const.D1], "sqrt2_error": sqrt2_err, "D1": d1})


def criterion_7() -> CriterionResult:
    a = Anisotropy((1.0,))
    f = sample(parse_expr("ind(-1:1)"), Box([-8.0], [8.0]), (2 ** 13,), a)
    mf = maximal(f, a, ScaleLadder.for_grid(f, a, q=2 ** 0.25))
    at3 = float(mf.values[f.nearest_index([3.0])])
    at0 = float(mf.values[f.nearest_index([0.0])])
    ok = 0.24 <= at3 <= 0.26 and abs(at0 - 1.0) <= 1e-10
    return CriterionResult(7, "maximal function anchor", ok, f"Mf(3) = {at3:.6f}, Mf(0) = {at0!r}",
                           {"Mf_3": at3, "Mf_0": at0})


def criterion_8(seed: int = 7) -> CriterionResult:
    disc = Discretization("-4:4", [(2 ** 12,), (2 ** 13,)], (1.0,))
    suite = ["ind(-1:1)", "powabs(-0.25)*ind(-1:1)", f"rand({seed})"]
    runs = []
    for op, w, kappa in [("Mw", ConstantWeight(1.0), 0.0), ("Mw", ConstantWeight(1.0), 0.5),
                         ("Mw", PowerAbsWeight(0.5), 0.0), ("Mw", PowerAbsWeight(0.5), 0.5),
                         ("M", ConstantWeight(1.0), 0.5), ("M", PowerAbsWeight(0.5), 0.5)]:
        rep = estimate_operator_norm(op, suite, w, MorreyParams(2.0, kappa), disc)
        runs.append({"op": op, "weight": w.spec, "kappa": kappa, "constants": [h["constant"] for h in rep.history],
                     "drift": rep.drift})
    ok = all(math.isfinite(r["constants"][-1]) and r["drift"] < STABILITY for r in runs)
    return CriterionResult(8, "operator-norm stability", ok,
                           f"{len(runs)} configurations, max drift {max(r['drift'] for r in runs):.4f}",
                           {"runs": runs})


def criterion_9() -> CriterionResult:
    a = (1.0,)
    disc = Discretization("-4:4", [(2 ** 12,), (2 ** 13,)], a)
    runs = []
    for w in (ConstantWeight(1.0), PowerAbsWeight(-0.25)):
        rep = check_weak_morrey("ind(-1:1)", w, 0.5, disc)
        runs.append({"check": "weak-morrey", "weight": w.spec, "constants": [h["constant"] for h in rep.history],
                     "drift": rep.drift})
    fine = Discretization("-8:8", [(2 ** 12,), (2 ** 13,)], a, ladder_q=2 ** (1 / 32))
    spot = None
    for phi in ("const(1)", "ind(2:3)"):
        rep = fefferman_stein_constant("ind(-1:1)", phi, fine, t_ladder=[0.25])
        runs.append({"check": "fefferman-stein", "phi": phi, "constants": [h["constant"] for h in rep.history],
                     "drift": rep.drift})
        if phi == "const(1)":
            spot = rep.history[-1]["spot"][repr(0.25)]
    ok = all(math.isfinite(r["constants"][-1]) and r["drift"] < STABILITY for r in runs)
    ok &= abs(spot - 1.5) <= 0.05 * 1.5
    return CriterionResult(9, "weak estimate and Fefferman-Stein", ok,
                           f"max drift {max(r['drift'] for r in runs):.2e}; spot value t|{{Mf>t}}| = {spot:.4f}",
                           {"runs": runs, "spot": spot})


def criterion_10() -> CriterionResult:
    rep = morrey_not_lebesgue(-0.25, shapes=(2 ** 12, 2 ** 13, 2 ** 14))
    vals = [h["constant"] for h in rep.history]
    anchor = rep.details["anchor"]
    stable = all(abs(v1 - v0) / v1 < 0.05 for v0, v1 in zip(vals, vals[1:]))
    near = abs(vals[-1] - anchor) / anchor <= 0.02
    inc = rep.details["lebesgue_increments"]
    diverge = all(abs(d - math.log(2)) <= 0.1 * math.log(2) for d in inc)
    return CriterionResult(10, "Morrey-but-not-Lebesgue example", stable and near and diverge,
                           f"Morrey {', '.join(f'{v:.4f}' for v in vals)} (anchor {anchor:.4f}); "
                           f"L_1.5 power increments {', '.join(f'{d:.4f}' for d in inc)}",
                           {"morrey": vals, "anchor": anchor, "increments": inc})


def _strip_timestamp(raw: bytes) -> bytes:
    return re.sub(rb'\n\s*"timestamp": "[^"]*",?', b"", raw)


def criterion_11(seed: int = 7) -> CriterionResult:
    """Run ``suite --seed`` twice in fresh processes and compare the JSON bytes."""
    outs = []
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "suite.json"
        for _ in range(2):
            if path.exists():
                path.unlink()
            cmd = [sys.executable, "-m", "anisomorrey", "suite", "--seed", str(seed), "--json", str(path)]
            proc = subprocess.run(cmd, capture_output=True, text=True)
            if not path.exists():
                return CriterionResult(11, "determinism", False, f"suite run failed: {proc.stderr.strip()[-300:]}")
            outs.append(_strip_timestamp(path.read_bytes()))
    same = outs[0] == outs[1]
    return CriterionResult(11, "determinism", same,
                           f"two suite runs {'byte-identical' if same else 'differ'} apart from the timestamp "
                           f"({len(outs[0])} bytes)",
                           {"bytes": len(outs[0])})


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}

_SEEDED = {1, 2, 3, 8, 11}


def run_criteria(numbers=None, seed: int = 7) -> list:
    numbers = sorted(CRITERIA) if numbers is None else list(numbers)
    out = []
    for k in numbers:
        fn = CRITERIA[k]
        out.append(fn(seed=seed) if k in _SEEDED else fn())
    return out

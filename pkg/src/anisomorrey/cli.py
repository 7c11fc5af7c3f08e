"""Command-line front end.

Subcommands: ``maximal``, ``norm``, ``apconst``, ``verify <check>``,
``suite`` and ``plot``. Exit status is 0 when every asserted check passes,
1 when one fails (the witness goes to stderr) and 2 on a configuration
error. ``--config FILE`` reads ``key = value`` lines; flags given on the
command line take precedence.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import verify as V
from .acceptance import run_criteria
from .expr import parse_expr, sample
from .families import BoxFamily, ScaleLadder
from .geometry import Anisotropy
from .grid import Box, GridFunction
from .gridio import atomic_write_text, read_grid, write_grid
from .norms import MorreyParams, lp_norm, morrey_norm, weak_lp_norm
from .operators import family_maximal, maximal, maximal_r, sharp_maximal
from .parallel import parallel_map, thread_count
from .report import reports_to_csv, reports_to_json, to_jsonable
from .svg import line_plot
from .weights import a1_characteristic, ap_characteristic, doubling_ratios, parse_weight

__all__ = ["main", "build_parser", "ConfigError"]

CHECKS = [
    "dilation-bound", "maximal-bound", "jensen", "chebyshev", "sublinearity", "mr-monotone", "reverse-doubling",
    "operator-norm", "weak-morrey", "fefferman-stein", "morrey-not-lebesgue", "rho-equivalence",
]


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# parsing helpers


def _floats(text, what):
    try:
        return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad {what}: {text!r}") from None


def _shapes(text):
    """``"4096;8192"`` or ``"32x32;64x128"`` into a list of shape tuples."""
    out = []
    for part in str(text).split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(tuple(int(v) for v in part.replace("x", ",").split(",")))
        except ValueError:
            raise ConfigError(f"bad shape {part!r}") from None
    if not out:
        raise ConfigError("no grid shape given")
    return out


def _domain(text):
    try:
        return Box.from_intervals([tuple(float(v) for v in part.split(":")) for part in str(text).split(",")])
    except (ValueError, TypeError):
        raise ConfigError(f"bad domain {text!r}; expected lo:hi[,lo:hi...]") from None


def read_config(path) -> list:
    """Turn a ``key = value`` file into command-line tokens."""
    tokens = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        flag = "--" + key.strip().replace("_", "-")
        value = value.strip()
        if value.lower() in ("true", "yes", "on"):
            tokens.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            tokens.append(f"{flag}={value}")
    return tokens


def _glue_negative_values(argv):
    """Attach values such as ``-8:8`` to their flag so argparse does not read them as options."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok.startswith("--") and "=" not in tok:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] == "."):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


class _Setup:
    """Grid, anisotropy, family and ladder resolved from common flags."""

    def __init__(self, args):
        self.args = args
        if getattr(args, "input", None):
            self.template = read_grid(args.input)
            self.domain = self.template.domain
            self.shape = self.template.shape
        else:
            self.template = None
            self.domain = _domain(args.domain)
            self.shape = _shapes(args.shape)[0]
        if len(self.shape) != self.domain.n:
            raise ConfigError(f"shape {self.shape} does not match a {self.domain.n}-dimensional domain")
        a = _floats(args.aniso, "anisotropy") if args.aniso else [1.0] * self.domain.n
        if len(a) != self.domain.n:
            raise ConfigError(f"anisotropy has {len(a)} entries for a {self.domain.n}-dimensional domain")
        self.a = Anisotropy(a)
        self.grid = self.template or GridFunction.zeros(self.domain, self.shape)

    def function(self, text=None, seed_offset=0):
        if self.template is not None and text is None:
            return self.template
        text = text if text is not None else self.args.fn
        if text is None:
            rng = np.random.default_rng(self.args.seed + seed_offset)
            return self.grid.with_values(rng.normal(size=self.shape))
        return sample(parse_expr(text), self.domain, self.shape, self.a)

    def family(self, gf=None):
        gf = gf or self.grid
        ar = self.args
        return BoxFamily.lattice_family(gf, self.a, stride=ar.stride, t_min=ar.t_min, q=ar.q, count=ar.count)

    def ladder(self, gf=None):
        return ScaleLadder.for_grid(gf or self.grid, self.a, q=self.args.ladder_q)

    def weight(self, spec=None):
        spec = spec or self.args.weight
        return parse_weight(spec, self.a)

    def discretization(self, shapes_text=None):
        shapes = _shapes(shapes_text) if shapes_text else [self.shape]
        return V.Discretization(self.domain, shapes, self.a, stride=self.args.stride, q=self.args.q,
                                ladder_q=self.args.ladder_q)


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("grid and family")
    g.add_argument("--domain", default="-1:1", help="lo:hi[,lo:hi...]")
    g.add_argument("--shape", default="1024", help="cells per axis, e.g. 4096 or 64,128")
    g.add_argument("--aniso", default=None, help="anisotropy a_1,...,a_n (default all ones)")
    g.add_argument("--stride", type=int, default=4, help="family center stride in cells")
    g.add_argument("--t-min", dest="t_min", type=float, default=None)
    g.add_argument("--q", type=float, default=2.0, help="family scale ratio")
    g.add_argument("--count", type=int, default=None, help="number of family scales")
    g.add_argument("--ladder-q", dest="ladder_q", type=float, default=2.0 ** 0.25, help="centered ladder ratio")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--fn", default=None, help="function expression, e.g. 'ind(-1:1)*powabs(-0.25)'")
    g.add_argument("--input", default=None, help="read f from a grid file instead of --fn")
    g.add_argument("--weight", default="const:1", help="const:c | powabs:alpha | powrho:alpha | grid:path")
    g.add_argument("--json", default=None, help="write the JSON report here instead of stdout")
    g.add_argument("--csv", default=None, help="also write a CSV summary")
    g.add_argument("--config", default=None, help="key = value file with defaults for these flags")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="anisomorrey", description="Anisotropic maximal functions, weights and Morrey norms.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("maximal", help="write Mf, M_w f, f# or M_r f as a grid file")
    _common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--uncentered", action="store_true", help="sup over family boxes containing x")
    p.add_argument("--all-boxes", dest="all_boxes", action="store_true", help="sup over every family box")
    p.add_argument("--weighted", action="store_true", help="average in the measure w dx (uncentered)")
    p.add_argument("--sharp", nargs="?", const="mean", choices=["mean", "literal"], default=None,
                   help="sharp maximal function; mode defaults to mean")
    p.add_argument("--r", type=float, default=None, help="M_r f = (M |f|^r)^(1/r)")
    p.set_defaults(func=cmd_maximal)

    p = sub.add_parser("norm", help="L_p, weak L_p or Morrey norm of f")
    _common(p)
    p.add_argument("--type", choices=["lp", "weak", "morrey"], default="morrey")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--refine", choices=["auto", "on", "off"], default="auto")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("apconst", help="A_p and A_1 characteristics, doubling constants")
    _common(p)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--backend", choices=["auto", "exact", "quadrature"], default="auto")
    p.set_defaults(func=cmd_apconst)

    p = sub.add_parser("verify", help="run one check")
    p.add_argument("check", choices=CHECKS)
    _common(p)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--lambdas", default="1,2,3")
    p.add_argument("--rs", default="0.5,1,1.5,2,3")
    p.add_argument("--op", choices=["M", "Mw"], default="M")
    p.add_argument("--suite", default="ind(-1:1);powabs(-0.25)*ind(-1:1)",
                   help="';'-separated function expressions")
    p.add_argument("--shapes", default=None, help="refinement shapes, e.g. '4096;8192'")
    p.add_argument("--r", type=float, default=None, help="reverse-Hölder exponent to predicate-check")
    p.add_argument("--split", nargs="?", const="3E", default=None, choices=["3E"],
                   help="report the two pieces of the 3E decomposition for the worst box")
    p.add_argument("--phi", default="const(1)")
    p.add_argument("--t", default=None, help="explicit levels for spot values")
    p.add_argument("--alpha", type=float, default=-0.25)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--backend", choices=["auto", "exact", "quadrature"], default="auto")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("suite", help="run the default check battery and the acceptance set")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--json", default=None)
    p.add_argument("--csv", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("plot", help="render a 1-D grid or a refinement history as SVG")
    p.add_argument("--input", default=None, help="1-D grid file")
    p.add_argument("--report", default=None, help="report JSON (single check or suite)")
    p.add_argument("--check", default=None, help="check name inside a suite report")
    p.add_argument("--out", required=True)
    p.add_argument("--title", default="")
    p.add_argument("--log-x", dest="log_x", action="store_true")
    p.add_argument("--log-y", dest="log_y", action="store_true")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_plot)
    return parser


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _emit(args, reports, extra=None) -> None:
    doc = {"config": _echo(args)}
    doc.update(extra or {})
    text = reports_to_json(reports, **doc)
    if args.json:
        atomic_write_text(args.json, text)
        for r in reports:
            drift = "" if r.drift is None else f" drift={r.drift:.3g}"
            print(f"[{r.status}] {r.name}: constant={r.constant!r}{drift} -> {args.json}")
    else:
        sys.stdout.write(text)
    if getattr(args, "csv", None):
        atomic_write_text(args.csv, reports_to_csv(reports))


def _finish(reports) -> int:
    failed = [r for r in reports if not r.passed]
    for r in failed:
        print(f"check {r.name} failed; witness: {json.dumps(to_jsonable(r.witness), sort_keys=True)}",
              file=sys.stderr)
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# commands


def cmd_maximal(args) -> int:
    s = _Setup(args)
    f = s.function()
    if args.sharp:
        out = sharp_maximal(f, s.a, s.ladder(f), mode=args.sharp)
    elif args.weighted:
        out = family_maximal(f, s.family(f), w=s.weight(), containing=not args.all_boxes)
    elif args.uncentered or args.all_boxes:
        F = s.family(f)
        if args.r is not None:
            g = f.with_values(np.abs(f.values) ** args.r)
            out = family_maximal(g, F, containing=not args.all_boxes)
            out = out.with_values(out.values ** (1.0 / args.r))
        else:
            out = family_maximal(f, F, containing=not args.all_boxes)
    elif args.r is not None:
        out = maximal_r(f, args.r, s.a, s.ladder(f))
    else:
        out = maximal(f, s.a, s.ladder(f))
    write_grid(out, args.out)
    print(f"wrote {args.out}: max {float(np.max(out.values))!r}, min {float(np.min(out.values))!r}")
    return 0


def cmd_norm(args) -> int:
    s = _Setup(args)
    f = s.function()
    w = s.weight()
    refine = {"auto": "auto", "on": True, "off": False}[args.refine]
    if args.type == "lp":
        value = lp_norm(f, w, args.p, refine=refine)
        print(f"L_p norm (p={args.p}): {value!r}")
    elif args.type == "weak":
        value = weak_lp_norm(f, w, args.p)
        print(f"weak L_p norm (p={args.p}): {value!r}")
    else:
        res = morrey_norm(f, w, MorreyParams(args.p, args.kappa), s.family(f), refine=refine)
        print(f"Morrey norm (p={args.p}, kappa={args.kappa}): {res.value!r}")
        print(f"argmax box: center={list(res.argmax.center)} t={res.argmax.t!r} "
              f"half_widths={res.argmax.half_widths.tolist()}")
    return 0


def cmd_apconst(args) -> int:
    s = _Setup(args)
    w = s.weight()
    F = s.family()
    if args.p > 1:
        rep = ap_characteristic(w, args.p, F, gf=s.grid, backend=args.backend)
        print(f"A_p characteristic (p={args.p}, {rep.backend}): {rep.characteristic!r}")
    a1 = a1_characteristic(w, F, s.grid)
    print(f"A_1 characteristic: {a1!r}")
    ratios, keep = doubling_ratios(w, F, s.grid, args.backend)
    if keep.any():
        r = ratios[keep]
        print(f"D (doubling): {float(r.max())!r}")
        print(f"D1 (reverse doubling): {float(r.min())!r}")
    else:
        print("D, D1: no family box has its doubled box inside the domain")
    print(f"tested {int(keep.sum())} of {len(F)} family boxes")
    return 0


def _run_check(args) -> V.CheckReport:
    s = _Setup(args)
    name = args.check
    if name == "dilation-bound":
        return V.check_dilation_bound(s.weight(), args.p, s.family(), _floats(args.lambdas, "lambdas"), gf=s.grid,
                                backend=args.backend)
    if name == "maximal-bound":
        f = s.function()
        return V.check_maximal_bound(f, s.weight(), args.p, s.family(f))
    if name == "jensen":
        return V.check_ap_jensen(s.weight(), args.p, s.family(), s.grid)
    if name == "chebyshev":
        return V.check_chebyshev(s.function(), s.weight(), args.p)
    if name == "sublinearity":
        f = s.function()
        g = s.function(seed_offset=1) if args.fn is None else s.grid.with_values(
            np.random.default_rng(args.seed + 1).normal(size=s.shape))
        return V.check_sublinearity(f, g, s.a, s.ladder())
    if name == "mr-monotone":
        return V.check_mr_monotone(s.function(), _floats(args.rs, "rs"), s.a, s.ladder())
    if name == "reverse-doubling":
        return V.check_reverse_doubling(s.weight(), s.family(), s.grid, backend=args.backend)
    if name == "operator-norm":
        suite = [t for t in args.suite.split(";") if t.strip()]
        return V.estimate_operator_norm(args.op, suite, s.weight(), MorreyParams(args.p, args.kappa),
                                        s.discretization(args.shapes), r=args.r, split=bool(args.split))
    if name == "weak-morrey":
        return V.check_weak_morrey(args.fn or "ind(-1:1)", s.weight(), args.kappa, s.discretization(args.shapes))
    if name == "fefferman-stein":
        t = _floats(args.t, "levels") if args.t else None
        return V.fefferman_stein_constant(args.fn or "ind(-1:1)", args.phi, s.discretization(args.shapes), t_ladder=t)
    if name == "morrey-not-lebesgue":
        shapes = [sh[0] for sh in _shapes(args.shapes)] if args.shapes else (4096, 8192, 16384)
        return V.morrey_not_lebesgue(args.alpha, shapes)
    if name == "rho-equivalence":
        return V.rho_equivalence_scan(s.a, args.samples, args.seed)
    raise ConfigError(f"unknown check {name!r}")  # pragma: no cover - argparse restricts choices


def cmd_verify(args) -> int:
    report = _run_check(args)
    _emit(args, [report])
    return _finish([report])


def default_battery(seed: int) -> list:
    """``(name, thunk)`` pairs of the checks the suite always runs."""
    a1 = Anisotropy((1.0,))
    dom = Box([-1.0], [1.0])
    proto = GridFunction.zeros(dom, (4096,))
    F = BoxFamily.lattice_family(proto, a1)
    rng = np.random.default_rng(seed)
    f = proto.with_values(rng.normal(size=4096))
    g = proto.with_values(rng.normal(size=4096))
    w_half = parse_weight("powabs:0.5")
    small = GridFunction.zeros(Box([-4.0], [4.0]), (512,))
    F_small = BoxFamily.lattice_family(small, a1, stride=4, count=4)
    disc = V.Discretization("-4:4", [(4096,), (8192,)], a1)
    suite = ["ind(-1:1)", "powabs(-0.25)*ind(-1:1)", f"rand({seed})"]
    return [
        ("rho-equivalence", lambda: V.rho_equivalence_scan((1.0, 2.0), 2000, seed)),
        ("dilation-bound", lambda: V.check_dilation_bound(w_half, 2.0, F_small, [1.0, 2.0, 3.0], gf=small)),
        ("maximal-bound", lambda: V.check_maximal_bound(f, w_half, 2.0, F)),
        ("maximal-bound-p1", lambda: V.check_maximal_bound(f, parse_weight("powabs:-0.5"), 1.0, F)),
        ("jensen", lambda: V.check_ap_jensen(w_half, 2.0, F, proto)),
        ("chebyshev", lambda: V.check_chebyshev(f, w_half, 2.0)),
        ("sublinearity", lambda: V.check_sublinearity(f, g, a1)),
        ("mr-monotone", lambda: V.check_mr_monotone(f, [0.5, 1.0, 2.0, 3.0], a1)),
        ("reverse-doubling", lambda: V.check_reverse_doubling(parse_weight("powabs:-0.5"), F_small, small)),
        ("operator-norm", lambda: V.estimate_operator_norm("M", suite, w_half, MorreyParams(2.0, 0.5), disc)),
        ("weak-morrey", lambda: V.check_weak_morrey("ind(-1:1)", None, 0.5, disc)),
        ("fefferman-stein", lambda: V.fefferman_stein_constant("ind(-1:1)", "const(1)", disc)),
        ("morrey-not-lebesgue", lambda: V.morrey_not_lebesgue(-0.25, (4096, 8192, 16384))),
    ]


def cmd_suite(args) -> int:
    battery = default_battery(args.seed)
    reports = parallel_map(lambda item: item[1](), battery)
    criteria = run_criteria(range(1, 11), seed=args.seed)
    for r in reports:
        drift = "" if r.drift is None else f" drift={r.drift:.3g}"
        print(f"[{r.status}] {r.name}: constant={r.constant!r}{drift}")
    for c in criteria:
        print(c.line())
    extra = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "seed": args.seed,
        "acceptance": [c.to_dict() for c in criteria],
    }
    doc = {"config": _echo(args)}
    doc.update(extra)
    text = reports_to_json(reports, **doc)
    if args.json:
        atomic_write_text(args.json, text)
    if args.csv:
        atomic_write_text(args.csv, reports_to_csv(reports))
    code = _finish(reports)
    bad = [c for c in criteria if not c.passed]
    for c in bad:
        print(f"criterion {c.number} failed: {c.summary}", file=sys.stderr)
    return 1 if (code or bad) else 0


def cmd_plot(args) -> int:
    if bool(args.input) == bool(args.report):
        raise ConfigError("plot needs exactly one of --input or --report")
    if args.input:
        gf = read_grid(args.input)
        if gf.n != 1:
            raise ConfigError("only 1-D grids can be plotted")
        series = [(Path(args.input).name, gf.axis_centers(0), gf.values)]
        svg = line_plot(series, args.title, "x", "value", args.log_x, args.log_y)
    else:
        doc = json.loads(Path(args.report).read_text(encoding="utf-8"))
        checks = doc.get("checks", [doc])
        if args.check:
            checks = [c for c in checks if c.get("name") == args.check]
        checks = [c for c in checks if c.get("history")]
        if not checks:
            raise ConfigError("no report with a refinement history found")
        series = []
        for c in checks:
            cells = [float(np.prod(h["shape"])) for h in c["history"]]
            series.append((c["name"], cells, [float(h["constant"]) for h in c["history"]]))
        svg = line_plot(series, args.title or "refinement history", "cells", "constant", args.log_x, args.log_y)
    atomic_write_text(args.out, svg)
    print(f"wrote {args.out}")
    return 0


def _expand_config(argv):
    argv = list(argv)
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise ConfigError("--config needs a path")
    path = argv[i + 1]
    if not Path(path).is_file():
        raise ConfigError(f"config file {path!r} not found")
    # config values go right after the subcommand (and check name) so the
    # explicit flags that follow override them
    head = 2 if len(argv) > 1 and argv[0] == "verify" else 1
    return argv[:head] + read_config(path) + argv[head:]


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        thread_count()
        args = build_parser().parse_args(_glue_negative_values(_expand_config(argv)))
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

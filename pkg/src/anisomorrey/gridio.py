"""Grid files.

CSV: a header line ``# domain=lo1:hi1[,lo2:hi2...] shape=n1[,n2...]`` followed
by one value per line in row-major order. JSON: ``{"domain": [[lo, hi], ...],
"shape": [...], "values": [...]}`` with flat row-major values (nested lists
are accepted on read). Values are written with ``repr`` so they re-read
bit-identically.
"""
from __future__ import annotations

import json
import os
import re
import tempfile
from pathlib import Path

import numpy as np

from .grid import Box, GridFunction

__all__ = ["write_grid", "read_grid", "atomic_write_text", "format_header", "parse_header"]

_HEADER = re.compile(r"#\s*domain=(?P<domain>\S+)\s+shape=(?P<shape>\S+)")


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_header(gf: GridFunction) -> str:
    shape = ",".join(str(s) for s in gf.shape)
    return f"# domain={gf.domain} shape={shape}"


def parse_header(line: str):
    m = _HEADER.match(line.strip())
    if not m:
        raise ValueError(f"bad grid header: {line.strip()!r}")
    intervals = []
    for part in m.group("domain").split(","):
        lo, sep, hi = part.partition(":")
        if not sep:
            raise ValueError(f"bad domain interval {part!r}")
        intervals.append((float(lo), float(hi)))
    shape = tuple(int(s) for s in m.group("shape").split(","))
    return Box.from_intervals(intervals), shape


def _format(gf: GridFunction, fmt: str) -> str:
    flat = gf.values.ravel(order="C")
    if fmt == "csv":
        body = "\n".join(repr(float(v)) for v in flat)
        return f"{format_header(gf)}\n{body}\n"
    doc = {
        "domain": [[lo, hi] for lo, hi in zip(gf.domain.lo, gf.domain.hi)],
        "shape": list(gf.shape),
        "values": [float(v) for v in flat],
    }
    return json.dumps(doc) + "\n"


def _fmt_from_path(path, fmt):
    if fmt is not None:
        return fmt
    return "json" if str(path).lower().endswith(".json") else "csv"


def write_grid(gf: GridFunction, path, fmt: str | None = None) -> None:
    atomic_write_text(path, _format(gf, _fmt_from_path(path, fmt)))


def read_grid(path, fmt: str | None = None) -> GridFunction:
    fmt = _fmt_from_path(path, fmt)
    text = Path(path).read_text(encoding="utf-8")
    if fmt == "json":
        doc = json.loads(text)
        domain = Box.from_intervals(doc["domain"])
        shape = tuple(int(s) for s in doc["shape"])
        values = np.asarray(doc["values"], dtype=float).reshape(shape)
        return GridFunction(domain, values)
    lines = text.splitlines()
    if not lines:
        raise ValueError(f"{path}: empty grid file")
    domain, shape = parse_header(lines[0])
    vals = [float(v) for line in lines[1:] for v in line.split(",") if v.strip()]
    if len(vals) != int(np.prod(shape)):
        raise ValueError(f"{path}: expected {int(np.prod(shape))} values, found {len(vals)}")
    return GridFunction(domain, np.asarray(vals).reshape(shape))

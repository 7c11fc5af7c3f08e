"""Check reports and their JSON/CSV serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["CheckReport", "EXACT_PASS", "ESTIMATED", "FAILED", "to_jsonable", "reports_to_json", "reports_to_csv"]

EXACT_PASS = "exact-pass"
ESTIMATED = "estimated"
FAILED = "failed"


def to_jsonable(obj):
    """Convert numpy scalars/arrays and nested containers to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


@dataclass
class CheckReport:
    """Outcome of one verification check.

    ``status`` is ``exact-pass`` or ``failed`` for asserted inequalities and
    ``estimated`` for measured constants, which carry a refinement history.
    """

    name: str
    status: str
    constant: float | None = None
    witness: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    history: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in (EXACT_PASS, ESTIMATED, FAILED):
            raise ValueError(f"unknown status {self.status!r}")

    @property
    def passed(self) -> bool:
        return self.status != FAILED

    @property
    def drift(self) -> float | None:
        """Relative change of the constant between the last two refinement levels."""
        if len(self.history) < 2:
            return None
        prev, last = self.history[-2]["constant"], self.history[-1]["constant"]
        if prev == 0:
            return 0.0 if last == 0 else math.inf
        return abs(last - prev) / abs(prev)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "status": self.status,
            "constant": self.constant,
            "witness": self.witness,
            "config": self.config,
            "history": self.history,
            "details": self.details,
        }
        if self.history:
            d["drift"] = self.drift
        return to_jsonable(d)

    def summary_row(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "constant": "" if self.constant is None else repr(float(self.constant)),
            "drift": "" if self.drift is None else repr(float(self.drift)),
        }


def reports_to_json(reports, **extra) -> str:
    doc = dict(extra)
    doc["checks"] = [r.to_dict() for r in reports]
    return json.dumps(to_jsonable(doc), indent=2, sort_keys=True) + "\n"


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["name", "status", "constant", "drift"], lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.summary_row())
    return buf.getvalue()

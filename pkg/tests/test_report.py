import json
import math

import numpy as np
import pytest

from anisomorrey.report import ESTIMATED, EXACT_PASS, FAILED, CheckReport, reports_to_csv, reports_to_json, to_jsonable


def test_jsonable_conversion():
    doc = to_jsonable({"a": np.float64(1.5), "b": np.arange(3), "c": (np.bool_(True), math.inf, math.nan), 1: np.int32(4)})
    assert doc == {"a": 1.5, "b": [0, 1, 2], "c": [True, "inf", "nan"], "1": 4}
    json.dumps(doc)


def test_drift_and_status():
    r = CheckReport("x", ESTIMATED, 1.1, history=[{"constant": 1.0}, {"constant": 1.1}])
    assert r.drift == pytest.approx(0.1)
    assert r.passed
    assert CheckReport("y", EXACT_PASS).drift is None
    assert not CheckReport("z", FAILED).passed
    with pytest.raises(ValueError):
        CheckReport("w", "maybe")


def test_serialization_is_stable():
    reps = [CheckReport("a", EXACT_PASS, 0.5, {"cell": [1]}), CheckReport("b", ESTIMATED, 2.0, history=[{"constant": 2.0}, {"constant": 2.0}])]
    text = reports_to_json(reps, seed=7)
    assert text == reports_to_json(reps, seed=7)
    doc = json.loads(text)
    assert doc["seed"] == 7 and [c["name"] for c in doc["checks"]] == ["a", "b"]
    assert doc["checks"][1]["drift"] == 0.0
    rows = reports_to_csv(reps).splitlines()
    assert rows[0] == "name,status,constant,drift"
    assert rows[1].startswith("a,exact-pass,0.5")

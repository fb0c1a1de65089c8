import json
import math

import numpy as np

from brtree.records import csv_row, dumps, flatten, make_record, read_records


def test_dumps_is_canonical_and_handles_numpy():
    rec = make_record("x", {"b": 1, "a": np.int64(2)}, 5, ["t"], {"v": np.float64(0.5),
                                                               "arr": np.arange(3)})
    text = dumps(rec)
    assert text == dumps(json.loads(text))
    assert json.loads(text)["config"] == {"a": 2, "b": 1}


def test_non_finite_values_become_strings():
    out = json.loads(dumps({"x": math.inf, "y": [math.nan, 1.0]}))
    assert out == {"x": "inf", "y": ["nan", 1.0]}


def test_flatten_and_csv_row():
    flat = flatten({"a": {"b": 1, "c": [1, 2]}, "d": "s"})
    assert flat == {"a.b": 1, "a.c": "[1,2]", "d": "s"}
    row = csv_row(make_record("moments", {"n": 3}, None, ["p1", "p2"], {"mean": 1.5}))
    assert row["provenance"] == "p1;p2" and row["mean"] == 1.5


def test_read_records_skips_blank_lines():
    assert read_records('{"a":1}\n\n{"a":2}\n') == [{"a": 1}, {"a": 2}]

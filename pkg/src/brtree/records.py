"""Output records: a JSON envelope per record, with a flat CSV projection.

Every record carries the tool version, the fully resolved configuration, the seed and
the provenance tags of the formulas involved, so a record can be regenerated from
itself.  JSON is canonical (sorted keys, one record per line).  The CSV projection has
the fixed leading columns in ``CSV_HEAD`` followed by the flattened payload.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from . import __version__

SCHEMA = "brtree-record/1"
CSV_SCHEMA = "brtree-csv/1"
CSV_HEAD = ("csv_schema", "tool", "version", "command", "seed", "provenance", "config")


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _finite(obj):
    # JSON has no inf/nan; they are written as strings so parsers do not choke
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def make_record(command: str, config: dict, seed, provenance, payload: dict) -> dict:
    return {"schema": SCHEMA, "tool": "brtree", "version": __version__, "command": command,
            "config": config, "seed": seed, "provenance": list(provenance), "result": payload}


def dumps(obj) -> str:
    return json.dumps(_finite(json.loads(json.dumps(obj, default=_default))),
                      sort_keys=True, separators=(",", ":"), allow_nan=False)


def flatten(d: dict, prefix: str = "") -> dict:
    """Nested dicts become dotted keys; lists are kept as compact JSON strings."""
    out = {}
    for key, val in d.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(flatten(val, name + "."))
        elif isinstance(val, (list, tuple, np.ndarray)):
            out[name] = dumps(val)
        else:
            out[name] = val
    return out


def csv_row(record: dict) -> dict:
    row = {"csv_schema": CSV_SCHEMA, "tool": record["tool"], "version": record["version"],
           "command": record["command"], "seed": record["seed"],
           "provenance": ";".join(record["provenance"]), "config": dumps(record["config"])}
    row.update(flatten(record["result"]))
    return row


def write_records(records: list, fh, fmt: str = "json"):
    if fmt == "json":
        for rec in records:
            fh.write(dumps(rec) + "\n")
        return
    rows = [csv_row(r) for r in records]
    fields = list(CSV_HEAD)
    for row in rows:
        fields.extend(k for k in row if k not in fields)
    w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


def read_records(text: str) -> list:
    return [json.loads(line) for line in io.StringIO(text) if line.strip()]

"""Deterministic JSON and CSV output for verification reports.

JSON is canonical: sorted keys, floats written with 17 significant digits,
non-finite floats as the strings "Infinity", "-Infinity" and "NaN", complex
numbers as {"re": ..., "im": ...}.  No timestamps or host data are written,
so identical runs give identical bytes.
"""

import csv
import dataclasses
import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__

VERDICTS = ("pass", "fail", "inconclusive")


@dataclass
class Check:
    """One numerical comparison: ``value`` against ``tolerance``.

    ``passed`` is None when the check could not decide (inconclusive).
    ``comparison`` says which side of the tolerance passes.
    """

    name: str
    value: float
    tolerance: float
    passed: object
    comparison: str = "<"
    note: str = ""

    @property
    def verdict(self):
        if self.passed is None:
            return "inconclusive"
        return "pass" if self.passed else "fail"


def verdict_of(checks):
    """fail if any check fails, else inconclusive if any is undecided, else pass."""
    verdicts = [c.verdict if isinstance(c, Check) else c for c in checks]
    if "fail" in verdicts:
        return "fail"
    if "inconclusive" in verdicts:
        return "inconclusive"
    return "pass"


@dataclass
class Cell:
    """A named group of checks plus free-form data."""

    key: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def verdict(self):
        return verdict_of(self.checks)


@dataclass
class SuiteReport:
    suite: str
    config: dict = field(default_factory=dict)
    cells: list = field(default_factory=list)
    engine_version: str = __version__
    # (name, columns, rows) tables written next to the JSON; not part of it
    series: list = field(default_factory=list, repr=False)

    @property
    def verdict(self):
        return verdict_of([c.verdict for c in self.cells])

    def to_dict(self):
        return {
            "suite": self.suite,
            "engine_version": self.engine_version,
            "config": self.config,
            "cells": [_cell_dict(c) for c in self.cells],
            "verdict": self.verdict,
        }


def _cell_dict(cell):
    out = {}
    if dataclasses.is_dataclass(cell):
        out = {f.name: getattr(cell, f.name) for f in dataclasses.fields(cell)}
    elif isinstance(cell, dict):
        out = dict(cell)
    out["verdict"] = cell.verdict if hasattr(cell, "verdict") else verdict_of(out.get("checks", []))
    return out


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


class _Raw(str):
    """A pre-rendered JSON number."""


def to_jsonable(obj):
    """Recursively convert reports to plain JSON types (floats kept exact)."""
    if isinstance(obj, Check):
        d = {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        d["verdict"] = obj.verdict
        return d
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        d = {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        if hasattr(obj, "verdict"):
            d["verdict"] = obj.verdict
        return d
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, enum.Enum):
        return to_jsonable(obj.value)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _render(obj, out):
    if isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(k))
            out.append(":")
            _render(obj[k], out)
        out.append("}")
    elif isinstance(obj, list):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _render(v, out)
        out.append("]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, float):
        s = format_float(obj)
        out.append(s if math.isfinite(obj) else json.dumps(s))
    elif isinstance(obj, int):
        out.append(str(obj))
    else:
        out.append(json.dumps(obj))


def dumps(obj):
    """Canonical JSON text (no whitespace, trailing newline)."""
    if isinstance(obj, SuiteReport):
        obj = obj.to_dict()
    out = []
    _render(to_jsonable(obj), out)
    return "".join(out) + "\n"


def write_json(report, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(report))


def _decode_special(value):
    if isinstance(value, dict):
        return {k: _decode_special(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode_special(v) for v in value]
    if value in ("Infinity", "-Infinity", "NaN"):
        return float(value.replace("Infinity", "inf"))
    return value


def read_json(path):
    """Parse a report; the non-finite float markers come back as floats."""
    with open(path, encoding="utf-8") as fh:
        return _decode_special(json.load(fh))


def write_csv_series(name, columns, rows, path):
    """Header plus rectangular rows, LF line endings, floats with 17 digits.

    ``name`` is not written into the file (keeps it a plain RFC 4180 table);
    it appears in error messages only.
    """
    columns = list(columns)
    rows = [list(r) for r in rows]
    for i, r in enumerate(rows):
        if len(r) != len(columns):
            raise ValueError(f"series {name!r}: row {i} has {len(r)} fields, expected {len(columns)}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in r])


def read_csv_series(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]

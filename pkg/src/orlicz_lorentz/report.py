"""Check reports and deterministic serialization."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

CSV_COLUMNS = ("suite", "trial", "seed", "lhs", "rhs", "verdict")


def fmt_float(x: float) -> str:
    """17 significant digits; ``inf`` and ``nan`` as bare tokens."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x != x:
        return "nan"
    s = format(x, ".17g")
    # keep a float marker so integral values read back as floats
    return s if any(ch in s for ch in ".en") else s + ".0"


def _encode(obj: Any, out: list) -> None:
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        s = fmt_float(obj)
        out.append(s if math.isfinite(obj) else json.dumps(s))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)) + ": ")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    elif hasattr(obj, "item"):  # numpy scalars
        _encode(obj.item(), out)
    elif hasattr(obj, "numerator"):  # Fraction
        _encode(float(obj), out)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """JSON text with every float written to 17 significant digits."""
    out: list = []
    _encode(obj, out)
    return "".join(out)


def digest(obj: Any) -> str:
    return hashlib.sha256(dumps(obj).encode()).hexdigest()[:16]


@dataclass
class TrialRow:
    suite: str
    trial: int
    seed: int
    lhs: float
    rhs: float
    verdict: bool
    inputs: str = ""
    note: str = ""

    def csv_cells(self) -> list:
        return [self.suite, str(self.trial), str(self.seed), fmt_float(float(self.lhs)),
                fmt_float(float(self.rhs)), "pass" if self.verdict else "fail"]


@dataclass
class CheckReport:
    suite: str
    trials: int
    seed: int
    tol: float
    rows: list = field(default_factory=list)
    wall_time: float | None = None
    config: dict = field(default_factory=dict)

    @property
    def failures(self) -> list:
        return [r for r in self.rows if not r.verdict]

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self, timestamps: bool = True) -> dict:
        out = {
            "suite": self.suite,
            "trials": self.trials,
            "rows": len(self.rows),
            "seed": self.seed,
            "tol": self.tol,
            "passed": self.ok,
            "failures": [
                {"trial": r.trial, "seed": r.seed, "check": r.suite, "inputs": r.inputs,
                 "lhs": r.lhs, "rhs": r.rhs, "note": r.note}
                for r in self.failures
            ],
            # thread count is a runtime detail, like the wall time
            "config": {k: v for k, v in self.config.items() if timestamps or k != "threads"},
        }
        if timestamps and self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return out

    def to_json(self, timestamps: bool = True, with_rows: bool = True) -> dict:
        out = self.summary(timestamps)
        if with_rows:
            out["trial_rows"] = [
                {"suite": r.suite, "trial": r.trial, "seed": r.seed, "lhs": r.lhs,
                 "rhs": r.rhs, "verdict": "pass" if r.verdict else "fail"}
                for r in self.rows
            ]
        return out


def rows_to_csv(rows, header: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(r.csv_cells())
    return buf.getvalue()

"""Report rows and their CSV/JSON serialisation.

CSV header (fixed)::

    experiment,quantity,params,estimate,stdErr,reference,gate,passed

``params`` is ``name=value`` pairs joined by ``;`` in insertion order.  Empty
``reference``/``gate``/``passed`` cells mean the row is informational.  Floats
are written with 17 significant digits so a CSV or JSON report reads back to
the exact doubles.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .stats import Estimate

HEADER = ("experiment", "quantity", "params", "estimate", "stdErr", "reference", "gate", "passed")

# gate name -> predicate(estimate, reference, row)
GATES = {
    "3sigma": lambda est, ref, row: row.sigma_ok(ref),
    "exact": lambda est, ref, row: est == ref,
    "abs": lambda est, ref, row: abs(est - ref) <= row.tol,
    "rel": lambda est, ref, row: abs(est - ref) <= row.tol * abs(ref),
    "lt": lambda est, ref, row: est < ref,
    "le": lambda est, ref, row: est <= ref,
    "gt": lambda est, ref, row: est > ref,
    "ge": lambda est, ref, row: est >= ref,
}


class EmptyReportError(ValueError):
    pass


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


@dataclass
class ReportRow:
    experiment: str
    quantity: str
    params: dict
    estimate: float
    stderr: float = 0.0
    reference: float | None = None
    gate: str | None = None
    tol: float = 0.0
    count: int = 0
    passed: bool | None = field(default=None, init=False)

    def __post_init__(self):
        if not self.stderr >= 0:
            raise ValueError("standard error must be nonnegative")
        if self.gate is not None and self.reference is None:
            raise ValueError("a gated row needs a reference")
        if self.gate is not None:
            if self.gate not in GATES:
                raise ValueError(f"unknown gate {self.gate!r}")
            self.passed = bool(GATES[self.gate](self.estimate, self.reference, self))

    @classmethod
    def from_estimate(cls, experiment: str, quantity: str, params: dict, est: Estimate,
                      reference: float | None = None, gate: str | None = "3sigma",
                      tol: float = 0.0) -> "ReportRow":
        return cls(experiment, quantity, dict(params), float(est.value), float(est.stderr),
                   None if reference is None else float(reference),
                   gate if reference is not None else None, tol, est.count)

    def sigma_ok(self, reference: float, k: float = 3.0) -> bool:
        if self.count <= 0:
            raise ValueError("3-sigma gate needs a trial count")
        return Estimate(self.estimate, self.stderr, self.count).within(reference, k)

    @property
    def gate_label(self) -> str | None:
        if self.gate in ("abs", "rel"):
            return f"{self.gate}<={float(self.tol)!r}"
        return self.gate

    def params_text(self) -> str:
        return ";".join(f"{k}={fmt(v)}" for k, v in self.params.items())

    def record(self) -> dict:
        return {
            "experiment": self.experiment,
            "quantity": self.quantity,
            "params": dict(self.params),
            "estimate": self.estimate,
            "stdErr": self.stderr,
            "reference": self.reference,
            "gate": self.gate_label,
            "passed": self.passed,
        }


def all_passed(rows) -> bool:
    return all(r.passed is not False for r in rows)


def _json_value(v) -> str:
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt(v) if math.isfinite(v) else "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return json.dumps(str(v))


def render(rows, format: str = "csv") -> str:
    rows = list(rows)
    if not rows:
        raise EmptyReportError("no report rows to emit")
    if format == "json":
        return "[\n" + ",\n".join("  " + _json_value(r.record()) for r in rows) + "\n]\n"
    if format != "csv":
        raise ValueError(f"unknown format {format!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        w.writerow([r.experiment, r.quantity, r.params_text(), fmt(r.estimate), fmt(r.stderr),
                    fmt(r.reference), r.gate_label or "", fmt(r.passed)])
    return buf.getvalue()


def emit_report(rows, format: str = "csv", path: str | Path | None = None) -> str:
    """Serialise rows; write them to ``path`` when given.  Returns the text."""
    text = render(rows, format)
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv_report(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


# -- plain tables ----------------------------------------------------------

def table_csv(columns, rows) -> str:
    """CSV for an arbitrary table with the same float formatting."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        vals = [r[c] for c in columns] if isinstance(r, dict) else list(r)
        w.writerow([fmt(v) for v in vals])
    return buf.getvalue()


def trial_records_csv(records) -> str:
    return table_csv(("trialIndex", "bobErrors", "eveErrors", "verdict"),
                     [rec.csv_row() for rec in records])


def phase_distribution_csv(dist) -> str:
    return table_csv(("theta", "density"), dist.rows())


CPPM_SWEEP_COLUMNS = ("m", "S", "eta", "receiver", "blockError", "stdErr")


def cppm_sweep_csv(points) -> str:
    """``points``: dicts with the keys of :data:`CPPM_SWEEP_COLUMNS`."""
    return table_csv(CPPM_SWEEP_COLUMNS, points)


def ber_sweep_csv(axis: str, points) -> str:
    """BER-vs-``axis`` table; ``points`` are ``(x, Estimate, reference-or-None)``."""
    return table_csv((axis, "ber", "stdErr", "reference"),
                     [(x, e.value, e.stderr, ref) for x, e, ref in points])

"""Check records and run reports."""

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Record", "Report", "bound_record", "order_record"]


def _plain(value):
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


@dataclass
class Record:
    """One named check: measured value against a tolerance or an expected order.

    Composite checks carry their pieces in ``parts`` and pass iff all do.
    """

    name: str
    value: object
    passed: bool
    tolerance: float | None = None
    expected_order: float | None = None
    note: str | None = None
    parts: list = field(default_factory=list)

    def to_dict(self):
        out = {"name": self.name, "value": _plain(self.value), "passed": bool(self.passed)}
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        if self.expected_order is not None:
            out["expected_order"] = self.expected_order
        if self.note:
            out["note"] = self.note
        if self.parts:
            out["parts"] = [p.to_dict() for p in self.parts]
        return out

    def summary(self):
        bound = ""
        if self.tolerance is not None:
            bound = f" (tol {self.tolerance:g})"
        elif self.expected_order is not None:
            bound = f" (order >= {self.expected_order:g})"
        value = self.value
        shown = f"{value:.3e}" if isinstance(value, float) else str(value)
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {shown}{bound}"


def bound_record(name, value, tolerance, note=None):
    value = float(value)
    return Record(name, value, bool(value <= tolerance), tolerance=tolerance, note=note)


def order_record(name, study, min_order):
    """Record for a :class:`~kwtorus.convergence.ConvergenceResult`.

    A study that sits at the machine floor is an exact identity and passes.
    """
    if study.status == "floor reached":
        passed, note = True, "floor reached (exact on the grid)"
    else:
        passed = study.status == "ok" and study.order >= min_order
        note = study.status
    rec = Record(name, study.order, passed, expected_order=min_order, note=note)
    rec.parts = [
        Record(f"{name}[n={n}]", float(d), True) for n, d in zip(study.sizes, study.defects)
    ]
    return rec


@dataclass
class Report:
    scenario: str
    environment: dict
    records: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    def add(self, record):
        self.records.append(record)
        return record

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "passed": self.passed,
            "environment": self.environment,
            "records": [r.to_dict() for r in self.records],
        }

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=False)
            fh.write("\n")

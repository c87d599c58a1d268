"""Suite reports, their reduction from per-sample records, and JSON/CSV output."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

REL_TOL = 1e-9

CSV_CORE = ["suite", "n", "k", "delta", "mu", "gamma_k", "branch", "samples", "violations",
            "worst_margin", "seed"]
CSV_LEDGER = ["C4", "C6", "C7", "C8", "C9", "C12", "mu_k", "gamma_k_uniform", "C10", "C11",
              "delta0", "delta1", "d", "delta_within_proven_range"]


@dataclass(frozen=True)
class Record:
    """One inequality ``lhs <= rhs`` at one sample; violated when ``lhs - rhs > tol``."""

    check: str
    lhs: float
    rhs: float
    tol: float | None = None

    @property
    def margin(self) -> float:
        return float(self.lhs) - float(self.rhs)

    @property
    def tolerance(self) -> float:
        if self.tol is not None:
            return self.tol
        return REL_TOL * max(1.0, abs(self.lhs), abs(self.rhs))

    @property
    def violated(self) -> bool:
        m = self.margin
        return m == math.inf or not m <= self.tolerance


@dataclass
class CheckStats:
    samples: int = 0
    violations: int = 0
    worst_margin: float | None = None

    def add(self, rec: Record) -> None:
        self.samples += 1
        self.violations += int(rec.violated)
        m = rec.margin
        if math.isnan(m):
            m = math.inf
        if self.worst_margin is None or m > self.worst_margin:
            self.worst_margin = m

    def to_dict(self) -> dict:
        return {"samples": self.samples, "violations": self.violations, "worst_margin": self.worst_margin}


@dataclass
class VerificationReport:
    suite: str
    params: dict
    seed: int
    samples: int
    ledger: dict | None = None
    checks: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    wall_ms: float | None = None

    @property
    def violations(self) -> int:
        return sum(c.violations for c in self.checks.values())

    @property
    def worst_margin(self) -> float | None:
        margins = [c.worst_margin for c in self.checks.values() if c.worst_margin is not None]
        return max(margins) if margins else None

    def add_records(self, records) -> None:
        for rec in records:
            self.checks.setdefault(rec.check, CheckStats()).add(rec)

    def to_dict(self) -> dict:
        out = {
            "suite": self.suite,
            "params": self.params,
            "ledger": self.ledger,
            "samples": self.samples,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "seed": self.seed,
            "checks": {name: c.to_dict() for name, c in self.checks.items()},
        }
        if self.extra:
            out["extra"] = self.extra
        if self.wall_ms is not None:
            out["wall_ms"] = self.wall_ms
        return out

    def to_json(self) -> str:
        return json.dumps(_finite(self.to_dict()), indent=2, allow_nan=False)

    def csv_row(self) -> dict:
        row = {key: self.params.get(key) for key in CSV_CORE}
        row.update(suite=self.suite, samples=self.samples, violations=self.violations,
                   worst_margin=self.worst_margin, seed=self.seed)
        for key in CSV_LEDGER:
            row[key] = (self.ledger or {}).get(key)
        return row


def _finite(x):
    """Non-finite floats become their repr strings so the output stays valid JSON."""
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = CSV_CORE + CSV_LEDGER
    writer.writerow(header)
    for rep in reports:
        row = rep.csv_row()
        writer.writerow([_cell(row.get(key)) for key in header])
    return buf.getvalue()


def reports_to_json(reports) -> str:
    return json.dumps([_finite(r.to_dict()) for r in reports], indent=2, allow_nan=False)
